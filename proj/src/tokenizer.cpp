#include "silicon/tokenizer.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "silicon/errors.hpp"

namespace silicon {

namespace {

enum class ByteClass { space, word, punct };

ByteClass classify(unsigned char c) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
        c == '\v') {
        return ByteClass::space;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
        (c >= '0' && c <= '9') || c >= 0x80) {
        return ByteClass::word;
    }
    return ByteClass::punct;
}

// Splits text into maximal runs of one byte class. Shared by both backends
// so counts never depend on anything but the text itself.
std::vector<std::string_view> split_runs(std::string_view text) {
    std::vector<std::string_view> runs;
    std::size_t start = 0;
    while (start < text.size()) {
        const ByteClass cls = classify(static_cast<unsigned char>(text[start]));
        std::size_t end = start + 1;
        while (end < text.size() &&
               classify(static_cast<unsigned char>(text[end])) == cls) {
            ++end;
        }
        runs.push_back(text.substr(start, end - start));
        start = end;
    }
    return runs;
}

class ApproxTokenizer final : public TokenizerBackend {
public:
    explicit ApproxTokenizer(std::string label) : label_(std::move(label)) {}

    std::string name() const override { return "approx"; }
    std::string encoding() const override { return label_; }
    int boundary_slack() const override { return 0; }

    std::size_t count_tokens(std::string_view text) const override {
        std::size_t count = 0;
        for (auto run : split_runs(text)) {
            switch (classify(static_cast<unsigned char>(run.front()))) {
                case ByteClass::space:
                    break;
                case ByteClass::word:
                    count += (run.size() + 3) / 4;
                    break;
                case ByteClass::punct:
                    count += run.size();
                    break;
            }
        }
        return count;
    }

private:
    std::string label_;
};

int base64_value(unsigned char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}

std::string base64_decode(std::string_view in) {
    std::string out;
    int buffer = 0;
    int bits = 0;
    for (unsigned char c : in) {
        if (c == '=') break;
        const int v = base64_value(c);
        if (v < 0) throw ConfigError("invalid base64 in BPE table");
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((buffer >> bits) & 0xff));
        }
    }
    return out;
}

class BpeTokenizer final : public TokenizerBackend {
public:
    BpeTokenizer(const std::filesystem::path& table_path, std::string label)
        : label_(std::move(label)) {
        std::ifstream in(table_path);
        if (!in) {
            throw ConfigError("BPE table not readable: " + table_path.string());
        }
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto sep = line.find(' ');
            if (sep == std::string::npos) {
                throw ConfigError("BPE table line without rank: " + line);
            }
            const std::string token = base64_decode(
                std::string_view(line).substr(0, sep));
            const std::uint64_t rank = std::stoull(line.substr(sep + 1));
            ranks_.emplace(token, rank);
        }
        if (ranks_.empty()) {
            throw ConfigError("BPE table is empty: " + table_path.string());
        }
    }

    std::string name() const override { return "bpe"; }
    std::string encoding() const override { return label_; }
    int boundary_slack() const override { return 2; }

    std::size_t count_tokens(std::string_view text) const override {
        std::size_t count = 0;
        for (auto run : split_runs(text)) {
            count += encode_piece(run);
        }
        return count;
    }

private:
    std::size_t encode_piece(std::string_view piece) const {
        if (piece.empty()) return 0;
        if (ranks_.count(std::string(piece))) return 1;

        // Start from single bytes; repeatedly merge the adjacent pair with
        // the lowest rank, the standard BPE procedure.
        std::vector<std::string> parts;
        parts.reserve(piece.size());
        for (char c : piece) parts.emplace_back(1, c);

        while (parts.size() > 1) {
            std::uint64_t best_rank = std::numeric_limits<std::uint64_t>::max();
            std::size_t best_index = 0;
            for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
                auto it = ranks_.find(parts[i] + parts[i + 1]);
                if (it != ranks_.end() && it->second < best_rank) {
                    best_rank = it->second;
                    best_index = i;
                }
            }
            if (best_rank == std::numeric_limits<std::uint64_t>::max()) break;
            parts[best_index] += parts[best_index + 1];
            parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(best_index) + 1);
        }
        return parts.size();
    }

    std::string label_;
    std::map<std::string, std::uint64_t> ranks_;
};

}  // namespace

std::unique_ptr<TokenizerBackend> make_approx_tokenizer(
    std::string encoding_label) {
    return std::make_unique<ApproxTokenizer>(std::move(encoding_label));
}

std::unique_ptr<TokenizerBackend> make_bpe_tokenizer(
    const std::filesystem::path& table_path, std::string encoding_label) {
    return std::make_unique<BpeTokenizer>(table_path, std::move(encoding_label));
}

TokenizerChoice resolve_tokenizer(
    const std::string& encoding_id,
    const std::optional<std::filesystem::path>& table_path) {
    if (encoding_id == "approx") {
        return {make_approx_tokenizer("approx"), false};
    }
    if (table_path) {
        return {make_bpe_tokenizer(*table_path, encoding_id), false};
    }
    if (encoding_id == "o200k_base") {
        return {make_approx_tokenizer(encoding_id), true};
    }
    throw ConfigError("unknown encoding id '" + encoding_id +
                      "' and no BPE table configured");
}

std::size_t count_tokens(std::string_view text,
                         const TokenizerBackend& backend) {
    return backend.count_tokens(text);
}

}  // namespace silicon
