#pragma once
// Pluggable token counting. The BPE backend loads a tiktoken-format rank
// table from disk; when no table is available the word-chunk approximation
// stands in and is flagged as a fallback in all output metadata.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace silicon {

class TokenizerBackend {
public:
    virtual ~TokenizerBackend() = default;

    virtual std::string name() const = 0;      // "bpe" or "approx"
    virtual std::string encoding() const = 0;  // encoding id it serves

    // Upper bound on extra tokens a concatenation boundary may introduce:
    // count(a + b) <= count(a) + count(b) + boundary_slack().
    virtual int boundary_slack() const = 0;

    virtual std::size_t count_tokens(std::string_view text) const = 0;
};

// Word-chunk approximation: a run of letters/digits/UTF-8 continuation
// bytes costs ceil(len/4) tokens, every other non-whitespace byte costs
// one, whitespace costs nothing. Deterministic and monotone under block
// insertion; boundary slack is 0.
std::unique_ptr<TokenizerBackend> make_approx_tokenizer(
    std::string encoding_label);

// Byte-level BPE over a tiktoken-format table ("<base64 bytes> <rank>" per
// line). Text is pre-split into letter/digit/space/punctuation runs, then
// pairs merge lowest rank first within each run. Throws ConfigError when
// the table cannot be read.
std::unique_ptr<TokenizerBackend> make_bpe_tokenizer(
    const std::filesystem::path& table_path, std::string encoding_label);

struct TokenizerChoice {
    std::shared_ptr<TokenizerBackend> backend;
    bool is_fallback = false;  // approx standing in for a BPE encoding
};

// "approx" always resolves to the approximation. "o200k_base" (or any other
// BPE id) uses the table at table_path when given; without a table,
// "o200k_base" falls back to approx with is_fallback set, and any other id
// is a ConfigError.
TokenizerChoice resolve_tokenizer(
    const std::string& encoding_id,
    const std::optional<std::filesystem::path>& table_path);

std::size_t count_tokens(std::string_view text, const TokenizerBackend& backend);

}  // namespace silicon
