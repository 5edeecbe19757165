#include "silicon/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "silicon/errors.hpp"
#include "silicon/hash.hpp"
#include "silicon/prompt.hpp"

namespace silicon {

using nlohmann::json;

std::string to_string(ProviderKind k) {
    switch (k) {
        case ProviderKind::gpt: return "gpt";
        case ProviderKind::claude: return "claude";
        case ProviderKind::gemini: return "gemini";
        case ProviderKind::mock: return "mock";
    }
    return "mock";
}

ProviderKind provider_kind_from_string(const std::string& s) {
    if (s == "gpt") return ProviderKind::gpt;
    if (s == "claude") return ProviderKind::claude;
    if (s == "gemini") return ProviderKind::gemini;
    if (s == "mock") return ProviderKind::mock;
    throw ConfigError("unknown provider kind '" + s + "'");
}

std::string to_string(CompletionErrorKind k) {
    switch (k) {
        case CompletionErrorKind::auth: return "auth";
        case CompletionErrorKind::transport: return "transport";
        case CompletionErrorKind::context_length: return "context_length";
        case CompletionErrorKind::bad_request: return "bad_request";
        case CompletionErrorKind::config: return "config";
    }
    return "transport";
}

std::string to_string(RatingsFailure f) {
    switch (f) {
        case RatingsFailure::unparseable: return "unparseable";
        case RatingsFailure::wrong_count: return "wrong_count";
        case RatingsFailure::out_of_range: return "out_of_range";
    }
    return "unparseable";
}

ValidationReport validate_providers(const std::vector<ProviderSpec>& specs) {
    ValidationReport report;
    std::vector<std::string> seen;
    for (const auto& spec : specs) {
        const std::string loc = "provider " + spec.chatbot;
        if (spec.chatbot.empty()) report.add(loc, "empty chatbot label");
        if (std::find(seen.begin(), seen.end(), spec.chatbot) != seen.end()) {
            report.add(loc, "duplicate chatbot label");
        }
        seen.push_back(spec.chatbot);
        if (spec.rate_limit_per_min <= 0) {
            report.add(loc, "rate_limit_per_min must be positive");
        }
        if (spec.max_retries < 0) {
            report.add(loc, "max_retries must be non-negative");
        }
        if (spec.kind != ProviderKind::mock) {
            if (spec.endpoint_url.empty()) report.add(loc, "missing endpoint_url");
            if (spec.auth_env_var.empty()) report.add(loc, "missing auth_env_var");
            if (spec.model_name.empty()) report.add(loc, "missing model_name");
        }
    }
    return report;
}

std::vector<ProviderSpec> load_providers(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("providers file not readable: " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("providers file " + path.string() +
                          " is not valid JSON: " + e.what());
    }
    std::vector<ProviderSpec> specs;
    try {
        for (const auto& j : doc.at("providers")) {
            ProviderSpec spec;
            spec.kind = provider_kind_from_string(j.at("kind").get<std::string>());
            spec.chatbot = j.value("chatbot", to_string(spec.kind));
            spec.model_name = j.value("model", "");
            spec.endpoint_url = j.value("endpoint", "");
            spec.auth_env_var = j.value("auth_env", "");
            spec.rate_limit_per_min = j.value("rate_limit_per_min", 60);
            spec.max_retries = j.value("max_retries", 2);
            specs.push_back(std::move(spec));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("providers file " + path.string() +
                          " is malformed: " + e.what());
    }
    return specs;
}

const ProviderSpec* find_provider(const std::vector<ProviderSpec>& specs,
                                  const std::string& chatbot) {
    for (const auto& spec : specs) {
        if (spec.chatbot == chatbot) return &spec;
    }
    return nullptr;
}

// ---- clock and rate limiting ----

namespace {

class SystemClock final : public Clock {
public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
    void sleep_ms(std::int64_t ms) override {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
};

}  // namespace

std::shared_ptr<Clock> make_system_clock() {
    return std::make_shared<SystemClock>();
}

RateLimiter::RateLimiter(int per_minute, std::shared_ptr<Clock> clock)
    : per_minute_(per_minute), clock_(std::move(clock)) {}

void RateLimiter::acquire() {
    std::unique_lock lock(mutex_);
    for (;;) {
        const std::int64_t now = clock_->now_ms();
        while (!recent_.empty() && recent_.front() <= now - 60000) {
            recent_.pop_front();
        }
        if (static_cast<int>(recent_.size()) < per_minute_) {
            recent_.push_back(now);
            return;
        }
        const std::int64_t wait = recent_.front() + 60000 - now;
        lock.unlock();
        clock_->sleep_ms(std::max<std::int64_t>(1, wait));
        lock.lock();
    }
}

// ---- wire adapters ----

WireRequest build_wire_request(const ProviderSpec& spec,
                               const CompletionRequest& request,
                               const std::string& api_key) {
    WireRequest wire;
    wire.url = spec.endpoint_url;
    switch (spec.kind) {
        case ProviderKind::gpt: {
            wire.headers = {{"Authorization", "Bearer " + api_key},
                            {"Content-Type", "application/json"}};
            json body = {
                {"model", spec.model_name},
                {"messages",
                 json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
                {"temperature", request.temperature},
                {"max_tokens", request.max_output_tokens},
            };
            if (request.seed) body["seed"] = *request.seed;
            wire.body = body.dump();
            break;
        }
        case ProviderKind::claude: {
            wire.headers = {{"x-api-key", api_key},
                            {"anthropic-version", "2023-06-01"},
                            {"Content-Type", "application/json"}};
            const json body = {
                {"model", spec.model_name},
                {"max_tokens", request.max_output_tokens},
                {"temperature", request.temperature},
                {"messages",
                 json::array({{{"role", "user"}, {"content", request.prompt_text}}})},
            };
            wire.body = body.dump();
            break;
        }
        case ProviderKind::gemini: {
            wire.headers = {{"x-goog-api-key", api_key},
                            {"Content-Type", "application/json"}};
            json generation_config = {
                {"temperature", request.temperature},
                {"maxOutputTokens", request.max_output_tokens},
            };
            if (request.seed) generation_config["seed"] = *request.seed;
            const json body = {
                {"contents",
                 json::array({{{"parts",
                                json::array({{{"text", request.prompt_text}}})}}})},
                {"generationConfig", generation_config},
            };
            wire.body = body.dump();
            break;
        }
        case ProviderKind::mock:
            throw ConfigError("mock provider has no wire format");
    }
    return wire;
}

namespace {

bool contains_insensitive(const std::string& haystack, const std::string& needle) {
    auto it = std::search(haystack.begin(), haystack.end(), needle.begin(),
                          needle.end(), [](char a, char b) {
                              return std::tolower(static_cast<unsigned char>(a)) ==
                                     std::tolower(static_cast<unsigned char>(b));
                          });
    return it != haystack.end();
}

bool looks_like_context_overflow(const std::string& body) {
    for (const char* marker :
         {"context_length_exceeded", "context length", "maximum context",
          "too many tokens", "input is too long", "exceeds the maximum"}) {
        if (contains_insensitive(body, marker)) return true;
    }
    return false;
}

std::string error_message_from_body(const std::string& body) {
    const json doc = json::parse(body, nullptr, false);
    if (!doc.is_discarded() && doc.contains("error")) {
        const auto& err = doc["error"];
        if (err.is_object() && err.contains("message") &&
            err["message"].is_string()) {
            return err["message"].get<std::string>();
        }
        if (err.is_string()) return err.get<std::string>();
    }
    return body.substr(0, 200);
}

CompletionError classify_http_error(int status, const std::string& body) {
    const std::string message =
        "HTTP " + std::to_string(status) + ": " + error_message_from_body(body);
    if (status == 401 || status == 403) {
        return {CompletionErrorKind::auth, message};
    }
    if (status == 408 || status == 429 || status >= 500) {
        return {CompletionErrorKind::transport, message};
    }
    if (looks_like_context_overflow(body)) {
        return {CompletionErrorKind::context_length, message};
    }
    return {CompletionErrorKind::bad_request, message};
}

}  // namespace

CompletionOutcome parse_wire_response(ProviderKind kind,
                                      const HttpResponse& response) {
    CompletionOutcome outcome;
    if (response.status != 200) {
        outcome.error = classify_http_error(response.status, response.body);
        return outcome;
    }
    const json doc = json::parse(response.body, nullptr, false);
    if (doc.is_discarded()) {
        outcome.error = {CompletionErrorKind::bad_request,
                         "response body is not valid JSON"};
        return outcome;
    }
    CompletionResult result;
    try {
        switch (kind) {
            case ProviderKind::gpt:
                result.raw_text = doc.at("choices").at(0).at("message")
                                      .at("content").get<std::string>();
                if (doc.contains("usage")) {
                    result.prompt_tokens = doc["usage"].value("prompt_tokens", 0);
                    result.output_tokens =
                        doc["usage"].value("completion_tokens", 0);
                }
                break;
            case ProviderKind::claude:
                result.raw_text = doc.at("content").at(0).at("text")
                                      .get<std::string>();
                if (doc.contains("usage")) {
                    result.prompt_tokens = doc["usage"].value("input_tokens", 0);
                    result.output_tokens = doc["usage"].value("output_tokens", 0);
                }
                break;
            case ProviderKind::gemini:
                result.raw_text = doc.at("candidates").at(0).at("content")
                                      .at("parts").at(0).at("text")
                                      .get<std::string>();
                if (doc.contains("usageMetadata")) {
                    result.prompt_tokens =
                        doc["usageMetadata"].value("promptTokenCount", 0);
                    result.output_tokens =
                        doc["usageMetadata"].value("candidatesTokenCount", 0);
                }
                break;
            case ProviderKind::mock:
                outcome.error = {CompletionErrorKind::config,
                                 "mock provider has no wire format"};
                return outcome;
        }
    } catch (const std::exception& e) {
        outcome.error = {CompletionErrorKind::bad_request,
                         std::string("unexpected response shape: ") + e.what()};
        return outcome;
    }
    if (doc.contains("model") && doc["model"].is_string()) {
        result.provider_metadata.emplace_back("model",
                                              doc["model"].get<std::string>());
    }
    outcome.result = std::move(result);
    return outcome;
}

// ---- HTTP transport ----

namespace {

class HttplibTransport final : public HttpTransport {
public:
    std::optional<HttpResponse> post(
        const std::string& url,
        const std::vector<std::pair<std::string, std::string>>& headers,
        const std::string& json_body) override {
        const auto scheme_end = url.find("://");
        if (scheme_end == std::string::npos) return std::nullopt;
        const auto path_start = url.find('/', scheme_end + 3);
        const std::string origin =
            path_start == std::string::npos ? url : url.substr(0, path_start);
        const std::string path =
            path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(origin);
        client.set_connection_timeout(30, 0);
        client.set_read_timeout(180, 0);

        httplib::Headers wire_headers;
        std::string content_type = "application/json";
        for (const auto& [key, value] : headers) {
            std::string lower = key;
            std::transform(lower.begin(), lower.end(), lower.begin(),
                           [](unsigned char c) { return std::tolower(c); });
            if (lower == "content-type") {
                content_type = value;
            } else {
                wire_headers.emplace(key, value);
            }
        }
        const auto res = client.Post(path, wire_headers, json_body, content_type);
        if (!res) return std::nullopt;
        return HttpResponse{res->status, res->body};
    }
};

}  // namespace

std::unique_ptr<HttpTransport> make_httplib_transport() {
    return std::make_unique<HttplibTransport>();
}

// ---- ratings extraction ----

namespace {

struct RatingCandidate {
    int item_id = 0;
    long value = 0;
};

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses "<ws><digits><ws>:<ws>[-]<digits><ws>" covering the whole line.
std::optional<RatingCandidate> parse_strict_line(std::string_view line) {
    std::size_t i = 0;
    auto skip_ws = [&] {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                   line[i] == '\r')) {
            ++i;
        }
    };
    auto read_number = [&](bool allow_sign) -> std::optional<long> {
        bool negative = false;
        if (allow_sign && i < line.size() && line[i] == '-') {
            negative = true;
            ++i;
        }
        const std::size_t start = i;
        long v = 0;
        while (i < line.size() && is_digit(line[i]) && i - start < 9) {
            v = v * 10 + (line[i] - '0');
            ++i;
        }
        if (i == start) return std::nullopt;
        return negative ? -v : v;
    };

    skip_ws();
    const auto id = read_number(false);
    if (!id) return std::nullopt;
    skip_ws();
    if (i >= line.size() || line[i] != ':') return std::nullopt;
    ++i;
    skip_ws();
    const auto value = read_number(true);
    if (!value) return std::nullopt;
    skip_ws();
    if (i != line.size()) return std::nullopt;
    return RatingCandidate{static_cast<int>(*id), *value};
}

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        if (end == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

std::vector<RatingCandidate> strict_candidates(std::string_view text) {
    // Restrict to the marked block when both markers are present.
    const auto begin = text.find("BEGIN RATINGS");
    if (begin != std::string_view::npos) {
        const auto end = text.find("END RATINGS", begin);
        if (end != std::string_view::npos) {
            text = text.substr(begin, end - begin);
        }
    }
    std::vector<RatingCandidate> out;
    for (auto line : split_lines(text)) {
        if (auto candidate = parse_strict_line(line)) {
            out.push_back(*candidate);
        }
    }
    return out;
}

// Lenient pass: "item N <sep> M" anywhere, plus "N. M" / "N) M" line heads.
std::vector<RatingCandidate> lenient_candidates(std::string_view text) {
    std::vector<RatingCandidate> out;

    auto read_int = [&](std::size_t& i, bool allow_sign) -> std::optional<long> {
        bool negative = false;
        if (allow_sign && i < text.size() && text[i] == '-') {
            negative = true;
            ++i;
        }
        const std::size_t start = i;
        long v = 0;
        while (i < text.size() && is_digit(text[i]) && i - start < 9) {
            v = v * 10 + (text[i] - '0');
            ++i;
        }
        if (i == start) return std::nullopt;
        return negative ? -v : v;
    };

    for (std::size_t pos = 0; pos + 4 <= text.size(); ++pos) {
        const bool word_start =
            pos == 0 || !std::isalnum(static_cast<unsigned char>(text[pos - 1]));
        if (!word_start) continue;
        if ((text[pos] != 'i' && text[pos] != 'I') ||
            text.substr(pos + 1, 3) != "tem") {
            continue;
        }
        std::size_t i = pos + 4;
        while (i < text.size() && (text[i] == ' ' || text[i] == '#')) ++i;
        const auto id = read_int(i, false);
        if (!id) continue;
        std::size_t sep = 0;
        while (i < text.size() && sep < 8 &&
               (text[i] == ' ' || text[i] == ':' || text[i] == '=' ||
                text[i] == '.' || text[i] == ')' || text[i] == '-')) {
            ++i;
            ++sep;
        }
        if (sep == 0) continue;
        const auto value = read_int(i, true);
        if (!value) continue;
        out.push_back({static_cast<int>(*id), *value});
    }

    for (auto line : split_lines(text)) {
        std::size_t i = 0;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t start = i;
        long id = 0;
        while (i < line.size() && is_digit(line[i]) && i - start < 9) {
            id = id * 10 + (line[i] - '0');
            ++i;
        }
        if (i == start) continue;
        if (i >= line.size() || (line[i] != '.' && line[i] != ')')) continue;
        ++i;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        const std::size_t value_start = i;
        bool negative = false;
        if (i < line.size() && line[i] == '-') {
            negative = true;
            ++i;
        }
        long value = 0;
        bool has_digits = false;
        while (i < line.size() && is_digit(line[i])) {
            value = value * 10 + (line[i] - '0');
            has_digits = true;
            ++i;
        }
        (void)value_start;
        if (!has_digits) continue;
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                                   line[i] == '\r')) {
            ++i;
        }
        if (i != line.size()) continue;
        out.push_back({static_cast<int>(id), negative ? -value : value});
    }
    return out;
}

// Success iff candidates cover item ids 1..n exactly once each.
struct CoverCheck {
    bool exact = false;
    int distinct = 0;
    std::vector<long> values;  // indexed by item, valid when exact
};

CoverCheck check_cover(const std::vector<RatingCandidate>& candidates, int n) {
    CoverCheck out;
    std::vector<bool> seen(static_cast<std::size_t>(n) + 1, false);
    std::vector<long> values(static_cast<std::size_t>(n) + 1, 0);
    bool duplicate = false;
    for (const auto& c : candidates) {
        if (c.item_id < 1 || c.item_id > n) {
            duplicate = true;  // a stray id breaks exact coverage
            continue;
        }
        const auto idx = static_cast<std::size_t>(c.item_id);
        if (seen[idx]) {
            if (values[idx] != c.value) duplicate = true;
            continue;  // a repeated identical line is harmless
        }
        seen[idx] = true;
        values[idx] = c.value;
    }
    for (int i = 1; i <= n; ++i) {
        if (seen[static_cast<std::size_t>(i)]) ++out.distinct;
    }
    out.exact = !duplicate && out.distinct == n;
    if (out.exact) {
        out.values.resize(static_cast<std::size_t>(n) + 1);
        for (int i = 1; i <= n; ++i) {
            out.values[static_cast<std::size_t>(i)] =
                values[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

ParsedRatings ratings_from_cover(const CoverCheck& cover,
                                 const SurveyInstrument& instrument) {
    ParsedRatings parsed;
    const int n = instrument.item_count();
    std::vector<int> ratings;
    ratings.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        const long v = cover.values[static_cast<std::size_t>(i)];
        if (v < instrument.scale.min_rating || v > instrument.scale.max_rating) {
            parsed.failure_kind = RatingsFailure::out_of_range;
            parsed.failure_excerpt =
                "item " + std::to_string(i) + ": " + std::to_string(v);
            return parsed;
        }
        ratings.push_back(static_cast<int>(v));
    }
    parsed.ratings = std::move(ratings);
    return parsed;
}

}  // namespace

ParsedRatings parse_ratings(const std::string& raw_text,
                            const SurveyInstrument& instrument) {
    const int n = instrument.item_count();

    const auto strict = strict_candidates(raw_text);
    const auto strict_cover = check_cover(strict, n);
    if (strict_cover.exact) {
        return ratings_from_cover(strict_cover, instrument);
    }

    const auto lenient = lenient_candidates(raw_text);
    const auto lenient_cover = check_cover(lenient, n);
    if (lenient_cover.exact) {
        return ratings_from_cover(lenient_cover, instrument);
    }

    ParsedRatings parsed;
    if (strict.empty() && lenient.empty()) {
        parsed.failure_kind = RatingsFailure::unparseable;
        parsed.failure_excerpt = raw_text.substr(0, 120);
        return parsed;
    }
    parsed.failure_kind = RatingsFailure::wrong_count;
    const int found = std::max(strict_cover.distinct, lenient_cover.distinct);
    parsed.failure_excerpt = "recovered " + std::to_string(found) +
                             " of " + std::to_string(n) + " item ratings";
    return parsed;
}

// ---- mock completion ----

namespace {

std::uint64_t mix(std::initializer_list<std::string_view> parts) {
    return splitmix64(stable_hash(parts));
}

}  // namespace

CompletionResult mock_complete(const CompletionRequest& request,
                               std::int64_t seed,
                               const std::string& respondent_key,
                               const std::string& condition_key,
                               const SurveyInstrument& instrument) {
    const auto& scale = instrument.scale;
    const int span = scale.point_count();
    const std::string seed_text = std::to_string(seed);

    std::vector<int> ratings;
    ratings.reserve(static_cast<std::size_t>(instrument.item_count()));
    for (int item = 1; item <= instrument.item_count(); ++item) {
        const std::string item_text = std::to_string(item);
        const std::uint64_t base_bits =
            mix({seed_text, respondent_key, "base", item_text});
        int rating = scale.min_rating +
                     static_cast<int>(base_bits % static_cast<unsigned>(span));
        if (request.temperature > 0.0) {
            // Direction is repeat-independent so outputs of two repeats
            // differ by at most one scale point per item.
            const int direction =
                (mix({seed_text, respondent_key, "dir", item_text}) & 1) ? 1 : -1;
            const int active = static_cast<int>(
                mix({seed_text, respondent_key, condition_key, "jitter",
                     item_text}) &
                1);
            rating += direction * active;
            rating = std::clamp(rating, scale.min_rating, scale.max_rating);
        }
        ratings.push_back(rating);
    }

    CompletionResult result;
    result.raw_text = canonical_ratings_block(ratings);
    result.prompt_tokens = static_cast<int>(request.prompt_text.size() / 4);
    result.output_tokens = static_cast<int>(result.raw_text.size() / 4);
    result.latency_ms = 0;
    result.attempt_count = 1;
    result.provider_metadata = {{"provider", "mock"}};
    return result;
}

// ---- gateway ----

LlmGateway::LlmGateway(SurveyInstrument instrument,
                       std::shared_ptr<HttpTransport> transport,
                       std::shared_ptr<Clock> clock)
    : instrument_(std::move(instrument)),
      transport_(std::move(transport)),
      clock_(std::move(clock)) {}

RateLimiter& LlmGateway::limiter_for(const ProviderSpec& spec) {
    std::lock_guard lock(limiters_mutex_);
    auto& slot = limiters_[spec.chatbot];
    if (!slot) {
        slot = std::make_unique<RateLimiter>(spec.rate_limit_per_min, clock_);
    }
    return *slot;
}

CompletionOutcome LlmGateway::complete(const ProviderSpec& spec,
                                       const CompletionRequest& request) {
    CompletionOutcome outcome;
    if (spec.kind == ProviderKind::mock) {
        outcome.result =
            mock_complete(request, request.seed.value_or(0),
                          request.respondent_key, request.condition_key,
                          instrument_);
        return outcome;
    }

    const char* api_key = spec.auth_env_var.empty()
                              ? nullptr
                              : std::getenv(spec.auth_env_var.c_str());
    if (api_key == nullptr || *api_key == '\0') {
        outcome.error = {CompletionErrorKind::auth,
                         "credential env var " + spec.auth_env_var +
                             " is not set for provider " + spec.chatbot};
        return outcome;
    }

    const WireRequest wire = build_wire_request(spec, request, api_key);
    CompletionError last_error{CompletionErrorKind::transport, "not attempted"};
    for (int attempt = 1; attempt <= spec.max_retries + 1; ++attempt) {
        limiter_for(spec).acquire();
        const std::int64_t started = clock_->now_ms();
        const auto response = transport_->post(wire.url, wire.headers, wire.body);
        const auto latency = static_cast<int>(clock_->now_ms() - started);

        if (response) {
            CompletionOutcome parsed = parse_wire_response(spec.kind, *response);
            if (parsed.ok()) {
                parsed.result->latency_ms = latency;
                parsed.result->attempt_count = attempt;
                parsed.result->provider_metadata.emplace_back(
                    "http_status", std::to_string(response->status));
                return parsed;
            }
            if (parsed.error->kind != CompletionErrorKind::transport) {
                return parsed;  // auth / bad request / context length: no retry
            }
            last_error = *parsed.error;
        } else {
            last_error = {CompletionErrorKind::transport,
                          "connection to " + wire.url + " failed"};
        }

        if (attempt <= spec.max_retries) {
            clock_->sleep_ms(500LL << (attempt - 1));
        }
    }
    outcome.error = {CompletionErrorKind::transport,
                     "exhausted " + std::to_string(spec.max_retries + 1) +
                         " attempts; last error: " + last_error.message};
    return outcome;
}

}  // namespace silicon
