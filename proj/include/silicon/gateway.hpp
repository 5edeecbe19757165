#pragma once
// Uniform completion interface over commercial chat providers plus a
// deterministic mock, and extraction of Likert ratings from raw model
// output. complete() is safe to call from multiple workers; the
// per-provider rate limiter is shared and internally synchronized.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "silicon/survey.hpp"

namespace silicon {

enum class ProviderKind { gpt, claude, gemini, mock };

std::string to_string(ProviderKind k);
ProviderKind provider_kind_from_string(const std::string& s);

struct ProviderSpec {
    std::string chatbot;  // label conditions reference; defaults to the kind
    ProviderKind kind = ProviderKind::mock;
    std::string model_name;
    std::string endpoint_url;
    std::string auth_env_var;
    int rate_limit_per_min = 60;
    int max_retries = 2;
};

ValidationReport validate_providers(const std::vector<ProviderSpec>& specs);
std::vector<ProviderSpec> load_providers(const std::filesystem::path& path);
const ProviderSpec* find_provider(const std::vector<ProviderSpec>& specs,
                                  const std::string& chatbot);

struct CompletionRequest {
    std::string prompt_text;
    double temperature = 0.0;
    int max_output_tokens = 1024;
    std::optional<std::int64_t> seed;  // honored by mock, passed where supported
    // Identify the generation cell for the mock and for tracing.
    std::string respondent_key;
    std::string condition_key;
};

struct CompletionResult {
    std::string raw_text;
    int prompt_tokens = 0;
    int output_tokens = 0;
    int latency_ms = 0;
    std::vector<std::pair<std::string, std::string>> provider_metadata;
    int attempt_count = 1;
};

enum class CompletionErrorKind {
    auth,
    transport,        // exhausted retries on transient failures
    context_length,   // surfaced distinctly so the runner can record it
    bad_request,
    config,
};

std::string to_string(CompletionErrorKind k);

struct CompletionError {
    CompletionErrorKind kind = CompletionErrorKind::transport;
    std::string message;
};

struct CompletionOutcome {
    std::optional<CompletionResult> result;
    std::optional<CompletionError> error;

    bool ok() const { return result.has_value(); }
};

// ---- transport seam ----

struct HttpResponse {
    int status = 0;
    std::string body;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    // nullopt on connection-level failure (refused, timeout).
    virtual std::optional<HttpResponse> post(
        const std::string& url,
        const std::vector<std::pair<std::string, std::string>>& headers,
        const std::string& json_body) = 0;
};

std::unique_ptr<HttpTransport> make_httplib_transport();

class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
    virtual void sleep_ms(std::int64_t ms) = 0;
};

std::shared_ptr<Clock> make_system_clock();

// Sliding-window limiter: at most per_minute acquisitions in any 60 s span.
class RateLimiter {
public:
    RateLimiter(int per_minute, std::shared_ptr<Clock> clock);
    void acquire();

private:
    int per_minute_;
    std::shared_ptr<Clock> clock_;
    std::mutex mutex_;
    std::deque<std::int64_t> recent_;
};

// ---- wire adapters ----

struct WireRequest {
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

// Maps the uniform request onto the vendor's request shape. The exact
// field mapping per adapter is documented in the README.
WireRequest build_wire_request(const ProviderSpec& spec,
                               const CompletionRequest& request,
                               const std::string& api_key);

// Extracts text and usage from a vendor response, or classifies the error.
CompletionOutcome parse_wire_response(ProviderKind kind,
                                      const HttpResponse& response);

// ---- ratings extraction ----

enum class RatingsFailure { unparseable, wrong_count, out_of_range };

std::string to_string(RatingsFailure f);

struct ParsedRatings {
    std::optional<std::vector<int>> ratings;
    std::optional<RatingsFailure> failure_kind;
    std::string failure_excerpt;

    bool ok() const { return ratings.has_value(); }
};

// Two-stage extraction: a strict pass over `item_id: rating` lines (inside
// BEGIN RATINGS / END RATINGS markers when present), then a lenient scan
// for "item N ... M" and "N. M" patterns. Succeeds iff exactly item-count
// in-range ratings with unique ids are recovered. Failures are data,
// never exceptions.
ParsedRatings parse_ratings(const std::string& raw_text,
                            const SurveyInstrument& instrument);

// ---- completion ----

// Deterministic stand-in for a commercial provider. Ratings are a pure
// function of (seed, respondent_key, condition_key, temperature, item
// count); at temperature zero the output is jitter-free and ignores
// condition_key's repeat part, above zero a seed-determined +/-1
// perturbation applies per item, clamped to scale bounds.
CompletionResult mock_complete(const CompletionRequest& request,
                               std::int64_t seed,
                               const std::string& respondent_key,
                               const std::string& condition_key,
                               const SurveyInstrument& instrument);

// Seam the runner drives; tests wrap it to count or script calls.
class Completer {
public:
    virtual ~Completer() = default;
    virtual CompletionOutcome complete(const ProviderSpec& spec,
                                       const CompletionRequest& request) = 0;
};

class LlmGateway : public Completer {
public:
    LlmGateway(SurveyInstrument instrument,
               std::shared_ptr<HttpTransport> transport,
               std::shared_ptr<Clock> clock);

    // Applies per-provider rate limiting and exponential-backoff retry on
    // transient failures; auth and malformed-request errors never retry.
    CompletionOutcome complete(const ProviderSpec& spec,
                               const CompletionRequest& request) override;

private:
    RateLimiter& limiter_for(const ProviderSpec& spec);

    SurveyInstrument instrument_;
    std::shared_ptr<HttpTransport> transport_;
    std::shared_ptr<Clock> clock_;
    std::mutex limiters_mutex_;
    std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
};

}  // namespace silicon
