#pragma once
// Factorial design enumeration, idempotent run execution with resume
// support, and collection of response matrices from the run store.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silicon/condition.hpp"
#include "silicon/gateway.hpp"
#include "silicon/prompt.hpp"
#include "silicon/survey.hpp"
#include "silicon/tokenizer.hpp"

namespace silicon {

struct RunManifest {
    std::string manifest_id;
    // Either the cross-product shorthand...
    std::vector<std::string> chatbots;
    std::vector<VariantId> variants;
    std::vector<double> temperatures;
    // ...or an explicit condition list.
    std::vector<Condition> explicit_conditions;

    std::vector<std::string> respondent_ids;  // empty selects the whole roster
    int repeats_per_cell = 1;
    std::int64_t master_seed = 0;

    // Optional resource refs, resolved relative to the manifest file.
    std::optional<std::filesystem::path> instrument_ref;
    std::optional<std::filesystem::path> roster_ref;
    std::optional<std::filesystem::path> template_ref;
    std::optional<std::filesystem::path> providers_ref;
    std::optional<std::filesystem::path> background_ref;
};

RunManifest load_manifest(const std::filesystem::path& path);

// Cross-product conditions keep the manifest's chatbot and variant order
// with temperatures ascending; explicit lists are sorted the same way.
std::vector<Condition> enumerate_conditions(const RunManifest& manifest);

ValidationReport validate_manifest(const RunManifest& manifest,
                                   const Roster& roster,
                                   const std::vector<ProviderSpec>& providers);

enum class RunStatus { ok, parse_failed, transport_failed };

std::string to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct RunKey {
    Condition condition;
    std::string respondent_id;
    int repeat_index = 0;

    std::string str() const;
};

struct RunRecord {
    RunKey key;
    RunStatus status = RunStatus::ok;
    std::string prompt_digest;
    std::size_t prompt_token_count = 0;
    std::string raw_text;
    ParsedRatings parsed;
    std::string error_message;  // transport failures
    int prompt_tokens = 0;
    int output_tokens = 0;
    int latency_ms = 0;
    int attempt_count = 0;
    int reasks = 0;  // corrective re-prompts after parse failures
};

std::string run_record_to_json_line(const RunRecord& record);
RunRecord run_record_from_json_line(const std::string& line);

// Append-only JSONL store, one terminal record per (condition, respondent,
// repeat) key. The index is rebuilt from the file on open; appending an
// already-present key is a StructuralError.
class RunStore {
public:
    explicit RunStore(std::filesystem::path path);

    bool has(const RunKey& key) const;
    const RunRecord* find(const RunKey& key) const;
    void append(const RunRecord& record);

    const std::vector<RunRecord>& records() const { return records_; }
    const std::filesystem::path& file_path() const { return path_; }

private:
    std::filesystem::path path_;
    std::vector<RunRecord> records_;
    std::map<std::string, std::size_t> index_;
};

// Per-key seed: depends on the generation cell (model, variant,
// temperature) and the respondent, not on the chatbot label or the repeat
// index, so identically configured chatbots generate identical mock
// responses and zero-temperature repeats coincide.
std::int64_t per_key_seed(std::int64_t master_seed,
                          const std::string& model_name, VariantId variant,
                          double temperature,
                          const std::string& respondent_id);

struct RunContext {
    const SurveyInstrument* instrument = nullptr;
    const Roster* roster = nullptr;
    const PromptTemplate* prompt_template = nullptr;
    std::string background;
    const std::vector<ProviderSpec>* providers = nullptr;
    const TokenizerBackend* tokenizer = nullptr;
    int workers = 1;
    int max_output_tokens = 1024;
};

struct RunSummary {
    int total_keys = 0;
    int already_done = 0;
    int executed = 0;
    int ok = 0;
    int parse_failed = 0;
    int transport_failed = 0;
};

// Executes every (condition, respondent, repeat) key that has no terminal
// record yet: assemble prompt, complete, parse, append. Resource errors
// throw before any provider call; per-key failures are recorded and never
// abort the batch. Records are appended in enumeration order regardless
// of worker count, so stores are byte-stable across reruns.
RunSummary execute_run(const RunManifest& manifest, RunStore& store,
                       Completer& completer, const RunContext& context);

struct ExclusionEntry {
    std::string respondent_id;
    std::string reason;
};

struct MatrixCollection {
    std::optional<ResponseMatrix> matrix;  // nullopt when no ok records
    std::vector<ExclusionEntry> exclusions;
};

// Matrix of ok ratings for one condition, rows in roster order. Multiple
// ok repeats aggregate per item: mean across repeats, rounded to nearest;
// an exact .5 mean rounds to the neighbor closer to the scale midpoint,
// equidistant neighbors round down.
MatrixCollection collect_matrix(const RunStore& store,
                                const Condition& condition,
                                const SurveyInstrument& instrument,
                                const Roster& roster);

int aggregate_repeat_ratings(const std::vector<int>& values,
                             const LikertScale& scale);

}  // namespace silicon
