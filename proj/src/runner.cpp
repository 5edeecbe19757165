#include "silicon/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "silicon/errors.hpp"
#include "silicon/hash.hpp"

namespace silicon {

using ordered_json = nlohmann::ordered_json;

std::string to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::parse_failed: return "parse_failed";
        case RunStatus::transport_failed: return "transport_failed";
    }
    return "ok";
}

RunStatus run_status_from_string(const std::string& s) {
    if (s == "ok") return RunStatus::ok;
    if (s == "parse_failed") return RunStatus::parse_failed;
    if (s == "transport_failed") return RunStatus::transport_failed;
    throw StructuralError("unknown run status '" + s + "'");
}

std::string RunKey::str() const {
    return condition.key() + "|" + respondent_id + "|r" +
           std::to_string(repeat_index);
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("manifest file not readable: " + path.string());
    }
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError("manifest file " + path.string() +
                          " is not valid JSON: " + e.what());
    }

    RunManifest manifest;
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& rel) {
        const std::filesystem::path p(rel);
        return p.is_absolute() ? p : base / p;
    };
    try {
        manifest.manifest_id = doc.at("manifest_id").get<std::string>();
        if (doc.contains("chatbots")) {
            manifest.chatbots =
                doc.at("chatbots").get<std::vector<std::string>>();
        }
        if (doc.contains("variants")) {
            for (const auto& v : doc.at("variants")) {
                manifest.variants.push_back(
                    variant_from_string(v.get<std::string>()));
            }
        }
        if (doc.contains("temperatures")) {
            manifest.temperatures =
                doc.at("temperatures").get<std::vector<double>>();
        }
        if (doc.contains("conditions")) {
            for (const auto& c : doc.at("conditions")) {
                Condition cond;
                cond.chatbot = c.at("chatbot").get<std::string>();
                cond.variant =
                    variant_from_string(c.at("variant").get<std::string>());
                cond.temperature = c.at("temperature").get<double>();
                manifest.explicit_conditions.push_back(std::move(cond));
            }
        }
        if (doc.contains("respondents") && doc.at("respondents").is_array()) {
            manifest.respondent_ids =
                doc.at("respondents").get<std::vector<std::string>>();
        }
        manifest.repeats_per_cell = doc.value("repeats_per_cell", 1);
        manifest.master_seed = doc.value("master_seed", std::int64_t{0});
        if (doc.contains("instrument")) {
            manifest.instrument_ref =
                resolve(doc.at("instrument").get<std::string>());
        }
        if (doc.contains("roster")) {
            manifest.roster_ref = resolve(doc.at("roster").get<std::string>());
        }
        if (doc.contains("template")) {
            manifest.template_ref =
                resolve(doc.at("template").get<std::string>());
        }
        if (doc.contains("providers")) {
            manifest.providers_ref =
                resolve(doc.at("providers").get<std::string>());
        }
        if (doc.contains("background")) {
            manifest.background_ref =
                resolve(doc.at("background").get<std::string>());
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("manifest file " + path.string() +
                          " is malformed: " + e.what());
    }
    return manifest;
}

std::vector<Condition> enumerate_conditions(const RunManifest& manifest) {
    std::vector<Condition> conditions;
    if (!manifest.explicit_conditions.empty()) {
        conditions = manifest.explicit_conditions;
    } else {
        for (const auto& chatbot : manifest.chatbots) {
            for (VariantId variant : manifest.variants) {
                auto temps = manifest.temperatures;
                std::sort(temps.begin(), temps.end());
                for (double temp : temps) {
                    conditions.push_back({chatbot, variant, temp});
                }
            }
        }
        return conditions;
    }

    // Explicit lists get the same (chatbot, variant, temperature) order,
    // with chatbots ranked by first appearance.
    std::vector<std::string> chatbot_order;
    for (const auto& c : conditions) {
        if (std::find(chatbot_order.begin(), chatbot_order.end(), c.chatbot) ==
            chatbot_order.end()) {
            chatbot_order.push_back(c.chatbot);
        }
    }
    auto rank = [&](const std::string& chatbot) {
        return std::distance(
            chatbot_order.begin(),
            std::find(chatbot_order.begin(), chatbot_order.end(), chatbot));
    };
    std::stable_sort(conditions.begin(), conditions.end(),
                     [&](const Condition& a, const Condition& b) {
                         if (rank(a.chatbot) != rank(b.chatbot)) {
                             return rank(a.chatbot) < rank(b.chatbot);
                         }
                         if (a.variant != b.variant) {
                             return static_cast<int>(a.variant) <
                                    static_cast<int>(b.variant);
                         }
                         return a.temperature < b.temperature;
                     });
    return conditions;
}

ValidationReport validate_manifest(const RunManifest& manifest,
                                   const Roster& roster,
                                   const std::vector<ProviderSpec>& providers) {
    ValidationReport report;
    if (manifest.manifest_id.empty()) {
        report.add("manifest", "empty manifest_id");
    }
    if (manifest.repeats_per_cell < 1) {
        report.add("manifest", "repeats_per_cell must be at least 1");
    }

    const auto conditions = enumerate_conditions(manifest);
    if (conditions.empty()) {
        report.add("manifest", "no conditions (need chatbots x variants x "
                               "temperatures or an explicit list)");
    }
    std::set<std::string> keys;
    for (const auto& c : conditions) {
        if (!keys.insert(c.key()).second) {
            report.add("condition " + c.key(), "duplicate condition");
        }
        if (find_provider(providers, c.chatbot) == nullptr) {
            report.add("condition " + c.key(),
                       "chatbot '" + c.chatbot + "' not in providers config");
        }
        if (c.temperature < 0.0 || c.temperature > 1.0) {
            report.add("condition " + c.key(),
                       "temperature outside [0, 1]");
        }
    }

    std::vector<std::string> ids = manifest.respondent_ids;
    if (ids.empty()) {
        for (const auto& r : roster) ids.push_back(r.respondent_id);
    }
    if (ids.empty()) {
        report.add("manifest", "respondent selection is empty");
    }
    std::set<std::string> seen_ids;
    for (const auto& id : ids) {
        if (!seen_ids.insert(id).second) {
            report.add("respondent " + id, "selected twice");
        }
        const auto* r = find_respondent(roster, id);
        if (r == nullptr) {
            report.add("respondent " + id, "not present in roster");
            continue;
        }
        for (const auto& c : conditions) {
            if (variant_has(c.variant, ComponentKind::personal_interview) &&
                r->interview_transcript.empty()) {
                report.add("respondent " + id,
                           "variant " + to_string(c.variant) +
                               " needs an interview transcript");
                break;
            }
        }
        for (const auto& c : conditions) {
            if (variant_has(c.variant, ComponentKind::demographics) &&
                r->demographics.empty()) {
                report.add("respondent " + id,
                           "variant " + to_string(c.variant) +
                               " needs demographic fields");
                break;
            }
        }
    }
    return report;
}

// ---- record serialization ----

std::string run_record_to_json_line(const RunRecord& record) {
    ordered_json j;
    j["chatbot"] = record.key.condition.chatbot;
    j["variant"] = to_string(record.key.condition.variant);
    j["temperature"] = record.key.condition.temperature;
    j["respondent"] = record.key.respondent_id;
    j["repeat"] = record.key.repeat_index;
    j["status"] = to_string(record.status);
    j["prompt_digest"] = record.prompt_digest;
    j["prompt_token_count"] = record.prompt_token_count;
    j["raw_text"] = record.raw_text;
    switch (record.status) {
        case RunStatus::ok:
            j["ratings"] = *record.parsed.ratings;
            break;
        case RunStatus::parse_failed:
            j["failure_kind"] = to_string(*record.parsed.failure_kind);
            j["failure_excerpt"] = record.parsed.failure_excerpt;
            break;
        case RunStatus::transport_failed:
            j["error"] = record.error_message;
            break;
    }
    j["prompt_tokens"] = record.prompt_tokens;
    j["output_tokens"] = record.output_tokens;
    j["latency_ms"] = record.latency_ms;
    j["attempts"] = record.attempt_count;
    j["reasks"] = record.reasks;
    return j.dump();
}

RunRecord run_record_from_json_line(const std::string& line) {
    const ordered_json j = ordered_json::parse(line);
    RunRecord record;
    record.key.condition.chatbot = j.at("chatbot").get<std::string>();
    record.key.condition.variant =
        variant_from_string(j.at("variant").get<std::string>());
    record.key.condition.temperature = j.at("temperature").get<double>();
    record.key.respondent_id = j.at("respondent").get<std::string>();
    record.key.repeat_index = j.at("repeat").get<int>();
    record.status = run_status_from_string(j.at("status").get<std::string>());
    record.prompt_digest = j.at("prompt_digest").get<std::string>();
    record.prompt_token_count = j.at("prompt_token_count").get<std::size_t>();
    record.raw_text = j.at("raw_text").get<std::string>();
    switch (record.status) {
        case RunStatus::ok:
            record.parsed.ratings = j.at("ratings").get<std::vector<int>>();
            break;
        case RunStatus::parse_failed: {
            ParsedRatings parsed;
            parsed.failure_kind = [&] {
                const auto s = j.at("failure_kind").get<std::string>();
                if (s == "unparseable") return RatingsFailure::unparseable;
                if (s == "wrong_count") return RatingsFailure::wrong_count;
                if (s == "out_of_range") return RatingsFailure::out_of_range;
                throw StructuralError("unknown failure kind '" + s + "'");
            }();
            parsed.failure_excerpt = j.value("failure_excerpt", "");
            record.parsed = std::move(parsed);
            break;
        }
        case RunStatus::transport_failed:
            record.error_message = j.value("error", "");
            break;
    }
    record.prompt_tokens = j.value("prompt_tokens", 0);
    record.output_tokens = j.value("output_tokens", 0);
    record.latency_ms = j.value("latency_ms", 0);
    record.attempt_count = j.value("attempts", 0);
    record.reasks = j.value("reasks", 0);
    return record;
}

// ---- run store ----

RunStore::RunStore(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    std::ifstream in(path_);
    if (!in) return;  // fresh store
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        RunRecord record;
        try {
            record = run_record_from_json_line(line);
        } catch (const std::exception& e) {
            throw StructuralError("run store " + path_.string() + " line " +
                                  std::to_string(line_no) +
                                  " is corrupt: " + e.what());
        }
        const auto key = record.key.str();
        if (index_.count(key)) {
            throw StructuralError("run store " + path_.string() +
                                  " has duplicate terminal records for key " +
                                  key);
        }
        index_.emplace(key, records_.size());
        records_.push_back(std::move(record));
    }
}

bool RunStore::has(const RunKey& key) const {
    return index_.count(key.str()) > 0;
}

const RunRecord* RunStore::find(const RunKey& key) const {
    const auto it = index_.find(key.str());
    if (it == index_.end()) return nullptr;
    return &records_[it->second];
}

void RunStore::append(const RunRecord& record) {
    const auto key = record.key.str();
    if (index_.count(key)) {
        throw StructuralError("refusing to append second terminal record for "
                              "key " + key);
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw StructuralError("run store not writable: " + path_.string());
    }
    out << run_record_to_json_line(record) << '\n';
    out.flush();
    if (!out) {
        throw StructuralError("write to run store failed: " + path_.string());
    }
    index_.emplace(key, records_.size());
    records_.push_back(record);
}

// ---- execution ----

std::int64_t per_key_seed(std::int64_t master_seed,
                          const std::string& model_name, VariantId variant,
                          double temperature,
                          const std::string& respondent_id) {
    const std::uint64_t h = stable_hash(
        {std::to_string(master_seed), model_name, to_string(variant),
         format_temperature(temperature), respondent_id});
    return static_cast<std::int64_t>(splitmix64(h) >> 1);
}

namespace {

struct KeyTask {
    RunKey key;
    const Respondent* respondent = nullptr;
    const ProviderSpec* provider = nullptr;
};

RunRecord execute_one(const KeyTask& task, Completer& completer,
                      const RunContext& context,
                      const RunManifest& manifest) {
    const Condition& condition = task.key.condition;
    const RenderedPrompt prompt = assemble_prompt(
        condition.variant, *task.respondent, context.background,
        *context.instrument, *context.prompt_template, *context.tokenizer);

    CompletionRequest request;
    request.prompt_text = prompt.full_text;
    request.temperature = condition.temperature;
    request.max_output_tokens = context.max_output_tokens;
    request.seed = per_key_seed(manifest.master_seed, task.provider->model_name,
                                condition.variant, condition.temperature,
                                task.key.respondent_id);
    request.respondent_key = task.key.respondent_id;
    request.condition_key = task.provider->model_name + "|" +
                            to_string(condition.variant) + "|" +
                            format_temperature(condition.temperature) + "|r" +
                            std::to_string(task.key.repeat_index);

    RunRecord record;
    record.key = task.key;
    record.prompt_digest = hex_digest(fnv1a64(prompt.full_text));
    record.prompt_token_count = prompt.token_count;

    // Bounded re-ask loop: parse failures re-prompt with a corrective
    // suffix up to max_retries times, then the failure is recorded as is.
    const int max_reasks = task.provider->max_retries;
    CompletionRequest attempt_request = request;
    for (int reask = 0;; ++reask) {
        const CompletionOutcome outcome =
            completer.complete(*task.provider, attempt_request);
        if (!outcome.ok()) {
            record.status = RunStatus::transport_failed;
            record.error_message = to_string(outcome.error->kind) + ": " +
                                   outcome.error->message;
            record.reasks = reask;
            return record;
        }
        const CompletionResult& result = *outcome.result;
        record.raw_text = result.raw_text;
        record.prompt_tokens = result.prompt_tokens;
        record.output_tokens = result.output_tokens;
        record.latency_ms = result.latency_ms;
        record.attempt_count = result.attempt_count;
        record.parsed = parse_ratings(result.raw_text, *context.instrument);
        if (record.parsed.ok()) {
            record.status = RunStatus::ok;
            record.reasks = reask;
            return record;
        }
        if (reask >= max_reasks) {
            record.status = RunStatus::parse_failed;
            record.reasks = reask;
            return record;
        }
        attempt_request.prompt_text = request.prompt_text + reask_suffix();
    }
}

}  // namespace

RunSummary execute_run(const RunManifest& manifest, RunStore& store,
                       Completer& completer, const RunContext& context) {
    if (context.instrument == nullptr || context.roster == nullptr ||
        context.prompt_template == nullptr || context.providers == nullptr ||
        context.tokenizer == nullptr) {
        throw ConfigError("execute_run: incomplete run context");
    }

    const auto validation =
        validate_manifest(manifest, *context.roster, *context.providers);
    if (!validation.clean()) {
        std::ostringstream msg;
        msg << "manifest validation failed:";
        for (const auto& issue : validation.issues) {
            msg << " [" << issue.location << "] " << issue.message << ";";
        }
        throw ConfigError(msg.str());
    }

    std::vector<std::string> ids = manifest.respondent_ids;
    if (ids.empty()) {
        for (const auto& r : *context.roster) ids.push_back(r.respondent_id);
    }

    // Deterministic key order: condition, then respondent, then repeat.
    std::vector<KeyTask> pending;
    RunSummary summary;
    for (const auto& condition : enumerate_conditions(manifest)) {
        const auto* provider = find_provider(*context.providers,
                                             condition.chatbot);
        for (const auto& id : ids) {
            for (int repeat = 0; repeat < manifest.repeats_per_cell; ++repeat) {
                ++summary.total_keys;
                const RunKey key{condition, id, repeat};
                if (store.has(key)) {
                    ++summary.already_done;
                    continue;
                }
                pending.push_back(
                    {key, find_respondent(*context.roster, id), provider});
            }
        }
    }

    const int workers =
        std::max(1, std::min(context.workers,
                             static_cast<int>(pending.size())));

    auto tally = [&summary](const RunRecord& record) {
        switch (record.status) {
            case RunStatus::ok: ++summary.ok; break;
            case RunStatus::parse_failed: ++summary.parse_failed; break;
            case RunStatus::transport_failed: ++summary.transport_failed; break;
        }
    };

    if (workers <= 1) {
        for (const auto& task : pending) {
            RunRecord record = execute_one(task, completer, context, manifest);
            store.append(record);
            ++summary.executed;
            tally(record);
        }
        return summary;
    }

    // Workers pull tasks from a shared cursor; the writer appends results
    // strictly in enumeration order so the store stays byte-stable.
    std::vector<std::promise<RunRecord>> promises(pending.size());
    std::vector<std::future<RunRecord>> futures;
    futures.reserve(pending.size());
    for (auto& p : promises) futures.push_back(p.get_future());

    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = cursor.fetch_add(1);
                if (i >= pending.size()) return;
                try {
                    promises[i].set_value(
                        execute_one(pending[i], completer, context, manifest));
                } catch (...) {
                    promises[i].set_exception(std::current_exception());
                }
            }
        });
    }

    std::exception_ptr failure;
    for (std::size_t i = 0; i < futures.size(); ++i) {
        try {
            RunRecord record = futures[i].get();
            if (!failure) {
                store.append(record);
                ++summary.executed;
                tally(record);
            }
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return summary;
}

// ---- matrix collection ----

int aggregate_repeat_ratings(const std::vector<int>& values,
                             const LikertScale& scale) {
    if (values.empty()) {
        throw StructuralError("aggregate_repeat_ratings: no values");
    }
    double sum = 0.0;
    for (int v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());

    const double floor_v = std::floor(mean);
    if (mean - floor_v == 0.5) {
        const int lo = static_cast<int>(floor_v);
        const int hi = lo + 1;
        const double mid = scale.midpoint();
        const double d_lo = std::fabs(lo - mid);
        const double d_hi = std::fabs(hi - mid);
        if (d_lo < d_hi) return lo;
        if (d_hi < d_lo) return hi;
        return lo;  // equidistant neighbors round down
    }
    return static_cast<int>(std::lround(mean));
}

MatrixCollection collect_matrix(const RunStore& store,
                                const Condition& condition,
                                const SurveyInstrument& instrument,
                                const Roster& roster) {
    // respondent -> per-repeat ratings, gathered in store order
    std::map<std::string, std::vector<std::vector<int>>> ok_rows;
    std::map<std::string, int> failed_counts;
    for (const auto& record : store.records()) {
        if (!(record.key.condition == condition)) continue;
        if (record.status == RunStatus::ok) {
            ok_rows[record.key.respondent_id].push_back(*record.parsed.ratings);
        } else {
            ++failed_counts[record.key.respondent_id];
        }
    }

    MatrixCollection out;
    ResponseMatrix matrix;
    matrix.source = condition.key();
    for (const auto& r : roster) {
        const auto it = ok_rows.find(r.respondent_id);
        if (it == ok_rows.end()) {
            if (failed_counts.count(r.respondent_id)) {
                out.exclusions.push_back(
                    {r.respondent_id, "no ok record for condition " +
                                          condition.key()});
            }
            continue;
        }
        const auto& repeats = it->second;
        std::vector<int> row;
        row.reserve(static_cast<std::size_t>(instrument.item_count()));
        for (int item = 0; item < instrument.item_count(); ++item) {
            std::vector<int> values;
            values.reserve(repeats.size());
            for (const auto& ratings : repeats) {
                values.push_back(ratings[static_cast<std::size_t>(item)]);
            }
            row.push_back(aggregate_repeat_ratings(values, instrument.scale));
        }
        matrix.rows.emplace_back(r.respondent_id, std::move(row));
    }
    if (!matrix.rows.empty()) out.matrix = std::move(matrix);
    return out;
}

}  // namespace silicon
