#include "silicon/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "silicon/errors.hpp"

namespace silicon {

using ordered_json = nlohmann::ordered_json;

std::string csv_field(const std::string& value) {
    if (value.find_first_of(",\"\n") == std::string::npos) return value;
    std::string quoted = "\"";
    for (char c : value) {
        if (c == '"') quoted += "\"\"";
        else quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", value);
    return buf;
}

std::string format_na(const std::optional<double>& value) {
    return value ? format_double(*value) : "NA";
}

namespace {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path,
              std::vector<std::filesystem::path>& written)
        : out_(path, std::ios::binary) {
        if (!out_) {
            throw StructuralError("cannot write report file: " + path.string());
        }
        written.push_back(path);
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_field(fields[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

// Restrict both matrices to their shared respondents, preserving roster
// (first-matrix) row order.
std::pair<ResponseMatrix, ResponseMatrix> align_rows(
    const ResponseMatrix& a, const ResponseMatrix& b) {
    ResponseMatrix left;
    ResponseMatrix right;
    left.source = a.source;
    right.source = b.source;
    for (const auto& [id, row] : a.rows) {
        const auto* other = b.find_row(id);
        if (other == nullptr) continue;
        left.rows.emplace_back(id, row);
        right.rows.emplace_back(id, *other);
    }
    return {std::move(left), std::move(right)};
}

}  // namespace

MetricsOutput write_metrics_reports(const RunManifest& manifest,
                                    const RunStore& store,
                                    const SurveyInstrument& instrument,
                                    const Roster& roster,
                                    const TokenizerChoice& tokenizer,
                                    const std::filesystem::path& out_dir,
                                    const MetricsOptions& options) {
    MetricsOutput output;
    if (store.records().empty()) {
        throw StructuralError("run store is empty: " +
                              store.file_path().string());
    }

    const auto conditions = enumerate_conditions(manifest);
    std::vector<std::string> ids = manifest.respondent_ids;
    if (ids.empty()) {
        for (const auto& r : roster) ids.push_back(r.respondent_id);
    }

    for (const auto& condition : conditions) {
        for (const auto& id : ids) {
            for (int repeat = 0; repeat < manifest.repeats_per_cell; ++repeat) {
                const RunKey key{condition, id, repeat};
                if (!store.has(key)) output.missing_keys.push_back(key.str());
            }
        }
    }
    if (!output.missing_keys.empty() && !options.partial) {
        output.refused_partial = true;
        return output;
    }

    std::filesystem::create_directories(out_dir);

    // Collect per-condition matrices; conditions without any ok record are
    // excluded from metric files and listed in the summary.
    MatrixByCondition matrices;
    std::map<std::string, std::vector<ExclusionEntry>> exclusions_by_condition;
    for (const auto& condition : conditions) {
        auto collected = collect_matrix(store, condition, instrument, roster);
        if (!collected.exclusions.empty()) {
            exclusions_by_condition[condition.key()] = collected.exclusions;
        }
        if (collected.matrix) {
            matrices.emplace(condition.key(), std::move(*collected.matrix));
        } else {
            output.condition_exclusions.push_back(condition.key());
        }
    }

    const ResponseMatrix human = human_matrix(roster, instrument);

    // item_stats.csv
    {
        CsvWriter csv(out_dir / "item_stats.csv", output.files_written);
        csv.row({"chatbot", "variant", "temperature", "item_id", "mean",
                 "variance", "n"});
        for (const auto& condition : conditions) {
            const auto it = matrices.find(condition.key());
            if (it == matrices.end()) continue;
            for (const auto& stat : item_stats(it->second)) {
                csv.row({condition.chatbot, to_string(condition.variant),
                         format_temperature(condition.temperature),
                         std::to_string(stat.item_id),
                         format_double(stat.mean), format_na(stat.variance),
                         std::to_string(stat.n)});
            }
        }
        if (!human.rows.empty()) {
            for (const auto& stat : item_stats(human)) {
                csv.row({"human", "NA", "NA", std::to_string(stat.item_id),
                         format_double(stat.mean), format_na(stat.variance),
                         std::to_string(stat.n)});
            }
        }
    }

    // RMSE reports against the human matrix, aligned on shared respondents.
    {
        CsvWriter item_csv(out_dir / "rmse_item.csv", output.files_written);
        item_csv.row({"chatbot", "variant", "temperature", "item_id", "rmse",
                      "n"});
        CsvWriter person_csv(out_dir / "rmse_person.csv",
                             output.files_written);
        person_csv.row({"chatbot", "variant", "temperature", "respondent_id",
                        "rmse", "n_items"});
        CsvWriter test_csv(out_dir / "rmse_test.csv", output.files_written);
        test_csv.row({"chatbot", "variant", "temperature", "rmse", "n"});

        for (const auto& condition : conditions) {
            const auto it = matrices.find(condition.key());
            if (it == matrices.end() || human.rows.empty()) continue;
            const auto [ai, obs] = align_rows(it->second, human);
            if (ai.rows.empty()) continue;
            const auto n = std::to_string(ai.rows.size());

            for (const auto& [item_id, value] : item_rmse(ai, obs)) {
                item_csv.row({condition.chatbot, to_string(condition.variant),
                              format_temperature(condition.temperature),
                              std::to_string(item_id), format_double(value),
                              n});
            }
            for (const auto& [respondent_id, value] : person_rmse(ai, obs)) {
                person_csv.row({condition.chatbot,
                                to_string(condition.variant),
                                format_temperature(condition.temperature),
                                respondent_id, format_double(value),
                                std::to_string(instrument.item_count())});
            }
            test_csv.row({condition.chatbot, to_string(condition.variant),
                          format_temperature(condition.temperature),
                          format_double(test_rmse(ai, obs, instrument)), n});
        }
    }

    // Chatbot-pair correlations, one row per (temperature, variant) cell.
    const auto mode = options.per_respondent_correlations
                          ? CorrelationMode::per_respondent_mean
                          : CorrelationMode::flattened;
    auto temps_sorted = manifest.temperatures;
    std::sort(temps_sorted.begin(), temps_sorted.end());
    std::vector<std::string> chatbots = manifest.chatbots;
    std::vector<VariantId> variants = manifest.variants;
    if (chatbots.empty() || variants.empty() || temps_sorted.empty()) {
        // Explicit-condition manifest: recover the factor levels.
        std::set<double> temp_set;
        for (const auto& c : conditions) {
            if (std::find(chatbots.begin(), chatbots.end(), c.chatbot) ==
                chatbots.end()) {
                chatbots.push_back(c.chatbot);
            }
            if (std::find(variants.begin(), variants.end(), c.variant) ==
                variants.end()) {
                variants.push_back(c.variant);
            }
            temp_set.insert(c.temperature);
        }
        temps_sorted.assign(temp_set.begin(), temp_set.end());
    }

    const auto pair_result = llm_pair_correlations(matrices, chatbots,
                                                   variants, temps_sorted, mode);
    {
        CsvWriter csv(out_dir / "correlations_pairs.csv",
                      output.files_written);
        std::vector<std::string> header = {"temperature", "variant"};
        std::vector<std::pair<std::string, std::string>> pairs;
        for (std::size_t i = 0; i < chatbots.size(); ++i) {
            for (std::size_t j = i + 1; j < chatbots.size(); ++j) {
                pairs.emplace_back(chatbots[i], chatbots[j]);
                header.push_back(chatbots[i] + "~" + chatbots[j]);
            }
        }
        csv.row(header);
        for (double temp : temps_sorted) {
            for (VariantId variant : variants) {
                std::vector<std::string> row = {format_temperature(temp),
                                                to_string(variant)};
                for (const auto& [a, b] : pairs) {
                    std::optional<double> rho;
                    for (const auto& cell : pair_result.cells) {
                        if (cell.temperature == temp &&
                            cell.variant == variant && cell.chatbot_a == a &&
                            cell.chatbot_b == b) {
                            rho = cell.rho;
                            break;
                        }
                    }
                    row.push_back(format_na(rho));
                }
                csv.row(row);
            }
        }
    }

    // Human correlations: per-temperature rows plus a mean row per
    // (chatbot, variant).
    HumanCorrelationResult human_result;
    if (!human.rows.empty()) {
        human_result = llm_human_correlations(matrices, human, chatbots,
                                              variants, temps_sorted, mode);
    }
    {
        CsvWriter csv(out_dir / "correlations_human.csv",
                      output.files_written);
        csv.row({"chatbot", "variant", "temperature", "rho", "n_points"});
        for (const auto& cell : human_result.cells) {
            csv.row({cell.chatbot, to_string(cell.variant),
                     cell.temperature ? format_temperature(*cell.temperature)
                                      : "mean",
                     format_na(cell.rho), std::to_string(cell.n_points)});
        }
    }

    // Three-way main-effects ANOVA over the pair correlations.
    std::string anova_note;
    {
        CsvWriter csv(out_dir / "anova.csv", output.files_written);
        csv.row({"factor", "df", "ss", "ms", "f", "p"});
        std::vector<AnovaObservation> observations;
        bool usable = true;
        for (const auto& cell : pair_result.cells) {
            if (!cell.rho) {
                usable = false;
                anova_note = "undefined correlation in cell " +
                             cell.chatbot_a + "~" + cell.chatbot_b;
                break;
            }
            observations.push_back({cell.chatbot_a + "~" + cell.chatbot_b,
                                    to_string(cell.variant),
                                    format_temperature(cell.temperature),
                                    *cell.rho});
        }
        if (usable && !observations.empty()) {
            try {
                const AnovaTable table = anova3_main_effects(observations);
                for (const auto& row : table.rows) {
                    csv.row({row.factor, std::to_string(row.df),
                             format_double(row.ss), format_na(row.ms),
                             format_na(row.f), format_na(row.p)});
                }
            } catch (const StructuralError& e) {
                anova_note = e.what();
            }
        } else if (observations.empty() && anova_note.empty()) {
            anova_note = "no pair correlations available";
        }
    }

    // Interview-length association over interview-bearing conditions.
    std::map<std::string, std::vector<double>> rmse_samples;
    for (const auto& condition : conditions) {
        if (!variant_has(condition.variant, ComponentKind::personal_interview)) {
            continue;
        }
        const auto it = matrices.find(condition.key());
        if (it == matrices.end() || human.rows.empty()) continue;
        const auto [ai, obs] = align_rows(it->second, human);
        if (ai.rows.empty()) continue;
        for (const auto& [respondent_id, value] : person_rmse(ai, obs)) {
            rmse_samples[respondent_id].push_back(value);
        }
    }
    const AssociationResult association = interview_length_association(
        roster, *tokenizer.backend, rmse_samples);

    // Run summary document.
    {
        ordered_json summary;
        summary["manifest_id"] = manifest.manifest_id;
        summary["store"] =
            store.file_path().lexically_proximate(out_dir).generic_string();
        summary["tokenizer"] = {
            {"encoding", tokenizer.backend->encoding()},
            {"backend", tokenizer.backend->name()},
            {"fallback", tokenizer.is_fallback},
        };
        ordered_json by_condition = ordered_json::array();
        for (const auto& condition : conditions) {
            ordered_json entry;
            entry["condition"] = condition.key();
            const auto it = matrices.find(condition.key());
            entry["effective_n"] =
                it == matrices.end() ? 0 : it->second.rows.size();
            ordered_json excl = ordered_json::array();
            const auto ex_it = exclusions_by_condition.find(condition.key());
            if (ex_it != exclusions_by_condition.end()) {
                for (const auto& e : ex_it->second) {
                    excl.push_back({{"respondent", e.respondent_id},
                                    {"reason", e.reason}});
                }
            }
            entry["exclusions"] = excl;
            by_condition.push_back(entry);
        }
        summary["conditions"] = by_condition;
        summary["excluded_conditions"] = output.condition_exclusions;
        summary["missing_keys"] = output.missing_keys;
        summary["correlation_gaps"] = pair_result.gaps;
        if (!anova_note.empty()) summary["anova_note"] = anova_note;
        summary["interview_length_association"] = {
            {"rho", association.rho ? ordered_json(*association.rho)
                                    : ordered_json()},
            {"p_value", association.p_value
                            ? ordered_json(*association.p_value)
                            : ordered_json()},
            {"n", association.n},
        };
        const auto path = out_dir / "run_summary.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw StructuralError("cannot write report file: " + path.string());
        }
        out << summary.dump(2) << '\n';
        output.files_written.push_back(path);
    }

    if (options.plot_data) {
        const auto plot_dir = out_dir / "plots";
        std::filesystem::create_directories(plot_dir);

        CsvWriter means_csv(plot_dir / "item_means.csv", output.files_written);
        means_csv.row({"chatbot", "variant", "temperature", "item_id", "mean"});
        CsvWriter vars_csv(plot_dir / "item_variances.csv",
                           output.files_written);
        vars_csv.row(
            {"chatbot", "variant", "temperature", "item_id", "variance"});
        auto emit_stats = [&](const std::string& chatbot,
                              const std::string& variant,
                              const std::string& temperature,
                              const ResponseMatrix& matrix) {
            for (const auto& stat : item_stats(matrix)) {
                means_csv.row({chatbot, variant, temperature,
                               std::to_string(stat.item_id),
                               format_double(stat.mean)});
                vars_csv.row({chatbot, variant, temperature,
                              std::to_string(stat.item_id),
                              format_na(stat.variance)});
            }
        };
        for (const auto& condition : conditions) {
            const auto it = matrices.find(condition.key());
            if (it == matrices.end()) continue;
            emit_stats(condition.chatbot, to_string(condition.variant),
                       format_temperature(condition.temperature), it->second);
        }
        if (!human.rows.empty()) emit_stats("human", "NA", "NA", human);

        CsvWriter corr_csv(plot_dir / "llm_human_correlations.csv",
                           output.files_written);
        corr_csv.row({"chatbot", "variant", "rho"});
        for (const auto& cell : human_result.cells) {
            if (cell.temperature) continue;  // figure collapses temperature
            corr_csv.row({cell.chatbot, to_string(cell.variant),
                          format_na(cell.rho)});
        }

        CsvWriter item_rmse_csv(plot_dir / "item_rmse.csv",
                                output.files_written);
        item_rmse_csv.row(
            {"chatbot", "variant", "temperature", "item_id", "rmse"});
        CsvWriter person_rmse_csv(plot_dir / "person_rmse.csv",
                                  output.files_written);
        person_rmse_csv.row(
            {"chatbot", "variant", "temperature", "respondent_id", "rmse"});
        CsvWriter test_rmse_csv(plot_dir / "test_rmse.csv",
                                output.files_written);
        test_rmse_csv.row({"chatbot", "variant", "temperature", "rmse"});
        for (const auto& condition : conditions) {
            const auto it = matrices.find(condition.key());
            if (it == matrices.end() || human.rows.empty()) continue;
            const auto [ai, obs] = align_rows(it->second, human);
            if (ai.rows.empty()) continue;
            for (const auto& [item_id, value] : item_rmse(ai, obs)) {
                item_rmse_csv.row({condition.chatbot,
                                   to_string(condition.variant),
                                   format_temperature(condition.temperature),
                                   std::to_string(item_id),
                                   format_double(value)});
            }
            for (const auto& [respondent_id, value] : person_rmse(ai, obs)) {
                person_rmse_csv.row({condition.chatbot,
                                     to_string(condition.variant),
                                     format_temperature(condition.temperature),
                                     respondent_id, format_double(value)});
            }
            test_rmse_csv.row({condition.chatbot, to_string(condition.variant),
                               format_temperature(condition.temperature),
                               format_double(test_rmse(ai, obs, instrument))});
        }
    }

    return output;
}

}  // namespace silicon
