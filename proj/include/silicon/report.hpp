#pragma once
// CSV report emission with fixed schemas. Undefined values serialize as
// the literal NA; all floating-point cells use one canonical format so
// repeated runs produce byte-identical files.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "silicon/metrics.hpp"
#include "silicon/runner.hpp"
#include "silicon/tokenizer.hpp"

namespace silicon {

std::string csv_field(const std::string& value);
std::string format_double(double value);
std::string format_na(const std::optional<double>& value);

struct MetricsOptions {
    bool partial = false;
    bool plot_data = false;
    bool per_respondent_correlations = false;
};

struct MetricsOutput {
    std::vector<std::filesystem::path> files_written;
    std::vector<std::string> missing_keys;  // run keys with no terminal record
    std::vector<std::string> condition_exclusions;  // conditions w/o usable data
    bool refused_partial = false;  // missing keys present and partial not set
};

// Computes every report from the store and writes the CSV set plus
// run_summary.json under out_dir. Throws StructuralError when the store
// is empty. When keys are missing and options.partial is not set, returns
// with refused_partial set and writes nothing.
MetricsOutput write_metrics_reports(const RunManifest& manifest,
                                    const RunStore& store,
                                    const SurveyInstrument& instrument,
                                    const Roster& roster,
                                    const TokenizerChoice& tokenizer,
                                    const std::filesystem::path& out_dir,
                                    const MetricsOptions& options);

}  // namespace silicon
