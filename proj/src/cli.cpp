#include "silicon/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "silicon/config.hpp"
#include "silicon/errors.hpp"
#include "silicon/gateway.hpp"
#include "silicon/metrics.hpp"
#include "silicon/prompt.hpp"
#include "silicon/report.hpp"
#include "silicon/runner.hpp"
#include "silicon/survey.hpp"
#include "silicon/tokenizer.hpp"

namespace silicon {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitPartialRefusal = 3;

struct CliOptions {
    std::string config_path;
    std::string manifest_override;
    std::string output_dir_override;
    std::string encoding_override;
    std::string encoding_table_override;
    int workers_override = 0;
    std::string log_level_override;

    bool resume = false;
    bool partial = false;
    bool plot_data = false;
    bool per_respondent = false;
};

// Line-oriented key=value logging on stderr; data stays on stdout/files.
class Logger {
public:
    Logger(std::ostream& err, const std::string& level)
        : err_(err), verbose_(level != "quiet") {}

    void info(const std::string& event, const std::string& detail = "") {
        if (!verbose_) return;
        err_ << "level=info event=" << event;
        if (!detail.empty()) err_ << " " << detail;
        err_ << "\n";
    }

    void error(const std::string& event, const std::string& detail) {
        err_ << "level=error event=" << event << " " << detail << "\n";
    }

private:
    std::ostream& err_;
    bool verbose_;
};

// Everything the pipeline stages need, loaded and cross-validated once.
struct Workspace {
    WorkspaceConfig config;
    SurveyInstrument instrument;
    Roster roster;
    PromptTemplate prompt_template;
    std::vector<ProviderSpec> providers;
    RunManifest manifest;
    std::string background;
    TokenizerChoice tokenizer;
};

std::string read_text_file(const std::filesystem::path& path,
                           const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(std::string(what) + " file not readable: " +
                          path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Workspace load_workspace(const CliOptions& options) {
    Workspace ws;
    ws.config = load_config(options.config_path);
    if (!options.manifest_override.empty()) {
        ws.config.manifest = options.manifest_override;
    }
    if (!options.output_dir_override.empty()) {
        ws.config.output_dir = options.output_dir_override;
    }
    if (!options.encoding_override.empty()) {
        ws.config.encoding_id = options.encoding_override;
    }
    if (!options.encoding_table_override.empty()) {
        ws.config.encoding_table = options.encoding_table_override;
    }
    if (options.workers_override > 0) {
        ws.config.workers = options.workers_override;
    }
    if (!options.log_level_override.empty()) {
        ws.config.log_level = options.log_level_override;
    }

    ws.manifest = load_manifest(ws.config.manifest);
    // Manifest resource refs take precedence over the config's paths.
    const auto instrument_path =
        ws.manifest.instrument_ref.value_or(ws.config.instrument);
    const auto roster_path = ws.manifest.roster_ref.value_or(ws.config.roster);
    const auto template_path =
        ws.manifest.template_ref.value_or(ws.config.prompt_template);
    const auto providers_path =
        ws.manifest.providers_ref.value_or(ws.config.providers);

    ws.instrument = load_instrument(instrument_path);
    ws.roster = load_roster(roster_path);
    ws.prompt_template = load_template(template_path);
    ws.providers = load_providers(providers_path);
    if (ws.manifest.background_ref) {
        ws.background = read_text_file(*ws.manifest.background_ref,
                                       "background");
    }
    ws.tokenizer = resolve_tokenizer(ws.config.encoding_id,
                                     ws.config.encoding_table);
    return ws;
}

ValidationReport validate_workspace(const Workspace& ws) {
    ValidationReport report;
    auto merge = [&report](const ValidationReport& other,
                           const std::string& area) {
        for (const auto& issue : other.issues) {
            report.add(area + ":" + issue.location, issue.message);
        }
    };
    merge(validate_instrument(ws.instrument), "instrument");
    merge(validate_roster(ws.roster, ws.instrument), "roster");
    merge(validate_template(ws.prompt_template), "template");
    merge(validate_providers(ws.providers), "providers");
    merge(validate_manifest(ws.manifest, ws.roster, ws.providers), "manifest");
    if (ws.background.empty()) {
        report.add("manifest:background",
                   "research background text is missing or empty");
    }
    return report;
}

int print_validation(const ValidationReport& report, std::ostream& out) {
    if (report.clean()) {
        out << "validation: clean\n";
        return kExitOk;
    }
    out << "validation: " << report.issues.size() << " violation(s)\n";
    for (const auto& issue : report.issues) {
        out << "  " << issue.location << ": " << issue.message << "\n";
    }
    return kExitValidation;
}

std::filesystem::path store_path(const Workspace& ws) {
    return ws.config.output_dir / "runs" / (ws.manifest.manifest_id + ".jsonl");
}

int cmd_validate(const CliOptions& options, std::ostream& out,
                 std::ostream& err) {
    Logger log(err, options.log_level_override);
    const Workspace ws = load_workspace(options);
    log.info("validate", "manifest=" + ws.manifest.manifest_id);
    return print_validation(validate_workspace(ws), out);
}

int cmd_tokenize(const CliOptions& options, std::ostream& out,
                 std::ostream& err) {
    Logger log(err, options.log_level_override);
    const Workspace ws = load_workspace(options);
    const auto validation = validate_workspace(ws);
    if (!validation.clean()) return print_validation(validation, err);

    const std::string backend_label =
        ws.tokenizer.is_fallback ? ws.tokenizer.backend->name() + "-fallback"
                                 : ws.tokenizer.backend->name();
    out << "respondent_id,variant,token_count,encoding,backend\n";
    for (const auto& respondent : ws.roster) {
        for (VariantId variant : kAllVariants) {
            const RenderedPrompt prompt = assemble_prompt(
                variant, respondent, ws.background, ws.instrument,
                ws.prompt_template, *ws.tokenizer.backend);
            out << csv_field(respondent.respondent_id) << ','
                << to_string(variant) << ',' << prompt.token_count << ','
                << ws.tokenizer.backend->encoding() << ',' << backend_label
                << "\n";
        }
    }
    log.info("tokenize", "respondents=" + std::to_string(ws.roster.size()));
    return kExitOk;
}

int cmd_simulate(const CliOptions& options, std::ostream& out,
                 std::ostream& err) {
    Logger log(err, options.log_level_override);
    const Workspace ws = load_workspace(options);
    const auto validation = validate_workspace(ws);
    if (!validation.clean()) return print_validation(validation, err);

    // Credentials are checked before any store or network activity.
    std::set<std::string> used;
    for (const auto& condition : enumerate_conditions(ws.manifest)) {
        used.insert(condition.chatbot);
    }
    for (const auto& chatbot : used) {
        const auto* spec = find_provider(ws.providers, chatbot);
        if (spec->kind == ProviderKind::mock) continue;
        const char* key = spec->auth_env_var.empty()
                              ? nullptr
                              : std::getenv(spec->auth_env_var.c_str());
        if (key == nullptr || *key == '\0') {
            log.error("missing_credentials",
                      "provider=" + chatbot + " env=" + spec->auth_env_var);
            err << "provider " << chatbot << " needs credential env var "
                << spec->auth_env_var << "\n";
            return kExitRuntime;
        }
    }

    RunStore store(store_path(ws));
    if (!store.records().empty()) {
        log.info("resume", "existing_records=" +
                               std::to_string(store.records().size()));
    }

    LlmGateway gateway(ws.instrument, make_httplib_transport(),
                       make_system_clock());
    RunContext context;
    context.instrument = &ws.instrument;
    context.roster = &ws.roster;
    context.prompt_template = &ws.prompt_template;
    context.background = ws.background;
    context.providers = &ws.providers;
    context.tokenizer = ws.tokenizer.backend.get();
    context.workers = ws.config.workers;

    const RunSummary summary = execute_run(ws.manifest, store, gateway,
                                           context);
    out << "total=" << summary.total_keys
        << " already_done=" << summary.already_done
        << " executed=" << summary.executed << " ok=" << summary.ok
        << " parse_failed=" << summary.parse_failed
        << " transport_failed=" << summary.transport_failed << "\n";
    log.info("simulate_done", "store=" + store.file_path().string());
    return kExitOk;
}

int cmd_metrics(const CliOptions& options, std::ostream& out,
                std::ostream& err) {
    Logger log(err, options.log_level_override);
    const Workspace ws = load_workspace(options);
    const auto validation = validate_workspace(ws);
    if (!validation.clean()) return print_validation(validation, err);

    RunStore store(store_path(ws));
    MetricsOptions metrics_options;
    metrics_options.partial = options.partial;
    metrics_options.plot_data = options.plot_data;
    metrics_options.per_respondent_correlations = options.per_respondent;

    const MetricsOutput result = write_metrics_reports(
        ws.manifest, store, ws.instrument, ws.roster, ws.tokenizer,
        ws.config.output_dir, metrics_options);

    if (result.refused_partial) {
        err << "store is missing " << result.missing_keys.size()
            << " run key(s); pass --partial to accept gaps\n";
        for (const auto& key : result.missing_keys) {
            err << "  missing: " << key << "\n";
        }
        return kExitPartialRefusal;
    }
    for (const auto& path : result.files_written) {
        out << path.string() << "\n";
    }
    if (!result.condition_exclusions.empty()) {
        for (const auto& key : result.condition_exclusions) {
            log.info("condition_excluded", "condition=" + key);
        }
    }
    log.info("metrics_done",
             "files=" + std::to_string(result.files_written.size()));
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"Batch harness for interview-informed LLM survey simulation "
                 "and alignment metrics"};
    app.require_subcommand(1);

    CliOptions options;
    const char* env_config = std::getenv("SILICON_SURVEY_CONFIG");
    options.config_path = env_config ? env_config : "";

    app.add_option("--config", options.config_path,
                   "Workspace config file (default: $SILICON_SURVEY_CONFIG)");
    app.add_option("--output-dir", options.output_dir_override,
                   "Override the config's output directory");
    app.add_option("--workers", options.workers_override,
                   "Override the worker count");
    app.add_option("--encoding", options.encoding_override,
                   "Override the tokenizer encoding id");
    app.add_option("--encoding-table", options.encoding_table_override,
                   "BPE rank table for the encoding");
    app.add_option("--log-level", options.log_level_override,
                   "quiet or info");

    auto* validate_cmd = app.add_subcommand(
        "validate", "Run all load-time validations");
    auto* tokenize_cmd = app.add_subcommand(
        "tokenize", "Print per-variant, per-respondent token counts as CSV");
    auto* simulate_cmd = app.add_subcommand(
        "simulate", "Execute the manifest's factorial run");
    simulate_cmd->add_flag("--resume", options.resume,
                           "Continue an interrupted run (the default "
                           "behavior; completed keys are always skipped)");
    simulate_cmd->add_option("--manifest", options.manifest_override,
                             "Manifest file (overrides the config)");
    auto* metrics_cmd = app.add_subcommand(
        "metrics", "Compute alignment reports from the run store");
    metrics_cmd->add_flag("--partial", options.partial,
                          "Accept a store with missing keys");
    metrics_cmd->add_flag("--plot-data", options.plot_data,
                          "Also emit long-format plot tables");
    metrics_cmd->add_flag("--per-respondent-correlations",
                          options.per_respondent,
                          "Average per-respondent coefficients instead of "
                          "flattening matrices");

    std::vector<const char*> argv;
    argv.push_back("silicon-survey");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "argument error: " << e.what() << "\n";
        return kExitRuntime;
    }

    if (options.config_path.empty()) {
        err << "no config file: pass --config or set SILICON_SURVEY_CONFIG\n";
        return kExitValidation;
    }

    try {
        if (validate_cmd->parsed()) return cmd_validate(options, out, err);
        if (tokenize_cmd->parsed()) return cmd_tokenize(options, out, err);
        if (simulate_cmd->parsed()) return cmd_simulate(options, out, err);
        if (metrics_cmd->parsed()) return cmd_metrics(options, out, err);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    err << "no subcommand\n";
    return kExitRuntime;
}

}  // namespace silicon
