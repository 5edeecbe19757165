// Acceptance suite. Each criterion prints one PASS/FAIL line; the binary
// exits nonzero if any criterion fails. The oracles here are deliberately
// separate code paths from the library: plain loops over plain vectors,
// no shared helpers.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "silicon/cli.hpp"
#include "silicon/condition.hpp"
#include "silicon/gateway.hpp"
#include "silicon/metrics.hpp"
#include "silicon/prompt.hpp"
#include "silicon/runner.hpp"
#include "silicon/survey.hpp"

namespace fs = std::filesystem;
using namespace silicon;

namespace {

int failures = 0;

void report(int criterion, const std::string& description, bool pass,
            const std::string& detail = "") {
    std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", criterion,
                description.c_str(), detail.empty() ? "" : " -- ",
                detail.c_str());
    if (!pass) ++failures;
}

// ---------------------------------------------------------------------
// Independent oracles: plain loops over persons x items vectors.
// ---------------------------------------------------------------------

using Grid = std::vector<std::vector<int>>;  // persons x items

double oracle_item_mean(const Grid& g, std::size_t item) {
    double s = 0.0;
    for (const auto& row : g) s += row[item];
    return s / static_cast<double>(g.size());
}

double oracle_item_variance(const Grid& g, std::size_t item) {
    const double m = oracle_item_mean(g, item);
    double s = 0.0;
    for (const auto& row : g) s += (row[item] - m) * (row[item] - m);
    return s / static_cast<double>(g.size() - 1);
}

double oracle_item_rmse(const Grid& a, const Grid& b, std::size_t item) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        const double d = a[p][item] - b[p][item];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

double oracle_person_rmse(const Grid& a, const Grid& b, std::size_t person) {
    double s = 0.0;
    for (std::size_t i = 0; i < a[person].size(); ++i) {
        const double d = a[person][i] - b[person][i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a[person].size()));
}

double oracle_pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

// RAI per person from explicit subscale item positions and weights.
double oracle_rai(const std::vector<int>& row,
                  const std::vector<std::vector<std::size_t>>& subscale_items,
                  const std::vector<double>& weights) {
    double total = 0.0;
    for (std::size_t s = 0; s < subscale_items.size(); ++s) {
        double sum = 0.0;
        for (std::size_t idx : subscale_items[s]) sum += row[idx];
        total += weights[s] *
                 (sum / static_cast<double>(subscale_items[s].size()));
    }
    return total;
}

double oracle_test_rmse(const Grid& a, const Grid& b,
                        const std::vector<std::vector<std::size_t>>& subs,
                        const std::vector<double>& weights) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.size(); ++p) {
        const double d =
            oracle_rai(a[p], subs, weights) - oracle_rai(b[p], subs, weights);
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.size()));
}

// ---------------------------------------------------------------------
// Shared scaffolding
// ---------------------------------------------------------------------

ResponseMatrix to_matrix(const Grid& g, const std::string& source) {
    ResponseMatrix m;
    m.source = source;
    for (std::size_t p = 0; p < g.size(); ++p) {
        m.rows.emplace_back("P" + std::to_string(p), g[p]);
    }
    return m;
}

// Round-robin subscale layout with the BREQ weight pattern.
SurveyInstrument synthetic_instrument(int items) {
    SurveyInstrument inst;
    inst.name = "synthetic";
    inst.scale.min_rating = 1;
    inst.scale.max_rating = 6;
    inst.scale.labels = {"1", "2", "3", "4", "5", "6"};
    const std::vector<std::string> names = {"ext", "intj", "ide", "intr"};
    const std::vector<double> weights = {-2.0, -1.0, 1.0, 2.0};
    inst.subscales.resize(4);
    for (int s = 0; s < 4; ++s) {
        inst.subscales[static_cast<std::size_t>(s)].subscale_id = names[static_cast<std::size_t>(s)];
        inst.subscales[static_cast<std::size_t>(s)].rai_weight = weights[static_cast<std::size_t>(s)];
    }
    for (int i = 1; i <= items; ++i) {
        SurveyItem item;
        item.item_id = i;
        item.text = "item " + std::to_string(i);
        item.subscale_id = names[static_cast<std::size_t>((i - 1) % 4)];
        inst.items.push_back(item);
        inst.subscales[static_cast<std::size_t>((i - 1) % 4)].item_ids.push_back(i);
    }
    return inst;
}

Grid random_grid(std::mt19937& rng, int persons, int items) {
    std::uniform_int_distribution<int> rating(1, 6);
    Grid g(static_cast<std::size_t>(persons),
           std::vector<int>(static_cast<std::size_t>(items)));
    for (auto& row : g) {
        for (auto& v : row) v = rating(rng);
    }
    return g;
}

struct TempWorkspace {
    fs::path root;

    explicit TempWorkspace(const std::string& name) {
        root = fs::temp_directory_path() / name;
        fs::remove_all(root);
        fs::create_directories(root / "data");
        const fs::path data(SILICON_DATA_DIR);
        for (const char* file :
             {"breq_instrument.json", "synthetic_roster.json",
              "prompt_template.txt", "providers_mock.json",
              "manifest_mock.json", "background.txt"}) {
            fs::copy_file(data / file, root / "data" / file);
        }
        nlohmann::json config = {
            {"instrument", "breq_instrument.json"},
            {"roster", "synthetic_roster.json"},
            {"template", "prompt_template.txt"},
            {"providers", "providers_mock.json"},
            {"manifest", "manifest_mock.json"},
            {"output_dir", "../out"},
            {"encoding", "o200k_base"},
            {"log_level", "quiet"},
        };
        std::ofstream out(root / "data" / "config.json");
        out << config.dump(2);
    }

    ~TempWorkspace() { fs::remove_all(root); }

    std::string config() const {
        return (root / "data" / "config.json").string();
    }
    fs::path out_dir() const { return root / "out"; }
};

int cli(const TempWorkspace& ws, const std::vector<std::string>& sub) {
    std::ostringstream out;
    std::ostringstream err;
    std::vector<std::string> args = {"--config", ws.config()};
    args.insert(args.end(), sub.begin(), sub.end());
    return run_cli(args, out, err);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::size_t line_count(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

class CountingCompleter final : public Completer {
public:
    explicit CountingCompleter(Completer& inner) : inner_(inner) {}
    CompletionOutcome complete(const ProviderSpec& spec,
                               const CompletionRequest& request) override {
        ++calls;
        return inner_.complete(spec, request);
    }
    Completer& inner_;
    int calls = 0;
};

struct Interrupted {};

class KillSwitchCompleter final : public Completer {
public:
    KillSwitchCompleter(Completer& inner, int allow)
        : inner_(inner), remaining_(allow) {}
    CompletionOutcome complete(const ProviderSpec& spec,
                               const CompletionRequest& request) override {
        if (remaining_-- <= 0) throw Interrupted{};
        return inner_.complete(spec, request);
    }
    Completer& inner_;
    int remaining_;
};

// ---------------------------------------------------------------------
// Criteria
// ---------------------------------------------------------------------

void criterion_1_and_2() {
    const auto started = std::chrono::steady_clock::now();
    std::mt19937 rng(20240501);
    std::uniform_int_distribution<int> persons(2, 25);
    std::uniform_int_distribution<int> items(4, 20);

    constexpr double kTol = 1e-12;
    bool equivalent = true;
    bool identity = true;
    std::string first_failure;

    for (int trial = 0; trial < 1000 && (equivalent || identity); ++trial) {
        const int p = persons(rng);
        const int i = items(rng);
        const Grid ga = random_grid(rng, p, i);
        const Grid gb = random_grid(rng, p, i);
        const auto ma = to_matrix(ga, "ai");
        const auto mb = to_matrix(gb, "human");
        const auto instrument = synthetic_instrument(i);

        std::vector<std::vector<std::size_t>> subs(4);
        for (int k = 1; k <= i; ++k) {
            subs[static_cast<std::size_t>((k - 1) % 4)].push_back(
                static_cast<std::size_t>(k - 1));
        }
        const std::vector<double> weights = {-2.0, -1.0, 1.0, 2.0};

        const auto stats = item_stats(ma);
        const auto by_item = item_rmse(ma, mb);
        const auto by_person = person_rmse(ma, mb);
        const double test_value = test_rmse(ma, mb, instrument);

        for (int k = 0; k < i && equivalent; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            if (std::fabs(stats[idx].mean - oracle_item_mean(ga, idx)) > kTol ||
                std::fabs(*stats[idx].variance -
                          oracle_item_variance(ga, idx)) > kTol ||
                std::fabs(by_item.at(k + 1) - oracle_item_rmse(ga, gb, idx)) >
                    kTol) {
                equivalent = false;
                first_failure = "item stats/rmse trial " + std::to_string(trial);
            }
        }
        for (int k = 0; k < p && equivalent; ++k) {
            const auto idx = static_cast<std::size_t>(k);
            if (std::fabs(by_person.at("P" + std::to_string(k)) -
                          oracle_person_rmse(ga, gb, idx)) > kTol) {
                equivalent = false;
                first_failure = "person rmse trial " + std::to_string(trial);
            }
        }
        if (equivalent &&
            std::fabs(test_value - oracle_test_rmse(ga, gb, subs, weights)) >
                kTol) {
            equivalent = false;
            first_failure = "test rmse trial " + std::to_string(trial);
        }

        // Pearson over the flattened grids.
        std::vector<double> xs;
        std::vector<double> ys;
        for (int r = 0; r < p; ++r) {
            for (int k = 0; k < i; ++k) {
                xs.push_back(ga[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
                ys.push_back(gb[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)]);
            }
        }
        const auto rho = pearson(xs, ys);
        if (equivalent && rho.has_value() &&
            std::fabs(*rho - oracle_pearson(xs, ys)) > kTol) {
            equivalent = false;
            first_failure = "pearson trial " + std::to_string(trial);
        }

        // Total squared deviation identity, relative 1e-9.
        double item_total = 0.0;
        for (const auto& [id, v] : by_item) item_total += v * v;
        double person_total = 0.0;
        for (const auto& [id, v] : by_person) person_total += v * v;
        const double lhs = p * item_total;
        const double rhs = i * person_total;
        const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1.0});
        if (std::fabs(lhs - rhs) > 1e-9 * scale) {
            identity = false;
            first_failure = "identity trial " + std::to_string(trial);
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    report(1,
           "metric-oracle equivalence within 1e-12 on 1000 random matrices",
           equivalent && elapsed < 10.0,
           first_failure.empty()
               ? "elapsed " + std::to_string(elapsed) + " s"
               : first_failure);
    report(2, "P*sum(RMSE_i^2) == I*sum(RMSE_p^2) within 1e-9 relative",
           identity, first_failure);
}

void criterion_3() {
    const auto instrument =
        load_instrument(fs::path(SILICON_DATA_DIR) / "breq_instrument.json");
    bool pass = true;
    std::string detail;
    for (int v = instrument.scale.min_rating; v <= instrument.scale.max_rating;
         ++v) {
        const double value = rai(std::vector<int>(15, v), instrument);
        if (value != 0.0) {
            pass = false;
            detail = "constant vector " + std::to_string(v) + " gave " +
                     std::to_string(value);
        }
    }
    std::vector<int> hand(15);
    for (int i = 0; i < 4; ++i) hand[static_cast<std::size_t>(i)] = 1;
    for (int i = 4; i < 7; ++i) hand[static_cast<std::size_t>(i)] = 2;
    for (int i = 7; i < 11; ++i) hand[static_cast<std::size_t>(i)] = 5;
    for (int i = 11; i < 15; ++i) hand[static_cast<std::size_t>(i)] = 6;
    const double hand_value = rai(hand, instrument);
    if (hand_value != 13.0) {
        pass = false;
        detail = "hand case gave " + std::to_string(hand_value);
    }
    report(3, "RAI weights (-2,-1,+1,+2): constant vectors 0, hand case 13",
           pass, detail);
}

void criterion_4() {
    // Frozen reference set and expectations generated with numpy/statsmodels
    // (tests/reference/make_reference_values.py).
    const std::vector<AnovaObservation> obs = {
        {"A~B", "P1", "0", 0.888841150597483},
        {"A~B", "P1", "0.5", 0.864283962479731},
        {"A~B", "P2", "0", 0.95021661812243},
        {"A~B", "P2", "0.5", 0.928019584001812},
        {"A~B", "P3", "0", 0.910302947976034},
        {"A~B", "P3", "0.5", 0.879794617753222},
        {"A~B", "P4", "0", 0.979116667144816},
        {"A~B", "P4", "0.5", 0.920110729921545},
        {"A~C", "P1", "0", 0.836618353466533},
        {"A~C", "P1", "0.5", 0.819285220384116},
        {"A~C", "P2", "0", 0.900398455646303},
        {"A~C", "P2", "0.5", 0.872072722629218},
        {"A~C", "P3", "0", 0.878656624042967},
        {"A~C", "P3", "0.5", 0.840161006712424},
        {"A~C", "P4", "0", 0.929315241776012},
        {"A~C", "P4", "0.5", 0.87518615826704},
        {"B~C", "P1", "0", 0.840941569941637},
        {"B~C", "P1", "0.5", 0.790847309467201},
        {"B~C", "P2", "0", 0.892335725274528},
        {"B~C", "P2", "0.5", 0.855317763117355},
        {"B~C", "P3", "0", 0.862619924532481},
        {"B~C", "P3", "0.5", 0.836372175482273},
        {"B~C", "P4", "0", 0.903647543184857},
        {"B~C", "P4", "0.5", 0.874020909473998},
    };
    struct Expect {
        const char* factor;
        int df;
        double f;
        double p;
    };
    const Expect expected[] = {
        {"pair", 2, 103.782175018796, 2.96769268397298e-10},
        {"prompt", 3, 89.6305408743999, 1.27301964843831e-10},
        {"temperature", 1, 100.203215873239, 1.52541325506324e-08},
    };

    bool pass = true;
    std::string detail;
    try {
        const auto table = anova3_main_effects(obs);
        const auto* residual = table.find("residual");
        if (residual == nullptr || residual->df != 17) {
            pass = false;
            detail = "residual df";
        }
        for (const auto& e : expected) {
            const auto* row = table.find(e.factor);
            if (row == nullptr || row->df != e.df) {
                pass = false;
                detail = std::string(e.factor) + " df";
                break;
            }
            if (std::fabs(*row->f - e.f) > 1e-9 + 1e-9 * std::fabs(e.f)) {
                pass = false;
                detail = std::string(e.factor) + " F deviates";
                break;
            }
            if (std::fabs(*row->p - e.p) > 1e-9 + 1e-9 * std::fabs(e.p)) {
                pass = false;
                detail = std::string(e.factor) + " p deviates";
                break;
            }
        }
    } catch (const std::exception& e) {
        pass = false;
        detail = e.what();
    }
    report(4, "balanced 3x4x2 ANOVA: dfs (2,3,1,17), F and p vs reference",
           pass, detail);
}

void criterion_5() {
    const auto started = std::chrono::steady_clock::now();
    TempWorkspace ws("silicon_accept_c5");

    bool pass = true;
    std::string detail;

    const auto manifest =
        load_manifest(ws.root / "data" / "manifest_mock.json");
    if (enumerate_conditions(manifest).size() != 24) {
        pass = false;
        detail = "condition count";
    }

    if (pass && cli(ws, {"validate"}) != 0) {
        pass = false;
        detail = "validate failed";
    }
    if (pass && cli(ws, {"simulate"}) != 0) {
        pass = false;
        detail = "simulate failed";
    }
    if (pass && cli(ws, {"metrics"}) != 0) {
        pass = false;
        detail = "metrics failed";
    }

    if (pass) {
        const auto store = ws.out_dir() / "runs" / "mock-breq-24.jsonl";
        std::size_t ok_lines = 0;
        std::ifstream in(store);
        std::string line;
        while (std::getline(in, line)) {
            if (line.find("\"status\":\"ok\"") != std::string::npos) {
                ++ok_lines;
            }
        }
        if (ok_lines != 72) {
            pass = false;
            detail = "ok records " + std::to_string(ok_lines);
        }
    }

    const struct {
        const char* file;
        std::size_t rows;
    } expected[] = {
        {"item_stats.csv", 375},          // 24 conditions x 15 items + 15 human
        {"rmse_item.csv", 360},           // 24 x 15
        {"rmse_person.csv", 72},          // 24 x 3
        {"rmse_test.csv", 24},
        {"correlations_pairs.csv", 8},    // temperature x variant cells
        {"correlations_human.csv", 36},   // 24 cells + 12 means
        {"anova.csv", 4},
    };
    for (const auto& e : expected) {
        if (!pass) break;
        const auto got = line_count(ws.out_dir() / e.file);
        if (got != e.rows + 1) {  // header
            pass = false;
            detail = std::string(e.file) + " rows " + std::to_string(got);
        }
    }

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      started)
            .count();
    if (elapsed >= 5.0) {
        pass = false;
        detail = "elapsed " + std::to_string(elapsed) + " s";
    }
    report(5,
           "24-condition mock manifest: 72 ok records and exact report row "
           "counts",
           pass, detail.empty() ? "elapsed " + std::to_string(elapsed) + " s"
                                : detail);
}

void criterion_6() {
    bool pass = true;
    std::string detail;

    // Two clean workspaces, identical config and seed.
    std::map<std::string, std::string> first_bytes;
    {
        TempWorkspace ws_a("silicon_accept_c6a");
        if (cli(ws_a, {"simulate"}) != 0 || cli(ws_a, {"metrics"}) != 0) {
            pass = false;
            detail = "pipeline a failed";
        } else {
            first_bytes["store"] =
                slurp(ws_a.out_dir() / "runs" / "mock-breq-24.jsonl");
            for (const char* f :
                 {"item_stats.csv", "rmse_item.csv", "rmse_person.csv",
                  "rmse_test.csv", "correlations_pairs.csv",
                  "correlations_human.csv", "anova.csv", "run_summary.json"}) {
                first_bytes[f] = slurp(ws_a.out_dir() / f);
            }
        }
    }
    if (pass) {
        TempWorkspace ws_b("silicon_accept_c6b");
        if (cli(ws_b, {"simulate"}) != 0 || cli(ws_b, {"metrics"}) != 0) {
            pass = false;
            detail = "pipeline b failed";
        } else {
            if (first_bytes["store"] !=
                slurp(ws_b.out_dir() / "runs" / "mock-breq-24.jsonl")) {
                pass = false;
                detail = "store bytes differ";
            }
            for (const char* f :
                 {"item_stats.csv", "rmse_item.csv", "rmse_person.csv",
                  "rmse_test.csv", "correlations_pairs.csv",
                  "correlations_human.csv", "anova.csv", "run_summary.json"}) {
                if (pass && first_bytes[f] != slurp(ws_b.out_dir() / f)) {
                    pass = false;
                    detail = std::string(f) + " bytes differ";
                }
            }
        }
    }

    // Mock temperature contract: zero variance at 0, positive at 0.5.
    if (pass) {
        const fs::path data(SILICON_DATA_DIR);
        const auto instrument = load_instrument(data / "breq_instrument.json");
        const auto roster = load_roster(data / "synthetic_roster.json");
        const auto tmpl = load_template(data / "prompt_template.txt");
        const auto providers = load_providers(data / "providers_mock.json");
        const auto tokenizer = make_approx_tokenizer("approx");

        RunManifest manifest;
        manifest.manifest_id = "repeat-variance";
        manifest.chatbots = {"gpt"};
        manifest.variants = {VariantId::P_BR};
        manifest.temperatures = {0.0, 0.5};
        manifest.repeats_per_cell = 8;
        manifest.master_seed = 99;

        RunContext context;
        context.instrument = &instrument;
        context.roster = &roster;
        context.prompt_template = &tmpl;
        context.background = "Motivation study.";
        context.providers = &providers;
        context.tokenizer = tokenizer.get();

        const auto dir =
            fs::temp_directory_path() / "silicon_accept_c6_repeats";
        fs::remove_all(dir);
        RunStore store(dir / "s.jsonl");
        LlmGateway gateway(instrument, nullptr, make_system_clock());
        execute_run(manifest, store, gateway, context);

        auto repeat_variance = [&](double temperature) {
            // Sum over (respondent, item) of variance across repeats.
            double total = 0.0;
            for (const auto& r : roster) {
                std::vector<std::vector<int>> repeats;
                for (const auto& record : store.records()) {
                    if (record.key.condition.temperature == temperature &&
                        record.key.respondent_id == r.respondent_id) {
                        repeats.push_back(*record.parsed.ratings);
                    }
                }
                for (std::size_t i = 0; i < repeats.front().size(); ++i) {
                    double mean = 0.0;
                    for (const auto& rep : repeats) mean += rep[i];
                    mean /= static_cast<double>(repeats.size());
                    for (const auto& rep : repeats) {
                        total += (rep[i] - mean) * (rep[i] - mean);
                    }
                }
            }
            return total;
        };
        const double var_low = repeat_variance(0.0);
        const double var_high = repeat_variance(0.5);
        if (var_low != 0.0) {
            pass = false;
            detail = "temperature-0 repeats vary";
        } else if (var_high <= 0.0) {
            pass = false;
            detail = "temperature-0.5 repeats do not vary";
        }
        fs::remove_all(dir);
    }

    report(6,
           "byte-identical mock pipelines; zero variance at temp 0, positive "
           "at 0.5",
           pass, detail);
}

void criterion_7() {
    const auto instrument =
        load_instrument(fs::path(SILICON_DATA_DIR) / "breq_instrument.json");
    std::mt19937 rng(777);
    std::uniform_int_distribution<int> rating(1, 6);
    std::uniform_int_distribution<int> preamble_pick(0, 3);
    const std::vector<std::string> preambles = {
        "",
        "Sure, here is my honest answer as the interviewee.\n\n",
        "Of course. Having read the interview, my answers follow.\n",
        "As requested, only the block:\n",
    };

    bool pass = true;
    std::string detail;
    int checked = 0;
    for (int trial = 0; trial < 10000 && pass; ++trial) {
        std::vector<int> v(15);
        for (auto& r : v) r = rating(rng);
        const std::string text =
            preambles[static_cast<std::size_t>(preamble_pick(rng))] +
            canonical_ratings_block(v);
        const auto parsed = parse_ratings(text, instrument);
        if (!parsed.ok() || *parsed.ratings != v) {
            pass = false;
            detail = "round trip failed at trial " + std::to_string(trial);
        }
        ++checked;
    }

    // Malformed mutations must yield the matching failure kind.
    std::uniform_int_distribution<int> line_pick(1, 15);
    for (int trial = 0; trial < 1000 && pass; ++trial) {
        std::vector<int> v(15);
        for (auto& r : v) r = rating(rng);
        auto block = canonical_ratings_block(v);

        const int mode = trial % 3;
        if (mode == 0) {
            // Drop one line: wrong_count.
            const int victim = line_pick(rng);
            const std::string needle =
                std::to_string(victim) + ": " + std::to_string(v[static_cast<std::size_t>(victim - 1)]) + "\n";
            block.erase(block.find(needle), needle.size());
            const auto parsed = parse_ratings(block, instrument);
            if (parsed.ok() ||
                *parsed.failure_kind != RatingsFailure::wrong_count) {
                pass = false;
                detail = "wrong_count not detected";
            }
        } else if (mode == 1) {
            // Push one value out of range: out_of_range.
            const int victim = line_pick(rng);
            const std::string needle =
                std::to_string(victim) + ": " +
                std::to_string(v[static_cast<std::size_t>(victim - 1)]) + "\n";
            const std::string replacement =
                std::to_string(victim) + ": " + ((trial % 2) ? "7" : "0") + "\n";
            block.replace(block.find(needle), needle.size(), replacement);
            const auto parsed = parse_ratings(block, instrument);
            if (parsed.ok() ||
                *parsed.failure_kind != RatingsFailure::out_of_range) {
                pass = false;
                detail = "out_of_range not detected";
            }
        } else {
            // Garbage: unparseable.
            const auto parsed = parse_ratings(
                "I am sorry but I cannot commit to numbers today.",
                instrument);
            if (parsed.ok() ||
                *parsed.failure_kind != RatingsFailure::unparseable) {
                pass = false;
                detail = "unparseable not detected";
            }
        }
    }

    report(7,
           "parser round-trips 10000 rendered vectors and classifies "
           "malformed blocks",
           pass,
           detail.empty() ? std::to_string(checked) + " vectors" : detail);
}

void criterion_8() {
    const fs::path data(SILICON_DATA_DIR);
    const auto instrument = load_instrument(data / "breq_instrument.json");
    const auto roster = load_roster(data / "synthetic_roster.json");
    const auto tmpl = load_template(data / "prompt_template.txt");
    const auto tokenizer = make_approx_tokenizer("approx");
    const std::string background = slurp(data / "background.txt");

    bool pass = true;
    std::string detail;
    for (const auto& person : roster) {
        std::map<VariantId, RenderedPrompt> prompts;
        for (VariantId v : kAllVariants) {
            prompts[v] = assemble_prompt(v, person, background, instrument,
                                         tmpl, *tokenizer);
            const auto again = assemble_prompt(v, person, background,
                                               instrument, tmpl, *tokenizer);
            if (prompts[v].full_text != again.full_text) {
                pass = false;
                detail = "assembly not byte-deterministic";
            }
        }
        const auto t = [&](VariantId v) { return prompts[v].token_count; };
        if (!(t(VariantId::P_BR) <= t(VariantId::P_BR_PI) &&
              t(VariantId::P_BR_PI) <= t(VariantId::P_BR_PI_DI) &&
              t(VariantId::P_BR) <= t(VariantId::P_BR_DI) &&
              t(VariantId::P_BR_DI) <= t(VariantId::P_BR_PI_DI))) {
            pass = false;
            detail = "monotonicity violated for " + person.respondent_id;
        }
    }
    report(8, "token counts ordered P_BR <= P_BR_PI/DI <= P_BR_PI_DI, "
              "deterministic assembly",
           pass, detail);
}

void criterion_9() {
    const fs::path data(SILICON_DATA_DIR);
    const auto instrument = load_instrument(data / "breq_instrument.json");
    const auto roster = load_roster(data / "synthetic_roster.json");
    const auto tmpl = load_template(data / "prompt_template.txt");
    const auto providers = load_providers(data / "providers_mock.json");
    const auto tokenizer = make_approx_tokenizer("approx");

    RunManifest manifest;
    manifest.manifest_id = "resume-check";
    manifest.chatbots = {"gpt", "claude", "gemini"};
    manifest.variants = {VariantId::P_BR, VariantId::P_BR_PI,
                         VariantId::P_BR_DI, VariantId::P_BR_PI_DI};
    manifest.temperatures = {0.0, 0.5};
    manifest.repeats_per_cell = 1;
    manifest.master_seed = 20240501;

    RunContext context;
    context.instrument = &instrument;
    context.roster = &roster;
    context.prompt_template = &tmpl;
    context.background = "Motivation study.";
    context.providers = &providers;
    context.tokenizer = tokenizer.get();

    LlmGateway gateway(instrument, nullptr, make_system_clock());
    const int total = 72;
    const int kill_after = 37;

    bool pass = true;
    std::string detail;
    const auto dir = fs::temp_directory_path() / "silicon_accept_c9";
    fs::remove_all(dir);
    {
        RunStore store(dir / "s.jsonl");
        KillSwitchCompleter killer(gateway, kill_after);
        try {
            execute_run(manifest, store, killer, context);
            pass = false;
            detail = "kill switch never fired";
        } catch (const Interrupted&) {
        }
    }
    if (pass) {
        RunStore store(dir / "s.jsonl");
        if (static_cast<int>(store.records().size()) != kill_after) {
            pass = false;
            detail = "interrupted store has " +
                     std::to_string(store.records().size()) + " records";
        } else {
            CountingCompleter counter(gateway);
            execute_run(manifest, store, counter, context);
            if (counter.calls != total - kill_after) {
                pass = false;
                detail = "resume made " + std::to_string(counter.calls) +
                         " calls, expected " +
                         std::to_string(total - kill_after);
            } else if (static_cast<int>(store.records().size()) != total) {
                pass = false;
                detail = "resumed store incomplete";
            }
        }
    }
    fs::remove_all(dir);
    report(9, "interrupted run resumes with exactly n-k provider calls", pass,
           detail);
}

}  // namespace

int main() {
    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (failures > 0) {
        std::printf("%d criterion check(s) failed\n", failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
