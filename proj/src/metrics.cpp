#include "silicon/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "silicon/condition.hpp"
#include "silicon/errors.hpp"
#include "silicon/stats.hpp"

namespace silicon {

namespace {

// Both matrices must cover the same respondents with equal-length rows.
void require_comparable(const ResponseMatrix& a, const ResponseMatrix& b) {
    std::set<std::string> ids_a;
    std::set<std::string> ids_b;
    for (const auto& [id, row] : a.rows) ids_a.insert(id);
    for (const auto& [id, row] : b.rows) ids_b.insert(id);
    if (ids_a != ids_b) {
        std::ostringstream msg;
        msg << "respondent sets differ between " << a.source << " and "
            << b.source << ";";
        for (const auto& id : ids_a) {
            if (!ids_b.count(id)) msg << " only-left:" << id;
        }
        for (const auto& id : ids_b) {
            if (!ids_a.count(id)) msg << " only-right:" << id;
        }
        throw StructuralError(msg.str());
    }
    std::size_t width = 0;
    for (const auto& [id, row] : a.rows) {
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw StructuralError("ragged rows in matrix " + a.source);
        }
    }
    for (const auto& [id, row] : b.rows) {
        if (row.size() != width) {
            throw StructuralError("row width mismatch between " + a.source +
                                  " and " + b.source + " at respondent " + id);
        }
    }
    if (a.rows.empty()) {
        throw StructuralError("empty matrices cannot be compared");
    }
}

}  // namespace

std::vector<ItemStat> item_stats(const ResponseMatrix& matrix) {
    if (matrix.rows.empty()) {
        throw StructuralError("item_stats on empty matrix " + matrix.source);
    }
    const std::size_t items = matrix.rows.front().second.size();
    for (const auto& [id, row] : matrix.rows) {
        if (row.size() != items) {
            throw StructuralError("ragged rows in matrix " + matrix.source);
        }
    }
    const int n = static_cast<int>(matrix.rows.size());
    std::vector<ItemStat> stats;
    stats.reserve(items);
    for (std::size_t i = 0; i < items; ++i) {
        double sum = 0.0;
        for (const auto& [id, row] : matrix.rows) sum += row[i];
        const double mean = sum / n;
        ItemStat stat;
        stat.item_id = static_cast<int>(i + 1);
        stat.mean = mean;
        stat.n = n;
        if (n > 1) {
            double ss = 0.0;
            for (const auto& [id, row] : matrix.rows) {
                const double d = row[i] - mean;
                ss += d * d;
            }
            stat.variance = ss / (n - 1);
        }
        stats.push_back(stat);
    }
    return stats;
}

std::map<int, double> item_rmse(const ResponseMatrix& ai,
                                const ResponseMatrix& human) {
    require_comparable(ai, human);
    const std::size_t items = ai.rows.front().second.size();
    const double persons = static_cast<double>(ai.rows.size());
    std::map<int, double> out;
    for (std::size_t i = 0; i < items; ++i) {
        double ss = 0.0;
        for (const auto& [id, row] : ai.rows) {
            const auto* other = human.find_row(id);
            const double d = row[i] - (*other)[i];
            ss += d * d;
        }
        out[static_cast<int>(i + 1)] = std::sqrt(ss / persons);
    }
    return out;
}

std::map<std::string, double> person_rmse(const ResponseMatrix& ai,
                                          const ResponseMatrix& human) {
    require_comparable(ai, human);
    const double items =
        static_cast<double>(ai.rows.front().second.size());
    std::map<std::string, double> out;
    for (const auto& [id, row] : ai.rows) {
        const auto* other = human.find_row(id);
        double ss = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const double d = row[i] - (*other)[i];
            ss += d * d;
        }
        out[id] = std::sqrt(ss / items);
    }
    return out;
}

double test_rmse(const ResponseMatrix& ai, const ResponseMatrix& human,
                 const SurveyInstrument& instrument) {
    require_comparable(ai, human);
    double ss = 0.0;
    for (const auto& [id, row] : ai.rows) {
        const auto* other = human.find_row(id);
        const double d = rai(row, instrument) - rai(*other, instrument);
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(ai.rows.size()));
}

std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw StructuralError("pearson: length mismatch");
    }
    if (x.size() < 2) {
        throw StructuralError("pearson: need at least two points");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    const double rho = sxy / std::sqrt(sxx * syy);
    return std::clamp(rho, -1.0, 1.0);
}

FlattenedPair flatten_common(const ResponseMatrix& a,
                             const ResponseMatrix& b) {
    FlattenedPair out;
    for (const auto& [id, row] : a.rows) {
        const auto* other = b.find_row(id);
        if (other == nullptr) continue;
        if (other->size() != row.size()) {
            throw StructuralError("row width mismatch between " + a.source +
                                  " and " + b.source + " at respondent " + id);
        }
        ++out.common_respondents;
        for (std::size_t i = 0; i < row.size(); ++i) {
            out.a.push_back(row[i]);
            out.b.push_back((*other)[i]);
        }
    }
    return out;
}

namespace {

// Single coefficient for a matrix pair under the chosen mode.
struct CellCorrelation {
    std::optional<double> rho;
    int n_points = 0;
};

CellCorrelation correlate_matrices(const ResponseMatrix& a,
                                   const ResponseMatrix& b,
                                   CorrelationMode mode) {
    CellCorrelation out;
    const FlattenedPair flat = flatten_common(a, b);
    out.n_points = static_cast<int>(flat.a.size());
    if (flat.common_respondents == 0) return out;

    if (mode == CorrelationMode::flattened) {
        if (flat.a.size() >= 2) out.rho = pearson(flat.a, flat.b);
        return out;
    }

    // per_respondent_mean: coefficient per shared row, averaged over rows
    // where it is defined.
    double sum = 0.0;
    int defined = 0;
    for (const auto& [id, row] : a.rows) {
        const auto* other = b.find_row(id);
        if (other == nullptr || row.size() < 2) continue;
        std::vector<double> xs(row.begin(), row.end());
        std::vector<double> ys(other->begin(), other->end());
        if (auto r = pearson(xs, ys)) {
            sum += *r;
            ++defined;
        }
    }
    if (defined > 0) out.rho = sum / defined;
    return out;
}

std::string condition_label(const std::string& chatbot, VariantId variant,
                            double temperature) {
    return Condition{chatbot, variant, temperature}.key();
}

}  // namespace

PairCorrelationResult llm_pair_correlations(
    const MatrixByCondition& matrices, const std::vector<std::string>& chatbots,
    const std::vector<VariantId>& variants,
    const std::vector<double>& temperatures, CorrelationMode mode) {
    PairCorrelationResult result;
    for (double temp : temperatures) {
        for (VariantId variant : variants) {
            for (std::size_t i = 0; i < chatbots.size(); ++i) {
                for (std::size_t j = i + 1; j < chatbots.size(); ++j) {
                    const auto key_a = condition_label(chatbots[i], variant, temp);
                    const auto key_b = condition_label(chatbots[j], variant, temp);
                    const auto it_a = matrices.find(key_a);
                    const auto it_b = matrices.find(key_b);
                    if (it_a == matrices.end()) {
                        result.gaps.push_back(key_a);
                        continue;
                    }
                    if (it_b == matrices.end()) {
                        result.gaps.push_back(key_b);
                        continue;
                    }
                    PairCorrelation cell;
                    cell.variant = variant;
                    cell.temperature = temp;
                    cell.chatbot_a = chatbots[i];
                    cell.chatbot_b = chatbots[j];
                    const auto corr =
                        correlate_matrices(it_a->second, it_b->second, mode);
                    cell.rho = corr.rho;
                    cell.n_points = corr.n_points;
                    result.cells.push_back(std::move(cell));
                }
            }
        }
    }
    // Deduplicate gap entries yet keep first-seen order.
    std::set<std::string> seen;
    std::vector<std::string> unique_gaps;
    for (auto& g : result.gaps) {
        if (seen.insert(g).second) unique_gaps.push_back(g);
    }
    result.gaps = std::move(unique_gaps);
    return result;
}

HumanCorrelationResult llm_human_correlations(
    const MatrixByCondition& matrices, const ResponseMatrix& human,
    const std::vector<std::string>& chatbots,
    const std::vector<VariantId>& variants,
    const std::vector<double>& temperatures, CorrelationMode mode) {
    HumanCorrelationResult result;
    for (const auto& chatbot : chatbots) {
        for (VariantId variant : variants) {
            std::vector<double> defined_rhos;
            for (double temp : temperatures) {
                const auto key = condition_label(chatbot, variant, temp);
                const auto it = matrices.find(key);
                if (it == matrices.end()) {
                    result.gaps.push_back(key);
                    continue;
                }
                HumanCorrelation cell;
                cell.chatbot = chatbot;
                cell.variant = variant;
                cell.temperature = temp;
                const auto corr = correlate_matrices(it->second, human, mode);
                cell.rho = corr.rho;
                cell.n_points = corr.n_points;
                if (corr.rho) defined_rhos.push_back(*corr.rho);
                result.cells.push_back(std::move(cell));
            }
            if (!defined_rhos.empty()) {
                HumanCorrelation mean_cell;
                mean_cell.chatbot = chatbot;
                mean_cell.variant = variant;
                double sum = 0.0;
                for (double r : defined_rhos) sum += r;
                mean_cell.rho = sum / static_cast<double>(defined_rhos.size());
                mean_cell.n_points = static_cast<int>(defined_rhos.size());
                result.cells.push_back(std::move(mean_cell));
            }
        }
    }
    return result;
}

const AnovaRow* AnovaTable::find(const std::string& factor) const {
    for (const auto& row : rows) {
        if (row.factor == factor) return &row;
    }
    return nullptr;
}

AnovaTable anova3_main_effects(const std::vector<AnovaObservation>& obs) {
    if (obs.empty()) throw StructuralError("anova: no observations");

    std::vector<std::string> pairs;
    std::vector<std::string> prompts;
    std::vector<std::string> temps;
    auto remember = [](std::vector<std::string>& levels, const std::string& v) {
        if (std::find(levels.begin(), levels.end(), v) == levels.end()) {
            levels.push_back(v);
        }
    };
    std::set<std::string> cells;
    for (const auto& o : obs) {
        remember(pairs, o.pair_label);
        remember(prompts, o.prompt_level);
        remember(temps, o.temperature_level);
        const std::string cell =
            o.pair_label + "\x1f" + o.prompt_level + "\x1f" + o.temperature_level;
        if (!cells.insert(cell).second) {
            throw StructuralError("anova: duplicated cell (" + o.pair_label +
                                  ", " + o.prompt_level + ", " +
                                  o.temperature_level + ")");
        }
    }
    const std::size_t expected = pairs.size() * prompts.size() * temps.size();
    if (obs.size() != expected) {
        throw StructuralError(
            "anova: design is not a balanced full cross; expected " +
            std::to_string(expected) + " cells, got " +
            std::to_string(obs.size()));
    }
    if (pairs.size() < 2 || prompts.size() < 2 || temps.size() < 2) {
        throw StructuralError("anova: every factor needs at least two levels");
    }

    const int n = static_cast<int>(obs.size());
    double grand = 0.0;
    for (const auto& o : obs) grand += o.rho;
    grand /= n;

    double ss_total = 0.0;
    for (const auto& o : obs) {
        const double d = o.rho - grand;
        ss_total += d * d;
    }

    struct Factor {
        std::string name;
        const std::vector<std::string>* levels;
        std::string AnovaObservation::* member;
    };
    const std::vector<Factor> factors = {
        {"pair", &pairs, &AnovaObservation::pair_label},
        {"prompt", &prompts, &AnovaObservation::prompt_level},
        {"temperature", &temps, &AnovaObservation::temperature_level},
    };

    AnovaTable table;
    double ss_model = 0.0;
    int df_model = 0;
    for (const auto& factor : factors) {
        double ss = 0.0;
        for (const auto& level : *factor.levels) {
            double sum = 0.0;
            int count = 0;
            for (const auto& o : obs) {
                if (o.*factor.member == level) {
                    sum += o.rho;
                    ++count;
                }
            }
            const double mean = sum / count;
            ss += count * (mean - grand) * (mean - grand);
        }
        AnovaRow row;
        row.factor = factor.name;
        row.df = static_cast<int>(factor.levels->size()) - 1;
        row.ss = ss;
        row.ms = ss / row.df;
        table.rows.push_back(row);
        ss_model += ss;
        df_model += row.df;
    }

    AnovaRow residual;
    residual.factor = "residual";
    residual.df = n - 1 - df_model;
    residual.ss = std::max(0.0, ss_total - ss_model);
    if (residual.df > 0) residual.ms = residual.ss / residual.df;

    const bool residual_usable =
        residual.ms.has_value() && *residual.ms > 0.0;
    for (auto& row : table.rows) {
        if (residual_usable) {
            row.f = *row.ms / *residual.ms;
            row.p = f_upper_tail(*row.f, row.df, residual.df);
        }
    }
    table.rows.push_back(residual);
    return table;
}

AssociationResult interview_length_association(
    const Roster& roster, const TokenizerBackend& tokenizer,
    const std::map<std::string, std::vector<double>>& person_rmse_samples) {
    std::vector<double> tokens;
    std::vector<double> rmses;
    for (const auto& r : roster) {
        const auto it = person_rmse_samples.find(r.respondent_id);
        if (it == person_rmse_samples.end() || it->second.empty()) continue;
        double sum = 0.0;
        for (double v : it->second) sum += v;
        tokens.push_back(static_cast<double>(
            tokenizer.count_tokens(r.interview_transcript)));
        rmses.push_back(sum / static_cast<double>(it->second.size()));
    }

    AssociationResult out;
    out.n = static_cast<int>(tokens.size());
    if (out.n < 3) return out;

    out.rho = pearson(tokens, rmses);
    if (out.rho) {
        const double r = *out.rho;
        const double df = out.n - 2;
        if (std::fabs(r) >= 1.0) {
            out.p_value = 0.0;
        } else {
            const double t = r * std::sqrt(df / (1.0 - r * r));
            out.p_value = t_two_sided(t, df);
        }
    }
    return out;
}

}  // namespace silicon
