#pragma once
// Alignment statistics: descriptive item stats, the three RMSE levels,
// Pearson correlations, the balanced three-way main-effects ANOVA, and
// the interview-length association. Pure computation over immutable
// matrices with fixed summation order.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silicon/prompt.hpp"
#include "silicon/survey.hpp"
#include "silicon/tokenizer.hpp"

namespace silicon {

struct ItemStat {
    int item_id = 0;
    double mean = 0.0;
    std::optional<double> variance;  // undefined when n == 1
    int n = 0;
};

// Per-item sample mean and sample variance (n-1 denominator) across rows.
// Throws StructuralError on an empty matrix.
std::vector<ItemStat> item_stats(const ResponseMatrix& matrix);

// Per-item root-mean-square deviation across respondents. Matrices must
// share an identical respondent id set; otherwise StructuralError listing
// the symmetric difference.
std::map<int, double> item_rmse(const ResponseMatrix& ai,
                                const ResponseMatrix& human);

// Per-respondent root-mean-square deviation across items.
std::map<std::string, double> person_rmse(const ResponseMatrix& ai,
                                          const ResponseMatrix& human);

// Root-mean-square deviation of the relative autonomy index across
// respondents.
double test_rmse(const ResponseMatrix& ai, const ResponseMatrix& human,
                 const SurveyInstrument& instrument);

// Sample Pearson coefficient; nullopt when either vector has zero
// variance (never silently 0). Throws StructuralError on length mismatch
// or fewer than two points.
std::optional<double> pearson(const std::vector<double>& x,
                              const std::vector<double>& y);

// Flattens the rows both matrices share (in first-matrix row order,
// items ascending within a row) into two aligned vectors.
struct FlattenedPair {
    std::vector<double> a;
    std::vector<double> b;
    int common_respondents = 0;
};
FlattenedPair flatten_common(const ResponseMatrix& a, const ResponseMatrix& b);

enum class CorrelationMode { flattened, per_respondent_mean };

struct PairCorrelation {
    VariantId variant = VariantId::P_BR;
    double temperature = 0.0;
    std::string chatbot_a;
    std::string chatbot_b;
    std::optional<double> rho;
    int n_points = 0;
};

struct HumanCorrelation {
    std::string chatbot;
    VariantId variant = VariantId::P_BR;
    // nullopt marks the arithmetic mean across temperature cells.
    std::optional<double> temperature;
    std::optional<double> rho;
    int n_points = 0;
};

// Keyed by Condition::key(); missing cells are reported as gaps rather
// than failing the whole computation.
using MatrixByCondition = std::map<std::string, ResponseMatrix>;

struct PairCorrelationResult {
    std::vector<PairCorrelation> cells;
    std::vector<std::string> gaps;  // condition keys with no usable matrix
};

PairCorrelationResult llm_pair_correlations(
    const MatrixByCondition& matrices, const std::vector<std::string>& chatbots,
    const std::vector<VariantId>& variants,
    const std::vector<double>& temperatures,
    CorrelationMode mode = CorrelationMode::flattened);

struct HumanCorrelationResult {
    std::vector<HumanCorrelation> cells;  // per temperature, then mean rows
    std::vector<std::string> gaps;
};

HumanCorrelationResult llm_human_correlations(
    const MatrixByCondition& matrices, const ResponseMatrix& human,
    const std::vector<std::string>& chatbots,
    const std::vector<VariantId>& variants,
    const std::vector<double>& temperatures,
    CorrelationMode mode = CorrelationMode::flattened);

struct AnovaObservation {
    std::string pair_label;
    std::string prompt_level;
    std::string temperature_level;
    double rho = 0.0;
};

struct AnovaRow {
    std::string factor;  // "pair", "prompt", "temperature", "residual"
    int df = 0;
    double ss = 0.0;
    std::optional<double> ms;
    std::optional<double> f;  // undefined on zero residual mean square
    std::optional<double> p;
};

struct AnovaTable {
    std::vector<AnovaRow> rows;  // factors in fixed order, residual last

    const AnovaRow* find(const std::string& factor) const;
};

// Fixed-effects, main-effects-only ANOVA over a balanced full cross with
// one observation per cell. Unbalanced or duplicated cells raise
// StructuralError; there is no approximate fallback.
AnovaTable anova3_main_effects(const std::vector<AnovaObservation>& obs);

struct AssociationResult {
    std::optional<double> rho;
    std::optional<double> p_value;  // two-sided t-test
    int n = 0;
};

// Pearson coefficient between per-respondent interview token counts and
// the respondent's mean person-level RMSE over interview-bearing
// conditions. Undefined with fewer than three respondents or zero
// variance on either side.
AssociationResult interview_length_association(
    const Roster& roster, const TokenizerBackend& tokenizer,
    const std::map<std::string, std::vector<double>>& person_rmse_samples);

}  // namespace silicon
