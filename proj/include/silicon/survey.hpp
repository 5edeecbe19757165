#pragma once
// Survey instrument, respondents and response matrices, plus subscale
// scoring and the relative autonomy index. Everything here is immutable
// after load and safe to share across worker threads.

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace silicon {

struct LikertScale {
    int min_rating = 1;
    int max_rating = 6;
    std::vector<std::string> labels;  // one per rating point

    int point_count() const { return max_rating - min_rating + 1; }
    bool contains(int r) const { return r >= min_rating && r <= max_rating; }
    double midpoint() const { return 0.5 * (min_rating + max_rating); }
};

enum class Valence { positive, negative, neutral };

std::string to_string(Valence v);
std::optional<Valence> valence_from_string(const std::string& s);

struct SurveyItem {
    int item_id = 0;  // 1-based position within the instrument
    std::string text;
    std::string subscale_id;
    std::optional<Valence> valence;  // analysis metadata only
};

struct Subscale {
    std::string subscale_id;
    std::vector<int> item_ids;
    std::optional<double> rai_weight;
};

struct SurveyInstrument {
    std::string name;
    LikertScale scale;
    std::vector<SurveyItem> items;
    std::vector<Subscale> subscales;

    int item_count() const { return static_cast<int>(items.size()); }
    const Subscale* find_subscale(const std::string& id) const;
};

struct Respondent {
    std::string respondent_id;
    std::string interview_transcript;  // may be empty
    std::vector<std::pair<std::string, std::string>> demographics;  // ordered
    std::optional<std::vector<int>> observed_ratings;
};

using Roster = std::vector<Respondent>;

// Persons x items rating grid for one source ("human" or a condition key).
// Rows keep roster order so flattened vectors are deterministic.
struct ResponseMatrix {
    std::string source;
    std::vector<std::pair<std::string, std::vector<int>>> rows;

    const std::vector<int>* find_row(const std::string& respondent_id) const;
    std::size_t row_count() const { return rows.size(); }
};

struct ValidationIssue {
    std::string location;  // item/subscale/respondent id or file area
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool clean() const { return issues.empty(); }
    void add(std::string location, std::string message) {
        issues.push_back({std::move(location), std::move(message)});
    }
};

// Violations are data, not exceptions: the report lists every failing
// invariant with the offending item/subscale ids.
ValidationReport validate_instrument(const SurveyInstrument& instrument);
ValidationReport validate_roster(const Roster& roster,
                                 const SurveyInstrument& instrument);

// Arithmetic mean of the ratings at the subscale's item positions.
// Throws std::out_of_range when an item id does not fit the vector.
double subscale_mean(const std::vector<int>& ratings, const Subscale& subscale);

// Weighted sum of subscale means (weights from the instrument).
// Throws ConfigError when any subscale lacks a weight.
double rai(const std::vector<int>& ratings, const SurveyInstrument& instrument);

// JSON document loaders. Throw ConfigError on unreadable or malformed input.
SurveyInstrument load_instrument(const std::filesystem::path& path);
Roster load_roster(const std::filesystem::path& path);

// Matrix of observed human ratings; respondents without observed ratings
// are skipped. Source label is "human".
ResponseMatrix human_matrix(const Roster& roster,
                            const SurveyInstrument& instrument);

const Respondent* find_respondent(const Roster& roster, const std::string& id);

}  // namespace silicon
