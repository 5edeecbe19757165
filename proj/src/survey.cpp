#include "silicon/survey.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "silicon/errors.hpp"

namespace silicon {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Valence v) {
    switch (v) {
        case Valence::positive: return "positive";
        case Valence::negative: return "negative";
        case Valence::neutral: return "neutral";
    }
    return "neutral";
}

std::optional<Valence> valence_from_string(const std::string& s) {
    if (s == "positive") return Valence::positive;
    if (s == "negative") return Valence::negative;
    if (s == "neutral") return Valence::neutral;
    return std::nullopt;
}

const Subscale* SurveyInstrument::find_subscale(const std::string& id) const {
    for (const auto& s : subscales) {
        if (s.subscale_id == id) return &s;
    }
    return nullptr;
}

const std::vector<int>* ResponseMatrix::find_row(
    const std::string& respondent_id) const {
    for (const auto& [id, ratings] : rows) {
        if (id == respondent_id) return &ratings;
    }
    return nullptr;
}

const Respondent* find_respondent(const Roster& roster, const std::string& id) {
    for (const auto& r : roster) {
        if (r.respondent_id == id) return &r;
    }
    return nullptr;
}

ValidationReport validate_instrument(const SurveyInstrument& instrument) {
    ValidationReport report;

    if (instrument.scale.min_rating >= instrument.scale.max_rating) {
        report.add("scale", "min_rating must be below max_rating");
    }
    const auto expected_labels =
        static_cast<std::size_t>(std::max(0, instrument.scale.point_count()));
    if (instrument.scale.labels.size() != expected_labels) {
        report.add("scale", "expected " + std::to_string(expected_labels) +
                                " labels, found " +
                                std::to_string(instrument.scale.labels.size()));
    }

    std::set<int> seen_ids;
    for (const auto& item : instrument.items) {
        const std::string loc = "item " + std::to_string(item.item_id);
        if (item.item_id <= 0) report.add(loc, "item_id must be positive");
        if (!seen_ids.insert(item.item_id).second) {
            report.add(loc, "duplicate item_id");
        }
        if (instrument.find_subscale(item.subscale_id) == nullptr) {
            report.add(loc, "references unknown subscale '" +
                                item.subscale_id + "'");
        }
    }

    std::map<int, std::string> claimed_by;  // item id -> subscale owning it
    std::set<std::string> seen_subscales;
    for (const auto& sub : instrument.subscales) {
        const std::string loc = "subscale " + sub.subscale_id;
        if (!seen_subscales.insert(sub.subscale_id).second) {
            report.add(loc, "duplicate subscale_id");
        }
        if (sub.item_ids.empty()) report.add(loc, "item list is empty");
        for (int id : sub.item_ids) {
            if (!seen_ids.count(id)) {
                report.add(loc, "references item " + std::to_string(id) +
                                    " which does not exist");
            }
            auto [it, inserted] = claimed_by.emplace(id, sub.subscale_id);
            if (!inserted) {
                report.add(loc, "item " + std::to_string(id) +
                                    " already belongs to subscale " +
                                    it->second);
            }
        }
    }

    // Membership must agree in both directions.
    for (const auto& item : instrument.items) {
        auto it = claimed_by.find(item.item_id);
        if (it == claimed_by.end()) {
            report.add("item " + std::to_string(item.item_id),
                       "not listed by any subscale");
        } else if (it->second != item.subscale_id) {
            report.add("item " + std::to_string(item.item_id),
                       "tagged subscale '" + item.subscale_id +
                           "' but listed by subscale '" + it->second + "'");
        }
    }

    return report;
}

ValidationReport validate_roster(const Roster& roster,
                                 const SurveyInstrument& instrument) {
    ValidationReport report;
    std::set<std::string> ids;
    for (const auto& r : roster) {
        const std::string loc = "respondent " + r.respondent_id;
        if (r.respondent_id.empty()) report.add(loc, "empty respondent_id");
        if (!ids.insert(r.respondent_id).second) {
            report.add(loc, "duplicate respondent_id");
        }
        if (!r.observed_ratings) continue;
        const auto& obs = *r.observed_ratings;
        if (static_cast<int>(obs.size()) != instrument.item_count()) {
            report.add(loc, "observed_ratings has " +
                                std::to_string(obs.size()) + " entries, expected " +
                                std::to_string(instrument.item_count()));
            continue;
        }
        for (std::size_t i = 0; i < obs.size(); ++i) {
            if (!instrument.scale.contains(obs[i])) {
                report.add(loc, "rating " + std::to_string(obs[i]) +
                                    " for item " + std::to_string(i + 1) +
                                    " is outside the scale");
            }
        }
    }
    return report;
}

double subscale_mean(const std::vector<int>& ratings, const Subscale& subscale) {
    if (subscale.item_ids.empty()) {
        throw StructuralError("subscale " + subscale.subscale_id +
                              " has no items");
    }
    double sum = 0.0;
    for (int id : subscale.item_ids) {
        if (id < 1 || static_cast<std::size_t>(id) > ratings.size()) {
            throw std::out_of_range("subscale " + subscale.subscale_id +
                                    " references item " + std::to_string(id) +
                                    " outside a vector of length " +
                                    std::to_string(ratings.size()));
        }
        sum += ratings[static_cast<std::size_t>(id - 1)];
    }
    return sum / static_cast<double>(subscale.item_ids.size());
}

double rai(const std::vector<int>& ratings, const SurveyInstrument& instrument) {
    double total = 0.0;
    for (const auto& sub : instrument.subscales) {
        if (!sub.rai_weight) {
            throw ConfigError("subscale " + sub.subscale_id +
                              " has no rai_weight");
        }
        total += *sub.rai_weight * subscale_mean(ratings, sub);
    }
    return total;
}

ResponseMatrix human_matrix(const Roster& roster,
                            const SurveyInstrument& instrument) {
    (void)instrument;
    ResponseMatrix matrix;
    matrix.source = "human";
    for (const auto& r : roster) {
        if (r.observed_ratings) {
            matrix.rows.emplace_back(r.respondent_id, *r.observed_ratings);
        }
    }
    return matrix;
}

namespace {

ordered_json read_json_file(const std::filesystem::path& path,
                            const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(std::string(what) + " file not readable: " +
                          path.string());
    }
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ConfigError(std::string(what) + " file " + path.string() +
                          " is not valid JSON: " + e.what());
    }
    return doc;
}

}  // namespace

SurveyInstrument load_instrument(const std::filesystem::path& path) {
    const ordered_json doc = read_json_file(path, "instrument");
    SurveyInstrument inst;
    try {
        inst.name = doc.at("name").get<std::string>();
        const auto& scale = doc.at("scale");
        inst.scale.min_rating = scale.at("min_rating").get<int>();
        inst.scale.max_rating = scale.at("max_rating").get<int>();
        inst.scale.labels = scale.at("labels").get<std::vector<std::string>>();
        for (const auto& j : doc.at("items")) {
            SurveyItem item;
            item.item_id = j.at("id").get<int>();
            item.text = j.at("text").get<std::string>();
            item.subscale_id = j.at("subscale").get<std::string>();
            if (j.contains("valence")) {
                auto v = valence_from_string(j.at("valence").get<std::string>());
                if (!v) {
                    throw ConfigError("item " + std::to_string(item.item_id) +
                                      ": unknown valence tag");
                }
                item.valence = v;
            }
            inst.items.push_back(std::move(item));
        }
        for (const auto& j : doc.at("subscales")) {
            Subscale sub;
            sub.subscale_id = j.at("id").get<std::string>();
            sub.item_ids = j.at("items").get<std::vector<int>>();
            if (j.contains("rai_weight")) {
                sub.rai_weight = j.at("rai_weight").get<double>();
            }
            inst.subscales.push_back(std::move(sub));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("instrument file " + path.string() +
                          " is malformed: " + e.what());
    }
    return inst;
}

Roster load_roster(const std::filesystem::path& path) {
    const ordered_json doc = read_json_file(path, "roster");
    Roster roster;
    try {
        for (const auto& j : doc.at("respondents")) {
            Respondent r;
            r.respondent_id = j.at("id").get<std::string>();
            if (j.contains("interview_transcript")) {
                r.interview_transcript =
                    j.at("interview_transcript").get<std::string>();
            }
            if (j.contains("demographics")) {
                for (const auto& [key, value] : j.at("demographics").items()) {
                    r.demographics.emplace_back(key, value.get<std::string>());
                }
            }
            if (j.contains("observed_ratings")) {
                r.observed_ratings =
                    j.at("observed_ratings").get<std::vector<int>>();
            }
            roster.push_back(std::move(r));
        }
    } catch (const std::exception& e) {
        throw ConfigError("roster file " + path.string() + " is malformed: " +
                          e.what());
    }
    return roster;
}

}  // namespace silicon
