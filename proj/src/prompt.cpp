#include "silicon/prompt.hpp"

#include <fstream>
#include <sstream>

#include "silicon/errors.hpp"
#include "silicon/hash.hpp"

namespace silicon {

const std::array<std::string, 5> kTemplatePlaceholders = {
    "{{background}}", "{{interview}}", "{{demographics}}", "{{survey_items}}",
    "{{format_instruction}}"};

std::string to_string(VariantId v) {
    switch (v) {
        case VariantId::P_BR: return "P_BR";
        case VariantId::P_BR_PI: return "P_BR_PI";
        case VariantId::P_BR_DI: return "P_BR_DI";
        case VariantId::P_BR_PI_DI: return "P_BR_PI_DI";
    }
    return "P_BR";
}

VariantId variant_from_string(const std::string& s) {
    for (VariantId v : kAllVariants) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown prompt variant '" + s + "'");
}

std::string to_string(ComponentKind k) {
    switch (k) {
        case ComponentKind::research_background: return "research_background";
        case ComponentKind::survey_block: return "survey_block";
        case ComponentKind::personal_interview: return "personal_interview";
        case ComponentKind::demographics: return "demographics";
    }
    return "research_background";
}

std::vector<ComponentKind> variant_components(VariantId v) {
    std::vector<ComponentKind> kinds = {ComponentKind::research_background};
    if (v == VariantId::P_BR_PI || v == VariantId::P_BR_PI_DI) {
        kinds.push_back(ComponentKind::personal_interview);
    }
    if (v == VariantId::P_BR_DI || v == VariantId::P_BR_PI_DI) {
        kinds.push_back(ComponentKind::demographics);
    }
    kinds.push_back(ComponentKind::survey_block);
    return kinds;
}

bool variant_has(VariantId v, ComponentKind k) {
    const auto kinds = variant_components(v);
    return std::find(kinds.begin(), kinds.end(), k) != kinds.end();
}

PromptTemplate load_template(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("template file not readable: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return PromptTemplate{buf.str()};
}

namespace {

std::size_t count_occurrences(const std::string& text,
                              const std::string& needle) {
    std::size_t count = 0;
    for (std::size_t pos = text.find(needle); pos != std::string::npos;
         pos = text.find(needle, pos + needle.size())) {
        ++count;
    }
    return count;
}

std::string replace_once(std::string text, const std::string& placeholder,
                         const std::string& value) {
    const auto pos = text.find(placeholder);
    if (pos != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
    }
    return text;
}

// Collapse runs of three or more newlines left behind by empty components.
std::string tidy_blank_lines(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    int newline_run = 0;
    for (char c : text) {
        if (c == '\n') {
            if (++newline_run <= 2) out.push_back(c);
        } else {
            newline_run = 0;
            out.push_back(c);
        }
    }
    return out;
}

std::string digest_of(std::string_view text) {
    return hex_digest(fnv1a64(text));
}

}  // namespace

ValidationReport validate_template(const PromptTemplate& tmpl) {
    ValidationReport report;
    for (const auto& placeholder : kTemplatePlaceholders) {
        const auto n = count_occurrences(tmpl.text, placeholder);
        if (n == 0) {
            report.add("template", "missing placeholder " + placeholder);
        } else if (n > 1) {
            report.add("template", "placeholder " + placeholder +
                                       " appears " + std::to_string(n) +
                                       " times, expected once");
        }
    }
    return report;
}

std::string survey_block(const SurveyInstrument& instrument) {
    std::ostringstream out;
    out << "SURVEY ITEMS (" << instrument.name << ")\n";
    for (const auto& item : instrument.items) {
        out << item.item_id << ". " << item.text << "\n";
    }
    return out.str();
}

std::string format_instruction(const SurveyInstrument& instrument) {
    const auto& scale = instrument.scale;
    std::ostringstream out;
    out << "Answer with a single ratings block and nothing else. The block "
           "must contain exactly "
        << instrument.item_count()
        << " lines, one per item in order, each of the form "
           "`item_number: rating`, where rating is an integer from "
        << scale.min_rating << " (" << scale.labels.front() << ") to "
        << scale.max_rating << " (" << scale.labels.back() << "). Format:\n"
        << "BEGIN RATINGS\n";
    for (const auto& item : instrument.items) {
        out << item.item_id << ": <rating>\n";
    }
    out << "END RATINGS\n";
    return out.str();
}

std::string canonical_ratings_block(const std::vector<int>& ratings) {
    std::ostringstream out;
    out << "BEGIN RATINGS\n";
    for (std::size_t i = 0; i < ratings.size(); ++i) {
        out << (i + 1) << ": " << ratings[i] << "\n";
    }
    out << "END RATINGS\n";
    return out.str();
}

std::string reask_suffix() {
    return "\n\nYour previous reply could not be read as a ratings block. "
           "Reply again with only the ratings block, exactly in the format "
           "requested above.\n";
}

RenderedPrompt assemble_prompt(VariantId variant, const Respondent& respondent,
                               const std::string& background,
                               const SurveyInstrument& instrument,
                               const PromptTemplate& tmpl,
                               const TokenizerBackend& tokenizer) {
    if (background.empty()) {
        throw AssemblyError("variant " + to_string(variant) +
                            ": research_background text is empty");
    }

    RenderedPrompt prompt;
    prompt.variant_id = variant;
    prompt.respondent_id = respondent.respondent_id;

    const std::string background_block =
        "RESEARCH BACKGROUND\n" + background;
    prompt.component_digest[ComponentKind::research_background] =
        digest_of(background);

    std::string interview_block;
    if (variant_has(variant, ComponentKind::personal_interview)) {
        if (respondent.interview_transcript.empty()) {
            throw AssemblyError("variant " + to_string(variant) +
                                ": missing personal_interview (respondent " +
                                respondent.respondent_id +
                                " has an empty transcript)");
        }
        interview_block = "PERSONAL INTERVIEW TRANSCRIPT\n" +
                          respondent.interview_transcript;
        prompt.component_digest[ComponentKind::personal_interview] =
            digest_of(respondent.interview_transcript);
    }

    std::string demographics_block;
    if (variant_has(variant, ComponentKind::demographics)) {
        if (respondent.demographics.empty()) {
            throw AssemblyError("variant " + to_string(variant) +
                                ": missing demographics (respondent " +
                                respondent.respondent_id +
                                " has no demographic fields)");
        }
        std::ostringstream demo;
        demo << "RESPONDENT DEMOGRAPHICS\n";
        for (const auto& [key, value] : respondent.demographics) {
            demo << key << ": " << value << "\n";
        }
        demographics_block = demo.str();
        prompt.component_digest[ComponentKind::demographics] =
            digest_of(demographics_block);
    }

    const std::string survey = survey_block(instrument);
    prompt.component_digest[ComponentKind::survey_block] = digest_of(survey);

    std::string text = tmpl.text;
    text = replace_once(text, "{{background}}", background_block);
    text = replace_once(text, "{{interview}}", interview_block);
    text = replace_once(text, "{{demographics}}", demographics_block);
    text = replace_once(text, "{{survey_items}}", survey);
    text = replace_once(text, "{{format_instruction}}",
                        format_instruction(instrument));

    prompt.full_text = tidy_blank_lines(text);
    prompt.token_count = tokenizer.count_tokens(prompt.full_text);
    return prompt;
}

}  // namespace silicon
