#pragma once
// Prompt assembly: the four component combinations, template rendering,
// the canonical ratings-block format instruction, and token accounting.
// All functions are pure over immutable inputs.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "silicon/survey.hpp"
#include "silicon/tokenizer.hpp"

namespace silicon {

enum class ComponentKind {
    research_background,
    survey_block,
    personal_interview,
    demographics,
};

enum class VariantId { P_BR, P_BR_PI, P_BR_DI, P_BR_PI_DI };

constexpr std::array<VariantId, 4> kAllVariants = {
    VariantId::P_BR, VariantId::P_BR_PI, VariantId::P_BR_DI,
    VariantId::P_BR_PI_DI};

std::string to_string(VariantId v);
VariantId variant_from_string(const std::string& s);
std::string to_string(ComponentKind k);

// Component kinds included by a variant, in assembly order.
std::vector<ComponentKind> variant_components(VariantId v);

bool variant_has(VariantId v, ComponentKind k);

struct PromptTemplate {
    std::string text;
};

// Placeholders every template must contain exactly once.
extern const std::array<std::string, 5> kTemplatePlaceholders;

PromptTemplate load_template(const std::filesystem::path& path);
ValidationReport validate_template(const PromptTemplate& tmpl);

struct RenderedPrompt {
    VariantId variant_id = VariantId::P_BR;
    std::string respondent_id;
    std::string full_text;
    std::size_t token_count = 0;
    std::map<ComponentKind, std::string> component_digest;
};

// Missing required component source (empty transcript for an
// interview-bearing variant, empty demographics for a demographic-bearing
// one, empty background anywhere).
struct AssemblyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Numbered item list, one line per item in item_id order.
std::string survey_block(const SurveyInstrument& instrument);

// Output-format instruction demanding one integer rating per item inside
// a BEGIN RATINGS / END RATINGS block.
std::string format_instruction(const SurveyInstrument& instrument);

// The exact block shape the format instruction demands; also what the
// mock provider emits.
std::string canonical_ratings_block(const std::vector<int>& ratings);

// Corrective suffix appended to a prompt when the previous reply failed to
// parse, for the bounded re-ask policy.
std::string reask_suffix();

RenderedPrompt assemble_prompt(VariantId variant, const Respondent& respondent,
                               const std::string& background,
                               const SurveyInstrument& instrument,
                               const PromptTemplate& tmpl,
                               const TokenizerBackend& tokenizer);

}  // namespace silicon
