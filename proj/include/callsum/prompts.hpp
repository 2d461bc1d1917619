#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "callsum/error.hpp"
#include "callsum/tokenizer.hpp"

namespace callsum {

enum class TemplateId { caller_descriptions, why, tdat, tdat_context, project_baseline, method_instruction };

const char* template_name(TemplateId id);

struct RenderedPrompt {
    std::string text;
    std::size_t token_count = 0;
    bool truncated = false;
    TemplateId template_id = TemplateId::tdat;
};

struct TokenBudget {
    std::size_t window = 1024;
    std::size_t reserved_for_output = 64;

    /// window - reserved_for_output; throws ConfigError unless reserved < window.
    std::size_t limit() const;
};

/// Raised when the fixed parts of a prompt alone exceed the budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

/// Raw template text as shipped in the templates resource.
const std::string& template_text(TemplateId id);

inline constexpr std::string_view kCallerSeparator = "\n---\n";
inline constexpr std::string_view kWhyPrefix = "This method is used to";

// Commercial-model prompts (no budget).
RenderedPrompt render_caller_descriptions_prompt(const std::vector<std::string>& caller_sources,
                                                 const Tokenizer& tok);
RenderedPrompt render_why_prompt(std::string_view target_source, std::string_view descriptions,
                                 const Tokenizer& tok);
RenderedPrompt render_project_prompt(std::string_view target_source,
                                     const std::vector<std::string>& other_sources, const Tokenizer& tok);
RenderedPrompt render_method_instruction_prompt(std::string_view target_source, const Tokenizer& tok);

// Small-model prompts. With a budget the target tail is cut until the
// prompt fits window - reserved_for_output.
RenderedPrompt render_tdat_prompt(std::string_view target_source, const Tokenizer& tok,
                                  const std::optional<TokenBudget>& budget = std::nullopt);

struct TdatContextParts {
    std::string target_source;              // possibly truncated
    std::vector<std::string> descriptions;  // survivors, original order
};

/// TDAT / CONTEXT / SUMMARY form. Without a summary the text ends after
/// "SUMMARY\n" (inference form). An empty description list omits the CONTEXT
/// section. Under a budget, descriptions are dropped from the end first and
/// the target tail is cut after that. `kept`, when given, receives the parts
/// that survived.
RenderedPrompt render_tdat_context_prompt(std::string_view target_source,
                                          const std::vector<std::string>& descriptions,
                                          const std::optional<std::string>& summary, const Tokenizer& tok,
                                          const std::optional<TokenBudget>& budget = std::nullopt,
                                          TdatContextParts* kept = nullptr);

}  // namespace callsum
