#include "callsum/prompts.hpp"

#include <map>
#include <sstream>

#include "templates_resource.hpp"

namespace callsum {

namespace {

std::map<std::string, std::string> parse_templates(std::string_view resource)
{
    std::map<std::string, std::string> out;
    std::istringstream in{std::string(resource)};
    std::string line;
    std::string current;
    std::string body;
    auto flush = [&] {
        if (current.empty()) return;
        while (!body.empty() && body.back() == '\n') body.pop_back();
        out[current] = body;
        body.clear();
    };
    while (std::getline(in, line)) {
        if (line.size() > 2 && line.front() == '[' && line.back() == ']') {
            flush();
            current = line.substr(1, line.size() - 2);
            continue;
        }
        if (current.empty()) continue;  // preamble comments
        body += line;
        body += '\n';
    }
    flush();
    return out;
}

const std::map<std::string, std::string>& templates()
{
    static const auto table = parse_templates(detail::kTemplatesResource);
    return table;
}

struct Slot {
    std::string_view placeholder;
    std::string_view value;
};

// Single left-to-right pass so substituted text is never re-scanned.
std::string fill(const std::string& tmpl, std::initializer_list<Slot> slots)
{
    std::string out;
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        std::size_t best = std::string::npos;
        const Slot* hit = nullptr;
        for (const auto& s : slots) {
            const auto p = tmpl.find(s.placeholder, pos);
            if (p < best) {
                best = p;
                hit = &s;
            }
        }
        if (!hit) {
            out.append(tmpl, pos);
            break;
        }
        out.append(tmpl, pos, best - pos);
        out.append(hit->value);
        pos = best + hit->placeholder.size();
    }
    return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out.append(sep);
        out.append(parts[i]);
    }
    return out;
}

RenderedPrompt finish(std::string text, TemplateId id, const Tokenizer& tok, bool truncated = false)
{
    RenderedPrompt p;
    p.token_count = tok.count(text);
    p.text = std::move(text);
    p.truncated = truncated;
    p.template_id = id;
    return p;
}

std::string tdat_text(std::string_view target, const std::vector<std::string>& descriptions,
                      std::size_t n_desc, const std::optional<std::string>& summary)
{
    std::string s = "TDAT\n";
    s.append(target);
    s += '\n';
    if (n_desc > 0) {
        s += "CONTEXT\n";
        for (std::size_t i = 0; i < n_desc; ++i) {
            if (i) s += '\n';
            s += descriptions[i];
        }
        s += '\n';
    }
    s += "SUMMARY\n";
    if (summary) s += *summary;
    return s;
}

// Longest token-aligned prefix of `target` for which build(prefix) fits.
template <typename Build>
std::string cut_target_tail(std::string_view target, const Tokenizer& tok, std::size_t limit, Build build)
{
    const auto spans = tok.spans(target);
    auto prefix = [&](std::size_t k) { return target.substr(0, k == 0 ? 0 : spans[k - 1].end); };
    auto fits = [&](std::size_t k) { return tok.count(build(prefix(k))) <= limit; };
    if (!fits(0)) throw BudgetError("prompt does not fit the token budget even with an empty target");
    std::size_t lo = 0;
    std::size_t hi = spans.size();
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo + 1) / 2;
        if (fits(mid)) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    // Counts are not strictly monotone under BPE; settle on a prefix that fits.
    while (lo > 0 && !fits(lo)) --lo;
    return std::string(prefix(lo));
}

}  // namespace

const char* template_name(TemplateId id)
{
    switch (id) {
    case TemplateId::caller_descriptions: return "caller_descriptions";
    case TemplateId::why: return "why";
    case TemplateId::tdat: return "tdat";
    case TemplateId::tdat_context: return "tdat_context";
    case TemplateId::project_baseline: return "project_baseline";
    case TemplateId::method_instruction: return "method_instruction";
    }
    return "tdat";
}

std::size_t TokenBudget::limit() const
{
    if (reserved_for_output >= window) {
        throw ConfigError("token budget must reserve fewer tokens than the window");
    }
    return window - reserved_for_output;
}

const std::string& template_text(TemplateId id)
{
    const auto& table = templates();
    auto it = table.find(template_name(id));
    if (it == table.end()) throw ConfigError(std::string("no template resource for ") + template_name(id));
    return it->second;
}

RenderedPrompt render_caller_descriptions_prompt(const std::vector<std::string>& caller_sources,
                                                 const Tokenizer& tok)
{
    if (caller_sources.empty()) {
        throw ConfigError("caller description prompt needs at least one caller");
    }
    const std::string ctx = join(caller_sources, kCallerSeparator);
    return finish(fill(template_text(TemplateId::caller_descriptions), {{"{context}", ctx}}),
                  TemplateId::caller_descriptions, tok);
}

RenderedPrompt render_why_prompt(std::string_view target_source, std::string_view descriptions,
                                 const Tokenizer& tok)
{
    if (target_source.empty()) throw ConfigError("why prompt needs a target method");
    if (descriptions.empty()) throw ConfigError("why prompt needs caller descriptions");
    return finish(fill(template_text(TemplateId::why),
                       {{"{target code}", target_source}, {"{descriptions}", descriptions}}),
                  TemplateId::why, tok);
}

RenderedPrompt render_project_prompt(std::string_view target_source,
                                     const std::vector<std::string>& other_sources, const Tokenizer& tok)
{
    const std::string project = join(other_sources, kCallerSeparator);
    return finish(fill(template_text(TemplateId::project_baseline),
                       {{"{target code}", target_source}, {"{project}", project}}),
                  TemplateId::project_baseline, tok);
}

RenderedPrompt render_method_instruction_prompt(std::string_view target_source, const Tokenizer& tok)
{
    return finish(fill(template_text(TemplateId::method_instruction), {{"{target code}", target_source}}),
                  TemplateId::method_instruction, tok);
}

RenderedPrompt render_tdat_prompt(std::string_view target_source, const Tokenizer& tok,
                                  const std::optional<TokenBudget>& budget)
{
    return render_tdat_context_prompt(target_source, {}, std::nullopt, tok, budget);
}

RenderedPrompt render_tdat_context_prompt(std::string_view target_source,
                                          const std::vector<std::string>& descriptions,
                                          const std::optional<std::string>& summary, const Tokenizer& tok,
                                          const std::optional<TokenBudget>& budget, TdatContextParts* kept)
{
    std::size_t n_desc = descriptions.size();
    std::string target(target_source);
    bool truncated = false;

    if (budget) {
        const std::size_t limit = budget->limit();
        auto count_with = [&](std::string_view t, std::size_t n) {
            return tok.count(tdat_text(t, descriptions, n, summary));
        };
        while (n_desc > 0 && count_with(target, n_desc) > limit) {
            --n_desc;
            truncated = true;
        }
        if (count_with(target, n_desc) > limit) {
            target = cut_target_tail(target_source, tok, limit, [&](std::string_view t) {
                return tdat_text(t, descriptions, n_desc, summary);
            });
            truncated = true;
        }
    }

    if (kept) {
        kept->target_source = target;
        kept->descriptions.assign(descriptions.begin(), descriptions.begin() + static_cast<std::ptrdiff_t>(n_desc));
    }
    const TemplateId id = n_desc > 0 ? TemplateId::tdat_context : TemplateId::tdat;
    return finish(tdat_text(target, descriptions, n_desc, summary), id, tok, truncated);
}

}  // namespace callsum
