#include "callsum/callgraph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "callsum/error.hpp"

namespace callsum {

namespace {

using NameArity = std::pair<std::string, std::size_t>;

// Callers per (callee name, argument count), each list sorted by method order
// and free of duplicates.
struct CallerTable {
    std::map<NameArity, std::vector<std::string>> callers;
    std::map<NameArity, std::size_t> definitions;
};

std::unordered_map<std::string, std::size_t> method_ranks(const ProjectIndex& idx)
{
    std::unordered_map<std::string, std::size_t> rank;
    const auto ordered = idx.ordered_methods();
    for (std::size_t i = 0; i < ordered.size(); ++i) rank.emplace(ordered[i]->method_id, i);
    return rank;
}

CallerTable build_table(const ProjectIndex& idx)
{
    const auto rank = method_ranks(idx);
    CallerTable t;
    std::map<NameArity, std::set<std::pair<std::size_t, std::string>>> acc;
    for (const auto& cs : idx.call_sites) {
        auto r = rank.find(cs.caller_id);
        if (r == rank.end()) continue;
        acc[{cs.callee_name, cs.arg_count}].emplace(r->second, cs.caller_id);
    }
    for (auto& [key, set] : acc) {
        auto& v = t.callers[key];
        for (const auto& entry : set) v.push_back(entry.second);
    }
    for (const auto& [id, m] : idx.methods) ++t.definitions[{m.simple_name, m.arity}];
    return t;
}

CallContext resolve(const MethodRecord& target, const std::vector<std::string>* candidates,
                    std::size_t definitions, const ContextPolicy& policy)
{
    CallContext ctx;
    ctx.target_id = target.method_id;
    if (candidates) {
        for (const auto& id : *candidates) {
            if (id == target.method_id) continue;
            if (ctx.caller_ids.size() == policy.cap) {
                ctx.truncated = true;
                break;
            }
            ctx.caller_ids.push_back(id);
        }
    }
    if (definitions > 1) {
        ctx.resolution_notes.push_back(std::to_string(definitions) + " methods share the name '" +
                                       target.simple_name + "' with arity " + std::to_string(target.arity) +
                                       "; callers may belong to another definition");
    }
    if (ctx.truncated) {
        ctx.resolution_notes.push_back("caller list truncated to " + std::to_string(policy.cap));
    }
    return ctx;
}

}  // namespace

CallContext callers_of(const ProjectIndex& idx, const std::string& target, const ContextPolicy& policy)
{
    const MethodRecord* found_target = idx.find(target);
    if (!found_target) throw ConfigError("unknown target method: " + target);
    const MethodRecord& m = *found_target;
    const auto rank = method_ranks(idx);
    std::set<std::pair<std::size_t, std::string>> found;
    for (const auto& cs : idx.call_sites) {
        if (cs.callee_name != m.simple_name || cs.arg_count != m.arity) continue;
        if (auto r = rank.find(cs.caller_id); r != rank.end()) found.emplace(r->second, cs.caller_id);
    }
    std::vector<std::string> ordered;
    for (const auto& e : found) ordered.push_back(e.second);

    std::size_t definitions = 0;
    if (auto it = idx.by_name.find(m.simple_name); it != idx.by_name.end()) {
        for (const auto& id : it->second) {
            if (idx.at(id).arity == m.arity) ++definitions;
        }
    }
    return resolve(m, &ordered, definitions, policy);
}

std::vector<CallContext> contexts_for_all(const ProjectIndex& idx, const ContextPolicy& policy)
{
    const CallerTable table = build_table(idx);
    const auto ordered = idx.ordered_methods();
    std::vector<CallContext> out(ordered.size());
    const auto n = static_cast<std::ptrdiff_t>(ordered.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const MethodRecord& m = *ordered[static_cast<std::size_t>(i)];
        const NameArity key{m.simple_name, m.arity};
        auto c = table.callers.find(key);
        auto d = table.definitions.find(key);
        out[static_cast<std::size_t>(i)] = resolve(m, c == table.callers.end() ? nullptr : &c->second,
                                                   d == table.definitions.end() ? 0 : d->second, policy);
    }
    return out;
}

std::vector<CallContext> contexts_for_all_serial(const ProjectIndex& idx, const ContextPolicy& policy)
{
    std::vector<CallContext> out;
    for (const MethodRecord* m : idx.ordered_methods()) out.push_back(callers_of(idx, m->method_id, policy));
    return out;
}

CorpusStats context_stats(const ProjectIndex& idx, const std::vector<CallContext>& contexts,
                          const std::vector<SummaryRecord>* summaries, const Tokenizer& tokenizer)
{
    if (idx.methods.empty()) throw ConfigError("cannot compute statistics over an empty index");
    CorpusStats s;
    s.method_count = idx.methods.size();
    s.min_tokens_per_method = static_cast<std::size_t>(-1);
    std::size_t total = 0;
    for (const auto& [id, m] : idx.methods) {
        total += m.token_count;
        s.max_tokens_per_method = std::max(s.max_tokens_per_method, m.token_count);
        s.min_tokens_per_method = std::min(s.min_tokens_per_method, m.token_count);
    }
    s.mean_tokens_per_method = static_cast<double>(total) / static_cast<double>(s.method_count);

    s.context_count = contexts.size();
    if (!contexts.empty()) {
        std::size_t callers = 0;
        for (const auto& c : contexts) callers += c.caller_ids.size();
        s.mean_context_size = static_cast<double>(callers) / static_cast<double>(contexts.size());
    }
    if (summaries && !summaries->empty()) {
        std::size_t tokens = 0;
        for (const auto& r : *summaries) tokens += tokenizer.count(r.final_summary);
        s.mean_summary_tokens = static_cast<double>(tokens) / static_cast<double>(summaries->size());
    }
    s.approximate = idx.tokenizer_mode != "bpe" || (s.mean_summary_tokens.has_value() && !tokenizer.exact());
    return s;
}

nlohmann::ordered_json to_json(const CallContext& c)
{
    nlohmann::ordered_json j;
    j["target_id"] = c.target_id;
    j["caller_ids"] = c.caller_ids;
    j["truncated"] = c.truncated;
    j["resolution_notes"] = c.resolution_notes;
    return j;
}

nlohmann::ordered_json to_json(const CorpusStats& s)
{
    nlohmann::ordered_json j;
    j["mean_tokens_per_method"] = s.mean_tokens_per_method;
    j["max_tokens_per_method"] = s.max_tokens_per_method;
    j["min_tokens_per_method"] = s.min_tokens_per_method;
    j["mean_summary_tokens"] = s.mean_summary_tokens ? nlohmann::ordered_json(*s.mean_summary_tokens) : nullptr;
    j["mean_context_size"] = s.mean_context_size;
    j["method_count"] = s.method_count;
    j["context_count"] = s.context_count;
    j["approximate"] = s.approximate;
    return j;
}

}  // namespace callsum
