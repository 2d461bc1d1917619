#include "callsum/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "callsum/error.hpp"
#include "callsum/hash.hpp"
#include "callsum/java_lexer.hpp"

namespace callsum {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

// Descriptions are one per line in the CONTEXT section.
std::string one_line(std::string_view s)
{
    std::string out = trim(s);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

bool has_empty_body(std::string_view src)
{
    const auto toks = lex_java(src);
    int paren = 0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (is_punct(toks[k], "(")) ++paren;
        if (is_punct(toks[k], ")")) --paren;
        if (paren == 0 && is_punct(toks[k], "{")) return k + 1 < toks.size() && is_punct(toks[k + 1], "}");
    }
    return true;
}

SummaryRecord start_record(const PipelineContext& ctx, const std::string& target, Process p,
                           const Backend& backend)
{
    SummaryRecord r;
    r.method_id = target;
    r.process = p;
    r.backend_name = backend.name();
    r.created_at = ctx.clock ? ctx.clock() : std::string{};
    return r;
}

void run_final(SummaryRecord& rec, const RenderedPrompt& prompt, const Backend& backend)
{
    rec.prompt_hash = sha256_hex(prompt.text);
    if (prompt.truncated) rec.warnings.push_back("prompt truncated to fit the token budget");
    try {
        CompletionResult res = backend.complete(prompt);
        rec.final_summary = trim(res.text);
        rec.warnings.insert(rec.warnings.end(), res.warnings.begin(), res.warnings.end());
    } catch (const std::exception& e) {
        rec.error = e.what();
    }
}

RenderedPrompt single_method_prompt(const PipelineContext& ctx, const std::string& source, const Backend& backend)
{
    if (backend.config().prompt_style == PromptStyle::tdat) {
        return render_tdat_prompt(source, ctx.tok, ctx.policy.budget);
    }
    return render_method_instruction_prompt(source, ctx.tok);
}

std::vector<std::string> nonempty_lines(std::string_view text)
{
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

// Runs fn(i) for i in [0, n) on up to `workers` threads.
template <typename Fn>
void parallel_indexed(std::size_t n, int workers, Fn fn)
{
    const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
}

}  // namespace

std::string utc_timestamp()
{
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

SummaryRecord summarize_p1(const PipelineContext& ctx, const std::string& target, const Backend& backend)
{
    const MethodRecord& m = ctx.idx.at(target);
    SummaryRecord rec = start_record(ctx, target, Process::p1, backend);
    if (has_empty_body(m.source_text)) rec.warnings.push_back("method body is empty");
    RenderedPrompt prompt;
    try {
        prompt = single_method_prompt(ctx, m.source_text, backend);
    } catch (const BudgetError& e) {
        rec.error = e.what();
        return rec;
    }
    run_final(rec, prompt, backend);
    return rec;
}

SummaryRecord summarize_p2(const PipelineContext& ctx, const std::string& target, const Backend& backend)
{
    const MethodRecord& m = ctx.idx.at(target);
    if (!backend.config().long_window) {
        throw ConfigError("backend " + backend.name() + " is not declared long_window; process p2 needs one");
    }
    SummaryRecord rec = start_record(ctx, target, Process::p2, backend);
    std::vector<std::string> others;
    for (const MethodRecord* o : ctx.idx.ordered_methods()) {
        if (o->method_id != target) others.push_back(o->source_text);
    }
    const RenderedPrompt prompt = render_project_prompt(m.source_text, others, ctx.tok);
    if (prompt.token_count > ctx.policy.project_token_cap) {
        rec.prompt_hash = sha256_hex(prompt.text);
        rec.error = "project prompt has " + std::to_string(prompt.token_count) + " tokens, above the cap of " +
                    std::to_string(ctx.policy.project_token_cap);
        return rec;
    }
    run_final(rec, prompt, backend);
    return rec;
}

SummaryRecord summarize_p3(const PipelineContext& ctx, const std::string& target, const Backend& caller_backend,
                           const Backend& why_backend)
{
    const MethodRecord& m = ctx.idx.at(target);
    const CallContext context = callers_of(ctx.idx, target, ctx.policy.context);

    auto fallback = [&](std::vector<std::string> warnings, std::string reason) {
        SummaryRecord rec = summarize_p1(ctx, target, why_backend);
        rec.process = Process::p3;
        warnings.push_back(std::move(reason));
        rec.warnings.insert(rec.warnings.begin(), warnings.begin(), warnings.end());
        return rec;
    };

    std::vector<std::string> notes;
    for (const auto& n : context.resolution_notes) notes.push_back("context: " + n);
    if (context.caller_ids.empty()) {
        return fallback(notes, "empty call context; summarized the target method alone");
    }

    SummaryRecord rec = start_record(ctx, target, Process::p3, why_backend);
    rec.warnings = notes;
    RenderedPrompt final_prompt;

    if (ctx.policy.route == Route::small_model) {
        std::vector<std::string> descriptions;
        for (const auto& caller : context.caller_ids) {
            try {
                const RenderedPrompt p = render_tdat_prompt(ctx.idx.at(caller).source_text, ctx.tok, ctx.policy.budget);
                const CompletionResult res = caller_backend.complete(p);
                std::string text = one_line(res.text);
                if (text.empty()) {
                    rec.warnings.push_back("caller " + caller + " skipped: empty summary");
                    continue;
                }
                rec.caller_summaries.emplace_back(caller, text);
                descriptions.push_back(std::move(text));
            } catch (const std::exception& e) {
                rec.warnings.push_back("caller " + caller + " skipped: " + e.what());
            }
        }
        if (descriptions.empty()) {
            return fallback(rec.warnings, "no caller could be summarized; summarized the target method alone");
        }
        try {
            final_prompt = render_tdat_context_prompt(m.source_text, descriptions, std::nullopt, ctx.tok,
                                                      ctx.policy.budget);
        } catch (const BudgetError& e) {
            rec.error = e.what();
            return rec;
        }
    } else {
        std::vector<std::string> sources;
        for (const auto& caller : context.caller_ids) sources.push_back(ctx.idx.at(caller).source_text);
        std::string described;
        try {
            const CompletionResult res =
                caller_backend.complete(render_caller_descriptions_prompt(sources, ctx.tok));
            described = trim(res.text);
        } catch (const std::exception& e) {
            rec.warnings.push_back(std::string("caller descriptions failed: ") + e.what());
        }
        if (described.empty()) {
            return fallback(rec.warnings, "no caller descriptions; summarized the target method alone");
        }
        const auto lines = nonempty_lines(described);
        if (lines.size() == context.caller_ids.size()) {
            for (std::size_t i = 0; i < lines.size(); ++i) {
                rec.caller_summaries.emplace_back(context.caller_ids[i], lines[i]);
            }
        } else {
            rec.warnings.push_back("caller descriptions could not be split per caller");
            for (const auto& caller : context.caller_ids) rec.caller_summaries.emplace_back(caller, described);
        }
        final_prompt = render_why_prompt(m.source_text, described, ctx.tok);
    }

    run_final(rec, final_prompt, why_backend);
    if (rec.ok() && !rec.final_summary.starts_with(kWhyPrefix)) {
        rec.warnings.push_back("final summary does not start with \"" + std::string(kWhyPrefix) + "\"");
    }
    return rec;
}

std::vector<SummaryRecord> summarize_many(const PipelineContext& ctx, Process process,
                                          const std::vector<std::string>& targets, const Backend& caller_backend,
                                          const Backend& why_backend)
{
    std::vector<SummaryRecord> out(targets.size());
    parallel_indexed(targets.size(), why_backend.config().parallelism, [&](std::size_t i) {
        try {
            switch (process) {
            case Process::p1: out[i] = summarize_p1(ctx, targets[i], why_backend); break;
            case Process::p2: out[i] = summarize_p2(ctx, targets[i], why_backend); break;
            case Process::p3: out[i] = summarize_p3(ctx, targets[i], caller_backend, why_backend); break;
            }
        } catch (const std::exception& e) {
            out[i] = start_record(ctx, targets[i], process, why_backend);
            out[i].error = e.what();
        }
    });
    return out;
}

nlohmann::ordered_json to_json(const TrainingExample& e)
{
    nlohmann::ordered_json j;
    j["method_id"] = e.method_id;
    j["target_source"] = e.target_source;
    j["descriptions"] = e.descriptions;
    j["summary"] = e.summary;
    j["serialized_prompt"] = e.serialized_prompt;
    return j;
}

TrainingExample training_example_from_json(const nlohmann::json& j)
{
    TrainingExample e;
    e.method_id = j.at("method_id").get<std::string>();
    e.target_source = j.at("target_source").get<std::string>();
    e.descriptions = j.at("descriptions").get<std::vector<std::string>>();
    e.summary = j.at("summary").get<std::string>();
    e.serialized_prompt = j.value("serialized_prompt", "");
    return e;
}

TrainingExample make_training_example(const PipelineContext& ctx, const std::string& method_id,
                                      const std::string& target_source,
                                      const std::vector<std::string>& descriptions, const std::string& summary)
{
    TdatContextParts kept;
    const RenderedPrompt p =
        render_tdat_context_prompt(target_source, descriptions, summary, ctx.tok, ctx.policy.budget, &kept);
    TrainingExample e;
    e.method_id = method_id;
    e.target_source = std::move(kept.target_source);
    e.descriptions = std::move(kept.descriptions);
    e.summary = summary;
    e.serialized_prompt = p.text;
    return e;
}

namespace {

// Ids of complete, parseable lines; drops anything after the last good line.
std::set<std::string> recover_existing(const std::filesystem::path& path)
{
    std::set<std::string> ids;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return ids;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read existing dataset: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string content = ss.str();
    in.close();

    std::size_t good_end = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        const auto nl = content.find('\n', pos);
        if (nl == std::string::npos) break;
        try {
            const auto j = nlohmann::json::parse(content.begin() + static_cast<std::ptrdiff_t>(pos),
                                                 content.begin() + static_cast<std::ptrdiff_t>(nl));
            ids.insert(j.at("method_id").get<std::string>());
        } catch (const nlohmann::json::exception&) {
            break;
        }
        pos = nl + 1;
        good_end = pos;
    }
    if (good_end != content.size()) {
        std::filesystem::resize_file(path, good_end, ec);
        if (ec) throw IoError("cannot repair partial dataset " + path.string() + ": " + ec.message());
    }
    return ids;
}

}  // namespace

DatasetStats build_distill_dataset(const PipelineContext& ctx, const DistillBackends& backends,
                                   const DistillOptions& opts, const std::filesystem::path& out_path)
{
    DatasetStats stats;
    const std::set<std::string> present = recover_existing(out_path);
    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open dataset for writing: " + out_path.string());

    PipelineContext teacher_ctx{ctx.idx, ctx.tok, ctx.policy, ctx.clock};
    teacher_ctx.policy.route = Route::commercial;

    std::vector<const MethodRecord*> todo;
    for (const MethodRecord* m : ctx.idx.ordered_methods()) {
        if (present.count(m->method_id) != 0) {
            ++stats.skipped;
            continue;
        }
        todo.push_back(m);
    }

    const int workers = backends.teacher.config().parallelism;
    const std::size_t chunk = static_cast<std::size_t>(std::max(1, workers)) * 4;
    for (std::size_t base = 0; base < todo.size(); base += chunk) {
        const std::size_t n = std::min(chunk, todo.size() - base);
        std::vector<std::optional<TrainingExample>> results(n);
        std::vector<char> excluded(n, 0);
        parallel_indexed(n, workers, [&](std::size_t i) {
            const MethodRecord& m = *todo[base + i];
            try {
                const CallContext context = callers_of(ctx.idx, m.method_id, ctx.policy.context);
                if (opts.context_only && context.caller_ids.empty()) {
                    excluded[i] = 1;
                    return;
                }
                std::vector<std::string> descriptions;
                for (const auto& caller : context.caller_ids) {
                    try {
                        const RenderedPrompt p =
                            render_tdat_prompt(ctx.idx.at(caller).source_text, ctx.tok, ctx.policy.budget);
                        std::string text = one_line(backends.caller.complete(p).text);
                        if (!text.empty()) descriptions.push_back(std::move(text));
                    } catch (const std::exception&) {
                        // A caller without a description is left out of the context.
                    }
                }
                const SummaryRecord teacher =
                    summarize_p3(teacher_ctx, m.method_id, backends.teacher, backends.teacher);
                if (!teacher.ok() || teacher.final_summary.empty()) return;
                results[i] = make_training_example(ctx, m.method_id, m.source_text, descriptions,
                                                   one_line(teacher.final_summary));
            } catch (const std::exception&) {
                results[i].reset();
            }
        });

        for (std::size_t i = 0; i < n; ++i) {
            if (excluded[i]) {
                ++stats.excluded;
                continue;
            }
            if (!results[i]) {
                ++stats.failed;
                continue;
            }
            if (opts.limit && stats.written >= *opts.limit) return stats;
            const std::string line =
                to_json(*results[i]).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
            out.write(line.data(), static_cast<std::streamsize>(line.size()));
            out.flush();
            if (!out) throw IoError("write failed: " + out_path.string());
            ++stats.written;
        }
    }
    return stats;
}

std::vector<SplitSpec> make_loo_splits(const std::vector<std::string>& exemplar_ids)
{
    std::set<std::string> seen;
    for (const auto& id : exemplar_ids) {
        if (!seen.insert(id).second) throw ConfigError("duplicate exemplar id: " + id);
    }
    std::vector<SplitSpec> out;
    out.reserve(exemplar_ids.size() + 1);
    for (std::size_t i = 0; i < exemplar_ids.size(); ++i) {
        SplitSpec s;
        s.held_out_id = exemplar_ids[i];
        for (std::size_t k = 0; k < exemplar_ids.size(); ++k) {
            if (k != i) s.train_ids.push_back(exemplar_ids[k]);
        }
        out.push_back(std::move(s));
    }
    out.push_back(SplitSpec{std::nullopt, exemplar_ids});
    return out;
}

nlohmann::ordered_json to_json(const SplitSpec& s)
{
    nlohmann::ordered_json j;
    j["held_out_id"] = s.held_out_id ? nlohmann::ordered_json(*s.held_out_id) : nullptr;
    j["train_ids"] = s.train_ids;
    return j;
}

}  // namespace callsum
