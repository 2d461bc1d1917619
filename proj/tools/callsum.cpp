// Command-line front end: index, context, stats, summarize, distill, split, analyze.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "callsum/backend.hpp"
#include "callsum/callgraph.hpp"
#include "callsum/error.hpp"
#include "callsum/evalstats.hpp"
#include "callsum/java_index.hpp"
#include "callsum/pipeline.hpp"
#include "callsum/summary_record.hpp"
#include "callsum/tokenizer.hpp"

namespace fs = std::filesystem;
using namespace callsum;

namespace {

struct TokenizerArgs {
    std::string vocab;
    std::string merges;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--vocab", vocab, "GPT-2 encoder.json for exact token counts");
        cmd->add_option("--merges", merges, "GPT-2 vocab.bpe merge list");
    }

    Tokenizer make() const
    {
        if (vocab.empty() != merges.empty()) throw ConfigError("--vocab and --merges must be given together");
        if (vocab.empty()) return Tokenizer::fallback();
        return Tokenizer::from_files(vocab, merges);
    }
};

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

BackendConfig resolve_backend(const std::string& name, const std::map<std::string, BackendConfig>& configs)
{
    if (auto it = configs.find(name); it != configs.end()) return it->second;
    if (name == "mock" || name.starts_with("mock")) return BackendConfig::mock(name);
    throw ConfigError("unknown backend '" + name + "'; pass --backends with its configuration");
}

std::vector<std::string> read_lines(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
    }
    return out;
}

// Exemplar ids in first-appearance order; the exemplar file carries several
// summaries per method.
std::vector<std::string> exemplar_ids(const fs::path& path)
{
    std::vector<std::string> ids;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (const auto& line : read_lines(path)) {
        ++lineno;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const auto id = j.at("method_id").get<std::string>();
        if (seen.insert(id).second) ids.push_back(id);
    }
    return ids;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Caller-context code summarization toolkit"};
    app.require_subcommand(1);

    // index
    auto* index_cmd = app.add_subcommand("index", "Scan a Java project into an index");
    std::string index_root, index_out;
    bool keep_comments = false, no_dedup = false;
    TokenizerArgs index_tok;
    index_cmd->add_option("root", index_root, "Project root")->required()->check(CLI::ExistingDirectory);
    index_cmd->add_option("--out", index_out, "Index JSONL")->required();
    index_cmd->add_flag("--keep-comments", keep_comments, "Keep comments in method source text");
    index_cmd->add_flag("--no-dedup", no_dedup, "Keep duplicate method bodies");
    index_tok.add(index_cmd);

    // context
    auto* context_cmd = app.add_subcommand("context", "Print the caller context of one method");
    std::string context_index, context_target;
    std::size_t context_cap = ContextPolicy{}.cap;
    context_cmd->add_option("index", context_index, "Index JSONL")->required()->check(CLI::ExistingFile);
    context_cmd->add_option("--target", context_target, "Method id or qualified name")->required();
    context_cmd->add_option("--cap", context_cap, "Maximum callers kept")->check(CLI::PositiveNumber);

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics over an index");
    std::string stats_index, stats_summaries;
    std::size_t stats_cap = ContextPolicy{}.cap;
    TokenizerArgs stats_tok;
    stats_cmd->add_option("index", stats_index, "Index JSONL")->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--summaries", stats_summaries, "Summary JSONL for the mean summary length")
        ->check(CLI::ExistingFile);
    stats_cmd->add_option("--cap", stats_cap, "Maximum callers kept")->check(CLI::PositiveNumber);
    stats_tok.add(stats_cmd);

    // summarize
    auto* sum_cmd = app.add_subcommand("summarize", "Summarize methods with one process");
    std::string sum_process = "p1", sum_index, sum_backend, sum_caller_backend, sum_backends, sum_targets, sum_out;
    std::string sum_route = "small_model";
    TokenizerArgs sum_tok;
    sum_cmd->add_option("--process", sum_process, "p1, p2 or p3")->check(CLI::IsMember({"p1", "p2", "p3"}));
    sum_cmd->add_option("--index", sum_index, "Index JSONL")->required()->check(CLI::ExistingFile);
    sum_cmd->add_option("--backend", sum_backend, "Backend for the final summary")->required();
    sum_cmd->add_option("--caller-backend", sum_caller_backend, "Backend for caller summaries (p3)");
    sum_cmd->add_option("--backends", sum_backends, "Backend configuration JSON")->check(CLI::ExistingFile);
    sum_cmd->add_option("--targets", sum_targets, "File with one method id or qualified name per line")
        ->check(CLI::ExistingFile);
    sum_cmd->add_option("--route", sum_route, "small_model or commercial")
        ->check(CLI::IsMember({"small_model", "commercial"}));
    sum_cmd->add_option("--out", sum_out, "Summary JSONL")->required();
    sum_tok.add(sum_cmd);

    // distill
    auto* distill_cmd = app.add_subcommand("distill", "Build the distillation dataset");
    std::string dist_index, dist_out, dist_caller = "mock", dist_teacher = "mock", dist_backends;
    bool context_only = false;
    std::optional<std::size_t> dist_limit;
    TokenizerArgs dist_tok;
    distill_cmd->add_option("--index", dist_index, "Index JSONL")->required()->check(CLI::ExistingFile);
    distill_cmd->add_option("--out", dist_out, "train.jsonl (appended to on resume)")->required();
    distill_cmd->add_flag("--context-only", context_only, "Only methods with at least one caller");
    distill_cmd->add_option("--caller-backend", dist_caller, "Small model summarizing callers");
    distill_cmd->add_option("--teacher-backend", dist_teacher, "Model writing target summaries");
    distill_cmd->add_option("--backends", dist_backends, "Backend configuration JSON")->check(CLI::ExistingFile);
    distill_cmd->add_option("--limit", dist_limit, "Stop after this many new examples");
    dist_tok.add(distill_cmd);

    // split
    auto* split_cmd = app.add_subcommand("split", "Leave-one-out splits over exemplar methods");
    std::string split_exemplars, split_out;
    split_cmd->add_option("--exemplars", split_exemplars, "Exemplar JSONL")->required()->check(CLI::ExistingFile);
    split_cmd->add_option("--out", split_out, "Output directory")->required();

    // analyze
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze study responses");
    std::string an_likert, an_prefs, an_participants, an_out, an_bracket;
    double alpha = 0.05;
    analyze_cmd->add_option("--likert", an_likert, "Likert response JSONL")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--prefs", an_prefs, "Preference response JSONL")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--participants", an_participants, "Participant JSONL")
        ->required()
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--alpha", alpha, "Significance level")->check(CLI::Range(0.0, 1.0));
    analyze_cmd->add_option("--out", an_out, "Report JSON")->required();
    analyze_cmd->add_option("--bracket", an_bracket, "Pairings JSON; prints the bracket")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*index_cmd) {
            const Tokenizer tok = index_tok.make();
            ScanConfig cfg;
            cfg.keep_comments = keep_comments;
            cfg.dedup = !no_dedup;
            cfg.tokenizer = &tok;
            const ProjectIndex idx = scan_project(index_root, cfg);
            write_index(idx, index_out);
            std::size_t failed = 0;
            for (const auto& f : idx.files) {
                if (f.parse_status == ParseStatus::failed) {
                    ++failed;
                    std::cerr << "warning: " << f.path << ": " << f.failure_reason << "\n";
                }
            }
            std::cerr << "indexed " << idx.methods.size() << " methods from " << idx.files.size() << " files ("
                      << failed << " failed, " << idx.dedup_report.size() << " duplicates dropped)\n";
        } else if (*context_cmd) {
            const ProjectIndex idx = load_index(context_index);
            std::cout << to_json(callers_of(idx, context_target, ContextPolicy{context_cap})).dump(2) << "\n";
        } else if (*stats_cmd) {
            const Tokenizer tok = stats_tok.make();
            const ProjectIndex idx = load_index(stats_index);
            const auto contexts = contexts_for_all(idx, ContextPolicy{stats_cap});
            std::vector<SummaryRecord> summaries;
            if (!stats_summaries.empty()) {
                for (const auto& line : read_lines(stats_summaries)) {
                    summaries.push_back(summary_from_json(nlohmann::json::parse(line)));
                }
            }
            const auto stats = context_stats(idx, contexts, stats_summaries.empty() ? nullptr : &summaries, tok);
            std::cout << to_json(stats).dump(2) << "\n";
        } else if (*sum_cmd) {
            const Tokenizer tok = sum_tok.make();
            const ProjectIndex idx = load_index(sum_index);
            std::map<std::string, BackendConfig> configs;
            if (!sum_backends.empty()) configs = load_backend_configs(sum_backends);
            const Backend why(resolve_backend(sum_backend, configs));
            const Backend caller = sum_caller_backend.empty() ? why : Backend(resolve_backend(sum_caller_backend, configs));

            PipelinePolicy policy;
            policy.route = sum_route == "commercial" ? Route::commercial : Route::small_model;
            const PipelineContext ctx{idx, tok, policy};

            std::vector<std::string> targets;
            if (sum_targets.empty()) {
                for (const auto* m : idx.ordered_methods()) targets.push_back(m->method_id);
            } else {
                for (const auto& t : read_lines(sum_targets)) {
                    const auto* m = idx.find(t);
                    if (!m) throw ConfigError("unknown target: " + t);
                    targets.push_back(m->method_id);
                }
            }
            const auto records = summarize_many(ctx, process_from(sum_process), targets, caller, why);
            std::string text;
            std::size_t failures = 0;
            for (const auto& r : records) {
                text += to_json(r).dump() + "\n";
                if (!r.ok()) ++failures;
            }
            write_text(sum_out, text);
            std::cerr << "summarized " << records.size() - failures << " of " << records.size() << " methods\n";
            return failures == records.size() && !records.empty() ? 1 : 0;
        } else if (*distill_cmd) {
            const Tokenizer tok = dist_tok.make();
            const ProjectIndex idx = load_index(dist_index);
            std::map<std::string, BackendConfig> configs;
            if (!dist_backends.empty()) configs = load_backend_configs(dist_backends);
            const Backend caller(resolve_backend(dist_caller, configs));
            const Backend teacher(resolve_backend(dist_teacher, configs));
            PipelinePolicy policy;
            policy.route = Route::commercial;
            const PipelineContext ctx{idx, tok, policy};
            const auto stats =
                build_distill_dataset(ctx, DistillBackends{caller, teacher}, DistillOptions{context_only, dist_limit},
                                      dist_out);
            nlohmann::ordered_json j{{"written", stats.written},
                                     {"skipped", stats.skipped},
                                     {"excluded", stats.excluded},
                                     {"failed", stats.failed}};
            std::cout << j.dump() << "\n";
        } else if (*split_cmd) {
            const auto splits = make_loo_splits(exemplar_ids(split_exemplars));
            const fs::path dir(split_out);
            fs::create_directories(dir);
            std::size_t n = 0;
            for (const auto& s : splits) {
                std::string name;
                if (s.held_out_id) {
                    char buf[32];
                    std::snprintf(buf, sizeof buf, "loo_%03zu.json", n++);
                    name = buf;
                } else {
                    name = "full.json";
                }
                write_text(dir / name, to_json(s).dump(2) + "\n");
            }
            std::cerr << "wrote " << splits.size() << " splits to " << dir.string() << "\n";
        } else if (*analyze_cmd) {
            const auto qc = qc_filter(load_likert(an_likert), load_preferences(an_prefs),
                                      load_participants(an_participants));
            const auto reports = analyze_all(qc.likert, qc.prefs, alpha);
            nlohmann::ordered_json j;
            j["qc"] = to_json(qc);
            j["experiments"] = nlohmann::ordered_json::array();
            for (const auto& r : reports) j["experiments"].push_back(to_json(r));
            if (!an_bracket.empty()) {
                const std::string bracket = tournament_report(reports, load_pairings(an_bracket));
                j["bracket"] = bracket;
                std::cout << bracket;
            }
            write_text(an_out, j.dump(2) + "\n");
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
