#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "callsum/backend.hpp"
#include "callsum/callgraph.hpp"
#include "callsum/java_index.hpp"
#include "callsum/prompts.hpp"
#include "callsum/summary_record.hpp"
#include "callsum/tokenizer.hpp"

namespace callsum {

// small_model: each caller summarized alone with a TDAT prompt, final summary
// from the TDAT/CONTEXT inference prompt. commercial: all callers in one
// caller-description prompt, final summary from the why prompt.
enum class Route { small_model, commercial };

struct PipelinePolicy {
    ContextPolicy context;
    Route route = Route::small_model;
    TokenBudget budget;
    std::size_t project_token_cap = 120000;
};

/// Timestamp source for SummaryRecord::created_at.
using Clock = std::function<std::string()>;

/// UTC now, or SOURCE_DATE_EPOCH when that variable is set.
std::string utc_timestamp();

struct PipelineContext {
    const ProjectIndex& idx;
    const Tokenizer& tok;
    PipelinePolicy policy;
    Clock clock = utc_timestamp;
};

/// Target method alone: TDAT prompt for tdat-style backends, the
/// single-method instruction otherwise.
SummaryRecord summarize_p1(const PipelineContext& ctx, const std::string& target, const Backend& backend);

/// Target plus every other retained method in one prompt. Prompts above the
/// project token cap are rejected before any request is made.
SummaryRecord summarize_p2(const PipelineContext& ctx, const std::string& target, const Backend& backend);

/// Callers summarized first, then a final summary conditioned on them.
SummaryRecord summarize_p3(const PipelineContext& ctx, const std::string& target, const Backend& caller_backend,
                           const Backend& why_backend);

/// Runs one process over many targets on a worker pool sized by the final
/// backend's parallelism. Results keep the input order.
std::vector<SummaryRecord> summarize_many(const PipelineContext& ctx, Process process,
                                          const std::vector<std::string>& targets, const Backend& caller_backend,
                                          const Backend& why_backend);

struct TrainingExample {
    std::string method_id;
    std::string target_source;
    std::vector<std::string> descriptions;
    std::string summary;
    std::string serialized_prompt;
};

nlohmann::ordered_json to_json(const TrainingExample& e);
TrainingExample training_example_from_json(const nlohmann::json& j);

struct DistillBackends {
    const Backend& caller;   // small model summarizing each caller
    const Backend& teacher;  // commercial model producing the target summary
};

struct DistillOptions {
    bool context_only = false;
    // Stop after this many new lines; used to interrupt runs deliberately.
    std::optional<std::size_t> limit;
};

struct DatasetStats {
    std::size_t written = 0;
    std::size_t skipped = 0;   // already present in the output file
    std::size_t excluded = 0;  // no callers under context_only
    std::size_t failed = 0;
};

/// Builds one TrainingExample per retained method. Existing complete lines
/// in `out_path` are kept and their methods skipped; a trailing partial line
/// from an interrupted run is discarded first.
DatasetStats build_distill_dataset(const PipelineContext& ctx, const DistillBackends& backends,
                                   const DistillOptions& opts, const std::filesystem::path& out_path);

/// Serializes a distillation example; stored target and descriptions are the
/// parts that survived the budget, so re-rendering reproduces the prompt.
TrainingExample make_training_example(const PipelineContext& ctx, const std::string& method_id,
                                      const std::string& target_source,
                                      const std::vector<std::string>& descriptions, const std::string& summary);

struct SplitSpec {
    std::optional<std::string> held_out_id;  // empty for the all-exemplar split
    std::vector<std::string> train_ids;
};

/// One leave-one-out split per id (in input order), then one split over all ids.
std::vector<SplitSpec> make_loo_splits(const std::vector<std::string>& exemplar_ids);

nlohmann::ordered_json to_json(const SplitSpec& s);

}  // namespace callsum
