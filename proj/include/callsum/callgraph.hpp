#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "callsum/java_index.hpp"
#include "callsum/summary_record.hpp"
#include "callsum/tokenizer.hpp"

namespace callsum {

struct ContextPolicy {
    std::size_t cap = 10;  // K: maximum number of callers kept
};

struct CallContext {
    std::string target_id;
    std::vector<std::string> caller_ids;  // ordered by (file, start line)
    bool truncated = false;
    std::vector<std::string> resolution_notes;
};

/// Direct callers of `target`: methods holding a call site whose callee name
/// and argument count match the target's simple name and arity. Self calls
/// are ignored. `target` is a method id or a qualified name (overloads resolve
/// to the first in file order). Throws ConfigError for an unknown target.
CallContext callers_of(const ProjectIndex& idx, const std::string& target, const ContextPolicy& policy = {});

/// Contexts for every retained method, in (file, line) order. Targets are
/// resolved concurrently against a shared (name, arity) lookup table.
std::vector<CallContext> contexts_for_all(const ProjectIndex& idx, const ContextPolicy& policy = {});
/// Serial reference for contexts_for_all.
std::vector<CallContext> contexts_for_all_serial(const ProjectIndex& idx, const ContextPolicy& policy = {});

struct CorpusStats {
    double mean_tokens_per_method = 0;
    std::size_t max_tokens_per_method = 0;
    std::size_t min_tokens_per_method = 0;
    std::optional<double> mean_summary_tokens;
    double mean_context_size = 0;
    std::size_t method_count = 0;
    std::size_t context_count = 0;
    bool approximate = false;  // counts come from the fallback tokenizer
};

CorpusStats context_stats(const ProjectIndex& idx, const std::vector<CallContext>& contexts,
                          const std::vector<SummaryRecord>* summaries = nullptr,
                          const Tokenizer& tokenizer = Tokenizer::fallback());

nlohmann::ordered_json to_json(const CallContext& c);
nlohmann::ordered_json to_json(const CorpusStats& s);

}  // namespace callsum
