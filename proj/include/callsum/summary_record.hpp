#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace callsum {

enum class Process { p1, p2, p3 };

const char* process_name(Process p);
Process process_from(const std::string& name);

struct SummaryRecord {
    std::string method_id;
    Process process = Process::p1;
    std::string backend_name;
    std::vector<std::pair<std::string, std::string>> caller_summaries;  // (caller_id, text)
    std::string final_summary;
    std::string prompt_hash;
    std::string created_at;
    std::vector<std::string> warnings;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

nlohmann::ordered_json to_json(const SummaryRecord& r);
SummaryRecord summary_from_json(const nlohmann::json& j);

}  // namespace callsum
