#include "callsum/summary_record.hpp"

#include "callsum/error.hpp"

namespace callsum {

const char* process_name(Process p)
{
    switch (p) {
    case Process::p1: return "p1";
    case Process::p2: return "p2";
    case Process::p3: return "p3";
    }
    return "p1";
}

Process process_from(const std::string& name)
{
    if (name == "p1") return Process::p1;
    if (name == "p2") return Process::p2;
    if (name == "p3") return Process::p3;
    throw ConfigError("unknown process: " + name);
}

nlohmann::ordered_json to_json(const SummaryRecord& r)
{
    nlohmann::ordered_json j;
    j["method_id"] = r.method_id;
    j["process"] = process_name(r.process);
    j["backend_name"] = r.backend_name;
    auto callers = nlohmann::ordered_json::array();
    for (const auto& [id, text] : r.caller_summaries) {
        callers.push_back({{"caller_id", id}, {"text", text}});
    }
    j["caller_summaries"] = std::move(callers);
    j["final_summary"] = r.final_summary;
    j["prompt_hash"] = r.prompt_hash;
    j["created_at"] = r.created_at;
    j["warnings"] = r.warnings;
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

SummaryRecord summary_from_json(const nlohmann::json& j)
{
    SummaryRecord r;
    r.method_id = j.at("method_id").get<std::string>();
    r.process = process_from(j.at("process").get<std::string>());
    r.backend_name = j.value("backend_name", "");
    for (const auto& c : j.value("caller_summaries", nlohmann::json::array())) {
        r.caller_summaries.emplace_back(c.at("caller_id").get<std::string>(), c.at("text").get<std::string>());
    }
    r.final_summary = j.value("final_summary", "");
    r.prompt_hash = j.value("prompt_hash", "");
    r.created_at = j.value("created_at", "");
    r.warnings = j.value("warnings", std::vector<std::string>{});
    r.error = j.value("error", "");
    return r;
}

}  // namespace callsum
