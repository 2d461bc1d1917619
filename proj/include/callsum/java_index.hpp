#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "callsum/tokenizer.hpp"

namespace callsum {

enum class ParseStatus { ok, skipped, failed };

struct SourceFile {
    std::string path;  // relative to the scan root, '/'-separated
    std::string package_name;
    std::string raw_text;
    ParseStatus parse_status = ParseStatus::ok;
    std::string failure_reason;
    std::vector<std::string> diagnostics;
};

struct LineSpan {
    int start = 0;  // 1-based, inclusive
    int end = 0;

    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct MethodRecord {
    std::string method_id;
    std::string qualified_name;
    std::string simple_name;
    std::size_t arity = 0;
    std::vector<std::string> param_type_texts;
    std::string enclosing_type;
    std::string source_text;
    std::string file;
    LineSpan line_span;
    std::size_t token_count = 0;
};

struct CallSite {
    std::string caller_id;
    std::string callee_name;
    std::size_t arg_count = 0;
    std::optional<std::string> receiver_text;
    int line = 0;

    friend bool operator==(const CallSite&, const CallSite&) = default;
};

struct ProjectIndex {
    std::string root;
    std::string tokenizer_mode = "fallback";
    std::map<std::string, MethodRecord> methods;
    std::map<std::string, std::set<std::string>> by_name;
    std::vector<CallSite> call_sites;
    std::vector<SourceFile> files;
    std::vector<std::pair<std::string, std::string>> dedup_report;  // (kept, dropped)

    /// Retained methods ordered by (file, start line).
    std::vector<const MethodRecord*> ordered_methods() const;
    const MethodRecord& at(const std::string& method_id) const;
    /// Resolves a method id or a qualified name. Ambiguous qualified names
    /// (overloads) resolve to the first in (file, line) order.
    const MethodRecord* find(const std::string& id_or_name) const;
};

struct ScanConfig {
    bool keep_comments = false;
    bool dedup = true;
    const Tokenizer* tokenizer = nullptr;  // fallback tokenizer when null
};

/// Result of parsing one file in isolation.
struct FileExtraction {
    std::string package_name;
    std::vector<MethodRecord> methods;
    std::vector<std::string> diagnostics;
    bool failed = false;
    std::string failure_reason;
};

/// Extracts every concrete, named method body of a parsed file. Methods of
/// anonymous and local classes are not reported. The file is marked failed
/// (and nothing is returned) on brace imbalance.
FileExtraction extract_methods(const SourceFile& file, const ScanConfig& cfg = {});

/// Every `name(`-shaped invocation in the method body.
std::vector<CallSite> find_call_sites(const MethodRecord& m);

/// Collapses methods whose whitespace-normalized token sequences coincide,
/// keeping the first by (file, start line).
ProjectIndex dedup_methods(ProjectIndex idx);

/// Parallel scan: files are parsed concurrently and merged in path order.
ProjectIndex scan_project(const std::filesystem::path& root, const ScanConfig& cfg = {});
/// Single-threaded scan with identical output, kept as the reference path.
ProjectIndex scan_project_serial(const std::filesystem::path& root, const ScanConfig& cfg = {});

std::string method_id_for(const std::string& file, LineSpan span, const std::string& source_text);

/// Index JSONL: one header line, then one line per method in (file, line) order.
std::string serialize_index(const ProjectIndex& idx);
void write_index(const ProjectIndex& idx, const std::filesystem::path& out);
/// Loads an index, re-deriving call sites and the name table.
ProjectIndex load_index(const std::filesystem::path& in);
ProjectIndex parse_index(const std::string& jsonl);

inline constexpr const char* kToolVersion = "0.3.0";

}  // namespace callsum
