#include "callsum/java_index.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "callsum/comment_stripper.hpp"
#include "callsum/error.hpp"
#include "callsum/hash.hpp"
#include "callsum/java_lexer.hpp"

namespace callsum {

namespace {

using Tokens = std::vector<Token>;
constexpr auto npos = std::string_view::npos;

bool is_ident(const Token& t) { return t.kind == TokenKind::identifier; }

bool is_ident(const Token& t, std::string_view w) { return is_ident(t) && t.text == w; }

// Keywords that may directly precede a method name in a declaration.
bool is_decl_keyword(std::string_view w)
{
    static constexpr std::string_view kAllowed[] = {
        "void",   "int",     "long",     "short",    "byte",         "char",
        "boolean", "float",  "double",   "public",   "private",      "protected",
        "static", "final",   "abstract", "native",   "synchronized", "strictfp",
        "default", "transient",
    };
    return std::find(std::begin(kAllowed), std::end(kAllowed), w) != std::end(kAllowed);
}

std::string package_of(const Tokens& toks)
{
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (is_punct(toks[i], "{")) break;
        if (!is_ident(toks[i], "package")) continue;
        std::string name;
        for (std::size_t k = i + 1; k < toks.size() && !is_punct(toks[k], ";"); ++k) {
            name.append(toks[k].text);
        }
        return name;
    }
    return {};
}

std::optional<std::string> type_decl_name(const Tokens& toks, std::size_t begin, std::size_t end)
{
    int depth = 0;
    for (std::size_t k = begin; k < end; ++k) {
        const Token& t = toks[k];
        if (is_punct(t, "(")) ++depth;
        if (is_punct(t, ")")) --depth;
        if (depth != 0 || !is_ident(t)) continue;
        const bool after_dot = k > begin && is_punct(toks[k - 1], ".");
        if (after_dot || k + 1 >= end || !is_ident(toks[k + 1])) continue;
        if (t.text == "class" || t.text == "interface" || t.text == "enum") {
            return std::string(toks[k + 1].text);
        }
        if (t.text == "record" && k + 2 < end &&
            (is_punct(toks[k + 2], "(") || is_punct(toks[k + 2], "<"))) {
            return std::string(toks[k + 1].text);
        }
    }
    return std::nullopt;
}

struct MethodShape {
    std::size_t name;
    std::size_t open;
    std::size_t close;
};

std::optional<MethodShape> method_shape(const Tokens& toks, std::size_t begin, std::size_t end,
                                        std::string_view enclosing)
{
    std::size_t last_close = npos;
    int depth = 0;
    for (std::size_t k = begin; k < end; ++k) {
        if (is_punct(toks[k], "(")) ++depth;
        if (is_punct(toks[k], ")") && --depth == 0) last_close = k;
        if (depth == 0 && (is_punct(toks[k], "=") || is_punct(toks[k], "->") || is_ident(toks[k], "new"))) {
            return std::nullopt;
        }
    }
    if (last_close == npos) return std::nullopt;

    // Only a throws clause may follow the parameter list.
    if (last_close + 1 < end) {
        if (!is_ident(toks[last_close + 1], "throws")) return std::nullopt;
        for (std::size_t k = last_close + 2; k < end; ++k) {
            const Token& t = toks[k];
            const bool ok = is_ident(t) || is_punct(t, ".") || is_punct(t, ",") || is_punct(t, "<") ||
                            is_punct(t, ">") || is_punct(t, "?") || is_punct(t, "[") || is_punct(t, "]");
            if (!ok) return std::nullopt;
        }
    }

    std::size_t open = npos;
    depth = 0;
    for (std::size_t k = last_close + 1; k-- > begin;) {
        if (is_punct(toks[k], ")")) ++depth;
        if (is_punct(toks[k], "(") && --depth == 0) {
            open = k;
            break;
        }
    }
    if (open == npos || open == begin) return std::nullopt;
    const std::size_t name = open - 1;
    if (!is_ident(toks[name]) || is_java_keyword(toks[name].text)) return std::nullopt;

    if (name == begin) {
        if (toks[name].text != enclosing) return std::nullopt;
    } else {
        const Token& prev = toks[name - 1];
        const bool type_like = (is_ident(prev) && (!is_java_keyword(prev.text) || is_decl_keyword(prev.text))) ||
                               is_punct(prev, ">") || is_punct(prev, "]");
        if (!type_like) return std::nullopt;
    }
    return MethodShape{name, open, last_close};
}

std::string join_type_tokens(const Tokens& toks, std::size_t begin, std::size_t end)
{
    std::string out;
    bool prev_wordish = false;
    bool prev_comma = false;
    for (std::size_t k = begin; k < end; ++k) {
        const bool wordish = is_word(toks[k]) || is_punct(toks[k], "?");
        if (!out.empty() && ((prev_wordish && wordish) || prev_comma)) out.push_back(' ');
        out.append(toks[k].text);
        prev_wordish = wordish;
        prev_comma = is_punct(toks[k], ",");
    }
    return out;
}

std::vector<std::string> param_types(const Tokens& toks, std::size_t open, std::size_t close)
{
    std::vector<std::string> out;
    if (close == open + 1) return out;
    std::vector<std::pair<std::size_t, std::size_t>> parts;
    int depth = 0;
    std::size_t start = open + 1;
    for (std::size_t k = open + 1; k < close; ++k) {
        const Token& t = toks[k];
        if (is_punct(t, "(") || is_punct(t, "<") || is_punct(t, "[")) ++depth;
        if (is_punct(t, ")") || is_punct(t, ">") || is_punct(t, "]")) --depth;
        if (depth == 0 && is_punct(t, ",")) {
            parts.emplace_back(start, k);
            start = k + 1;
        }
    }
    parts.emplace_back(start, close);

    for (auto [b, e] : parts) {
        Tokens kept;
        for (std::size_t k = b; k < e; ++k) {
            if (is_punct(toks[k], "@")) {
                // Annotation: @Name(.Name)* with optional argument list.
                ++k;
                while (k + 1 < e && is_punct(toks[k + 1], ".")) k += 2;
                if (k + 1 < e && is_punct(toks[k + 1], "(")) {
                    const std::size_t c = match_close(toks, k + 1);
                    k = c == npos ? e : c;
                }
                continue;
            }
            if (is_ident(toks[k], "final")) continue;
            kept.push_back(toks[k]);
        }
        // Strip the parameter name, moving C-style array brackets onto the type.
        std::size_t brackets = 0;
        while (kept.size() >= 2 && is_punct(kept.back(), "]") && is_punct(kept[kept.size() - 2], "[")) {
            kept.resize(kept.size() - 2);
            ++brackets;
        }
        if (!kept.empty() && is_ident(kept.back())) kept.pop_back();
        std::string type = join_type_tokens(kept, 0, kept.size());
        for (std::size_t k = 0; k < brackets; ++k) type += "[]";
        out.push_back(std::move(type));
    }
    return out;
}

std::string join_dotted(const std::vector<std::string>& parts)
{
    std::string out;
    for (const auto& p : parts) {
        if (p.empty()) continue;
        if (!out.empty()) out.push_back('.');
        out.append(p);
    }
    return out;
}

// Index of the `>` closing a generic argument list opened at `lt`, or npos
// when the `<` reads as a comparison.
std::size_t skip_generic(const Tokens& toks, std::size_t lt, std::size_t limit)
{
    if (lt == 0 || !(is_ident(toks[lt - 1]) || is_punct(toks[lt - 1], "."))) return npos;
    int depth = 0;
    for (std::size_t k = lt; k < limit; ++k) {
        const Token& t = toks[k];
        if (is_punct(t, "<")) {
            ++depth;
        } else if (is_punct(t, ">")) {
            if (--depth == 0) return k;
        } else if (!(is_ident(t) || is_punct(t, ".") || is_punct(t, ",") || is_punct(t, "?") ||
                     is_punct(t, "&") || is_punct(t, "[") || is_punct(t, "]"))) {
            return npos;
        }
    }
    return npos;
}

std::size_t count_args(const Tokens& toks, std::size_t open, std::size_t close)
{
    if (close == open + 1) return 0;
    std::size_t commas = 0;
    int depth = 0;
    for (std::size_t k = open + 1; k < close; ++k) {
        const Token& t = toks[k];
        if (is_punct(t, "(") || is_punct(t, "[") || is_punct(t, "{")) {
            ++depth;
        } else if (is_punct(t, ")") || is_punct(t, "]") || is_punct(t, "}")) {
            --depth;
        } else if (is_punct(t, "<")) {
            const std::size_t g = skip_generic(toks, k, close);
            if (g != npos) k = g;
        } else if (depth == 0 && is_punct(t, ",")) {
            ++commas;
        }
    }
    return commas + 1;
}

std::size_t match_open_backward(const Tokens& toks, std::size_t close, std::size_t floor)
{
    const char c = toks[close].text[0];
    const char o = c == ')' ? '(' : c == ']' ? '[' : '{';
    int depth = 0;
    for (std::size_t k = close + 1; k-- > floor;) {
        if (toks[k].kind != TokenKind::punct) continue;
        if (toks[k].text[0] == c) ++depth;
        if (toks[k].text[0] == o && --depth == 0) return k;
    }
    return npos;
}

std::optional<std::string> receiver_of(const Tokens& toks, std::size_t name, std::size_t floor,
                                       std::string_view src)
{
    if (name < floor + 2 || !is_punct(toks[name - 1], ".")) return std::nullopt;
    const std::size_t dot = name - 1;
    std::size_t j = dot - 1;
    std::size_t start = npos;
    while (j > floor) {
        const Token& t = toks[j];
        if (is_punct(t, ")") || is_punct(t, "]")) {
            const std::size_t o = match_open_backward(toks, j, floor + 1);
            if (o == npos) break;
            start = o;
            if (o > floor + 1 && is_ident(toks[o - 1])) {
                start = o - 1;
                j = o - 1;
            } else if (is_punct(t, "]") && o > floor + 1) {
                j = o - 1;
                continue;
            } else {
                break;
            }
        } else if (is_ident(t) || t.kind == TokenKind::string_literal) {
            start = j;
        } else {
            break;
        }
        if (j > floor + 1 && is_punct(toks[j - 1], ".")) {
            j -= 2;
            continue;
        }
        break;
    }
    if (start == npos) return std::nullopt;
    std::string text(src.substr(toks[start].offset, toks[dot].offset - toks[start].offset));
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
    return text;
}

struct FileResult {
    SourceFile file;
    std::vector<MethodRecord> methods;
};

FileResult process_file(const std::filesystem::path& root, const std::string& rel, const ScanConfig& cfg)
{
    FileResult r;
    r.file.path = rel;
    std::ifstream in(root / rel, std::ios::binary);
    if (!in) {
        r.file.parse_status = ParseStatus::failed;
        r.file.failure_reason = "unreadable file";
        return r;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    r.file.raw_text = ss.str();
    if (const auto replaced = sanitize_utf8(r.file.raw_text); replaced > 0) {
        r.file.diagnostics.push_back("replaced " + std::to_string(replaced) + " invalid UTF-8 byte(s)");
    }
    if (r.file.raw_text.empty()) {
        r.file.parse_status = ParseStatus::skipped;
        r.file.failure_reason = "empty file";
        return r;
    }
    try {
        FileExtraction ex = extract_methods(r.file, cfg);
        r.file.diagnostics.insert(r.file.diagnostics.end(), ex.diagnostics.begin(), ex.diagnostics.end());
        if (ex.failed) {
            r.file.parse_status = ParseStatus::failed;
            r.file.failure_reason = ex.failure_reason;
            return r;
        }
        r.file.package_name = ex.package_name;
        r.methods = std::move(ex.methods);
    } catch (const std::exception& e) {
        r.file.parse_status = ParseStatus::failed;
        r.file.failure_reason = e.what();
        r.methods.clear();
    }
    return r;
}

std::vector<std::string> list_java_files(const std::filesystem::path& root)
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(root, ec)) {
        throw IoError("scan root is not a readable directory: " + root.string());
    }
    std::vector<std::string> out;
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
    if (ec) throw IoError("cannot read scan root " + root.string() + ": " + ec.message());
    for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        const auto& entry = *it;
        if (entry.is_regular_file(ec) && entry.path().extension() == ".java") {
            out.push_back(fs::relative(entry.path(), root, ec).generic_string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

ProjectIndex merge_results(const std::filesystem::path& root, std::vector<FileResult>& results,
                           const ScanConfig& cfg)
{
    ProjectIndex idx;
    idx.root = root.generic_string();
    idx.tokenizer_mode = cfg.tokenizer ? cfg.tokenizer->mode() : "fallback";
    for (auto& r : results) {
        for (auto& m : r.methods) {
            if (idx.methods.count(m.method_id) != 0) {
                r.file.diagnostics.push_back("duplicate method id " + m.method_id + " for " + m.qualified_name);
                continue;
            }
            const std::string id = m.method_id;
            idx.methods.emplace(id, std::move(m));
        }
        idx.files.push_back(std::move(r.file));
    }
    for (const MethodRecord* m : idx.ordered_methods()) {
        idx.by_name[m->simple_name].insert(m->method_id);
        auto sites = find_call_sites(*m);
        idx.call_sites.insert(idx.call_sites.end(), sites.begin(), sites.end());
    }
    return cfg.dedup ? dedup_methods(std::move(idx)) : idx;
}

}  // namespace

std::string method_id_for(const std::string& file, LineSpan span, const std::string& source_text)
{
    std::string key = file + "\n" + std::to_string(span.start) + ":" + std::to_string(span.end) + "\n" +
                      normalized_token_text(source_text);
    return sha256_hex(key).substr(0, 16);
}

FileExtraction extract_methods(const SourceFile& file, const ScanConfig& cfg)
{
    FileExtraction out;
    const StrippedText st = strip_comments_mapped(file.raw_text);
    out.diagnostics = st.diagnostics;
    const Tokens toks = lex_java(st.text);

    int balance = 0;
    for (const auto& t : toks) {
        if (is_punct(t, "{")) ++balance;
        if (is_punct(t, "}") && --balance < 0) break;
    }
    if (balance != 0) {
        out.failed = true;
        out.failure_reason = "brace imbalance";
        return out;
    }

    out.package_name = package_of(toks);
    const Tokenizer fallback = Tokenizer::fallback();
    const Tokenizer& tokenizer = cfg.tokenizer ? *cfg.tokenizer : fallback;

    std::vector<std::string> types;
    std::size_t header = 0;
    int paren = 0;
    std::size_t i = 0;
    while (i < toks.size()) {
        const Token& t = toks[i];
        if (is_punct(t, "(")) {
            ++paren;
        } else if (is_punct(t, ")")) {
            paren = std::max(0, paren - 1);
        } else if (is_punct(t, ";") && paren == 0) {
            header = i + 1;
        } else if (is_punct(t, "}")) {
            if (!types.empty()) types.pop_back();
            header = i + 1;
            paren = 0;
        } else if (is_punct(t, "{")) {
            const std::size_t close = match_close(toks, i);
            if (paren > 0) {
                // Brace inside parentheses, e.g. an annotation array value.
                i = close + 1;
                continue;
            }
            if (auto name = type_decl_name(toks, header, i)) {
                types.push_back(*name);
                header = i + 1;
                ++i;
                continue;
            }
            if (!types.empty()) {
                if (auto shape = method_shape(toks, header, i, types.back())) {
                    MethodRecord m;
                    m.simple_name = std::string(toks[shape->name].text);
                    m.param_type_texts = param_types(toks, shape->open, shape->close);
                    m.arity = m.param_type_texts.size();
                    m.enclosing_type = join_dotted(types);
                    m.qualified_name = join_dotted({out.package_name, m.enclosing_type, m.simple_name});
                    const std::size_t begin = toks[header].offset;
                    const std::size_t end = toks[close].offset + 1;
                    const std::string stripped = st.text.substr(begin, end - begin);
                    m.source_text = cfg.keep_comments
                                        ? file.raw_text.substr(st.origin[begin], st.origin[end - 1] + 1 - st.origin[begin])
                                        : stripped;
                    m.file = file.path;
                    m.line_span = LineSpan{toks[header].line, toks[close].line};
                    m.token_count = tokenizer.count(m.source_text);
                    m.method_id = method_id_for(m.file, m.line_span, stripped);
                    out.methods.push_back(std::move(m));
                }
            }
            i = close + 1;
            header = i;
            continue;
        }
        ++i;
    }
    return out;
}

std::vector<CallSite> find_call_sites(const MethodRecord& m)
{
    std::vector<CallSite> out;
    const std::string stripped = strip_comments(m.source_text);
    const Tokens toks = lex_java(stripped);

    std::size_t body = npos;
    int paren = 0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
        if (is_punct(toks[k], "(")) ++paren;
        if (is_punct(toks[k], ")")) --paren;
        if (paren == 0 && is_punct(toks[k], "{")) {
            body = k;
            break;
        }
    }
    if (body == npos) return out;

    for (std::size_t k = body + 1; k + 1 < toks.size(); ++k) {
        const Token& t = toks[k];
        if (!is_ident(t) || !is_punct(toks[k + 1], "(") || is_java_keyword(t.text)) continue;
        if (is_punct(toks[k - 1], "@")) continue;

        std::size_t chain = k;
        while (chain >= body + 3 && is_punct(toks[chain - 1], ".") && is_ident(toks[chain - 2])) chain -= 2;
        if (chain > body + 1 && is_ident(toks[chain - 1], "new")) continue;

        const std::size_t close = match_close(toks, k + 1);
        if (close == npos) continue;
        if (close + 1 < toks.size() && (is_punct(toks[close + 1], "{") || is_ident(toks[close + 1], "throws"))) {
            continue;  // local or anonymous class member declaration
        }

        CallSite cs;
        cs.caller_id = m.method_id;
        cs.callee_name = std::string(t.text);
        cs.arg_count = count_args(toks, k + 1, close);
        cs.receiver_text = receiver_of(toks, k, body, stripped);
        cs.line = m.line_span.start + t.line - 1;
        out.push_back(std::move(cs));
    }
    return out;
}

ProjectIndex dedup_methods(ProjectIndex idx)
{
    std::map<std::string, std::string> first_by_hash;
    std::set<std::string> dropped;
    for (const MethodRecord* m : idx.ordered_methods()) {
        const std::string h = sha256_hex(normalized_token_text(strip_comments(m->source_text)));
        auto [it, inserted] = first_by_hash.emplace(h, m->method_id);
        if (!inserted) {
            idx.dedup_report.emplace_back(it->second, m->method_id);
            dropped.insert(m->method_id);
        }
    }
    if (dropped.empty()) return idx;

    for (const auto& id : dropped) idx.methods.erase(id);
    std::erase_if(idx.call_sites, [&](const CallSite& cs) { return dropped.count(cs.caller_id) != 0; });
    idx.by_name.clear();
    for (const auto& [id, m] : idx.methods) idx.by_name[m.simple_name].insert(id);
    return idx;
}

std::vector<const MethodRecord*> ProjectIndex::ordered_methods() const
{
    std::vector<const MethodRecord*> out;
    out.reserve(methods.size());
    for (const auto& [id, m] : methods) out.push_back(&m);
    std::sort(out.begin(), out.end(), [](const MethodRecord* a, const MethodRecord* b) {
        return std::tie(a->file, a->line_span.start, a->line_span.end, a->method_id) <
               std::tie(b->file, b->line_span.start, b->line_span.end, b->method_id);
    });
    return out;
}

const MethodRecord& ProjectIndex::at(const std::string& method_id) const
{
    auto it = methods.find(method_id);
    if (it == methods.end()) throw ConfigError("unknown method id: " + method_id);
    return it->second;
}

const MethodRecord* ProjectIndex::find(const std::string& id_or_name) const
{
    if (auto it = methods.find(id_or_name); it != methods.end()) return &it->second;
    for (const MethodRecord* m : ordered_methods()) {
        if (m->qualified_name == id_or_name) return m;
    }
    return nullptr;
}

ProjectIndex scan_project(const std::filesystem::path& root, const ScanConfig& cfg)
{
    const auto files = list_java_files(root);
    std::vector<FileResult> results(files.size());
    const auto n = static_cast<std::ptrdiff_t>(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        results[static_cast<std::size_t>(i)] = process_file(root, files[static_cast<std::size_t>(i)], cfg);
    }
    return merge_results(root, results, cfg);
}

ProjectIndex scan_project_serial(const std::filesystem::path& root, const ScanConfig& cfg)
{
    const auto files = list_java_files(root);
    std::vector<FileResult> results;
    results.reserve(files.size());
    for (const auto& f : files) results.push_back(process_file(root, f, cfg));
    return merge_results(root, results, cfg);
}

namespace {

const char* status_name(ParseStatus s)
{
    switch (s) {
    case ParseStatus::ok: return "ok";
    case ParseStatus::skipped: return "skipped";
    case ParseStatus::failed: return "failed";
    }
    return "failed";
}

ParseStatus status_from(const std::string& s)
{
    if (s == "ok") return ParseStatus::ok;
    if (s == "skipped") return ParseStatus::skipped;
    return ParseStatus::failed;
}

}  // namespace

std::string serialize_index(const ProjectIndex& idx)
{
    using nlohmann::ordered_json;
    std::string out;

    ordered_json header;
    header["kind"] = "scan_header";
    header["root"] = idx.root;
    header["file_count"] = idx.files.size();
    header["tool_version"] = kToolVersion;
    header["tokenizer"] = idx.tokenizer_mode;
    header["method_count"] = idx.methods.size();
    ordered_json files = ordered_json::array();
    for (const auto& f : idx.files) {
        ordered_json jf;
        jf["path"] = f.path;
        jf["package_name"] = f.package_name;
        jf["parse_status"] = status_name(f.parse_status);
        if (f.parse_status != ParseStatus::ok) jf["reason"] = f.failure_reason;
        if (!f.diagnostics.empty()) jf["diagnostics"] = f.diagnostics;
        files.push_back(std::move(jf));
    }
    header["files"] = std::move(files);
    ordered_json report = ordered_json::array();
    for (const auto& [kept, dropped] : idx.dedup_report) report.push_back({kept, dropped});
    header["dedup_report"] = std::move(report);
    out += header.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";

    for (const MethodRecord* m : idx.ordered_methods()) {
        ordered_json j;
        j["method_id"] = m->method_id;
        j["qualified_name"] = m->qualified_name;
        j["simple_name"] = m->simple_name;
        j["arity"] = m->arity;
        j["param_type_texts"] = m->param_type_texts;
        j["enclosing_type"] = m->enclosing_type;
        j["source_text"] = m->source_text;
        j["file"] = m->file;
        j["line_span"] = {m->line_span.start, m->line_span.end};
        j["token_count"] = m->token_count;
        out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
    }
    return out;
}

void write_index(const ProjectIndex& idx, const std::filesystem::path& out)
{
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write index: " + out.string());
    f << serialize_index(idx);
    if (!f) throw IoError("write failed: " + out.string());
}

ProjectIndex parse_index(const std::string& jsonl)
{
    using nlohmann::json;
    ProjectIndex idx;
    std::istringstream in(jsonl);
    std::string line;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError("index line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!header_seen) {
            if (j.value("kind", "") != "scan_header") throw ParseError("index is missing its header line");
            header_seen = true;
            idx.root = j.value("root", "");
            idx.tokenizer_mode = j.value("tokenizer", "fallback");
            for (const auto& jf : j.value("files", json::array())) {
                SourceFile f;
                f.path = jf.value("path", "");
                f.package_name = jf.value("package_name", "");
                f.parse_status = status_from(jf.value("parse_status", "ok"));
                f.failure_reason = jf.value("reason", "");
                f.diagnostics = jf.value("diagnostics", std::vector<std::string>{});
                idx.files.push_back(std::move(f));
            }
            for (const auto& p : j.value("dedup_report", json::array())) {
                idx.dedup_report.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
            }
            continue;
        }
        try {
            MethodRecord m;
            m.method_id = j.at("method_id").get<std::string>();
            m.qualified_name = j.at("qualified_name").get<std::string>();
            m.simple_name = j.at("simple_name").get<std::string>();
            m.arity = j.at("arity").get<std::size_t>();
            m.param_type_texts = j.at("param_type_texts").get<std::vector<std::string>>();
            m.enclosing_type = j.at("enclosing_type").get<std::string>();
            m.source_text = j.at("source_text").get<std::string>();
            m.file = j.at("file").get<std::string>();
            m.line_span = LineSpan{j.at("line_span").at(0).get<int>(), j.at("line_span").at(1).get<int>()};
            m.token_count = j.at("token_count").get<std::size_t>();
            const std::string id = m.method_id;
            idx.methods.emplace(id, std::move(m));
        } catch (const json::exception& e) {
            throw ParseError("index line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header_seen) throw ParseError("empty index");
    for (const MethodRecord* m : idx.ordered_methods()) {
        idx.by_name[m->simple_name].insert(m->method_id);
        auto sites = find_call_sites(*m);
        idx.call_sites.insert(idx.call_sites.end(), sites.begin(), sites.end());
    }
    return idx;
}

ProjectIndex load_index(const std::filesystem::path& in)
{
    std::ifstream f(in, std::ios::binary);
    if (!f) throw IoError("cannot read index: " + in.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_index(ss.str());
}

}  // namespace callsum
