#include "callsum/java_lexer.hpp"

#include <algorithm>
#include <iterator>
#include <cctype>

namespace callsum {

namespace {

bool ident_start(char c)
{
    auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || c == '$' || u >= 0x80;
}

bool ident_part(char c)
{
    return ident_start(c) || std::isdigit(static_cast<unsigned char>(c));
}

constexpr std::string_view kKeywords[] = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",       "catch",
    "char",     "class",      "const",     "continue",  "default",   "do",         "double",
    "else",     "enum",       "extends",   "final",     "finally",   "float",      "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",       "interface",
    "long",     "native",     "new",       "package",   "private",   "protected",  "public",
    "return",   "short",      "static",    "strictfp",  "super",     "switch",     "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",       "volatile",
    "while",    "true",       "false",     "null",
};

}  // namespace

bool is_java_keyword(std::string_view word)
{
    return std::find(std::begin(kKeywords), std::end(kKeywords), word) != std::end(kKeywords);
}

std::vector<Token> lex_java(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    int line = 1;
    const std::size_t n = s.size();

    auto push = [&](TokenKind k, std::size_t b, std::size_t e, int ln) {
        out.push_back(Token{k, s.substr(b, e - b), b, ln});
    };

    while (i < n) {
        char c = s[i];
        if (c == '\n') {
            ++line;
            ++i;
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '/') {
            while (i < n && s[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '*') {
            i += 2;
            while (i < n && !(s[i] == '*' && i + 1 < n && s[i + 1] == '/')) {
                if (s[i] == '\n') ++line;
                ++i;
            }
            i = std::min(n, i + 2);
            continue;
        }
        const std::size_t b = i;
        const int ln = line;
        if (s.substr(i, 3) == "\"\"\"") {
            i += 3;
            while (i < n && s.substr(i, 3) != "\"\"\"") {
                if (s[i] == '\\' && i + 1 < n) {
                    if (s[i + 1] == '\n') ++line;
                    i += 2;
                    continue;
                }
                if (s[i] == '\n') ++line;
                ++i;
            }
            i = std::min(n, i + 3);
            push(TokenKind::string_literal, b, i, ln);
            continue;
        }
        if (c == '"' || c == '\'') {
            ++i;
            while (i < n && s[i] != c && s[i] != '\n') {
                i += (s[i] == '\\' && i + 1 < n && s[i + 1] != '\n') ? 2 : 1;
            }
            if (i < n && s[i] == c) ++i;
            push(c == '"' ? TokenKind::string_literal : TokenKind::char_literal, b, i, ln);
            continue;
        }
        if (ident_start(c)) {
            while (i < n && ident_part(s[i])) ++i;
            push(TokenKind::identifier, b, i, ln);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            while (i < n) {
                char d = s[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
                    ++i;
                    continue;
                }
                char prev = s[i - 1];
                if ((d == '+' || d == '-') && (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P')) {
                    ++i;
                    continue;
                }
                break;
            }
            push(TokenKind::number, b, i, ln);
            continue;
        }
        std::size_t len = 1;
        auto rest = s.substr(i);
        if (rest.starts_with("...")) {
            len = 3;
        } else if (rest.starts_with("::") || rest.starts_with("->")) {
            len = 2;
        }
        i += len;
        push(TokenKind::punct, b, i, ln);
    }
    return out;
}

std::size_t match_close(const std::vector<Token>& toks, std::size_t open)
{
    if (open >= toks.size() || toks[open].kind != TokenKind::punct) return std::string_view::npos;
    const char o = toks[open].text[0];
    const char c = o == '(' ? ')' : o == '[' ? ']' : o == '{' ? '}' : '\0';
    if (c == '\0') return std::string_view::npos;
    int depth = 0;
    for (std::size_t i = open; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::punct) continue;
        if (toks[i].text[0] == o) {
            ++depth;
        } else if (toks[i].text[0] == c) {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

std::string normalized_token_text(std::string_view src)
{
    std::string out;
    for (const auto& t : lex_java(src)) {
        if (!out.empty()) out.push_back(' ');
        out.append(t.text);
    }
    return out;
}

}  // namespace callsum
