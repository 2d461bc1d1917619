#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace callsum {

enum class TokenKind { identifier, number, string_literal, char_literal, punct };

struct Token {
    TokenKind kind;
    std::string_view text;  // view into the lexed source
    std::size_t offset;     // byte offset of the first character
    int line;               // 1-based
};

/// Splits Java source into tokens. Comments and whitespace are skipped;
/// string, char and text-block literals become single tokens. Multi-char
/// operators are kept as single characters except `...`, `::` and `->`.
std::vector<Token> lex_java(std::string_view src);

bool is_java_keyword(std::string_view word);

inline bool is_word(const Token& t)
{
    return t.kind == TokenKind::identifier || t.kind == TokenKind::number;
}

inline bool is_punct(const Token& t, std::string_view p)
{
    return t.kind == TokenKind::punct && t.text == p;
}

/// Index of the token closing the group opened at `open` ("(", "[" or "{"),
/// counting only the same bracket kind. Returns npos when unbalanced.
std::size_t match_close(const std::vector<Token>& toks, std::size_t open);

/// Tokens joined by a single space.
std::string normalized_token_text(std::string_view src);

}  // namespace callsum
