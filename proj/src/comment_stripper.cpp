#include "callsum/comment_stripper.hpp"

#include <string>

namespace callsum {

StrippedText strip_comments_mapped(std::string_view s)
{
    enum class State { code, line_comment, block_comment, string, chr, text_block };

    StrippedText out;
    out.text.reserve(s.size());
    out.origin.reserve(s.size() + 1);
    auto emit = [&](char c, std::size_t from) {
        out.text.push_back(c);
        out.origin.push_back(from);
    };

    State st = State::code;
    std::size_t block_start = 0;
    bool block_had_newline = false;
    const std::size_t n = s.size();
    std::size_t i = 0;
    while (i < n) {
        const char c = s[i];
        switch (st) {
        case State::code:
            if (c == '/' && i + 1 < n && s[i + 1] == '/') {
                st = State::line_comment;
                i += 2;
            } else if (c == '/' && i + 1 < n && s[i + 1] == '*') {
                st = State::block_comment;
                block_start = i;
                block_had_newline = false;
                i += 2;
            } else if (s.substr(i, 3) == "\"\"\"") {
                for (int k = 0; k < 3; ++k) emit('"', i + k);
                st = State::text_block;
                i += 3;
            } else {
                if (c == '"') st = State::string;
                if (c == '\'') st = State::chr;
                emit(c, i);
                ++i;
            }
            break;
        case State::line_comment:
            if (c == '\n') {
                st = State::code;
                emit(c, i);
            }
            ++i;
            break;
        case State::block_comment:
            if (c == '*' && i + 1 < n && s[i + 1] == '/') {
                if (!block_had_newline) emit(' ', block_start);
                st = State::code;
                i += 2;
            } else {
                if (c == '\n') {
                    block_had_newline = true;
                    emit('\n', i);
                }
                ++i;
            }
            break;
        case State::string:
        case State::chr: {
            const char quote = st == State::string ? '"' : '\'';
            if (c == '\\' && i + 1 < n && s[i + 1] != '\n') {
                emit(c, i);
                emit(s[i + 1], i + 1);
                i += 2;
                break;
            }
            // Plain literals cannot span lines; an unterminated one ends at the newline.
            if (c == quote || c == '\n') st = State::code;
            emit(c, i);
            ++i;
            break;
        }
        case State::text_block:
            if (c == '\\' && i + 1 < n) {
                emit(c, i);
                emit(s[i + 1], i + 1);
                i += 2;
            } else if (s.substr(i, 3) == "\"\"\"") {
                for (int k = 0; k < 3; ++k) emit('"', i + k);
                st = State::code;
                i += 3;
            } else {
                emit(c, i);
                ++i;
            }
            break;
        }
    }
    if (st == State::block_comment) {
        if (!block_had_newline) emit(' ', block_start);
        out.diagnostics.push_back("unterminated block comment starting at offset " +
                                  std::to_string(block_start));
    }
    out.origin.push_back(n);
    return out;
}

std::size_t sanitize_utf8(std::string& text)
{
    static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
    std::string out;
    out.reserve(text.size());
    std::size_t replaced = 0;
    const auto* p = reinterpret_cast<const unsigned char*>(text.data());
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n) {
        const unsigned char c = p[i];
        std::size_t len = 0;
        unsigned int cp = 0;
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len != 0 && i + len <= n;
        for (std::size_t k = 1; ok && k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80) {
                ok = false;
            } else {
                cp = (cp << 6) | (p[i + k] & 0x3F);
            }
        }
        if (ok) {
            // Reject overlong forms, surrogates and out-of-range code points.
            static constexpr unsigned int kMin[] = {0, 0, 0x80, 0x800, 0x10000};
            ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
        }
        if (ok) {
            out.append(text, i, len);
            i += len;
        } else {
            out.append(kReplacement);
            ++replaced;
            ++i;
        }
    }
    text = std::move(out);
    return replaced;
}

}  // namespace callsum
