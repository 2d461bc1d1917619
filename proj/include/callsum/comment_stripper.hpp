#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace callsum {

struct StrippedText {
    std::string text;
    // origin[i] is the input offset that produced text[i]; one extra entry
    // maps text.size() to the input size.
    std::vector<std::size_t> origin;
    std::vector<std::string> diagnostics;
};

/// Removes `//` and `/* */` comments while leaving string, char and text-block
/// literals intact. Line comments are deleted up to (not including) the
/// newline. A block comment becomes its newlines, or a single space when it
/// spans no line break, so line numbers of the remaining code are unchanged.
/// An unterminated block comment runs to end of input and is reported.
StrippedText strip_comments_mapped(std::string_view src);

inline std::string strip_comments(std::string_view src)
{
    return strip_comments_mapped(src).text;
}

/// Replaces invalid UTF-8 sequences with U+FFFD. Returns the number of
/// replacements made.
std::size_t sanitize_utf8(std::string& text);

}  // namespace callsum
