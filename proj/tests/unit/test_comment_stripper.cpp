#include "doctest.h"

#include <algorithm>
#include <random>

#include "callsum/comment_stripper.hpp"
#include "naive_strip.hpp"
#include "support.hpp"

using callsum::strip_comments;
using callsum::strip_comments_mapped;

namespace {

std::string random_source(std::mt19937& rng, std::size_t len)
{
    static const std::string alphabet = "ab /*\"'\\\n{}x";
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::string s;
    for (std::size_t i = 0; i < len; ++i) s += alphabet[pick(rng)];
    return s;
}

}  // namespace

TEST_CASE("line comment is removed up to the newline")
{
    CHECK(strip_comments("int x = 1; // set x") == "int x = 1; ");
    CHECK(strip_comments("a(); // one\nb();") == "a(); \nb();");
}

TEST_CASE("comment markers inside literals are kept")
{
    CHECK(strip_comments(R"(String s = "//not a comment";)") == R"(String s = "//not a comment";)");
    CHECK(strip_comments(R"(String s = "/* nor */";)") == R"(String s = "/* nor */";)");
    CHECK(strip_comments(R"(char c = '"'; // x)") == R"(char c = '"'; )");
    CHECK(strip_comments("String t = \"\"\"\n  /* kept */ // kept\n  \"\"\";") ==
          "String t = \"\"\"\n  /* kept */ // kept\n  \"\"\";");
}

TEST_CASE("block comments keep line structure")
{
    CHECK(strip_comments("a/* x */b") == "a b");
    CHECK(strip_comments("a/*\n\n*/b") == "a\n\nb");
    const std::string src = "/** doc\n * more\n */\nvoid f() {}\n";
    const std::string out = strip_comments(src);
    CHECK(std::count(out.begin(), out.end(), '\n') == std::count(src.begin(), src.end(), '\n'));
}

TEST_CASE("unterminated block comment runs to end of input with a diagnostic")
{
    const auto r = strip_comments_mapped("int a; /* open\nstill");
    CHECK(r.text == "int a; \n");
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].find("unterminated") != std::string::npos);
    CHECK(strip_comments_mapped("int a;").diagnostics.empty());
}

TEST_CASE("escaped quotes do not end a literal")
{
    CHECK(strip_comments(R"(s = "a\"//b"; // c)") == R"(s = "a\"//b"; )");
    CHECK(strip_comments(R"(c = '\''; // c)") == R"(c = '\''; )");
}

TEST_CASE("origin map points every output byte back into the input")
{
    const std::string src = "a /* c */ b // d\n\"s\"";
    const auto r = strip_comments_mapped(src);
    REQUIRE(r.origin.size() == r.text.size() + 1);
    CHECK(r.origin.back() == src.size());
    for (std::size_t i = 0; i < r.text.size(); ++i) {
        if (r.text[i] != ' ') CHECK(src[r.origin[i]] == r.text[i]);
        if (i > 0) CHECK(r.origin[i] > r.origin[i - 1]);
    }
}

TEST_CASE("fixture files match the reference scanner")
{
    for (const auto& e : std::filesystem::recursive_directory_iterator(testsupport::fixtures())) {
        if (e.path().extension() != ".java") continue;
        const std::string src = testsupport::read_file(e.path());
        INFO(e.path().string());
        CHECK(strip_comments(src) == oracle::naive_strip(src));
    }
}

TEST_CASE("random inputs match the reference scanner and reach a fixed point")
{
    std::mt19937 rng(20240611);
    for (int i = 0; i < 3000; ++i) {
        const std::string src = random_source(rng, 1 + static_cast<std::size_t>(i % 40));
        const std::string once = strip_comments(src);
        INFO(src);
        CHECK(once == oracle::naive_strip(src));
        CHECK(strip_comments(once) == once);
    }
}

TEST_CASE("invalid UTF-8 is replaced")
{
    std::string ok = "caf\xC3\xA9";
    CHECK(callsum::sanitize_utf8(ok) == 0);
    CHECK(ok == "caf\xC3\xA9");
    std::string bad = "a\xFF" "b\xC3";
    CHECK(callsum::sanitize_utf8(bad) == 2);
    CHECK(bad == "a\xEF\xBF\xBD" "b\xEF\xBF\xBD");
}
