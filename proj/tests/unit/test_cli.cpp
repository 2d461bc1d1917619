#include "doctest.h"

#include <cstdio>
#include <sys/wait.h>

#include "json.hpp"

#include "support.hpp"

namespace ts = testsupport;

namespace {

struct Run {
    int rc = -1;
    std::string out;
    std::string err;
};

Run cli(const std::string& args, const ts::TempDir& dir)
{
    const auto err_path = dir / "stderr.txt";
    const std::string cmd = "SOURCE_DATE_EPOCH=0 '" + std::string(CALLSUM_CLI_PATH) + "' " + args + " 2>'" +
                            err_path.string() + "'";
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = ts::read_file(err_path);
    return r;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("index, context and stats")
{
    ts::TempDir dir;
    const auto idx = dir / "index.jsonl";
    auto r = cli("index " + q(ts::fixtures() / "corpus") + " --out " + q(idx), dir);
    REQUIRE(r.rc == 0);
    CHECK(r.err.find("indexed 25 methods from 6 files") != std::string::npos);
    CHECK(line_count(ts::read_file(idx)) == 26);

    r = cli("context " + q(idx) + " --target app.Search.sortResults", dir);
    REQUIRE(r.rc == 0);
    const auto ctx = nlohmann::json::parse(r.out);
    CHECK(ctx["caller_ids"].size() == 2);
    CHECK(ctx["truncated"] == false);

    r = cli("context " + q(idx) + " --target app.Search.sortResults --cap 1", dir);
    CHECK(nlohmann::json::parse(r.out)["truncated"] == true);

    r = cli("context " + q(idx) + " --target app.Nope.nothing", dir);
    CHECK(r.rc == 2);
    CHECK(r.err.find("unknown target method") != std::string::npos);

    r = cli("stats " + q(idx), dir);
    REQUIRE(r.rc == 0);
    const auto stats = nlohmann::json::parse(r.out);
    CHECK(stats["method_count"] == 25);
    CHECK(stats["max_tokens_per_method"] == 97);
    CHECK(stats["mean_context_size"] == 1.08);
    CHECK(stats["approximate"] == true);

    // Method token counts are fixed at index time.
    const std::string bpe =
        " --vocab " + q(ts::fixtures() / "bpe/encoder.json") + " --merges " + q(ts::fixtures() / "bpe/vocab.bpe");
    REQUIRE(cli("index " + q(ts::fixtures() / "corpus") + " --out " + q(dir / "bpe.jsonl") + bpe, dir).rc == 0);
    r = cli("stats " + q(dir / "bpe.jsonl") + bpe, dir);
    REQUIRE(r.rc == 0);
    CHECK(nlohmann::json::parse(r.out)["approximate"] == false);
}

TEST_CASE("summarize with mock backends")
{
    ts::TempDir dir;
    const auto idx = dir / "index.jsonl";
    REQUIRE(cli("index " + q(ts::fixtures() / "corpus") + " --out " + q(idx), dir).rc == 0);

    for (const char* process : {"p1", "p2", "p3"}) {
        const auto out = dir / (std::string(process) + ".jsonl");
        const auto r = cli(std::string("summarize --process ") + process + " --index " + q(idx) +
                               " --backend mock --out " + q(out),
                           dir);
        CHECK(r.rc == 0);
        const auto text = ts::read_file(out);
        CHECK(line_count(text) == 25);
        const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
        CHECK(first["process"] == process);
        CHECK(first["created_at"] == "1970-01-01T00:00:00Z");
    }

    ts::write_file(dir / "targets.txt", "app.Search.sortResults\n\napp.Main.main\n");
    const auto r = cli("summarize --process p3 --route commercial --index " + q(idx) + " --backend mock --targets " +
                           q(dir / "targets.txt") + " --out " + q(dir / "t.jsonl"),
                       dir);
    CHECK(r.rc == 0);
    CHECK(line_count(ts::read_file(dir / "t.jsonl")) == 2);

    const auto missing = cli("summarize --process p1 --index " + q(idx) + " --backend gpt --out " +
                                 q(dir / "x.jsonl"),
                             dir);
    CHECK(missing.rc == 2);
}

TEST_CASE("distill twice writes identical bytes and nothing new")
{
    ts::TempDir dir;
    const auto idx = dir / "index.jsonl";
    REQUIRE(cli("index " + q(ts::fixtures() / "corpus") + " --out " + q(idx), dir).rc == 0);
    auto r = cli("distill --index " + q(idx) + " --out " + q(dir / "train.jsonl"), dir);
    REQUIRE(r.rc == 0);
    CHECK(nlohmann::json::parse(r.out)["written"] == 25);
    const auto bytes = ts::read_file(dir / "train.jsonl");
    r = cli("distill --index " + q(idx) + " --out " + q(dir / "train.jsonl"), dir);
    CHECK(nlohmann::json::parse(r.out)["written"] == 0);
    CHECK(ts::read_file(dir / "train.jsonl") == bytes);

    r = cli("distill --context-only --index " + q(idx) + " --out " + q(dir / "ctx.jsonl"), dir);
    CHECK(nlohmann::json::parse(r.out)["written"] == 18);
    CHECK(nlohmann::json::parse(r.out)["excluded"] == 7);
}

TEST_CASE("split writes one file per held-out id plus the full split")
{
    ts::TempDir dir;
    std::string exemplars;
    for (int i = 0; i < 40; ++i) {
        for (int k = 0; k < 2; ++k) {
            exemplars += "{\"method_id\":\"m" + std::to_string(i) + "\",\"summary\":\"s" + std::to_string(k) + "\"}\n";
        }
    }
    ts::write_file(dir / "exemplars.jsonl", exemplars);
    const auto r = cli("split --exemplars " + q(dir / "exemplars.jsonl") + " --out " + q(dir / "splits"), dir);
    REQUIRE(r.rc == 0);
    const auto first = nlohmann::json::parse(ts::read_file(dir / "splits/loo_000.json"));
    CHECK(first["held_out_id"] == "m0");
    CHECK(first["train_ids"].size() == 39);
    CHECK(std::filesystem::exists(dir / "splits/loo_039.json"));
    CHECK_FALSE(std::filesystem::exists(dir / "splits/loo_040.json"));
    const auto full = nlohmann::json::parse(ts::read_file(dir / "splits/full.json"));
    CHECK(full["held_out_id"].is_null());
    CHECK(full["train_ids"].size() == 40);
}

TEST_CASE("analyze writes the report and prints the bracket")
{
    ts::TempDir dir;
    std::string likert;
    std::string prefs;
    std::string participants;
    for (int p = 0; p < 10; ++p) {
        const std::string pid = std::to_string(p);
        participants += "{\"participant_id\":" + pid + ",\"qc_correct\":" + (p == 9 ? "2" : "3") + "}\n";
        for (int m = 0; m < 4; ++m) {
            const std::string base = "{\"participant_id\":" + pid + ",\"experiment_id\":\"exp1\",\"method_id\":" +
                                     std::to_string(m);
            likert += base + ",\"source_label\":\"A\",\"rating\":4}\n";
            likert += base + ",\"source_label\":\"B\",\"rating\":2}\n";
            prefs += base + ",\"chosen_source\":\"" + (m == 0 ? "B" : "A") + "\",\"alternative_source\":\"" +
                     (m == 0 ? "A" : "B") + "\"}\n";
        }
    }
    ts::write_file(dir / "likert.jsonl", likert);
    ts::write_file(dir / "prefs.jsonl", prefs);
    ts::write_file(dir / "participants.jsonl", participants);
    ts::write_file(dir / "pairings.json", R"([{"experiment_id":"exp1","sources":["A","B"]}])");

    const auto r = cli("analyze --likert " + q(dir / "likert.jsonl") + " --prefs " + q(dir / "prefs.jsonl") +
                           " --participants " + q(dir / "participants.jsonl") + " --out " + q(dir / "report.json") +
                           " --bracket " + q(dir / "pairings.json"),
                       dir);
    REQUIRE(r.rc == 0);
    CHECK(r.out == "exp1: A vs. B -> A\n");
    const auto report = nlohmann::json::parse(ts::read_file(dir / "report.json"));
    CHECK(report["qc"]["retained_participants"] == 9);
    CHECK(report["qc"]["removed_participants"] == nlohmann::json::array({"9"}));
    const auto& exp = report["experiments"][0];
    CHECK(exp["winner"] == "A");
    CHECK(exp["total_preferences"] == 36);
    CHECK(exp["method"] == "normal_approx");
    CHECK(exp["significant"] == true);
}

TEST_CASE("usage errors")
{
    ts::TempDir dir;
    CHECK(cli("", dir).rc != 0);
    CHECK(cli("index /nonexistent/root --out " + q(dir / "i.jsonl"), dir).rc != 0);
    CHECK(cli("summarize --process p4 --index x --backend mock --out y", dir).rc != 0);
}
