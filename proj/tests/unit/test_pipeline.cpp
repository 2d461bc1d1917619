#include "doctest.h"

#include <cstdlib>
#include <set>

#include "json.hpp"

#include "callsum/hash.hpp"
#include "callsum/pipeline.hpp"
#include "stub_server.hpp"
#include "support.hpp"

using namespace callsum;
namespace ts = testsupport;

namespace {

const Tokenizer kTok = Tokenizer::fallback();

std::string fixed_clock() { return "2024-01-01T00:00:00Z"; }

const ProjectIndex& corpus()
{
    static const ProjectIndex idx = scan_project(ts::fixtures() / "corpus");
    return idx;
}

PipelineContext context(Route route = Route::small_model)
{
    PipelineContext ctx{corpus(), kTok, {}, fixed_clock};
    ctx.policy.route = route;
    return ctx;
}

std::string id_of(const std::string& qualified)
{
    const MethodRecord* m = corpus().find(qualified);
    REQUIRE(m != nullptr);
    return m->method_id;
}

std::string describes(const std::string& name, const std::string& source)
{
    return "describes " + name + " with " + std::to_string(kTok.count(source)) + " tokens.";
}

BackendConfig instruction_mock()
{
    auto c = BackendConfig::mock("chat");
    c.prompt_style = PromptStyle::instruction;
    return c;
}

BackendConfig unreachable()
{
    int port = 0;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    BackendConfig c;
    c.name = "down";
    c.kind = BackendKind::http;
    c.endpoint_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
    c.model_name = "m";
    c.max_retries = 0;
    c.timeout_ms = 200;
    return c;
}

std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        out.push_back(text.substr(pos, nl - pos));
        pos = nl + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("sha256 matches the standard test vector")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("timestamps honour SOURCE_DATE_EPOCH")
{
    ::setenv("SOURCE_DATE_EPOCH", "86400", 1);
    CHECK(utc_timestamp() == "1970-01-02T00:00:00Z");
    ::unsetenv("SOURCE_DATE_EPOCH");
    CHECK(utc_timestamp().size() == 20);
}

TEST_CASE("P1 summarizes the target alone")
{
    const auto ctx = context();
    const auto target = id_of("app.Search.sortResults");
    const auto& src = corpus().at(target).source_text;
    const Backend small(BackendConfig::mock("small"));

    const auto rec = summarize_p1(ctx, target, small);
    CHECK(rec.ok());
    CHECK(rec.process == Process::p1);
    CHECK(rec.backend_name == "small");
    CHECK(rec.final_summary == describes("sortResults", src));
    CHECK(rec.prompt_hash == sha256_hex("TDAT\n" + src + "\nSUMMARY\n"));
    CHECK(rec.created_at == "2024-01-01T00:00:00Z");
    CHECK(rec.caller_summaries.empty());

    const auto chat = summarize_p1(ctx, target, Backend(instruction_mock()));
    CHECK(chat.prompt_hash == sha256_hex(render_method_instruction_prompt(src, kTok).text));
}

TEST_CASE("P1 flags empty bodies")
{
    ts::TempDir dir;
    ts::write_file(dir / "E.java", "class E {\n    void nothing() {\n    }\n}\n");
    const auto idx = scan_project(dir.path());
    const PipelineContext ctx{idx, kTok, {}, fixed_clock};
    const auto rec = summarize_p1(ctx, idx.find("E.nothing")->method_id, Backend(BackendConfig::mock()));
    CHECK(rec.ok());
    CHECK(std::find(rec.warnings.begin(), rec.warnings.end(), "method body is empty") != rec.warnings.end());
}

TEST_CASE("P2 puts the whole project in one prompt")
{
    const auto ctx = context();
    const auto target = id_of("app.Cache.clear");
    const Backend big(BackendConfig::mock("big"));
    const auto rec = summarize_p2(ctx, target, big);
    REQUIRE(rec.ok());
    std::vector<std::string> others;
    for (const auto* m : corpus().ordered_methods()) {
        if (m->method_id != target) others.push_back(m->source_text);
    }
    CHECK(others.size() == 24);
    CHECK(rec.prompt_hash == sha256_hex(render_project_prompt(corpus().at(target).source_text, others, kTok).text));
    CHECK(rec.final_summary.starts_with(kWhyPrefix));
}

TEST_CASE("P2 over the cap fails before any request")
{
    auto ctx = context();
    ctx.policy.project_token_cap = 100;
    const Backend big(BackendConfig::mock("big"));
    const auto rec = summarize_p2(ctx, id_of("app.Cache.clear"), big);
    CHECK_FALSE(rec.ok());
    CHECK(rec.error.find("above the cap of 100") != std::string::npos);
    CHECK(big.requests_issued() == 0);
}

TEST_CASE("P2 needs a long-window backend")
{
    auto cfg = unreachable();
    const Backend shortwin(cfg);
    CHECK_THROWS_AS(summarize_p2(context(), id_of("app.Cache.clear"), shortwin), ConfigError);
    CHECK(shortwin.requests_issued() == 0);
}

TEST_CASE("P3 small-model route summarizes each caller then the target")
{
    const auto ctx = context(Route::small_model);
    const auto target = id_of("app.Search.sortResults");
    const Backend small(BackendConfig::mock("small"));
    const auto rec = summarize_p3(ctx, target, small, small);
    REQUIRE(rec.ok());
    CHECK(rec.process == Process::p3);

    const auto render = id_of("app.Report.render");
    const auto run = id_of("app.Search.run");
    REQUIRE(rec.caller_summaries.size() == 2);
    CHECK(rec.caller_summaries[0].first == render);
    CHECK(rec.caller_summaries[1].first == run);
    CHECK(rec.caller_summaries[0].second == describes("render", corpus().at(render).source_text));
    CHECK(rec.caller_summaries[1].second == describes("run", corpus().at(run).source_text));

    const auto& src = corpus().at(target).source_text;
    std::string expected_prompt = "TDAT\n" + src + "\nCONTEXT\n" + rec.caller_summaries[0].second + "\n" +
                                  rec.caller_summaries[1].second + "\nSUMMARY\n";
    CHECK(rec.prompt_hash == sha256_hex(expected_prompt));
    CHECK(rec.final_summary.starts_with(kWhyPrefix));
    CHECK(small.requests_issued() == 3);
}

TEST_CASE("P3 commercial route describes all callers in one request")
{
    const auto ctx = context(Route::commercial);
    const auto target = id_of("app.Search.sortResults");
    const Backend chat(instruction_mock());
    const auto rec = summarize_p3(ctx, target, chat, chat);
    REQUIRE(rec.ok());
    REQUIRE(rec.caller_summaries.size() == 2);
    const auto& render_src = corpus().at(id_of("app.Report.render")).source_text;
    const auto& run_src = corpus().at(id_of("app.Search.run")).source_text;
    const std::string described = describes("render", render_src) + "\n" + describes("run", run_src);
    CHECK(rec.caller_summaries[0].second == describes("render", render_src));
    CHECK(rec.prompt_hash == sha256_hex(render_why_prompt(corpus().at(target).source_text, described, kTok).text));
    CHECK(rec.final_summary.starts_with(kWhyPrefix));
    CHECK(chat.requests_issued() == 2);
}

TEST_CASE("P3 falls back to the target alone without callers")
{
    const auto ctx = context();
    const auto target = id_of("app.Main.main");
    const Backend small(BackendConfig::mock());
    const auto rec = summarize_p3(ctx, target, small, small);
    CHECK(rec.ok());
    CHECK(rec.process == Process::p3);
    CHECK(rec.caller_summaries.empty());
    CHECK(rec.final_summary == summarize_p1(ctx, target, small).final_summary);
    REQUIRE_FALSE(rec.warnings.empty());
    CHECK(rec.warnings.back() == "empty call context; summarized the target method alone");
}

TEST_CASE("P3 falls back when every caller summary fails")
{
    const auto ctx = context();
    const auto target = id_of("app.Search.sortResults");
    const Backend down(unreachable());
    const Backend small(BackendConfig::mock());
    const auto rec = summarize_p3(ctx, target, down, small);
    CHECK(rec.ok());
    CHECK(rec.final_summary == describes("sortResults", corpus().at(target).source_text));
    CHECK(rec.warnings.back() == "no caller could be summarized; summarized the target method alone");
    CHECK(std::count_if(rec.warnings.begin(), rec.warnings.end(),
                        [](const std::string& w) { return w.starts_with("caller "); }) == 2);
}

TEST_CASE("P3 falls back on an empty caller description")
{
    ts::StubServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content(ts::ok_body("   "), "application/json");
    });
    auto cfg = unreachable();
    cfg.endpoint_url = server.url();
    const Backend blank(cfg);
    const Backend chat(instruction_mock());
    const auto rec = summarize_p3(context(Route::commercial), id_of("app.Search.sortResults"), blank, chat);
    CHECK(rec.ok());
    CHECK(rec.warnings.back() == "no caller descriptions; summarized the target method alone");
}

TEST_CASE("summarize_many keeps input order and matches single calls")
{
    const auto ctx = context();
    auto cfg = BackendConfig::mock();
    cfg.parallelism = 4;
    const Backend b(cfg);
    std::vector<std::string> targets;
    for (const auto* m : corpus().ordered_methods()) targets.push_back(m->method_id);
    std::reverse(targets.begin(), targets.end());
    targets.push_back("no-such-method");
    const auto recs = summarize_many(ctx, Process::p3, targets, b, b);
    REQUIRE(recs.size() == targets.size());
    for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
        CHECK(recs[i].method_id == targets[i]);
        CHECK(to_json(recs[i]) == to_json(summarize_p3(ctx, targets[i], b, b)));
    }
    CHECK_FALSE(recs.back().ok());
}

TEST_CASE("summary records round-trip through JSON")
{
    const Backend b(BackendConfig::mock());
    const auto rec = summarize_p3(context(), id_of("app.Search.sortResults"), b, b);
    const auto back = summary_from_json(nlohmann::json::parse(to_json(rec).dump()));
    CHECK(to_json(back) == to_json(rec));
    const auto j = to_json(rec);
    CHECK(j["process"] == "p3");
    CHECK(j["caller_summaries"].size() == 2);
}

TEST_CASE("distillation writes one example per method and is idempotent")
{
    ts::TempDir dir;
    const auto out = dir / "train.jsonl";
    const Backend small(BackendConfig::mock("small"));
    const Backend teacher(instruction_mock());
    const auto ctx = context();

    const auto first = build_distill_dataset(ctx, {small, teacher}, {}, out);
    CHECK(first.written == 25);
    CHECK(first.failed == 0);
    const std::string bytes = ts::read_file(out);
    const auto lines = lines_of(bytes);
    REQUIRE(lines.size() == 25);

    std::set<std::string> ids;
    for (const auto& line : lines) {
        const auto ex = training_example_from_json(nlohmann::json::parse(line));
        ids.insert(ex.method_id);
        CHECK(ex.serialized_prompt ==
              render_tdat_context_prompt(ex.target_source, ex.descriptions, ex.summary, kTok).text);
        const auto callers = callers_of(corpus(), ex.method_id).caller_ids;
        CHECK(ex.descriptions.size() == callers.size());
        // Methods without callers fall back to a single-method summary.
        CHECK(ex.summary.starts_with(kWhyPrefix) == !callers.empty());
    }
    CHECK(ids.size() == 25);

    const auto second = build_distill_dataset(ctx, {small, teacher}, {}, out);
    CHECK(second.written == 0);
    CHECK(second.skipped == 25);
    CHECK(ts::read_file(out) == bytes);

    ts::TempDir again;
    build_distill_dataset(ctx, {small, teacher}, {}, again / "train.jsonl");
    CHECK(ts::read_file(again / "train.jsonl") == bytes);
}

TEST_CASE("context-only distillation excludes methods without callers")
{
    ts::TempDir dir;
    const Backend small(BackendConfig::mock("small"));
    const auto stats = build_distill_dataset(context(), {small, small}, {true, std::nullopt}, dir / "t.jsonl");
    CHECK(stats.written == 18);
    CHECK(stats.excluded == 7);
    for (const auto& line : lines_of(ts::read_file(dir / "t.jsonl"))) {
        CHECK_FALSE(training_example_from_json(nlohmann::json::parse(line)).descriptions.empty());
    }
}

TEST_CASE("interrupted distillation resumes to the uninterrupted bytes")
{
    const Backend small(BackendConfig::mock("small"));
    const Backend teacher(instruction_mock());
    const auto ctx = context();
    ts::TempDir dir;
    build_distill_dataset(ctx, {small, teacher}, {}, dir / "full.jsonl");
    const std::string full = ts::read_file(dir / "full.jsonl");

    SUBCASE("stopped after a line limit")
    {
        const auto part = build_distill_dataset(ctx, {small, teacher}, {false, 10}, dir / "run.jsonl");
        CHECK(part.written == 10);
        CHECK(lines_of(ts::read_file(dir / "run.jsonl")).size() == 10);
        const auto rest = build_distill_dataset(ctx, {small, teacher}, {}, dir / "run.jsonl");
        CHECK(rest.skipped == 10);
        CHECK(rest.written == 15);
        CHECK(ts::read_file(dir / "run.jsonl") == full);
    }
    SUBCASE("killed mid-line")
    {
        const auto cut = full.find('\n', full.size() / 2) + 40;
        ts::write_file(dir / "run.jsonl", full.substr(0, cut));
        build_distill_dataset(ctx, {small, teacher}, {}, dir / "run.jsonl");
        CHECK(ts::read_file(dir / "run.jsonl") == full);
    }
}

TEST_CASE("training examples keep only what survived the budget")
{
    auto ctx = context();
    ctx.policy.budget = TokenBudget{64, 8};
    std::vector<std::string> descs;
    for (int i = 0; i < 5; ++i) descs.push_back("caller description number " + std::to_string(i) + " with quite a few more words in it");
    const auto ex = make_training_example(ctx, "id", "void f() { g(); }", descs, "This method is used to f .");
    CHECK(ex.descriptions.size() < descs.size());
    CHECK(std::equal(ex.descriptions.begin(), ex.descriptions.end(), descs.begin()));
    CHECK(kTok.count(ex.serialized_prompt) <= 56);
    CHECK(ex.serialized_prompt ==
          render_tdat_context_prompt(ex.target_source, ex.descriptions, ex.summary, kTok).text);
    const auto back = training_example_from_json(nlohmann::json::parse(to_json(ex).dump()));
    CHECK(to_json(back) == to_json(ex));
}

TEST_CASE("leave-one-out splits")
{
    std::vector<std::string> ids;
    for (int i = 0; i < 40; ++i) ids.push_back("m" + std::to_string(i));
    const auto splits = make_loo_splits(ids);
    REQUIRE(splits.size() == 41);
    std::multiset<std::string> held;
    for (std::size_t i = 0; i < 40; ++i) {
        REQUIRE(splits[i].held_out_id.has_value());
        CHECK(*splits[i].held_out_id == ids[i]);
        CHECK(splits[i].train_ids.size() == 39);
        CHECK(std::find(splits[i].train_ids.begin(), splits[i].train_ids.end(), ids[i]) ==
              splits[i].train_ids.end());
        held.insert(*splits[i].held_out_id);
    }
    CHECK(std::set<std::string>(held.begin(), held.end()).size() == 40);
    CHECK_FALSE(splits.back().held_out_id.has_value());
    CHECK(splits.back().train_ids == ids);
    CHECK(to_json(splits.back())["held_out_id"].is_null());

    const auto one = make_loo_splits({"only"});
    REQUIRE(one.size() == 2);
    CHECK(one[0].train_ids.empty());
    CHECK(one[1].train_ids == std::vector<std::string>{"only"});
    CHECK(make_loo_splits({}).size() == 1);
    CHECK_THROWS_AS(make_loo_splits({"a", "b", "a"}), ConfigError);
}
