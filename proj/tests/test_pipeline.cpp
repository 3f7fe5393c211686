#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "sdgen/eval.hpp"
#include "sdgen/providers.hpp"

using namespace sdgen;
using namespace sdgen::pipeline;

namespace {

const std::string kData = SDGEN_DATA_DIR;

PipelineContext context(const PromptLibrary& prompts, const knowledge::KnowledgeBase& kb,
                        const geom::PrecastCatalog& catalog) {
    PipelineContext ctx;
    ctx.prompts = &prompts;
    ctx.kb = &kb;
    ctx.catalog = &catalog;
    return ctx;
}

std::string rc_description() {
    return "I would like to draw a 24x14in RC cross-section with No 4 closed stirrups at 5 in. "
           "It needs three rebar layers. The top and bottom layer will have 4 No 8 and 2 No 4, "
           "respectively. The middle layer will have 2 No 4. Consider a 2in clear cover.";
}

}  // namespace

TEST_CASE("render_prompt substitutes declared placeholders only") {
    PromptTemplate tmpl{1, "Hello {name}, draw {what}. Literal {braces} stay.",
                        {"name", "what"}};
    const auto out = render_prompt(tmpl, {{"name", "Ada"}, {"what", "a beam"}});
    CHECK(out == "Hello Ada, draw a beam. Literal {braces} stay.");

    CHECK_THROWS_AS(render_prompt(tmpl, {{"name", "Ada"}}), MissingBinding);
    CHECK_THROWS_AS(
        render_prompt(tmpl, {{"name", "Ada"}, {"what", "x"}, {"extra", "y"}}),
        UnknownPlaceholder);
}

TEST_CASE("extract_result takes the last complete block") {
    CHECK(extract_result("<result>a</result>") == "a");
    CHECK(extract_result("<result>a</result> noise <result>b</result>") == "b");
    CHECK(extract_result("x <result>\n  spaced \n</result> y") == "spaced");
    CHECK_THROWS_AS(extract_result("no block here"), NoResultBlock);
    CHECK_THROWS_AS(extract_result("<result> open forever"), UnterminatedResultBlock);
}

TEST_CASE("calc tools round to four decimals") {
    CHECK(calc_tool(CalcOp::Multiply, {3, 7}) == 21.0);
    CHECK(calc_tool(CalcOp::Divide, {8, 3}) == doctest::Approx(2.6667));
    CHECK(calc_tool(CalcOp::Minus, {21.5, 0.0858}) == doctest::Approx(21.4142));
    CHECK(calc_tool(CalcOp::Add, {1.00004, 0}) == 1.0);
    CHECK(calc_tool(CalcOp::Sqrt, {2}) == doctest::Approx(1.4142));

    CHECK_THROWS_AS(calc_tool(CalcOp::Divide, {1, 0}), DivideByZero);
    CHECK_THROWS_AS(calc_tool(CalcOp::Sqrt, {-1}), NegativeSqrt);
    CHECK_THROWS_AS(calc_tool(CalcOp::Sqrt, {1, 2}), ArityError);
    CHECK_THROWS_AS(calc_tool(CalcOp::Add, {1}), ArityError);
}

TEST_CASE("calc tools agree with a high-precision reference") {
    std::mt19937 rng(31337);
    std::uniform_real_distribution<double> value(-1000.0, 1000.0);
    std::uniform_int_distribution<int> op_d(0, 4);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto op = static_cast<CalcOp>(op_d(rng));
        const double a = value(rng);
        const double b = value(rng);
        long double ref;
        std::vector<double> args{a, b};
        switch (op) {
            case CalcOp::Multiply: ref = static_cast<long double>(a) * b; break;
            case CalcOp::Divide:
                if (b == 0.0) continue;
                ref = static_cast<long double>(a) / b;
                break;
            case CalcOp::Minus: ref = static_cast<long double>(a) - b; break;
            case CalcOp::Add: ref = static_cast<long double>(a) + b; break;
            case CalcOp::Sqrt:
                if (a < 0.0) continue;
                ref = std::sqrt(static_cast<long double>(a));
                args = {a};
                break;
        }
        const double rounded =
            static_cast<double>(std::round(ref * 10000.0L) / 10000.0L);
        CHECK(calc_tool(op, args) == doctest::Approx(rounded).epsilon(1e-12));
        ++checked;
    }
    CHECK(checked > 8900);
}

TEST_CASE("tool registry records every call") {
    ToolRegistry reg;
    CHECK(reg.call("Add", {1, 2}) == 3.0);
    CHECK(reg.call("Sqrt", {9}) == 3.0);
    REQUIRE(reg.calls().size() == 2);
    CHECK(reg.calls()[1].name == "Sqrt");
    CHECK(reg.calls()[1].result == 3.0);
    CHECK_THROWS_AS(reg.call("Integrate", {1}), PipelineError);
    reg.clear();
    CHECK(reg.calls().empty());
}

TEST_CASE("step roles and labels") {
    CHECK(role_for_step(1) == ModelRole::Light);
    CHECK(role_for_step(2) == ModelRole::Light);
    CHECK(role_for_step(4) == ModelRole::Light);
    CHECK(role_for_step(3) == ModelRole::Strong);
    CHECK(role_for_step(5) == ModelRole::Strong);
    CHECK(role_for_step(6) == ModelRole::Strong);
    CHECK(StepRef{3, 2}.label() == "3-2");
    CHECK(StepRef{5, 0}.label() == "5");
}

TEST_CASE("workspace details parse save and unit lines") {
    const auto none = parse_workspace_details("Save: False\nUnit: Inch");
    CHECK_FALSE(none.save.has_value());
    CHECK(none.unit == ir::Unit::Inch);

    const auto saved = parse_workspace_details("- Save: C:/drawings/beam.dwg\n- Unit: Millimeter");
    CHECK(saved.save == std::optional<std::string>("C:/drawings/beam.dwg"));
    CHECK(saved.unit == ir::Unit::Millimeter);

    CHECK(parse_workspace_details("Save: False").unit == ir::Unit::Millimeter);
}

TEST_CASE("prompt library loads the six step templates") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    CHECK(prompts.step(1).body.find("{description}") != std::string::npos);
    CHECK(prompts.step(3).body.find("{Mandatory_Info}") != std::string::npos);
    CHECK(prompts.step(3).body.find("{background_sd}") != std::string::npos);
    CHECK(prompts.step(5).body.find("{JSON_Requirement}") != std::string::npos);
    CHECK(prompts.step(6).body.find("{JSON_file}") != std::string::npos);
    CHECK_THROWS_AS(PromptLibrary::load("/nonexistent/prompts"), TemplateIoError);
}

TEST_CASE("fnv1a fingerprints are stable") {
    CHECK(fnv1a_hex("") == "cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a_hex("prompt") != fnv1a_hex("Prompt"));
}

TEST_CASE("replayed concrete chain produces the published drawing") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    const auto kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    const auto catalog = geom::PrecastCatalog::builtin();
    auto provider = ReplayProvider::load(kData + "/replay/rc.json");

    const auto run = run_pipeline(rc_description(), provider, context(prompts, kb, catalog));
    CHECK(run.ok);
    CHECK(run.kind == ir::DrawingKind::RectangularConcrete);
    REQUIRE(run.transcripts.size() == 8);
    CHECK(run.transcripts[2].ref.label() == "3-1");
    CHECK(run.transcripts[4].ref.label() == "3-3");
    REQUIRE(run.final_ir.has_value());
    REQUIRE(run.verify.has_value());
    CHECK(run.verify->empty());

    geom::RcSectionSpec spec;
    spec.width = 14;
    spec.height = 24;
    spec.cover = 2;
    spec.stirrup_bar = {4};
    spec.layers = {{4, {8}}, {2, {4}}, {2, {4}}};
    CHECK(*run.final_ir == geom::resolve(spec, ir::Unit::Inch, {}));
    CHECK(run.script.find("stirrup_hooks") != std::string::npos);
}

TEST_CASE("replayed runs are byte-identical") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    const auto kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    const auto catalog = geom::PrecastCatalog::builtin();
    auto provider = ReplayProvider::load(kData + "/replay/steel.json");

    std::string first;
    for (int i = 0; i < 5; ++i) {
        provider.begin_trial(i);
        const auto run = run_pipeline("I would like to draw W1100X390", provider,
                                      context(prompts, kb, catalog));
        const auto text = run_to_json(run);
        if (i == 0) {
            first = text;
        } else {
            CHECK(text == first);
        }
    }
    CHECK(first.find("\"ok\": true") != std::string::npos);
}

TEST_CASE("the chain halts at the first failed step") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    const auto kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    const auto catalog = geom::PrecastCatalog::builtin();

    std::vector<ReplayEntry> entries;
    entries.push_back({{1, 0}, "", "<result>steel beam cross-section</result>", {}});
    entries.push_back({{2, 0}, "", "thinking, but no block", {}});
    ReplayProvider provider(std::move(entries));

    const auto run = run_pipeline("draw it", provider, context(prompts, kb, catalog));
    CHECK_FALSE(run.ok);
    REQUIRE(run.transcripts.size() == 2);
    CHECK(run.transcripts[1].outcome == StepOutcome::ExtractionFailed);
    CHECK(run.failure.find("step 2") != std::string::npos);
    CHECK_FALSE(run.final_ir.has_value());
}

TEST_CASE("an unrecognized step-1 answer stops the run") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    const auto kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    const auto catalog = geom::PrecastCatalog::builtin();

    std::vector<ReplayEntry> entries;
    entries.push_back({{1, 0}, "", "<result>a suspension bridge</result>", {}});
    ReplayProvider provider(std::move(entries));
    const auto run = run_pipeline("draw a bridge", provider, context(prompts, kb, catalog));
    CHECK_FALSE(run.ok);
    CHECK_FALSE(run.kind.has_value());
    CHECK(run.transcripts.size() == 1);
}

TEST_CASE("an empty description never reaches the provider") {
    const auto prompts = PromptLibrary::load(kData + "/prompts");
    const auto kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    const auto catalog = geom::PrecastCatalog::builtin();
    ReplayProvider provider(std::vector<ReplayEntry>{});
    const auto run = run_pipeline("", provider, context(prompts, kb, catalog));
    CHECK_FALSE(run.ok);
    CHECK(run.transcripts.empty());
    CHECK_FALSE(run.failure.empty());
}

TEST_CASE("a context without templates is a configuration error") {
    ReplayProvider provider(std::vector<ReplayEntry>{});
    CHECK_THROWS_AS(run_pipeline("x", provider, PipelineContext{}), ConfigError);
}

TEST_CASE("replay checks recorded prompt fingerprints") {
    std::vector<ReplayEntry> entries;
    entries.push_back({{1, 0}, "deadbeefdeadbeef", "<result>steel beam cross-section</result>", {}});
    ReplayProvider provider(std::move(entries));
    ToolRegistry tools;
    CHECK_THROWS_AS(provider.complete({1, 0}, "some prompt", ModelRole::Light, &tools),
                    ProviderError);
    CHECK_THROWS_AS(provider.complete({4, 0}, "p", ModelRole::Light, nullptr), ProviderError);
}

TEST_CASE("replay reruns recorded tool calls") {
    std::vector<ReplayEntry> entries;
    entries.push_back({{3, 1}, "", "<result>x: 2.6667</result>", {{"Divide", {8, 3}, 2.6667}}});
    ReplayProvider provider(std::move(entries));
    ToolRegistry tools;
    const auto result = provider.complete({3, 1}, "p", ModelRole::Strong, &tools);
    REQUIRE(result.tool_calls.size() == 1);
    CHECK(result.tool_calls[0].result == doctest::Approx(2.6667));
    REQUIRE(tools.calls().size() == 1);
}

TEST_CASE("http provider speaks the chat-completions protocol") {
    httplib::Server server;
    std::atomic<int> requests{0};
    server.Post("/v1/chat/completions", [&](const httplib::Request& req,
                                            httplib::Response& res) {
        const auto body = nlohmann::json::parse(req.body);
        ++requests;
        nlohmann::json reply;
        std::string content;
        if (body.at("messages").size() == 1) {
            CHECK(body.at("model") == "strong-model");
            CHECK(req.get_header_value("Authorization") == "Bearer sekrit");
            content = "Thought: need math <tool>Add(19.5, 2)</tool>";
        } else {
            // The observation from the tool round-trips back to the model.
            CHECK(body.at("messages").back().at("content") == "Observation: 21.5");
            content = "Final Answer: <result>y = 21.5</result>";
        }
        reply["choices"] = {{{"message", {{"role", "assistant"}, {"content", content}}}}};
        res.set_content(reply.dump(), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread server_thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    setenv("SDGEN_TEST_KEY", "sekrit", 1);
    ProviderConfig config;
    config.strong_model = "strong-model";
    config.api_key_env = "SDGEN_TEST_KEY";
    HttpProvider provider("http://127.0.0.1:" + std::to_string(port), config);
    ToolRegistry tools;
    const auto result = provider.complete({3, 0}, "prompt", ModelRole::Strong, &tools);
    CHECK(requests == 2);
    CHECK(extract_result(result.completion) == "y = 21.5");
    REQUIRE(result.tool_calls.size() == 1);
    CHECK(result.tool_calls[0].name == "Add");
    CHECK(result.tool_calls[0].result == 21.5);

    server.stop();
    server_thread.join();
}

TEST_CASE("http provider surfaces transport errors") {
    HttpProvider provider("http://127.0.0.1:1", ProviderConfig{});
    ToolRegistry tools;
    CHECK_THROWS_AS(provider.complete({1, 0}, "p", ModelRole::Light, &tools), ProviderError);
}

TEST_CASE("fault schedule spreads failures evenly and exactly") {
    const double rates[] = {0.98, 1.0, 0.85, 0.77, 0.81, 0.95, 0.83};
    for (double rate : rates) {
        int failures = 0;
        int longest_streak = 0, streak = 0;
        for (int t = 0; t < 100; ++t) {
            if (FaultProvider::scheduled_failure(rate, t, 100)) {
                ++failures;
                streak = 0;
            } else {
                longest_streak = std::max(longest_streak, ++streak);
            }
        }
        CHECK(failures == std::lround((1.0 - rate) * 100));
        if (rate < 1.0) {
            CHECK(longest_streak <= static_cast<int>(1.0 / (1.0 - rate)) + 1);
        }
    }
    CHECK_FALSE(FaultProvider::scheduled_failure(1.0, 50, 100));
}

TEST_CASE("fault corruption always changes the scored content") {
    CHECK(FaultProvider::corrupt("pre <result>x = 21</result>")
              .find("<result>x = 22</result>") != std::string::npos);
    CHECK(FaultProvider::corrupt("<result>no numbers</result>")
              .find("xx-corrupted") != std::string::npos);
    CHECK(FaultProvider::corrupt("no block at all").find("xx-corrupted") != std::string::npos);
}
