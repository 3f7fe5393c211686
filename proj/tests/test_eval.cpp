#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <memory>

#include "sdgen/eval.hpp"
#include "sdgen/providers.hpp"

using namespace sdgen;
using namespace sdgen::eval;

namespace {

const std::string kData = SDGEN_DATA_DIR;

struct Fixture {
    pipeline::PromptLibrary prompts = pipeline::PromptLibrary::load(kData + "/prompts");
    knowledge::KnowledgeBase kb = knowledge::KnowledgeBase::load(kData + "/knowledge.json");
    geom::PrecastCatalog catalog = geom::PrecastCatalog::builtin();

    pipeline::PipelineContext ctx() const {
        pipeline::PipelineContext c;
        c.prompts = &prompts;
        c.kb = &kb;
        c.catalog = &catalog;
        return c;
    }
};

const CorpusEntry& entry_of_kind(const std::vector<CorpusEntry>& entries, ir::DrawingKind kind) {
    for (const auto& e : entries) {
        if (e.kind == kind) return e;
    }
    REQUIRE(false);
    return entries.front();
}

}  // namespace

TEST_CASE("corpus loads sorted by file name") {
    const auto entries = load_corpus(kData + "/corpus");
    REQUIRE(entries.size() == 3);
    CHECK(entries[0].id == "precast-ibeam-i");
    CHECK(entries[1].id == "rc-24x14");
    CHECK(entries[2].id == "steel-w1100x390");
    CHECK(entries[1].kind == ir::DrawingKind::RectangularConcrete);
    CHECK(entries[1].unit == ir::Unit::Inch);
    CHECK_FALSE(entries[1].save.has_value());
    const auto& rc = std::get<geom::RcSectionSpec>(entries[1].spec);
    CHECK(rc.width == 14.0);
    CHECK(rc.height == 24.0);
    CHECK(rc.layers.size() == 3);
    CHECK(std::get<geom::PrecastSpec>(entries[0].spec).strand_count == 4);

    CHECK_THROWS_AS(load_corpus_entry("/nonexistent/entry.json"), EvalError);
}

TEST_CASE("step labels follow the chain shape") {
    CHECK(step_labels(ir::DrawingKind::RectangularConcrete) ==
          std::vector<std::string>{"1", "2", "3-1", "3-2", "3-3", "4", "5", "6"});
    CHECK(step_labels(ir::DrawingKind::Steel) ==
          std::vector<std::string>{"1", "2", "3", "4", "5", "6"});
    CHECK(step_labels(ir::DrawingKind::Precast) ==
          std::vector<std::string>{"1", "2", "3", "4", "5", "6"});
}

TEST_CASE("reference results cover every step of each kind") {
    Fixture f;
    const auto entries = load_corpus(kData + "/corpus");
    for (const auto& entry : entries) {
        const auto expected = oracle_results(entry, f.catalog, f.kb);
        for (const auto& label : step_labels(entry.kind)) {
            INFO(entry.id << " step " << label);
            REQUIRE(expected.count(label) == 1);
            CHECK_FALSE(expected.at(label).empty());
        }
        CHECK(expected.at("1") == ir::kind_to_string(entry.kind));
    }
}

TEST_CASE("reference provider drives a clean run for every entry") {
    Fixture f;
    const auto entries = load_corpus(kData + "/corpus");
    for (const auto& entry : entries) {
        OracleProvider provider(entry, &f.catalog, &f.kb);
        const auto run = pipeline::run_pipeline(entry.description, provider, f.ctx());
        INFO(entry.id << ": " << run.failure);
        REQUIRE(run.ok);
        REQUIRE(run.final_ir.has_value());
        CHECK(*run.final_ir == resolve_entry(entry, f.catalog));
        REQUIRE(run.verify.has_value());
        CHECK(run.verify->empty());

        const auto expected = oracle_results(entry, f.catalog, f.kb);
        const auto expected_ir = resolve_entry(entry, f.catalog);
        for (const auto& t : run.transcripts) {
            INFO(entry.id << " step " << t.ref.label());
            CHECK(step_success(t.ref.label(), t, expected, expected_ir, 1e-3));
        }
    }
}

TEST_CASE("step success rejects near misses") {
    Fixture f;
    const auto entries = load_corpus(kData + "/corpus");
    const auto& rc = entry_of_kind(entries, ir::DrawingKind::RectangularConcrete);
    const auto expected = oracle_results(rc, f.catalog, f.kb);
    const auto expected_ir = resolve_entry(rc, f.catalog);

    pipeline::StepTranscript t;
    t.ref = {3, 1};
    t.result = expected.at("3-1");
    CHECK(step_success("3-1", t, expected, expected_ir, 1e-3));

    auto shifted = t;
    const auto pos = shifted.result.find("21");
    REQUIRE(pos != std::string::npos);
    shifted.result.replace(pos, 2, "22");
    CHECK_FALSE(step_success("3-1", shifted, expected, expected_ir, 1e-3));

    auto failed = t;
    failed.outcome = pipeline::StepOutcome::ProviderFailed;
    CHECK_FALSE(step_success("3-1", failed, expected, expected_ir, 1e-3));

    // Digits intact but the section-type string mangled: still a failure.
    const auto& steel = entry_of_kind(entries, ir::DrawingKind::Steel);
    const auto steel_expected = oracle_results(steel, f.catalog, f.kb);
    const auto steel_ir = resolve_entry(steel, f.catalog);
    pipeline::StepTranscript s3;
    s3.ref = {3, 0};
    s3.result = steel_expected.at("3");
    CHECK(step_success("3", s3, steel_expected, steel_ir, 1e-3));
    auto mangled = s3;
    const auto w = mangled.result.find("W1100X390");
    REQUIRE(w != std::string::npos);
    mangled.result.replace(w, 1, "V");
    CHECK_FALSE(step_success("3", mangled, steel_expected, steel_ir, 1e-3));

    // A structurally equal IR in the wrong unit fails step 5.
    pipeline::StepTranscript s5;
    s5.ref = {5, 0};
    auto wrong_unit = expected_ir;
    wrong_unit.unit = ir::Unit::Millimeter;
    s5.result = ir::serialize_ir(wrong_unit);
    CHECK_FALSE(step_success("5", s5, expected, expected_ir, 1e-3));
    s5.result = ir::serialize_ir(expected_ir);
    CHECK(step_success("5", s5, expected, expected_ir, 1e-3));
    s5.result = "not json";
    CHECK_FALSE(step_success("5", s5, expected, expected_ir, 1e-3));
}

TEST_CASE("a fault-free evaluation scores everything at one") {
    Fixture f;
    const auto entries = load_corpus(kData + "/corpus");
    const auto table = evaluate(
        entries, 3,
        [&](const CorpusEntry& e) { return std::make_unique<OracleProvider>(e, &f.catalog, &f.kb); },
        f.ctx());
    REQUIRE(table.rows.size() == 3);
    for (const auto& row : table.rows) {
        CHECK(row.cells.size() == step_labels(row.kind).size());
        for (const auto& cell : row.cells) {
            INFO(row.id << " step " << cell.label);
            CHECK(cell.successes == cell.trials);
        }
    }
    CHECK(table.rows[1].cell("3-2") != nullptr);
    CHECK(table.rows[1].cell("3") == nullptr);
    CHECK(table.rows[2].cell("3") != nullptr);
}

TEST_CASE("scheduled faults land on exactly the configured rates") {
    Fixture f;
    const auto entries = load_corpus(kData + "/corpus");
    const auto& rc = entry_of_kind(entries, ir::DrawingKind::RectangularConcrete);
    const std::map<std::string, double> rates = {
        {"1", 0.98}, {"2", 1.0},  {"3-1", 0.85}, {"3-2", 0.77},
        {"3-3", 0.81}, {"4", 1.0}, {"5", 0.95},  {"6", 0.83},
    };
    const auto table = evaluate(
        {rc}, 100,
        [&](const CorpusEntry& e) {
            return std::make_unique<pipeline::FaultProvider>(
                std::make_unique<OracleProvider>(e, &f.catalog, &f.kb), rates, 100);
        },
        f.ctx());
    REQUIRE(table.rows.size() == 1);
    const auto& row = table.rows[0];
    const std::map<std::string, int> expected_successes = {
        {"1", 98}, {"2", 100}, {"3-1", 85}, {"3-2", 77},
        {"3-3", 81}, {"4", 100}, {"5", 95}, {"6", 83},
    };
    for (const auto& [label, want] : expected_successes) {
        const auto* cell = row.cell(label);
        REQUIRE(cell);
        INFO("step " << label);
        CHECK(cell->successes == want);
        CHECK(cell->trials == 100);
    }
}

TEST_CASE("the accuracy table renders as csv") {
    AccuracyTable table;
    AccuracyRow row;
    row.id = "x";
    row.kind = ir::DrawingKind::Steel;
    row.cells = {{"1", 98, 100}, {"2", 100, 100}, {"3", 97, 100},
                 {"4", 100, 100}, {"5", 99, 100}, {"6", 89, 100}};
    table.rows.push_back(row);
    const auto csv = table.to_csv();
    CHECK(csv.find("id,kind,step 1,step 2,step 3,step 3-1,step 3-2,step 3-3,step 4,step 5,step 6\n") == 0);
    CHECK(csv.find("x,steel beam cross-section,0.98,1,0.97,,,,1,0.99,0.89\n") != std::string::npos);

    CHECK_THROWS_AS(evaluate({}, 0, {}, {}), EvalError);
}
