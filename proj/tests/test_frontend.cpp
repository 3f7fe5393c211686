#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>
#include <random>
#include <sstream>

#include "sdgen/frontend.hpp"

using namespace sdgen;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string rc_fields() {
    return slurp(std::string(SDGEN_DATA_DIR) + "/cases/rc_fields.txt");
}

}  // namespace

TEST_CASE("parses a nested bullet block") {
    const auto block = frontend::parse_fields(rc_fields());
    REQUIRE_FALSE(block.empty());
    const auto* height = block.find("Height of cross-section");
    REQUIRE(height);
    CHECK(height->value == "24in");
    const auto* rebars = block.find("Rebar information");
    REQUIRE(rebars);
    REQUIRE(rebars->children.size() == 3);
    CHECK(rebars->children[0].name == "Top layer");
    CHECK(rebars->children[0].value == "4 No 8");
    CHECK(block.find("stirrup INFORMATION"));  // lookup is case-insensitive
}

TEST_CASE("non-bullet lines are ignored") {
    const auto block = frontend::parse_fields("noise\n- A: 1\nmore noise\n- B: 2\n");
    CHECK(block.fields.size() == 2);
}

TEST_CASE("duplicate and empty fields are rejected") {
    CHECK_THROWS_AS(frontend::parse_fields("- A: 1\n- A: 2\n"), frontend::DuplicateField);
    CHECK_THROWS_AS(frontend::parse_fields("- A:\n"), frontend::EmptyValue);
}

TEST_CASE("concrete fields produce the published spec") {
    const auto parsed = frontend::fields_to_spec(frontend::parse_fields(rc_fields()),
                                                 ir::DrawingKind::RectangularConcrete);
    const auto& spec = std::get<geom::RcSectionSpec>(parsed.spec);
    CHECK(spec.width == 14.0);
    CHECK(spec.height == 24.0);
    CHECK(spec.cover == 2.0);
    CHECK(spec.stirrup_bar.designation == 4);
    REQUIRE(spec.layers.size() == 3);
    CHECK(spec.layers[0] == geom::LayerSpec{4, {8}});
    CHECK(spec.layers[1] == geom::LayerSpec{2, {4}});
    CHECK(spec.layers[2] == geom::LayerSpec{2, {4}});
    CHECK(spec.origin == ir::Point2{0, 0});
    CHECK(parsed.unit == ir::Unit::Inch);
}

TEST_CASE("missing mandatory concrete fields are collected") {
    const auto block = frontend::parse_fields("- Width of cross-section: 14in\n");
    try {
        frontend::fields_to_spec(block, ir::DrawingKind::RectangularConcrete);
        FAIL("expected MissingMandatory");
    } catch (const frontend::MissingMandatory& e) {
        CHECK(e.names.size() >= 3);
    }
}

TEST_CASE("mixed units are rejected") {
    const auto block = frontend::parse_fields(
        "- Height of cross-section: 24in\n- Width of cross-section: 300mm\n"
        "- Thickness of clear cover: 2in\n- Stirrup information: No 4\n"
        "- Top layer: 2 No 8\n- Bottom layer: 2 No 8\n");
    CHECK_THROWS_AS(frontend::fields_to_spec(block, ir::DrawingKind::RectangularConcrete),
                    frontend::MixedUnits);
}

TEST_CASE("garbled quantities are rejected") {
    const auto block = frontend::parse_fields(
        "- Height of cross-section: tall\n- Width of cross-section: 14in\n"
        "- Thickness of clear cover: 2in\n- Stirrup information: No 4\n"
        "- Top layer: 2 No 8\n- Bottom layer: 2 No 8\n");
    CHECK_THROWS_AS(frontend::fields_to_spec(block, ir::DrawingKind::RectangularConcrete),
                    frontend::UnparsableQuantity);
}

TEST_CASE("only bottom-left position references are accepted") {
    const auto block = frontend::parse_fields(
        "- Type of Structure: steel beam cross-section\n"
        "- Steel Beam Cross-section: W1100X390\n"
        "- Position: center at (10, 10)\n");
    CHECK_THROWS_AS(frontend::fields_to_spec(block, ir::DrawingKind::Steel),
                    frontend::UnsupportedReference);

    const auto ok = frontend::parse_fields(
        "- Type of Structure: steel beam cross-section\n"
        "- Steel Beam Cross-section: W1100X390\n"
        "- Position: Bottom Left Vertex: (10, -2.5)\n");
    const auto parsed = frontend::fields_to_spec(ok, ir::DrawingKind::Steel);
    CHECK(std::get<geom::SteelSpec>(parsed.spec).bottom_left == ir::Point2{10, -2.5});
}

TEST_CASE("steel fields fall back to the structure type") {
    const auto block = frontend::parse_fields("- Type of Structure: HP360X174\n");
    const auto parsed = frontend::fields_to_spec(block, ir::DrawingKind::Steel);
    CHECK(std::get<geom::SteelSpec>(parsed.spec).section_type == "HP360X174");
    CHECK(std::get<geom::SteelSpec>(parsed.spec).bottom_left == ir::Point2{0, 0});
}

TEST_CASE("precast fields parse the strand count") {
    const auto block = frontend::parse_fields(
        slurp(std::string(SDGEN_DATA_DIR) + "/cases/precast_fields.txt"));
    const auto parsed = frontend::fields_to_spec(block, ir::DrawingKind::Precast);
    const auto& spec = std::get<geom::PrecastSpec>(parsed.spec);
    CHECK(spec.section_type == "I-Beam Type I");
    CHECK(spec.strand_count == 4);

    const auto bad = frontend::parse_fields(
        "- Type of Structure: I-Beam Type I\n- Number of Strands: 2.5\n");
    CHECK_THROWS_AS(frontend::fields_to_spec(bad, ir::DrawingKind::Precast),
                    frontend::UnparsableQuantity);
}

TEST_CASE("render and reparse is the identity on typed specs") {
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> dim(12.0, 30.0);
    std::uniform_int_distribution<int> count(2, 5);
    for (int i = 0; i < 50; ++i) {
        geom::RcSectionSpec spec;
        spec.width = std::round(dim(rng) * 4) / 4;
        spec.height = std::round(dim(rng) * 4) / 4 + 10;
        spec.cover = 2;
        spec.stirrup_bar = {4};
        spec.layers = {{count(rng), {8}}, {count(rng), {4}}};
        const auto text = frontend::render_fields(frontend::render_spec(spec, ir::Unit::Inch));
        const auto back = frontend::fields_to_spec(frontend::parse_fields(text),
                                                   ir::DrawingKind::RectangularConcrete);
        CHECK(std::get<geom::RcSectionSpec>(back.spec) == spec);
        CHECK(back.unit == ir::Unit::Inch);
    }

    const geom::SteelSpec steel{"W1100X390", {3, 4}};
    const auto steel_back = frontend::fields_to_spec(
        frontend::parse_fields(frontend::render_fields(frontend::render_spec(steel))),
        ir::DrawingKind::Steel);
    CHECK(std::get<geom::SteelSpec>(steel_back.spec) == steel);

    const geom::PrecastSpec pre{"I-Beam Type I", {0, 0}, 6};
    const auto pre_back = frontend::fields_to_spec(
        frontend::parse_fields(frontend::render_fields(frontend::render_spec(pre))),
        ir::DrawingKind::Precast);
    CHECK(std::get<geom::PrecastSpec>(pre_back.spec) == pre);
}

TEST_CASE("rendered concrete case matches the published bullet block") {
    geom::RcSectionSpec spec;
    spec.width = 14;
    spec.height = 24;
    spec.cover = 2;
    spec.stirrup_bar = {4};
    spec.layers = {{4, {8}}, {2, {4}}, {2, {4}}};
    CHECK(frontend::render_fields(frontend::render_spec(spec, ir::Unit::Inch)) == rc_fields());
}
