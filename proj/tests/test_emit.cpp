#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "sdgen/emit.hpp"
#include "sdgen/geometry.hpp"

using namespace sdgen;

namespace {

geom::RcSectionSpec case_spec() {
    geom::RcSectionSpec spec;
    spec.width = 14;
    spec.height = 24;
    spec.cover = 2;
    spec.stirrup_bar = {4};
    spec.layers = {{4, {8}}, {2, {4}}, {2, {4}}};
    return spec;
}

emit::TemplateLibrary templates() {
    return emit::TemplateLibrary(std::string(SDGEN_DATA_DIR) + "/templates");
}

// Independent reader used to cross-check parse_dxf: a plain group-code state
// machine with none of the emitter's helpers.
struct RawEntity {
    std::string kind;
    std::map<int, double> groups;
};

std::vector<RawEntity> independent_read(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            tokens.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    REQUIRE(tokens.size() % 2 == 0);

    std::vector<RawEntity> out;
    bool in_entities = false;
    std::string pending_section;
    for (std::size_t i = 0; i + 1 < tokens.size(); i += 2) {
        const int code = std::stoi(tokens[i]);
        const std::string& value = tokens[i + 1];
        if (code == 0) {
            if (value == "SECTION" || value == "ENDSEC" || value == "EOF") {
                if (value != "SECTION") in_entities = false;
                pending_section = value;
            } else if (in_entities) {
                out.push_back({value, {}});
            }
        } else if (code == 2 && pending_section == "SECTION") {
            in_entities = (value == "ENTITIES");
            pending_section.clear();
        } else if (in_entities && !out.empty()) {
            out.back().groups[code] = std::stod(value);
        }
    }
    return out;
}

double entity_value(const emit::Entity& e, int code) {
    if (const auto* l = std::get_if<emit::LineEntity>(&e)) {
        switch (code) {
            case 10: return l->segment.end1.x;
            case 20: return l->segment.end1.y;
            case 11: return l->segment.end2.x;
            case 21: return l->segment.end2.y;
        }
    } else if (const auto* c = std::get_if<emit::CircleEntity>(&e)) {
        switch (code) {
            case 10: return c->circle.center.x;
            case 20: return c->circle.center.y;
            case 40: return c->circle.radius;
        }
    } else if (const auto* a = std::get_if<emit::ArcEntity>(&e)) {
        switch (code) {
            case 10: return a->arc.center.x;
            case 20: return a->arc.center.y;
            case 40: return a->arc.radius;
            case 50: return a->arc.start_angle;
            case 51: return a->arc.end_angle;
        }
    }
    FAIL("group code not present on this entity kind");
    return 0.0;
}

}  // namespace

TEST_CASE("template file names drop the word Type") {
    CHECK(emit::TemplateLibrary::file_stem("I-Beam Type I") == "I-Beam_I");
    CHECK(emit::TemplateLibrary::file_stem("Box Beam CB12x36") == "Box_Beam_CB12x36");
    CHECK(emit::TemplateLibrary::file_stem("W1100X390") == "W1100X390");
    const auto lib = templates();
    CHECK(lib.path_for("I-Beam Type I") == lib.directory() + "/I-Beam_I.dxf");
}

TEST_CASE("drawing file grammar is fixed") {
    emit::EntityList entities;
    entities.push_back(emit::LineEntity{{{0, 0}, {1.5, 2}}});
    entities.push_back(emit::CircleEntity{{{3, 21}, 0.5}});
    entities.push_back(emit::ArcEntity{{{11, 21}, 1, 0, 90}});
    const std::string expected =
        "0\nSECTION\n2\nHEADER\n9\n$INSUNITS\n70\n1\n0\nENDSEC\n"
        "0\nSECTION\n2\nENTITIES\n"
        "0\nLINE\n10\n0\n20\n0\n11\n1.5\n21\n2\n"
        "0\nCIRCLE\n10\n3\n20\n21\n40\n0.5\n"
        "0\nARC\n10\n11\n20\n21\n40\n1\n50\n0\n51\n90\n"
        "0\nENDSEC\n0\nEOF\n";
    CHECK(emit::emit_dxf(entities, ir::Unit::Inch) == expected);
    CHECK(emit::emit_dxf({}, ir::Unit::Millimeter).find("70\n4\n") != std::string::npos);
}

TEST_CASE("negative zero is not written") {
    emit::EntityList entities;
    entities.push_back(emit::LineEntity{{{-0.0, -1e-9}, {0, 0}}});
    const auto text = emit::emit_dxf(entities, ir::Unit::Inch);
    CHECK(text.find("-0\n") == std::string::npos);
}

TEST_CASE("parse_dxf inverts emit_dxf") {
    const auto drawing = geom::resolve(case_spec(), ir::Unit::Inch, {});
    const auto entities = emit::ir_to_entities(drawing, templates());
    const auto text = emit::emit_dxf(entities, ir::Unit::Inch);
    const auto back = emit::parse_dxf(text);
    REQUIRE(back.size() == entities.size());
    CHECK(emit::emit_dxf(back, ir::Unit::Inch) == text);
}

TEST_CASE("independent reader agrees with the writer to 1e-6") {
    const auto drawing = geom::resolve(case_spec(), ir::Unit::Inch, {});
    const auto entities = emit::ir_to_entities(drawing, templates());
    const auto text = emit::emit_dxf(entities, ir::Unit::Inch);
    const auto raw = independent_read(text);
    REQUIRE(raw.size() == entities.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        for (const auto& [code, value] : raw[i].groups) {
            CHECK(std::abs(value - entity_value(entities[i], code)) <= 1e-6);
        }
    }
}

TEST_CASE("concrete entity list covers every drawn element") {
    const auto drawing = geom::resolve(case_spec(), ir::Unit::Inch, {});
    const auto entities = emit::ir_to_entities(drawing, templates());
    // 4 sides + 8 rebars + 8 stirrup lines + 4 arcs + 6 hook lines
    REQUIRE(entities.size() == 30);
    int lines = 0, circles = 0, arcs = 0;
    for (const auto& e : entities) {
        lines += std::holds_alternative<emit::LineEntity>(e);
        circles += std::holds_alternative<emit::CircleEntity>(e);
        arcs += std::holds_alternative<emit::ArcEntity>(e);
    }
    CHECK(lines == 18);
    CHECK(circles == 8);
    CHECK(arcs == 4);
}

TEST_CASE("precast entities are the template plus one circle per strand") {
    const auto catalog = geom::PrecastCatalog::builtin();
    const auto drawing = geom::resolve(geom::PrecastSpec{"I-Beam Type I", {0, 0}, 4}, catalog,
                                       ir::Unit::Millimeter, {});
    const auto base = emit::load_template(templates(), "I-Beam Type I");
    const auto entities = emit::ir_to_entities(drawing, templates(), &catalog);
    REQUIRE(entities.size() == base.size() + 4);
    int strand_circles = 0;
    for (const auto& e : entities) {
        if (const auto* c = std::get_if<emit::CircleEntity>(&e)) {
            CHECK(c->circle.radius == 0.5);
            ++strand_circles;
        }
    }
    CHECK(strand_circles == 4);
}

TEST_CASE("templates translate so the outline lands on the requested corner") {
    const auto catalog = geom::PrecastCatalog::builtin();
    const auto drawing = geom::resolve(geom::SteelSpec{"W1100X390", {100, 50}},
                                       ir::Unit::Millimeter, {});
    const auto entities = emit::ir_to_entities(drawing, templates());
    double min_x = 1e300, min_y = 1e300;
    for (const auto& e : entities) {
        if (const auto* l = std::get_if<emit::LineEntity>(&e)) {
            min_x = std::min({min_x, l->segment.end1.x, l->segment.end2.x});
            min_y = std::min({min_y, l->segment.end1.y, l->segment.end2.y});
        }
    }
    CHECK(min_x == doctest::Approx(100.0));
    CHECK(min_y == doctest::Approx(50.0));
}

TEST_CASE("missing template raises a typed error") {
    CHECK_THROWS_AS(emit::load_template(templates(), "HP360X174"), emit::TemplateNotFound);
    CHECK_THROWS_AS(emit::parse_dxf("0\nSECTION\n2\nENTITIES\n0\nSPLINE\n0\nENDSEC\n0\nEOF\n"),
                    emit::TemplateParseError);
}

TEST_CASE("concrete script carries the drawing commands verbatim") {
    const auto drawing = geom::resolve(case_spec(), ir::Unit::Inch, {});
    const std::string steps = "(0) Set units";  // concrete branch keys off the IR kind
    const auto script = emit::emit_script(drawing, steps);
    CHECK(script.find("acad.doc.SetVariable('INSUNITS', 1)") != std::string::npos);
    CHECK(script.find("\"L2\": acad.model.AddLine(APoint(3.9142, 21.5), APoint(11, 21.5))") !=
          std::string::npos);
    CHECK(script.find("radians(45)") != std::string::npos);
    CHECK(script.find("SaveAs") == std::string::npos);

    auto saved = drawing;
    saved.save = "beam.dwg";
    CHECK(emit::emit_script(saved, steps).find("acad.doc.SaveAs('beam.dwg')") !=
          std::string::npos);
}

TEST_CASE("steel script keeps the command spacing") {
    const auto drawing =
        geom::resolve(geom::SteelSpec{"W1100X390", {0, 0}}, ir::Unit::Millimeter, {});
    const auto script = emit::emit_script(drawing, "copy steps");
    CHECK(script.find("'steelBeamDrawingSet', 'W1100X390.dwg'") != std::string::npos);
    CHECK(script.find("SendCommand('SELECT ALL  ')") != std::string::npos);
    CHECK(script.find("SendCommand('COPYCLIP ')") != std::string::npos);
    CHECK(script.find("SendCommand('PASTECLIP 0,0 ')") != std::string::npos);
    CHECK(script.find("source_document.Close()") != std::string::npos);
}

TEST_CASE("precast script draws strands in a loop") {
    const auto catalog = geom::PrecastCatalog::builtin();
    const auto drawing = geom::resolve(geom::PrecastSpec{"I-Beam Type I", {0, 0}, 4}, catalog,
                                       ir::Unit::Millimeter, {});
    const auto script = emit::emit_script(drawing, "copy steps");
    CHECK(script.find("'Preset_Prestressed_Concrete', 'I-Beam_I.dwg'") != std::string::npos);
    CHECK(script.find("strand_coordinates = [[3, 2], [5, 2], [7, 2], [9, 2]]") !=
          std::string::npos);
    CHECK(script.find("acad.model.AddCircle(center, 0.5)") != std::string::npos);
}
