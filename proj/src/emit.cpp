#include "sdgen/emit.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sdgen::emit {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(6);
    out << v;
    std::string s = out.str();
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    if (s == "-0") s = "0";
    return s;
}

std::string fmt4(double v) {
    return fmt(ir::round4(v));
}

struct Bounds {
    double min_x = 0.0, min_y = 0.0;
    bool any = false;

    void add(double x, double y) {
        if (!any) {
            min_x = x;
            min_y = y;
            any = true;
        } else {
            min_x = std::min(min_x, x);
            min_y = std::min(min_y, y);
        }
    }
};

Bounds bounds_of(const EntityList& entities) {
    Bounds b;
    for (const auto& e : entities) {
        if (const auto* line = std::get_if<LineEntity>(&e)) {
            b.add(line->segment.end1.x, line->segment.end1.y);
            b.add(line->segment.end2.x, line->segment.end2.y);
        } else if (const auto* circle = std::get_if<CircleEntity>(&e)) {
            b.add(circle->circle.center.x - circle->circle.radius,
                  circle->circle.center.y - circle->circle.radius);
        } else if (const auto* arc = std::get_if<ArcEntity>(&e)) {
            b.add(arc->arc.center.x - arc->arc.radius, arc->arc.center.y - arc->arc.radius);
        }
    }
    return b;
}

EntityList translated(const EntityList& entities, double dx, double dy) {
    EntityList out;
    out.reserve(entities.size());
    for (const auto& e : entities) {
        if (const auto* line = std::get_if<LineEntity>(&e)) {
            out.push_back(LineEntity{{{line->segment.end1.x + dx, line->segment.end1.y + dy},
                                      {line->segment.end2.x + dx, line->segment.end2.y + dy}}});
        } else if (const auto* circle = std::get_if<CircleEntity>(&e)) {
            out.push_back(CircleEntity{{{circle->circle.center.x + dx,
                                         circle->circle.center.y + dy},
                                        circle->circle.radius}});
        } else if (const auto* arc = std::get_if<ArcEntity>(&e)) {
            out.push_back(ArcEntity{{{arc->arc.center.x + dx, arc->arc.center.y + dy},
                                     arc->arc.radius, arc->arc.start_angle, arc->arc.end_angle}});
        }
    }
    return out;
}

EntityList placed_template(const TemplateLibrary& templates, const std::string& section_type,
                           const ir::Point2& bottom_left) {
    EntityList tpl = load_template(templates, section_type);
    const Bounds b = bounds_of(tpl);
    if (!b.any) return tpl;
    return translated(tpl, bottom_left.x - b.min_x, bottom_left.y - b.min_y);
}

std::string point_call(const ir::Point2& p) {
    return "APoint(" + fmt4(p.x) + ", " + fmt4(p.y) + ")";
}

std::string line_call(const ir::Segment& s) {
    return "acad.model.AddLine(" + point_call(s.end1) + ", " + point_call(s.end2) + ")";
}

std::string copy_paste_block(const std::string& source_dir, const std::string& stem,
                             const ir::Point2& paste_at) {
    std::string out;
    out += "source_file_path = os.path.join(os.getcwd(), '" + source_dir + "', '" + stem +
           ".dwg')\n";
    out += "source_document = acad.app.Documents.Open(source_file_path)\n";
    out += "time.sleep(1)\n";
    out += "acad.app.ActiveDocument = source_document\n";
    // The trailing spaces in sent commands are part of the dialect.
    out += "acad.app.ActiveDocument.SendCommand('SELECT ALL  ')\n";
    out += "acad.app.ActiveDocument.SendCommand('COPYCLIP ')\n";
    out += "\n";
    out += "target_file = os.path.join(os.getcwd(), 'targetfile.dwg')\n";
    out += "target_document = acad.app.Documents.Open(target_file)\n";
    out += "acad.app.ActiveDocument = target_document\n";
    out += "acad.app.ActiveDocument.SendCommand('PASTECLIP " + fmt4(paste_at.x) + "," +
           fmt4(paste_at.y) + " ')\n";
    out += "\n";
    out += "source_document.Close()\n";
    return out;
}

}  // namespace

TemplateLibrary::TemplateLibrary(std::string directory) : directory_(std::move(directory)) {}

std::string TemplateLibrary::file_stem(const std::string& section_type) {
    std::string stem;
    std::istringstream in(section_type);
    std::string word;
    while (in >> word) {
        if (word == "Type" || word == "type") continue;
        if (!stem.empty()) stem += "_";
        stem += word;
    }
    return stem;
}

std::string TemplateLibrary::path_for(const std::string& section_type) const {
    return (fs::path(directory_) / (file_stem(section_type) + ".dxf")).string();
}

EntityList load_template(const TemplateLibrary& templates, const std::string& section_type) {
    const std::string path = templates.path_for(section_type);
    std::ifstream in(path);
    if (!in) throw TemplateNotFound(section_type);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_dxf(buf.str());
    } catch (const TemplateParseError&) {
        throw;
    } catch (const EmitError& e) {
        throw TemplateParseError("template " + path + ": " + e.what());
    }
}

EntityList ir_to_entities(const ir::DrawingIR& drawing, const TemplateLibrary& templates,
                          const geom::PrecastCatalog* catalog) {
    EntityList out;
    switch (drawing.kind) {
        case ir::DrawingKind::RectangularConcrete: {
            const auto& rc = drawing.rc();
            for (const auto& side : rc.sides) out.push_back(LineEntity{side});
            for (std::size_t i = 0; i < rc.rebar_centers.size(); ++i) {
                out.push_back(CircleEntity{{rc.rebar_centers[i], rc.rebar_radii[i]}});
            }
            for (const auto& line : rc.stirrup_lines) out.push_back(LineEntity{line});
            for (const auto& arc : rc.stirrup_arcs) out.push_back(ArcEntity{arc});
            for (const auto& hook : rc.hook_lines) out.push_back(LineEntity{hook});
            break;
        }
        case ir::DrawingKind::Steel: {
            const auto& s = drawing.steel();
            out = placed_template(templates, s.section_type, s.bottom_left);
            break;
        }
        case ir::DrawingKind::Precast: {
            const auto& p = drawing.precast();
            out = placed_template(templates, p.section_type, p.bottom_left);
            const double radius = catalog ? catalog->strand_radius(p.section_type) : 0.5;
            for (const auto& strand : p.strand_centers) {
                out.push_back(CircleEntity{{strand, radius}});
            }
            break;
        }
    }
    return out;
}

std::string emit_dxf(const EntityList& entities, ir::Unit unit) {
    std::string out;
    auto pair = [&out](const char* code, const std::string& value) {
        out += code;
        out += "\n";
        out += value;
        out += "\n";
    };
    pair("0", "SECTION");
    pair("2", "HEADER");
    pair("9", "$INSUNITS");
    pair("70", std::to_string(ir::unit_code(unit)));
    pair("0", "ENDSEC");
    pair("0", "SECTION");
    pair("2", "ENTITIES");
    for (const auto& e : entities) {
        if (const auto* line = std::get_if<LineEntity>(&e)) {
            pair("0", "LINE");
            pair("10", fmt(line->segment.end1.x));
            pair("20", fmt(line->segment.end1.y));
            pair("11", fmt(line->segment.end2.x));
            pair("21", fmt(line->segment.end2.y));
        } else if (const auto* circle = std::get_if<CircleEntity>(&e)) {
            pair("0", "CIRCLE");
            pair("10", fmt(circle->circle.center.x));
            pair("20", fmt(circle->circle.center.y));
            pair("40", fmt(circle->circle.radius));
        } else if (const auto* arc = std::get_if<ArcEntity>(&e)) {
            pair("0", "ARC");
            pair("10", fmt(arc->arc.center.x));
            pair("20", fmt(arc->arc.center.y));
            pair("40", fmt(arc->arc.radius));
            pair("50", fmt(arc->arc.start_angle));
            pair("51", fmt(arc->arc.end_angle));
        }
    }
    pair("0", "ENDSEC");
    pair("0", "EOF");
    return out;
}

EntityList parse_dxf(const std::string& dxf_text) {
    std::istringstream in(dxf_text);
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string code, value;
    while (std::getline(in, code)) {
        if (!std::getline(in, value)) {
            throw EmitError("DXF ends with a dangling group code");
        }
        auto strip = [](std::string s) {
            while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
            const auto b = s.find_first_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b);
        };
        pairs.emplace_back(strip(code), strip(value));
    }

    EntityList out;
    bool in_entities = false;
    std::size_t i = 0;
    auto number_at = [&pairs](std::size_t idx) {
        try {
            return std::stod(pairs[idx].second);
        } catch (const std::exception&) {
            throw EmitError("bad number in DXF: " + pairs[idx].second);
        }
    };
    while (i < pairs.size()) {
        const auto& [c, v] = pairs[i];
        if (c == "2" && v == "ENTITIES") {
            in_entities = true;
            ++i;
            continue;
        }
        if (c == "0" && v == "ENDSEC") {
            in_entities = false;
            ++i;
            continue;
        }
        if (!in_entities || c != "0") {
            ++i;
            continue;
        }
        // c == "0": start of an entity record
        std::map<std::string, double> fields;
        std::size_t k = i + 1;
        while (k < pairs.size() && pairs[k].first != "0") {
            fields[pairs[k].first] = number_at(k);
            ++k;
        }
        if (v == "LINE") {
            for (const char* req : {"10", "20", "11", "21"}) {
                if (!fields.count(req)) throw EmitError("LINE missing group " + std::string(req));
            }
            out.push_back(LineEntity{{{fields["10"], fields["20"]},
                                      {fields["11"], fields["21"]}}});
        } else if (v == "CIRCLE") {
            for (const char* req : {"10", "20", "40"}) {
                if (!fields.count(req)) throw EmitError("CIRCLE missing group " + std::string(req));
            }
            out.push_back(CircleEntity{{{fields["10"], fields["20"]}, fields["40"]}});
        } else if (v == "ARC") {
            for (const char* req : {"10", "20", "40", "50", "51"}) {
                if (!fields.count(req)) throw EmitError("ARC missing group " + std::string(req));
            }
            out.push_back(ArcEntity{{{fields["10"], fields["20"]},
                                     fields["40"], fields["50"], fields["51"]}});
        } else {
            throw TemplateParseError("unsupported DXF entity kind: " + v);
        }
        i = k;
    }
    return out;
}

std::string emit_script(const ir::DrawingIR& drawing, const std::string& codegen_steps) {
    (void)codegen_steps;  // the deterministic emitter bakes in the same step order
    std::string out;
    switch (drawing.kind) {
        case ir::DrawingKind::RectangularConcrete: {
            const auto& rc = drawing.rc();
            out += "from pyautocad import Autocad, APoint\n";
            out += "from math import radians\n\n";
            out += "acad = Autocad()\n";
            out += "acad.doc.SetVariable('INSUNITS', " +
                   std::to_string(ir::unit_code(drawing.unit)) + ")\n\n";

            static const char* vertex_names[4] = {"bottom_left", "top_left", "top_right",
                                                  "bottom_right"};
            out += "vertices = {\n";
            for (int i = 0; i < 4; ++i) {
                out += std::string("    \"") + vertex_names[i] + "\": " +
                       point_call(rc.vertices[i]) + (i < 3 ? ",\n" : "\n");
            }
            out += "}\n\n";

            static const char* side_names[4] = {"left", "top", "right", "bottom"};
            out += "sides = {\n";
            for (int i = 0; i < 4; ++i) {
                out += std::string("    \"") + side_names[i] + "\": " + line_call(rc.sides[i]) +
                       (i < 3 ? ",\n" : "\n");
            }
            out += "}\n\n";

            out += "rebars = [\n";
            for (std::size_t i = 0; i < rc.rebar_centers.size(); ++i) {
                out += "    acad.model.AddCircle(" + point_call(rc.rebar_centers[i]) + ", " +
                       fmt4(rc.rebar_radii[i]) + ")" +
                       (i + 1 < rc.rebar_centers.size() ? ",\n" : "\n");
            }
            out += "]\n\n";

            out += "stirrup_lines = {\n";
            for (int i = 0; i < 8; ++i) {
                out += "    \"L" + std::to_string(i + 1) + "\": " +
                       line_call(rc.stirrup_lines[i]) + (i < 7 ? ",\n" : "\n");
            }
            out += "}\n\n";

            out += "stirrup_arcs = {\n";
            for (int i = 0; i < 4; ++i) {
                const auto& a = rc.stirrup_arcs[i];
                out += "    \"A" + std::to_string(i + 1) + "\": acad.model.AddArc(" +
                       point_call(a.center) + ", " + fmt4(a.radius) + ", radians(" +
                       fmt4(a.start_angle) + "), radians(" + fmt4(a.end_angle) + "))" +
                       (i < 3 ? ",\n" : "\n");
            }
            out += "}\n\n";

            out += "stirrup_hooks = {\n";
            for (int i = 0; i < 6; ++i) {
                out += "    \"Lh" + std::to_string(i + 1) + "\": " +
                       line_call(rc.hook_lines[i]) + (i < 5 ? ",\n" : "\n");
            }
            out += "}\n";

            if (drawing.save) {
                out += "\nacad.doc.SaveAs('" + *drawing.save + "')\n";
            }
            break;
        }
        case ir::DrawingKind::Steel: {
            const auto& s = drawing.steel();
            out += "import pyautocad\n";
            out += "import os\n";
            out += "import time\n\n";
            out += "acad = pyautocad.Autocad()\n\n";
            out += copy_paste_block("steelBeamDrawingSet", TemplateLibrary::file_stem(s.section_type),
                                    s.bottom_left);
            if (drawing.save) {
                out += "\ntarget_document.SaveAs('" + *drawing.save + "')\n";
            }
            break;
        }
        case ir::DrawingKind::Precast: {
            const auto& p = drawing.precast();
            out += "from pyautocad import Autocad, APoint\n";
            out += "import os\n";
            out += "import time\n\n";
            out += "acad = Autocad()\n\n";
            out += copy_paste_block("Preset_Prestressed_Concrete",
                                    TemplateLibrary::file_stem(p.section_type), p.bottom_left);
            out += "\nstrand_coordinates = [";
            for (std::size_t i = 0; i < p.strand_centers.size(); ++i) {
                if (i) out += ", ";
                out += "[" + fmt4(p.strand_centers[i].x) + ", " + fmt4(p.strand_centers[i].y) +
                       "]";
            }
            out += "]\n";
            out += "for coord in strand_coordinates:\n";
            out += "    center = APoint(coord[0], coord[1])\n";
            out += "    acad.model.AddCircle(center, 0.5)\n";
            if (drawing.save) {
                out += "\ntarget_document.SaveAs('" + *drawing.save + "')\n";
            }
            break;
        }
        default:
            throw UnsupportedKind("unsupported drawing kind");
    }
    return out;
}

}  // namespace sdgen::emit
