#include "sdgen/ir.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <set>
#include <sstream>

#include "json.hpp"

namespace sdgen::ir {

using nlohmann::ordered_json;

namespace {

// Canonical key spellings follow the schema's enumeration; Table-style
// capitalization drift ("Type of Structural Drawing") is accepted on parse.
constexpr const char* kSave = "Save";
constexpr const char* kUnit = "Unit";
constexpr const char* kKind = "Type of Structural drawing";
constexpr const char* kKindAlt = "Type of Structural Drawing";
constexpr const char* kVertices = "Coordinates of Four Vertices";
constexpr const char* kSides = "End Point of Four Sides";
constexpr const char* kRebarCenters = "Center of Rebars";
constexpr const char* kRebarRadii = "Radius of Rebars";
constexpr const char* kStirrupPair = "Radius and Diameter of Stirrup";
constexpr const char* kStirrupLines = "End Points of Internal and External Lines of Stirrup";
constexpr const char* kStirrupArcs = "Arc Lines of Stirrup";
constexpr const char* kHookLines = "Hook lines of Stirrup";
constexpr const char* kSectionType = "Type of the requested steel beam cross-section";
constexpr const char* kBottomLeft = "Position of the bottom left of the steel beam cross-section";
constexpr const char* kStrands = "Position of the strands";
constexpr const char* kStrandsAlt = "The positions of the strands";

constexpr const char* kVertexNames[4] = {"bottom left", "top left", "top right", "bottom right"};
constexpr const char* kSideNames[4] = {"left", "top", "right", "bottom"};

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

ordered_json num(double v) {
    v = round4(v);
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return ordered_json(static_cast<long long>(v));
    }
    return ordered_json(v);
}

ordered_json point_json(const Point2& p) {
    return ordered_json::array({num(p.x), num(p.y)});
}

ordered_json segment_json(const Segment& s) {
    ordered_json j;
    j["end1"] = point_json(s.end1);
    j["end2"] = point_json(s.end2);
    return j;
}

std::string position_string(const Point2& p) {
    ordered_json x = num(p.x);
    ordered_json y = num(p.y);
    return "(" + x.dump() + ", " + y.dump() + ")";
}

double get_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) throw BadType(path);
    return j.get<double>();
}

Point2 parse_point_list(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) throw BadType(path);
    return Point2{get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

// Accepts either a "(x, y)" string or a [x, y] list and normalizes to Point2.
Point2 parse_position(const ordered_json& j, const std::string& path) {
    if (j.is_array()) return parse_point_list(j, path);
    if (j.is_string()) {
        static const std::regex re(
            R"(^\s*\(\s*(-?[0-9.]+)\s*,\s*(-?[0-9.]+)\s*\)\s*$)");
        std::smatch m;
        const std::string s = j.get<std::string>();
        if (!std::regex_match(s, m, re)) throw BadType(path);
        return Point2{std::stod(m[1]), std::stod(m[2])};
    }
    throw BadType(path);
}

Segment parse_segment(const ordered_json& j, const std::string& path) {
    if (!j.is_object()) throw BadType(path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "end1" && it.key() != "end2") {
            throw UnknownKeys(path + "." + it.key());
        }
    }
    if (!j.contains("end1")) throw MissingKey(path + ".end1");
    if (!j.contains("end2")) throw MissingKey(path + ".end2");
    return Segment{parse_point_list(j["end1"], path + ".end1"),
                   parse_point_list(j["end2"], path + ".end2")};
}

const ordered_json& require(const ordered_json& j, const char* key) {
    if (!j.contains(key)) throw MissingKey(key);
    return j.at(key);
}

void check_keys(const ordered_json& j, const std::set<std::string>& allowed) {
    std::string unknown;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key())) {
            if (!unknown.empty()) unknown += ", ";
            unknown += it.key();
        }
    }
    if (!unknown.empty()) throw UnknownKeys(unknown);
}

RcPayload parse_rc(const ordered_json& j) {
    RcPayload rc;

    const auto& verts = require(j, kVertices);
    if (!verts.is_object()) throw BadType(kVertices);
    check_keys(verts, {kVertexNames[0], kVertexNames[1], kVertexNames[2], kVertexNames[3]});
    for (int i = 0; i < 4; ++i) {
        const std::string path = std::string(kVertices) + "." + kVertexNames[i];
        if (!verts.contains(kVertexNames[i])) throw MissingKey(path);
        rc.vertices[i] = parse_point_list(verts.at(kVertexNames[i]), path);
    }

    const auto& sides = require(j, kSides);
    if (!sides.is_object()) throw BadType(kSides);
    check_keys(sides, {kSideNames[0], kSideNames[1], kSideNames[2], kSideNames[3]});
    for (int i = 0; i < 4; ++i) {
        const std::string path = std::string(kSides) + "." + kSideNames[i];
        if (!sides.contains(kSideNames[i])) throw MissingKey(path);
        rc.sides[i] = parse_segment(sides.at(kSideNames[i]), path);
    }

    const auto& centers = require(j, kRebarCenters);
    if (!centers.is_array()) throw BadType(kRebarCenters);
    for (size_t i = 0; i < centers.size(); ++i) {
        rc.rebar_centers.push_back(parse_point_list(
            centers[i], std::string(kRebarCenters) + "[" + std::to_string(i) + "]"));
    }

    const auto& radii = require(j, kRebarRadii);
    if (!radii.is_array()) throw BadType(kRebarRadii);
    for (size_t i = 0; i < radii.size(); ++i) {
        rc.rebar_radii.push_back(get_number(
            radii[i], std::string(kRebarRadii) + "[" + std::to_string(i) + "]"));
    }
    if (rc.rebar_centers.size() != rc.rebar_radii.size()) {
        throw InvariantViolation("rebar centers and radii differ in length: " +
                                 std::to_string(rc.rebar_centers.size()) + " vs " +
                                 std::to_string(rc.rebar_radii.size()));
    }

    const auto& pair = require(j, kStirrupPair);
    if (!pair.is_array() || pair.size() != 2) throw BadType(kStirrupPair);
    rc.stirrup_radius = get_number(pair[0], std::string(kStirrupPair) + "[0]");
    rc.stirrup_diameter = get_number(pair[1], std::string(kStirrupPair) + "[1]");

    const auto& lines = require(j, kStirrupLines);
    if (!lines.is_object()) throw BadType(kStirrupLines);
    {
        std::set<std::string> allowed;
        for (int i = 1; i <= 8; ++i) allowed.insert("L" + std::to_string(i));
        check_keys(lines, allowed);
        for (int i = 0; i < 8; ++i) {
            const std::string name = "L" + std::to_string(i + 1);
            const std::string path = std::string(kStirrupLines) + "." + name;
            if (!lines.contains(name)) throw MissingKey(path);
            rc.stirrup_lines[i] = parse_segment(lines.at(name), path);
        }
    }

    const auto& arcs = require(j, kStirrupArcs);
    if (!arcs.is_object()) throw BadType(kStirrupArcs);
    {
        check_keys(arcs, {"A1", "A2", "A3", "A4"});
        for (int i = 0; i < 4; ++i) {
            const std::string name = "A" + std::to_string(i + 1);
            const std::string path = std::string(kStirrupArcs) + "." + name;
            if (!arcs.contains(name)) throw MissingKey(path);
            const auto& a = arcs.at(name);
            if (!a.is_array() || a.size() != 5) throw BadType(path);
            rc.stirrup_arcs[i] = ArcSpec{
                Point2{get_number(a[0], path + "[0]"), get_number(a[1], path + "[1]")},
                get_number(a[2], path + "[2]"),
                get_number(a[3], path + "[3]"),
                get_number(a[4], path + "[4]"),
            };
        }
    }

    const auto& hooks = require(j, kHookLines);
    if (!hooks.is_object()) throw BadType(kHookLines);
    {
        std::set<std::string> allowed;
        for (int i = 1; i <= 6; ++i) allowed.insert("Lh" + std::to_string(i));
        check_keys(hooks, allowed);
        for (int i = 0; i < 6; ++i) {
            const std::string name = "Lh" + std::to_string(i + 1);
            const std::string path = std::string(kHookLines) + "." + name;
            if (!hooks.contains(name)) throw MissingKey(path);
            rc.hook_lines[i] = parse_segment(hooks.at(name), path);
        }
    }

    return rc;
}

std::vector<Point2> parse_strands(const ordered_json& j, const std::string& path) {
    std::vector<Point2> out;
    if (j.is_array()) {
        for (size_t i = 0; i < j.size(); ++i) {
            out.push_back(parse_point_list(j[i], path + "[" + std::to_string(i) + "]"));
        }
        return out;
    }
    if (j.is_string()) {
        // "[3, 2], [5, 2], ..." as the tables record it
        const std::string s = j.get<std::string>();
        static const std::regex re(R"(\[\s*(-?[0-9.]+)\s*,\s*(-?[0-9.]+)\s*\])");
        auto begin = std::sregex_iterator(s.begin(), s.end(), re);
        for (auto it = begin; it != std::sregex_iterator(); ++it) {
            out.push_back(Point2{std::stod((*it)[1]), std::stod((*it)[2])});
        }
        if (out.empty() && s.find_first_not_of(" \t") != std::string::npos) {
            throw BadType(path);
        }
        return out;
    }
    throw BadType(path);
}

void append_violation(ValidationReport& rep, const std::string& msg) {
    rep.violations.push_back(msg);
}

bool finite_point(const Point2& p) {
    return std::isfinite(p.x) && std::isfinite(p.y);
}

}  // namespace

std::string kind_to_string(DrawingKind kind) {
    return kKindStrings[static_cast<int>(kind)];
}

std::optional<DrawingKind> kind_from_string(const std::string& s) {
    for (int i = 0; i < 3; ++i) {
        if (s == kKindStrings[i]) return static_cast<DrawingKind>(i);
    }
    return std::nullopt;
}

std::optional<DrawingKind> find_kind_in_text(const std::string& text) {
    const std::string hay = lower(text);
    for (int i = 0; i < 3; ++i) {
        if (hay.find(kKindStrings[i]) != std::string::npos) {
            return static_cast<DrawingKind>(i);
        }
    }
    return std::nullopt;
}

std::string unit_to_string(Unit u) {
    return u == Unit::Inch ? "Inch" : "Millimeter";
}

std::optional<Unit> unit_from_string(const std::string& s) {
    const std::string l = lower(s);
    if (l == "inch" || l == "in" || l == "inches") return Unit::Inch;
    if (l == "millimeter" || l == "mm" || l == "millimeters" || l == "millimetre") {
        return Unit::Millimeter;
    }
    return std::nullopt;
}

DrawingIR parse_ir(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedJson(e.what());
    }
    if (!j.is_object()) throw MalformedJson("top level is not an object");

    DrawingIR ir;

    const auto& save = require(j, kSave);
    if (save.is_boolean()) {
        if (save.get<bool>()) throw BadType(kSave);
        ir.save = std::nullopt;
    } else if (save.is_string()) {
        ir.save = save.get<std::string>();
    } else {
        throw BadType(kSave);
    }

    const auto& unit = require(j, kUnit);
    if (!unit.is_string()) throw BadType(kUnit);
    if (auto u = unit_from_string(unit.get<std::string>())) {
        ir.unit = *u;
    } else {
        throw BadType(kUnit);
    }

    const ordered_json* kind_node = nullptr;
    if (j.contains(kKind)) {
        kind_node = &j.at(kKind);
    } else if (j.contains(kKindAlt)) {
        kind_node = &j.at(kKindAlt);
    } else {
        throw MissingKey(kKind);
    }
    if (!kind_node->is_string()) throw BadType(kKind);
    auto kind = kind_from_string(kind_node->get<std::string>());
    if (!kind) throw BadType(kKind);
    ir.kind = *kind;

    std::set<std::string> allowed = {kSave, kUnit, kKind, kKindAlt};
    switch (ir.kind) {
        case DrawingKind::RectangularConcrete:
            allowed.insert({kVertices, kSides, kRebarCenters, kRebarRadii, kStirrupPair,
                            kStirrupLines, kStirrupArcs, kHookLines});
            check_keys(j, allowed);
            ir.payload = parse_rc(j);
            break;
        case DrawingKind::Steel: {
            allowed.insert({kSectionType, kBottomLeft});
            check_keys(j, allowed);
            SteelPayload p;
            const auto& t = require(j, kSectionType);
            if (!t.is_string()) throw BadType(kSectionType);
            p.section_type = t.get<std::string>();
            p.bottom_left = parse_position(require(j, kBottomLeft), kBottomLeft);
            ir.payload = std::move(p);
            break;
        }
        case DrawingKind::Precast: {
            allowed.insert({kSectionType, kBottomLeft, kStrands, kStrandsAlt});
            check_keys(j, allowed);
            PrecastPayload p;
            const auto& t = require(j, kSectionType);
            if (!t.is_string()) throw BadType(kSectionType);
            p.section_type = t.get<std::string>();
            p.bottom_left = parse_position(require(j, kBottomLeft), kBottomLeft);
            if (j.contains(kStrands)) {
                p.strand_centers = parse_strands(j.at(kStrands), kStrands);
            } else if (j.contains(kStrandsAlt)) {
                p.strand_centers = parse_strands(j.at(kStrandsAlt), kStrandsAlt);
            } else {
                throw MissingKey(kStrands);
            }
            ir.payload = std::move(p);
            break;
        }
    }

    auto report = validate(ir);
    if (!report.empty()) {
        std::string msg;
        for (const auto& v : report.violations) {
            if (!msg.empty()) msg += "; ";
            msg += v;
        }
        throw InvariantViolation(msg);
    }
    return ir;
}

std::string serialize_ir(const DrawingIR& ir) {
    ordered_json j;
    if (ir.save) {
        j[kSave] = *ir.save;
    } else {
        j[kSave] = false;
    }
    j[kUnit] = unit_to_string(ir.unit);
    j[kKind] = kind_to_string(ir.kind);

    switch (ir.kind) {
        case DrawingKind::RectangularConcrete: {
            const auto& rc = ir.rc();
            ordered_json verts;
            for (int i = 0; i < 4; ++i) verts[kVertexNames[i]] = point_json(rc.vertices[i]);
            j[kVertices] = std::move(verts);
            ordered_json sides;
            for (int i = 0; i < 4; ++i) sides[kSideNames[i]] = segment_json(rc.sides[i]);
            j[kSides] = std::move(sides);
            ordered_json centers = ordered_json::array();
            for (const auto& c : rc.rebar_centers) centers.push_back(point_json(c));
            j[kRebarCenters] = std::move(centers);
            ordered_json radii = ordered_json::array();
            for (double r : rc.rebar_radii) radii.push_back(num(r));
            j[kRebarRadii] = std::move(radii);
            j[kStirrupPair] = ordered_json::array({num(rc.stirrup_radius), num(rc.stirrup_diameter)});
            ordered_json lines;
            for (int i = 0; i < 8; ++i) {
                lines["L" + std::to_string(i + 1)] = segment_json(rc.stirrup_lines[i]);
            }
            j[kStirrupLines] = std::move(lines);
            ordered_json arcs;
            for (int i = 0; i < 4; ++i) {
                const auto& a = rc.stirrup_arcs[i];
                arcs["A" + std::to_string(i + 1)] = ordered_json::array(
                    {num(a.center.x), num(a.center.y), num(a.radius), num(a.start_angle),
                     num(a.end_angle)});
            }
            j[kStirrupArcs] = std::move(arcs);
            ordered_json hooks;
            for (int i = 0; i < 6; ++i) {
                hooks["Lh" + std::to_string(i + 1)] = segment_json(rc.hook_lines[i]);
            }
            j[kHookLines] = std::move(hooks);
            break;
        }
        case DrawingKind::Steel: {
            const auto& s = ir.steel();
            j[kSectionType] = s.section_type;
            j[kBottomLeft] = position_string(s.bottom_left);
            break;
        }
        case DrawingKind::Precast: {
            const auto& p = ir.precast();
            j[kSectionType] = p.section_type;
            j[kBottomLeft] = position_string(p.bottom_left);
            std::string strands;
            for (const auto& s : p.strand_centers) {
                if (!strands.empty()) strands += ", ";
                strands += "[" + num(s.x).dump() + ", " + num(s.y).dump() + "]";
            }
            j[kStrands] = strands;
            break;
        }
    }
    return j.dump(2) + "\n";
}

ValidationReport validate(const DrawingIR& ir) {
    ValidationReport rep;
    switch (ir.kind) {
        case DrawingKind::RectangularConcrete: {
            const auto& rc = ir.rc();
            for (const auto& v : rc.vertices) {
                if (!finite_point(v)) append_violation(rep, "non-finite vertex coordinate");
            }
            for (int i = 0; i < 4; ++i) {
                if (rc.sides[i].end1 == rc.sides[i].end2) {
                    append_violation(rep, std::string("degenerate side: ") + kSideNames[i]);
                }
            }
            if (rc.rebar_centers.size() != rc.rebar_radii.size()) {
                append_violation(rep, "rebar centers and radii differ in length");
            }
            for (size_t i = 0; i < rc.rebar_radii.size(); ++i) {
                if (!(rc.rebar_radii[i] > 0.0)) {
                    append_violation(rep, "rebar radius not positive at index " + std::to_string(i));
                }
            }
            if (!(rc.stirrup_radius > 0.0)) {
                append_violation(rep, "stirrup radius not positive");
            }
            if (std::abs(rc.stirrup_diameter - 2.0 * rc.stirrup_radius) > 1e-9) {
                append_violation(
                    rep, "stirrup pair (" + std::to_string(rc.stirrup_radius) + ", " +
                             std::to_string(rc.stirrup_diameter) + ") violates Ds = 2*rs");
            }
            for (int i = 0; i < 8; ++i) {
                if (rc.stirrup_lines[i].end1 == rc.stirrup_lines[i].end2) {
                    append_violation(rep, "degenerate stirrup line L" + std::to_string(i + 1));
                }
            }
            for (int i = 0; i < 4; ++i) {
                const auto& a = rc.stirrup_arcs[i];
                if (!(a.radius > 0.0)) {
                    append_violation(rep, "arc A" + std::to_string(i + 1) + " radius not positive");
                }
                if (a.start_angle < 0.0 || a.start_angle >= 360.0 || a.end_angle < 0.0 ||
                    a.end_angle >= 360.0) {
                    append_violation(rep,
                                     "arc A" + std::to_string(i + 1) + " angle outside [0,360)");
                }
            }
            for (int i = 0; i < 6; ++i) {
                if (rc.hook_lines[i].end1 == rc.hook_lines[i].end2) {
                    append_violation(rep, "degenerate hook line Lh" + std::to_string(i + 1));
                }
            }
            break;
        }
        case DrawingKind::Steel: {
            const auto& s = ir.steel();
            if (s.section_type.empty()) append_violation(rep, "empty steel section type");
            if (!finite_point(s.bottom_left)) append_violation(rep, "non-finite bottom left");
            break;
        }
        case DrawingKind::Precast: {
            const auto& p = ir.precast();
            if (p.section_type.empty()) append_violation(rep, "empty precast section type");
            if (!finite_point(p.bottom_left)) append_violation(rep, "non-finite bottom left");
            for (const auto& s : p.strand_centers) {
                if (!finite_point(s)) append_violation(rep, "non-finite strand center");
            }
            break;
        }
    }
    return rep;
}

}  // namespace sdgen::ir
