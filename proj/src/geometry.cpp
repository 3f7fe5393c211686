#include "sdgen/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "json.hpp"

namespace sdgen::geom {

namespace {

constexpr double kMinHookExtensionInches = 3.0;

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

Point2 round_point(const Point2& p) {
    return Point2{ir::round4(p.x), ir::round4(p.y)};
}

Segment round_segment(const Segment& s) {
    return Segment{round_point(s.end1), round_point(s.end2)};
}

void compare_value(VerifyReport& rep, const std::string& field, double expected, double actual,
                   double tol) {
    const double delta = actual - expected;
    if (std::abs(delta) > tol) {
        rep.mismatches.push_back(Mismatch{field, expected, actual, delta, {}});
    }
}

void compare_point(VerifyReport& rep, const std::string& field, const Point2& expected,
                   const Point2& actual, double tol) {
    compare_value(rep, field + ".x", expected.x, actual.x, tol);
    compare_value(rep, field + ".y", expected.y, actual.y, tol);
}

void compare_segment(VerifyReport& rep, const std::string& field, const Segment& expected,
                     const Segment& actual, double tol) {
    compare_point(rep, field + ".end1", expected.end1, actual.end1, tol);
    compare_point(rep, field + ".end2", expected.end2, actual.end2, tol);
}

}  // namespace

std::pair<double, double> bar_dims(int designation) {
    if (designation < 1) {
        throw NonPositiveDesignation("bar designation must be >= 1, got " +
                                     std::to_string(designation));
    }
    const double diameter = designation / 8.0;
    return {diameter, diameter / 2.0};
}

std::vector<CircleSpec> RebarLayout::analysis_order() const {
    std::vector<CircleSpec> out;
    if (layers.empty()) return out;
    out.insert(out.end(), layers.front().begin(), layers.front().end());
    if (layers.size() > 1) {
        out.insert(out.end(), layers.back().begin(), layers.back().end());
    }
    // middle layers bottom-up
    for (std::size_t i = layers.size() - 1; i-- > 1;) {
        out.insert(out.end(), layers[i].begin(), layers[i].end());
    }
    return out;
}

std::vector<CircleSpec> RebarLayout::drawing_order() const {
    std::vector<CircleSpec> out;
    for (const auto& layer : layers) {
        out.insert(out.end(), layer.begin(), layer.end());
    }
    return out;
}

std::size_t RebarLayout::total() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.size();
    return n;
}

RebarLayout layout_rebars(const RcSectionSpec& spec) {
    if (spec.layers.empty()) throw SectionTooSmall("spec has no rebar layers");
    if (!(spec.width > 0.0) || !(spec.height > 0.0) || !(spec.cover > 0.0)) {
        throw SectionTooSmall("width, height and cover must be positive");
    }
    const double x1 = spec.origin.x;
    const double y1 = spec.origin.y;
    const double x2 = x1 + spec.width;
    const double y2 = y1 + spec.height;
    const double t = spec.cover;
    const double ds = bar_dims(spec.stirrup_bar.designation).first;

    const std::size_t n_layers = spec.layers.size();
    std::vector<double> layer_y(n_layers, 0.0);

    const double r_top = bar_dims(spec.layers.front().bar.designation).second;
    const double r_bottom = bar_dims(spec.layers.back().bar.designation).second;
    const double y_top = y2 - t - r_top - ds;
    const double y_bottom = y1 + t + r_bottom + ds;

    if (n_layers == 1) {
        // Single layer takes the bottom-layer formula.
        layer_y[0] = y_bottom;
    } else {
        if (y_bottom > y_top) {
            throw SectionTooSmall("section too small: bottom layer above top layer");
        }
        layer_y.front() = y_top;
        layer_y.back() = y_bottom;
        const double d_y = (y_top - y_bottom) / static_cast<double>(n_layers - 1);
        // Middle layer k (counted from the bottom) sits at y_bottom + k*d_y.
        for (std::size_t i = 1; i + 1 < n_layers; ++i) {
            const std::size_t k = n_layers - 1 - i;
            layer_y[i] = y_bottom + d_y * static_cast<double>(k);
        }
    }

    RebarLayout layout;
    for (std::size_t i = 0; i < n_layers; ++i) {
        const auto& l = spec.layers[i];
        if (l.count < 1) throw SectionTooSmall("layer with no bars");
        const double r = bar_dims(l.bar.designation).second;
        std::vector<CircleSpec> bars;
        if (l.count == 1) {
            bars.push_back(CircleSpec{Point2{(x1 + x2) / 2.0, layer_y[i]}, r});
        } else {
            const double x_lm = x1 + t + r + ds;
            const double x_rm = x2 - t - r - ds;
            if (x_lm > x_rm) {
                throw SectionTooSmall("section too small: edge bars overlap in x");
            }
            const double d_x = (x_rm - x_lm) / static_cast<double>(l.count - 1);
            for (int b = 0; b < l.count; ++b) {
                bars.push_back(CircleSpec{Point2{x_lm + d_x * b, layer_y[i]}, r});
            }
        }
        layout.layers.push_back(std::move(bars));
    }
    return layout;
}

CornerRebars corner_rebars(const RebarLayout& layout) {
    const auto all = layout.drawing_order();
    if (all.empty()) throw EmptyLayout("no rebars in layout");

    const double eps = 1e-9;
    double min_x = all[0].center.x, max_x = min_x;
    double min_y = all[0].center.y, max_y = min_y;
    for (const auto& b : all) {
        min_x = std::min(min_x, b.center.x);
        max_x = std::max(max_x, b.center.x);
        min_y = std::min(min_y, b.center.y);
        max_y = std::max(max_y, b.center.y);
    }

    auto pick = [&](bool want_max_y, bool want_max_x) {
        const double target_y = want_max_y ? max_y : min_y;
        const CircleSpec* best = nullptr;
        for (const auto& b : all) {
            if (std::abs(b.center.y - target_y) > eps) continue;
            if (!best || (want_max_x ? b.center.x > best->center.x
                                     : b.center.x < best->center.x)) {
                best = &b;
            }
        }
        return *best;
    };

    return CornerRebars{pick(true, false), pick(true, true), pick(false, true),
                        pick(false, false)};
}

StirrupGeometry stirrup_geometry(const CornerRebars& corners, double ds) {
    if (!(ds > 0.0)) throw GeometryError("stirrup diameter must be positive");
    const auto& c1 = corners.c1.center;
    const auto& c2 = corners.c2.center;
    const auto& c3 = corners.c3.center;
    const auto& c4 = corners.c4.center;
    const double r1 = corners.c1.radius;
    const double r2 = corners.c2.radius;
    const double r3 = corners.c3.radius;
    const double r4 = corners.c4.radius;
    const double sqrt2 = std::sqrt(2.0);

    StirrupGeometry g;
    g.internal_lines[0] = {{c1.x - r1, c1.y}, {c4.x - r4, c4.y}};  // L1
    g.internal_lines[1] = {{c1.x + sqrt2 * (r1 + ds) - r1, c1.y + r1},
                           {c2.x, c2.y + r2}};  // L2, notched for the hook
    g.internal_lines[2] = {{c2.x + r2, c2.y}, {c3.x + r3, c3.y}};  // L3
    g.internal_lines[3] = {{c4.x, c4.y - r4}, {c3.x, c3.y - r3}};  // L4

    g.external_lines[0] = {{c1.x - r1 - ds, c1.y}, {c4.x - r4 - ds, c4.y}};  // L5
    g.external_lines[1] = {{c1.x, c1.y + r1 + ds}, {c2.x, c2.y + r2 + ds}};  // L6
    g.external_lines[2] = {{c2.x + r2 + ds, c2.y}, {c3.x + r3 + ds, c3.y}};  // L7
    g.external_lines[3] = {{c4.x, c4.y - r4 - ds}, {c3.x, c3.y - r3 - ds}};  // L8

    g.arcs[0] = {c1, r1 + ds, 45.0, 180.0};   // A1
    g.arcs[1] = {c2, r2 + ds, 0.0, 90.0};     // A2
    g.arcs[2] = {c3, r3 + ds, 270.0, 0.0};    // A3, written 270 -> 0
    g.arcs[3] = {c4, r4 + ds, 180.0, 270.0};  // A4
    return g;
}

HookGeometry hook_geometry(const CircleSpec& c1_bar, double ds) {
    if (!(ds > 0.0)) throw GeometryError("stirrup diameter must be positive");
    const auto& c1 = c1_bar.center;
    const double r1 = c1_bar.radius;
    const double h = std::sqrt(2.0) / 2.0;  // unit diagonal component
    const double lext = std::max(6.0 * ds, kMinHookExtensionInches);

    // Two parallel 45-degree leg pairs running along (1,-1)/sqrt(2) from the
    // C1 corner, separated by the bar diameter Ds, capped by Lh3 and Lh6.
    const Point2 lh1_start{c1.x + h * (r1 + ds), c1.y + h * (r1 + ds)};
    const Point2 lh1_end{lh1_start.x + h * lext, lh1_start.y - h * lext};
    const Point2 lh2_start{c1.x + h * r1, c1.y + h * r1};
    const Point2 lh2_end{lh2_start.x + h * lext, lh2_start.y - h * lext};
    const Point2 lh4_start{c1.x - h * r1, c1.y - h * r1};
    const Point2 lh4_end{lh4_start.x + h * lext, lh4_start.y - h * lext};
    // Lh5 is parallel to Lh4 at perpendicular distance Ds on the lower-left
    // side, trimmed to start at x = c1.x - r1.
    const Point2 lh6_end{lh4_end.x - h * ds, lh4_end.y - h * ds};
    const double lh5_c = (lh4_start.x + lh4_start.y) - std::sqrt(2.0) * ds;  // x + y = const
    const Point2 lh5_start{c1.x - r1, lh5_c - (c1.x - r1)};

    HookGeometry g;
    g.lines[0] = {lh1_start, lh1_end};
    g.lines[1] = {lh2_start, lh2_end};
    g.lines[2] = {lh1_end, lh2_end};
    g.lines[3] = {lh4_start, lh4_end};
    g.lines[4] = {lh5_start, lh6_end};
    g.lines[5] = {lh4_end, lh6_end};
    g.extension = lext;
    return g;
}

PrecastCatalog PrecastCatalog::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryError("cannot open precast catalog: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw GeometryError("bad precast catalog " + path + ": " + e.what());
    }
    if (!j.is_object()) throw GeometryError("precast catalog must be a JSON object");

    PrecastCatalog cat;
    for (auto it = j.begin(); it != j.end(); ++it) {
        const nlohmann::json* positions = &it.value();
        double radius = 0.5;
        if (it.value().is_object()) {
            if (!it.value().contains("positions")) {
                throw GeometryError("catalog entry " + it.key() + " has no positions");
            }
            positions = &it.value().at("positions");
            if (it.value().contains("strand_radius")) {
                radius = it.value().at("strand_radius").get<double>();
            }
        }
        if (!positions->is_array()) {
            throw GeometryError("catalog entry " + it.key() + " positions must be a list");
        }
        std::vector<Point2> pts;
        for (const auto& p : *positions) {
            if (!p.is_array() || p.size() != 2) {
                throw GeometryError("catalog entry " + it.key() + " has a malformed position");
            }
            pts.push_back(Point2{p[0].get<double>(), p[1].get<double>()});
        }
        cat.entries_[it.key()] = std::move(pts);
        cat.strand_radii_[it.key()] = radius;
    }
    return cat;
}

PrecastCatalog PrecastCatalog::builtin() {
    PrecastCatalog cat;
    std::vector<Point2> ibeam;
    for (int x = 3; x <= 13; x += 2) ibeam.push_back({double(x), 2.0});
    for (int x = 3; x <= 13; x += 2) ibeam.push_back({double(x), 4.0});
    for (int x = 5; x <= 11; x += 2) ibeam.push_back({double(x), 6.0});
    for (int x = 7; x <= 9; x += 2) ibeam.push_back({double(x), 8.0});
    cat.entries_["I-Beam Type I"] = std::move(ibeam);
    cat.strand_radii_["I-Beam Type I"] = 0.5;

    std::vector<Point2> box;
    for (int x = 4; x <= 32; x += 2) box.push_back({double(x), 2.0});
    for (int x = 4; x <= 32; x += 2) box.push_back({double(x), 4.0});
    cat.entries_["Box Beam CB12x36"] = std::move(box);
    cat.strand_radii_["Box Beam CB12x36"] = 0.5;
    return cat;
}

const std::vector<Point2>* PrecastCatalog::find(const std::string& type) const {
    auto it = entries_.find(type);
    return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> PrecastCatalog::canonical_type(const std::string& type) const {
    const std::string want = lower(type);
    for (const auto& [name, _] : entries_) {
        if (lower(name) == want) return name;
    }
    return std::nullopt;
}

double PrecastCatalog::strand_radius(const std::string& type) const {
    auto it = strand_radii_.find(type);
    return it == strand_radii_.end() ? 0.5 : it->second;
}

std::vector<Point2> strand_layout(const PrecastCatalog& catalog, const std::string& type, int n) {
    const auto* positions = catalog.find(type);
    if (!positions) throw UnknownPrecastType("unknown precast type: " + type);
    if (n < 0 || static_cast<std::size_t>(n) > positions->size()) {
        throw TooManyStrands(type, positions->size());
    }
    return std::vector<Point2>(positions->begin(), positions->begin() + n);
}

DrawingIR resolve(const RcSectionSpec& spec, Unit unit, SaveTarget save) {
    const auto layout = layout_rebars(spec);
    const auto corners = corner_rebars(layout);
    const double ds = bar_dims(spec.stirrup_bar.designation).first;
    const auto stirrup = stirrup_geometry(corners, ds);
    const auto hooks = hook_geometry(corners.c1, ds);

    const double x1 = spec.origin.x;
    const double y1 = spec.origin.y;
    const double x2 = x1 + spec.width;
    const double y2 = y1 + spec.height;

    ir::RcPayload rc;
    rc.vertices = {round_point({x1, y1}), round_point({x1, y2}), round_point({x2, y2}),
                   round_point({x2, y1})};
    rc.sides = {
        round_segment({{x1, y1}, {x1, y2}}),  // left
        round_segment({{x1, y2}, {x2, y2}}),  // top
        round_segment({{x2, y2}, {x2, y1}}),  // right
        round_segment({{x2, y1}, {x1, y1}}),  // bottom
    };
    for (const auto& bar : layout.drawing_order()) {
        rc.rebar_centers.push_back(round_point(bar.center));
        rc.rebar_radii.push_back(ir::round4(bar.radius));
    }
    rc.stirrup_radius = ir::round4(ds / 2.0);
    rc.stirrup_diameter = ir::round4(ds);
    for (int i = 0; i < 4; ++i) {
        rc.stirrup_lines[i] = round_segment(stirrup.internal_lines[i]);
        rc.stirrup_lines[i + 4] = round_segment(stirrup.external_lines[i]);
        rc.stirrup_arcs[i] = ArcSpec{round_point(stirrup.arcs[i].center),
                                     ir::round4(stirrup.arcs[i].radius),
                                     stirrup.arcs[i].start_angle, stirrup.arcs[i].end_angle};
    }
    for (int i = 0; i < 6; ++i) {
        rc.hook_lines[i] = round_segment(hooks.lines[i]);
    }

    DrawingIR out;
    out.save = std::move(save);
    out.unit = unit;
    out.kind = ir::DrawingKind::RectangularConcrete;
    out.payload = std::move(rc);
    return out;
}

DrawingIR resolve(const SteelSpec& spec, Unit unit, SaveTarget save) {
    if (spec.section_type.empty()) throw GeometryError("steel section type is empty");
    DrawingIR out;
    out.save = std::move(save);
    out.unit = unit;
    out.kind = ir::DrawingKind::Steel;
    out.payload = ir::SteelPayload{spec.section_type, round_point(spec.bottom_left)};
    return out;
}

DrawingIR resolve(const PrecastSpec& spec, const PrecastCatalog& catalog, Unit unit,
                  SaveTarget save) {
    auto canonical = catalog.canonical_type(spec.section_type);
    if (!canonical) throw UnknownPrecastType("unknown precast type: " + spec.section_type);
    auto strands = strand_layout(catalog, *canonical, spec.strand_count);

    ir::PrecastPayload p;
    p.section_type = *canonical;
    p.bottom_left = round_point(spec.bottom_left);
    for (const auto& s : strands) p.strand_centers.push_back(round_point(s));

    DrawingIR out;
    out.save = std::move(save);
    out.unit = unit;
    out.kind = ir::DrawingKind::Precast;
    out.payload = std::move(p);
    return out;
}

std::string VerifyReport::summary() const {
    if (mismatches.empty()) return "verification passed: no mismatches\n";
    std::string out = "verification failed: " + std::to_string(mismatches.size()) +
                      " mismatch(es)\n";
    for (const auto& m : mismatches) {
        if (!m.note.empty()) {
            out += "  " + m.field + ": " + m.note + "\n";
        } else {
            out += "  " + m.field + ": expected " + std::to_string(m.expected) + ", actual " +
                   std::to_string(m.actual) + ", delta " + std::to_string(m.delta) + "\n";
        }
    }
    return out;
}

VerifyReport verify_ir(const DrawingIR& actual, const DrawingIR& expected, double tol) {
    if (actual.kind != expected.kind) {
        throw KindMismatch("IR kind " + ir::kind_to_string(actual.kind) +
                           " does not match expected " + ir::kind_to_string(expected.kind));
    }
    VerifyReport rep;
    switch (expected.kind) {
        case ir::DrawingKind::RectangularConcrete: {
            const auto& e = expected.rc();
            const auto& a = actual.rc();
            static const char* vertex_names[4] = {"bottom left", "top left", "top right",
                                                  "bottom right"};
            static const char* side_names[4] = {"left", "top", "right", "bottom"};
            for (int i = 0; i < 4; ++i) {
                compare_point(rep, std::string("vertices[") + vertex_names[i] + "]",
                              e.vertices[i], a.vertices[i], tol);
                compare_segment(rep, std::string("sides[") + side_names[i] + "]", e.sides[i],
                                a.sides[i], tol);
            }
            if (e.rebar_centers.size() != a.rebar_centers.size()) {
                rep.mismatches.push_back(
                    Mismatch{"rebar count", double(e.rebar_centers.size()),
                             double(a.rebar_centers.size()),
                             double(a.rebar_centers.size()) - double(e.rebar_centers.size()),
                             {}});
            } else {
                for (std::size_t i = 0; i < e.rebar_centers.size(); ++i) {
                    compare_point(rep, "rebar_center[" + std::to_string(i) + "]",
                                  e.rebar_centers[i], a.rebar_centers[i], tol);
                    compare_value(rep, "rebar_radius[" + std::to_string(i) + "]",
                                  e.rebar_radii[i], a.rebar_radii[i], tol);
                }
            }
            compare_value(rep, "stirrup_radius", e.stirrup_radius, a.stirrup_radius, tol);
            compare_value(rep, "stirrup_diameter", e.stirrup_diameter, a.stirrup_diameter, tol);
            for (int i = 0; i < 8; ++i) {
                compare_segment(rep, "L" + std::to_string(i + 1), e.stirrup_lines[i],
                                a.stirrup_lines[i], tol);
            }
            for (int i = 0; i < 4; ++i) {
                const std::string name = "A" + std::to_string(i + 1);
                compare_point(rep, name + ".center", e.stirrup_arcs[i].center,
                              a.stirrup_arcs[i].center, tol);
                compare_value(rep, name + ".radius", e.stirrup_arcs[i].radius,
                              a.stirrup_arcs[i].radius, tol);
                compare_value(rep, name + ".start_angle", e.stirrup_arcs[i].start_angle,
                              a.stirrup_arcs[i].start_angle, tol);
                compare_value(rep, name + ".end_angle", e.stirrup_arcs[i].end_angle,
                              a.stirrup_arcs[i].end_angle, tol);
            }
            for (int i = 0; i < 6; ++i) {
                compare_segment(rep, "Lh" + std::to_string(i + 1), e.hook_lines[i],
                                a.hook_lines[i], tol);
            }
            break;
        }
        case ir::DrawingKind::Steel: {
            const auto& e = expected.steel();
            const auto& a = actual.steel();
            if (e.section_type != a.section_type) {
                rep.mismatches.push_back(Mismatch{
                    "section_type", 0, 0, 0,
                    "expected \"" + e.section_type + "\", actual \"" + a.section_type + "\""});
            }
            compare_point(rep, "bottom_left", e.bottom_left, a.bottom_left, tol);
            break;
        }
        case ir::DrawingKind::Precast: {
            const auto& e = expected.precast();
            const auto& a = actual.precast();
            if (e.section_type != a.section_type) {
                rep.mismatches.push_back(Mismatch{
                    "section_type", 0, 0, 0,
                    "expected \"" + e.section_type + "\", actual \"" + a.section_type + "\""});
            }
            compare_point(rep, "bottom_left", e.bottom_left, a.bottom_left, tol);
            if (e.strand_centers.size() != a.strand_centers.size()) {
                rep.mismatches.push_back(
                    Mismatch{"strand count", double(e.strand_centers.size()),
                             double(a.strand_centers.size()),
                             double(a.strand_centers.size()) - double(e.strand_centers.size()),
                             {}});
            } else {
                for (std::size_t i = 0; i < e.strand_centers.size(); ++i) {
                    compare_point(rep, "strand[" + std::to_string(i) + "]", e.strand_centers[i],
                                  a.strand_centers[i], tol);
                }
            }
            break;
        }
    }
    return rep;
}

VerifyReport verify_ir(const DrawingIR& drawing, const RcSectionSpec& spec, double tol) {
    if (drawing.kind != ir::DrawingKind::RectangularConcrete) {
        throw KindMismatch("IR kind does not match RC spec");
    }
    return verify_ir(drawing, resolve(spec, drawing.unit, drawing.save), tol);
}

VerifyReport verify_ir(const DrawingIR& drawing, const SteelSpec& spec, double tol) {
    if (drawing.kind != ir::DrawingKind::Steel) {
        throw KindMismatch("IR kind does not match steel spec");
    }
    return verify_ir(drawing, resolve(spec, drawing.unit, drawing.save), tol);
}

VerifyReport verify_ir(const DrawingIR& drawing, const PrecastSpec& spec,
                       const PrecastCatalog& catalog, double tol) {
    if (drawing.kind != ir::DrawingKind::Precast) {
        throw KindMismatch("IR kind does not match precast spec");
    }
    return verify_ir(drawing, resolve(spec, catalog, drawing.unit, drawing.save), tol);
}

}  // namespace sdgen::geom
