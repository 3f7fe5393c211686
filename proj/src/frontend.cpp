#include "sdgen/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>

namespace sdgen::frontend {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

struct Quantity {
    double value = 0.0;
    std::optional<ir::Unit> unit;
};

// "<number><unit>" with units {in, mm}; a bare number carries no unit.
std::optional<Quantity> parse_quantity(const std::string& raw) {
    static const std::regex re(
        R"(^\s*(-?[0-9]+(?:\.[0-9]+)?)\s*(in|inch|inches|mm|millimeter|millimeters)?\s*$)",
        std::regex::icase);
    std::smatch m;
    if (!std::regex_match(raw, m, re)) return std::nullopt;
    Quantity q;
    q.value = std::stod(m[1]);
    if (m[2].matched) {
        const std::string u = lower(m[2]);
        q.unit = (u[0] == 'i') ? ir::Unit::Inch : ir::Unit::Millimeter;
    }
    return q;
}

// "<count> No <n>" bar schedule, e.g. "4 No 8".
std::optional<geom::LayerSpec> parse_layer_value(const std::string& raw) {
    static const std::regex re(R"(^\s*([0-9]+)\s*No\.?\s*([0-9]+)\s*$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(raw, m, re)) return std::nullopt;
    return geom::LayerSpec{std::stoi(m[1]), geom::BarSize{std::stoi(m[2])}};
}

// "No <n>" with an optional ignored spacing suffix ("No 4 at 5 in").
std::optional<geom::BarSize> parse_bar_value(const std::string& raw) {
    static const std::regex re(R"(^\s*No\.?\s*([0-9]+)(\s+at\s+.*)?\s*$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(raw, m, re)) return std::nullopt;
    return geom::BarSize{std::stoi(m[1])};
}

std::optional<ir::Point2> find_point(const std::string& raw) {
    static const std::regex re(R"(\(\s*(-?[0-9.]+)\s*,\s*(-?[0-9.]+)\s*\))");
    std::smatch m;
    if (!std::regex_search(raw, m, re)) return std::nullopt;
    return ir::Point2{std::stod(m[1]), std::stod(m[2])};
}

void check_unique(const std::vector<Field>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        for (std::size_t k = i + 1; k < fields.size(); ++k) {
            if (fields[i].name == fields[k].name) throw DuplicateField(fields[i].name);
        }
    }
}

class UnitTracker {
public:
    void observe(std::optional<ir::Unit> u) {
        if (!u) return;
        if (unit_ && *unit_ != *u) {
            throw MixedUnits("mixed units in one description (in and mm)");
        }
        unit_ = u;
    }
    std::optional<ir::Unit> unit() const { return unit_; }

private:
    std::optional<ir::Unit> unit_;
};

double require_length(const FieldBlock& fields, const std::vector<std::string>& names,
                      UnitTracker& units, std::vector<std::string>& missing) {
    for (const auto& name : names) {
        if (const Field* f = fields.find(name)) {
            auto q = parse_quantity(f->value);
            if (!q) throw UnparsableQuantity(f->name, f->value);
            units.observe(q->unit);
            return q->value;
        }
    }
    missing.push_back(names.front());
    return 0.0;
}

bool layer_name_matches(const std::string& name, const char* prefix) {
    return lower(name).rfind(prefix, 0) == 0;
}

std::vector<geom::LayerSpec> collect_layers(const FieldBlock& fields) {
    const std::vector<Field>* source = nullptr;
    if (const Field* info = fields.find("Rebar information"); info && !info->children.empty()) {
        source = &info->children;
    } else {
        source = &fields.fields;
    }
    std::vector<geom::LayerSpec> top, middle, bottom;
    for (const auto& f : *source) {
        const bool is_top = layer_name_matches(f.name, "top layer");
        const bool is_middle = layer_name_matches(f.name, "middle layer");
        const bool is_bottom = layer_name_matches(f.name, "bottom layer");
        if (!is_top && !is_middle && !is_bottom) continue;
        auto layer = parse_layer_value(f.value);
        if (!layer) throw UnparsableQuantity(f.name, f.value);
        (is_top ? top : is_middle ? middle : bottom).push_back(*layer);
    }
    std::vector<geom::LayerSpec> layers;
    layers.insert(layers.end(), top.begin(), top.end());
    layers.insert(layers.end(), middle.begin(), middle.end());
    layers.insert(layers.end(), bottom.begin(), bottom.end());
    return layers;
}

ir::Point2 parse_position(const FieldBlock& fields) {
    static const char* names[] = {
        "Position",
        "Position of the bottom left of the steel beam cross-section",
        "Coordinate of Bottom Left of the Cross-section",
        "Bottom left vertex",
    };
    for (const char* name : names) {
        const Field* f = fields.find(name);
        if (!f) continue;
        std::string value = f->value;
        for (const auto& child : f->children) value += " " + child.name + ": " + child.value;
        const std::string l = lower(value);
        if (l.find("top") != std::string::npos || l.find("center") != std::string::npos ||
            l.find("centroid") != std::string::npos ||
            (l.find("right") != std::string::npos && l.find("bottom left") == std::string::npos)) {
            throw UnsupportedReference(
                "only the bottom-left vertex is supported as a position reference, got: " +
                f->value);
        }
        auto p = find_point(value);
        if (!p) throw UnparsableQuantity(f->name, f->value);
        return *p;
    }
    return ir::Point2{0.0, 0.0};
}

std::string format_number(double v) {
    v = ir::round4(v);
    std::ostringstream out;
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        out << static_cast<long long>(v);
    } else {
        out << v;
    }
    return out.str();
}

std::string point_string(const ir::Point2& p) {
    return "(" + format_number(p.x) + ", " + format_number(p.y) + ")";
}

void render_field(std::ostringstream& out, const Field& f, int depth) {
    for (int i = 0; i < depth; ++i) out << "  ";
    out << "- " << f.name << ":";
    if (!f.value.empty()) out << " " << f.value;
    out << "\n";
    for (const auto& c : f.children) render_field(out, c, depth + 1);
}

}  // namespace

MissingMandatory::MissingMandatory(std::vector<std::string> n)
    : FrontendError([&n] {
          std::string msg = "missing mandatory field(s): ";
          for (std::size_t i = 0; i < n.size(); ++i) {
              if (i) msg += ", ";
              msg += n[i];
          }
          return msg;
      }()),
      names(std::move(n)) {}

const Field* FieldBlock::find(const std::string& name) const {
    const std::string want = lower(name);
    for (const auto& f : fields) {
        if (lower(f.name) == want) return &f;
    }
    return nullptr;
}

FieldBlock parse_fields(const std::string& text) {
    FieldBlock block;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto bullet = line.find("- ");
        if (bullet == std::string::npos ||
            line.find_first_not_of(" \t") != bullet) {
            continue;
        }
        std::string rest = line.substr(bullet + 2);
        const auto colon = rest.find(':');
        if (colon == std::string::npos) continue;
        Field f;
        f.name = trim(rest.substr(0, colon));
        f.value = trim(rest.substr(colon + 1));
        if (f.name.empty()) continue;
        const bool nested = bullet > 0;
        if (nested && !block.fields.empty()) {
            block.fields.back().children.push_back(std::move(f));
        } else {
            block.fields.push_back(std::move(f));
        }
    }
    check_unique(block.fields);
    for (auto& f : block.fields) {
        check_unique(f.children);
        if (f.value.empty() && f.children.empty()) throw EmptyValue(f.name);
        for (const auto& c : f.children) {
            if (c.value.empty()) throw EmptyValue(c.name);
        }
    }
    return block;
}

std::string render_fields(const FieldBlock& block) {
    std::ostringstream out;
    for (const auto& f : block.fields) render_field(out, f, 0);
    return out.str();
}

ParsedDescription fields_to_spec(const FieldBlock& fields, ir::DrawingKind kind) {
    ParsedDescription out;
    out.kind = kind;

    switch (kind) {
        case ir::DrawingKind::RectangularConcrete: {
            geom::RcSectionSpec spec;
            UnitTracker units;
            std::vector<std::string> missing;
            spec.height = require_length(fields, {"Height of cross-section", "Height"}, units,
                                         missing);
            spec.width =
                require_length(fields, {"Width of cross-section", "Width"}, units, missing);
            spec.cover = require_length(
                fields,
                {"Thickness of clear cover", "Thinkness of clear cover", "Clear cover"}, units,
                missing);
            if (const Field* f = fields.find("Stirrup information");
                f || (f = fields.find("Stirrup"))) {
                auto bar = parse_bar_value(f->value);
                if (!bar) throw UnparsableQuantity(f->name, f->value);
                spec.stirrup_bar = *bar;
            } else {
                missing.push_back("Stirrup information");
            }
            spec.layers = collect_layers(fields);
            if (spec.layers.empty()) missing.push_back("Rebar information");
            if (!missing.empty()) throw MissingMandatory(std::move(missing));
            spec.origin = parse_position(fields);
            out.spec = std::move(spec);
            out.unit = units.unit();
            break;
        }
        case ir::DrawingKind::Steel: {
            geom::SteelSpec spec;
            const Field* type = fields.find("Steel Beam Cross-section");
            if (!type) type = fields.find("Type of Steel Beam Cross-section");
            if (!type) {
                if (const Field* t = fields.find("Type of Structure");
                    t && !ir::kind_from_string(lower(t->value))) {
                    type = t;
                }
            }
            if (!type) throw MissingMandatory({"Steel Beam Cross-section"});
            spec.section_type = type->value;
            spec.bottom_left = parse_position(fields);
            out.spec = std::move(spec);
            break;
        }
        case ir::DrawingKind::Precast: {
            geom::PrecastSpec spec;
            const Field* type = fields.find("Type of Precast Beam Cross-section");
            if (!type) {
                if (const Field* t = fields.find("Type of Structure");
                    t && !ir::kind_from_string(lower(t->value))) {
                    type = t;
                }
            }
            if (!type) throw MissingMandatory({"Type of Precast Beam Cross-section"});
            spec.section_type = type->value;
            spec.bottom_left = parse_position(fields);
            if (const Field* n = fields.find("Number of Strands")) {
                auto q = parse_quantity(n->value);
                if (!q || q->value != std::floor(q->value) || q->value < 0) {
                    throw UnparsableQuantity(n->name, n->value);
                }
                spec.strand_count = static_cast<int>(q->value);
            } else {
                throw MissingMandatory({"Number of Strands"});
            }
            out.spec = std::move(spec);
            break;
        }
    }
    return out;
}

FieldBlock render_spec(const geom::RcSectionSpec& spec, ir::Unit unit) {
    const std::string suffix = unit == ir::Unit::Inch ? "in" : "mm";
    FieldBlock b;
    b.fields.push_back({"Type of Structure", ir::kind_to_string(ir::DrawingKind::RectangularConcrete), {}});
    b.fields.push_back({"Height of cross-section", format_number(spec.height) + suffix, {}});
    b.fields.push_back({"Width of cross-section", format_number(spec.width) + suffix, {}});
    b.fields.push_back(
        {"Number of rebars", std::to_string(spec.layers.size()) + " layers", {}});

    Field rebars{"Rebar information", "", {}};
    const std::size_t n = spec.layers.size();
    const std::size_t middles = n >= 2 ? n - 2 : 0;
    for (std::size_t i = 0; i < n; ++i) {
        std::string label;
        if (i == 0 && n > 1) {
            label = "Top layer";
        } else if (i + 1 == n) {
            label = "Bottom layer";
        } else if (middles == 1) {
            label = "Middle layer";
        } else {
            label = "Middle layer " + std::to_string(i);
        }
        const auto& l = spec.layers[i];
        rebars.children.push_back(
            {label, std::to_string(l.count) + " No " + std::to_string(l.bar.designation), {}});
    }
    b.fields.push_back(std::move(rebars));
    b.fields.push_back(
        {"Stirrup information", "No " + std::to_string(spec.stirrup_bar.designation), {}});
    b.fields.push_back({"Thickness of clear cover", format_number(spec.cover) + suffix, {}});
    if (spec.origin.x != 0.0 || spec.origin.y != 0.0) {
        b.fields.push_back({"Bottom left vertex", point_string(spec.origin), {}});
    }
    return b;
}

FieldBlock render_spec(const geom::SteelSpec& spec) {
    FieldBlock b;
    b.fields.push_back({"Type of Structure", ir::kind_to_string(ir::DrawingKind::Steel), {}});
    b.fields.push_back({"Steel Beam Cross-section", spec.section_type, {}});
    if (spec.bottom_left.x != 0.0 || spec.bottom_left.y != 0.0) {
        b.fields.push_back(
            {"Position", "Bottom Left Vertex: " + point_string(spec.bottom_left), {}});
    }
    return b;
}

FieldBlock render_spec(const geom::PrecastSpec& spec) {
    FieldBlock b;
    b.fields.push_back({"Type of Structure", spec.section_type, {}});
    b.fields.push_back(
        {"Position", "Bottom Left Vertex: " + point_string(spec.bottom_left), {}});
    b.fields.push_back({"Number of Strands", std::to_string(spec.strand_count), {}});
    return b;
}

}  // namespace sdgen::frontend
