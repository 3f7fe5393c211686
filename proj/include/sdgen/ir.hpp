#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace sdgen::ir {

/// Rounds to 4 decimal places, the precision used for all published coordinates.
inline double round4(double v) {
    return std::round(v * 10000.0) / 10000.0;
}

enum class DrawingKind {
    RectangularConcrete,
    Steel,
    Precast,
};

inline constexpr const char* kKindStrings[] = {
    "rectangular concrete beam cross-section",
    "steel beam cross-section",
    "precast beam cross-section",
};

std::string kind_to_string(DrawingKind kind);
std::optional<DrawingKind> kind_from_string(const std::string& s);
// Case-insensitive scan for a kind name inside surrounding prose.
std::optional<DrawingKind> find_kind_in_text(const std::string& text);

// The value doubles as the drawing-header unit code ($INSUNITS).
enum class Unit : int {
    Inch = 1,
    Millimeter = 4,
};

inline int unit_code(Unit u) { return static_cast<int>(u); }
std::string unit_to_string(Unit u);
std::optional<Unit> unit_from_string(const std::string& s);

/// Either "don't save" (empty) or a filesystem path.
using SaveTarget = std::optional<std::string>;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Segment {
    Point2 end1;
    Point2 end2;

    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Angles in degrees; conversion to radians is the emitter's job.
struct ArcSpec {
    Point2 center;
    double radius = 0.0;
    double start_angle = 0.0;
    double end_angle = 0.0;

    friend bool operator==(const ArcSpec&, const ArcSpec&) = default;
};

struct CircleSpec {
    Point2 center;
    double radius = 0.0;

    friend bool operator==(const CircleSpec&, const CircleSpec&) = default;
};

struct RcPayload {
    // Order: bottom left, top left, top right, bottom right.
    std::array<Point2, 4> vertices{};
    // Order: left, top, right, bottom.
    std::array<Segment, 4> sides{};
    std::vector<Point2> rebar_centers;
    std::vector<double> rebar_radii;  // order-matched with rebar_centers
    double stirrup_radius = 0.0;
    double stirrup_diameter = 0.0;
    std::array<Segment, 8> stirrup_lines{};  // L1..L8
    std::array<ArcSpec, 4> stirrup_arcs{};   // A1..A4
    std::array<Segment, 6> hook_lines{};     // Lh1..Lh6

    friend bool operator==(const RcPayload&, const RcPayload&) = default;
};

struct SteelPayload {
    std::string section_type;  // catalog string, e.g. W1100X390
    Point2 bottom_left{};

    friend bool operator==(const SteelPayload&, const SteelPayload&) = default;
};

struct PrecastPayload {
    std::string section_type;  // category + subcategory, e.g. "I-Beam Type I"
    Point2 bottom_left{};
    std::vector<Point2> strand_centers;

    friend bool operator==(const PrecastPayload&, const PrecastPayload&) = default;
};

struct DrawingIR {
    SaveTarget save;  // default: don't save
    Unit unit = Unit::Millimeter;
    DrawingKind kind = DrawingKind::RectangularConcrete;
    std::variant<RcPayload, SteelPayload, PrecastPayload> payload;

    const RcPayload& rc() const { return std::get<RcPayload>(payload); }
    const SteelPayload& steel() const { return std::get<SteelPayload>(payload); }
    const PrecastPayload& precast() const { return std::get<PrecastPayload>(payload); }

    friend bool operator==(const DrawingIR&, const DrawingIR&) = default;
};

struct IrError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedJson : IrError {
    using IrError::IrError;
};
struct MissingKey : IrError {
    explicit MissingKey(const std::string& path)
        : IrError("missing key: " + path), path(path) {}
    std::string path;
};
struct BadType : IrError {
    explicit BadType(const std::string& path)
        : IrError("bad type at: " + path), path(path) {}
    std::string path;
};
struct UnknownKeys : IrError {
    explicit UnknownKeys(const std::string& paths)
        : IrError("unknown keys: " + paths) {}
};
struct InvariantViolation : IrError {
    using IrError::IrError;
};

struct ValidationReport {
    std::vector<std::string> violations;

    bool empty() const { return violations.empty(); }
};

/// Parses and fully validates an IR from its JSON text form.
DrawingIR parse_ir(const std::string& json_text);

/// Canonical JSON rendering; parse_ir(serialize_ir(x)) == x.
std::string serialize_ir(const DrawingIR& ir);

/// Collects invariant violations; an empty report means the IR is well-formed.
ValidationReport validate(const DrawingIR& ir);

}  // namespace sdgen::ir
