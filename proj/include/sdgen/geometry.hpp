#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sdgen/ir.hpp"

namespace sdgen::geom {

using ir::ArcSpec;
using ir::CircleSpec;
using ir::DrawingIR;
using ir::Point2;
using ir::SaveTarget;
using ir::Segment;
using ir::Unit;

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonPositiveDesignation : GeometryError {
    using GeometryError::GeometryError;
};
struct SectionTooSmall : GeometryError {
    using GeometryError::GeometryError;
};
struct EmptyLayout : GeometryError {
    using GeometryError::GeometryError;
};
struct UnknownPrecastType : GeometryError {
    using GeometryError::GeometryError;
};
struct TooManyStrands : GeometryError {
    TooManyStrands(const std::string& type, std::size_t max)
        : GeometryError("too many strands for " + type + " (max " + std::to_string(max) + ")"),
          max(max) {}
    std::size_t max;
};
struct KindMismatch : GeometryError {
    using GeometryError::GeometryError;
};

/// US bar designation; diameter is designation/8 inch.
struct BarSize {
    int designation = 0;

    double diameter() const { return designation / 8.0; }
    double radius() const { return diameter() / 2.0; }

    friend bool operator==(const BarSize&, const BarSize&) = default;
};

std::pair<double, double> bar_dims(int designation);  // (diameter, radius)

struct LayerSpec {
    int count = 0;
    BarSize bar;

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct RcSectionSpec {
    double width = 0.0;   // x extent
    double height = 0.0;  // y extent
    Point2 origin{0.0, 0.0};  // bottom-left vertex
    double cover = 0.0;   // clear cover T
    BarSize stirrup_bar;
    std::vector<LayerSpec> layers;  // ordered top to bottom

    friend bool operator==(const RcSectionSpec&, const RcSectionSpec&) = default;
};

struct SteelSpec {
    std::string section_type;
    Point2 bottom_left{0.0, 0.0};

    friend bool operator==(const SteelSpec&, const SteelSpec&) = default;
};

struct PrecastSpec {
    std::string section_type;
    Point2 bottom_left{0.0, 0.0};
    int strand_count = 0;

    friend bool operator==(const PrecastSpec&, const PrecastSpec&) = default;
};

struct RebarLayout {
    // Same order as the spec's layers (top to bottom).
    std::vector<std::vector<CircleSpec>> layers;

    // Analysis order: top layer, bottom layer, then middle layers bottom-up.
    std::vector<CircleSpec> analysis_order() const;
    // Drawing order: top to bottom, left to right within a layer.
    std::vector<CircleSpec> drawing_order() const;
    std::size_t total() const;
};

struct CornerRebars {
    CircleSpec c1;  // smallest x, largest y
    CircleSpec c2;  // largest x, largest y
    CircleSpec c3;  // largest x, smallest y
    CircleSpec c4;  // smallest x, smallest y
};

struct StirrupGeometry {
    std::array<Segment, 4> internal_lines{};  // L1..L4
    std::array<Segment, 4> external_lines{};  // L5..L8
    std::array<ArcSpec, 4> arcs{};            // A1..A4
};

struct HookGeometry {
    std::array<Segment, 6> lines{};  // Lh1..Lh6
    double extension = 0.0;          // Lext
};

class PrecastCatalog {
public:
    static PrecastCatalog load(const std::string& path);
    static PrecastCatalog builtin();

    // Positions ordered bottom row first, left to right, then upward rows.
    const std::vector<Point2>* find(const std::string& type) const;
    // Case-insensitive lookup returning the canonical type name.
    std::optional<std::string> canonical_type(const std::string& type) const;
    double strand_radius(const std::string& type) const;

    const std::map<std::string, std::vector<Point2>>& entries() const { return entries_; }

private:
    std::map<std::string, std::vector<Point2>> entries_;
    std::map<std::string, double> strand_radii_;
};

RebarLayout layout_rebars(const RcSectionSpec& spec);
CornerRebars corner_rebars(const RebarLayout& layout);
StirrupGeometry stirrup_geometry(const CornerRebars& corners, double stirrup_diameter);
HookGeometry hook_geometry(const CircleSpec& c1, double stirrup_diameter);
std::vector<Point2> strand_layout(const PrecastCatalog& catalog, const std::string& type, int n);

DrawingIR resolve(const RcSectionSpec& spec, Unit unit, SaveTarget save);
DrawingIR resolve(const SteelSpec& spec, Unit unit, SaveTarget save);
DrawingIR resolve(const PrecastSpec& spec, const PrecastCatalog& catalog, Unit unit,
                  SaveTarget save);

struct Mismatch {
    std::string field;
    double expected = 0.0;
    double actual = 0.0;
    double delta = 0.0;
    std::string note;  // used for non-numeric mismatches
};

struct VerifyReport {
    std::vector<Mismatch> mismatches;

    bool empty() const { return mismatches.empty(); }
    std::string summary() const;
};

VerifyReport verify_ir(const DrawingIR& actual, const DrawingIR& expected, double tolerance);

VerifyReport verify_ir(const DrawingIR& ir, const RcSectionSpec& spec, double tolerance);
VerifyReport verify_ir(const DrawingIR& ir, const SteelSpec& spec, double tolerance);
VerifyReport verify_ir(const DrawingIR& ir, const PrecastSpec& spec, const PrecastCatalog& catalog,
                       double tolerance);

}  // namespace sdgen::geom
