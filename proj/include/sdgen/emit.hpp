#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdgen/geometry.hpp"
#include "sdgen/ir.hpp"

namespace sdgen::emit {

struct EmitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TemplateNotFound : EmitError {
    explicit TemplateNotFound(const std::string& section_type)
        : EmitError("no template for section type: " + section_type) {}
};
struct TemplateParseError : EmitError {
    using EmitError::EmitError;
};
struct UnsupportedKind : EmitError {
    using EmitError::EmitError;
};

struct LineEntity {
    ir::Segment segment;
};
struct CircleEntity {
    ir::CircleSpec circle;
};
struct ArcEntity {
    ir::ArcSpec arc;  // degrees at this layer
};

using Entity = std::variant<LineEntity, CircleEntity, ArcEntity>;
using EntityList = std::vector<Entity>;

/// Maps section-type strings to template DXF files in a directory
/// (<lib>/<SectionType>.dxf, spaces as underscores, "Type" dropped).
class TemplateLibrary {
public:
    TemplateLibrary() = default;
    explicit TemplateLibrary(std::string directory);

    static std::string file_stem(const std::string& section_type);
    std::string path_for(const std::string& section_type) const;
    const std::string& directory() const { return directory_; }

private:
    std::string directory_;
};

EntityList load_template(const TemplateLibrary& templates, const std::string& section_type);

EntityList ir_to_entities(const ir::DrawingIR& drawing, const TemplateLibrary& templates,
                          const geom::PrecastCatalog* catalog = nullptr);

std::string emit_dxf(const EntityList& entities, ir::Unit unit);
EntityList parse_dxf(const std::string& dxf_text);

std::string emit_script(const ir::DrawingIR& drawing, const std::string& codegen_steps);

}  // namespace sdgen::emit
