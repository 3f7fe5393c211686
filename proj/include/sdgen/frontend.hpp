#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdgen/geometry.hpp"
#include "sdgen/ir.hpp"

namespace sdgen::frontend {

struct FrontendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DuplicateField : FrontendError {
    explicit DuplicateField(const std::string& name)
        : FrontendError("duplicate field: " + name), name(name) {}
    std::string name;
};
struct EmptyValue : FrontendError {
    explicit EmptyValue(const std::string& name)
        : FrontendError("empty value for field: " + name), name(name) {}
    std::string name;
};
struct MissingMandatory : FrontendError {
    explicit MissingMandatory(std::vector<std::string> names);
    std::vector<std::string> names;
};
struct UnparsableQuantity : FrontendError {
    UnparsableQuantity(const std::string& name, const std::string& raw)
        : FrontendError("cannot parse quantity for \"" + name + "\": \"" + raw + "\""),
          name(name),
          raw(raw) {}
    std::string name;
    std::string raw;
};
struct MixedUnits : FrontendError {
    using FrontendError::FrontendError;
};
struct UnsupportedReference : FrontendError {
    using FrontendError::FrontendError;
};

struct Field {
    std::string name;
    std::string value;
    std::vector<Field> children;
};

struct FieldBlock {
    std::vector<Field> fields;

    const Field* find(const std::string& name) const;  // case-insensitive
    bool empty() const { return fields.empty(); }
};

/// Parses "- Name: Value" bullet lines; indented sub-bullets attach to the
/// preceding top-level field; non-bullet lines are ignored.
FieldBlock parse_fields(const std::string& text);

/// Canonical bullet rendering of a FieldBlock (inverse of parse_fields).
std::string render_fields(const FieldBlock& block);

using SpecVariant = std::variant<geom::RcSectionSpec, geom::SteelSpec, geom::PrecastSpec>;

struct ParsedDescription {
    ir::DrawingKind kind;
    SpecVariant spec;
    std::optional<ir::Unit> unit;  // detected from quantity suffixes, if any
};

ParsedDescription fields_to_spec(const FieldBlock& fields, ir::DrawingKind kind);

// Canonical bullet renderings of typed specs, parseable back by parse_fields.
FieldBlock render_spec(const geom::RcSectionSpec& spec, ir::Unit unit);
FieldBlock render_spec(const geom::SteelSpec& spec);
FieldBlock render_spec(const geom::PrecastSpec& spec);

}  // namespace sdgen::frontend
