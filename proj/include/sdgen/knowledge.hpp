#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "sdgen/ir.hpp"

namespace sdgen::knowledge {

struct KnowledgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : KnowledgeError {
    using KnowledgeError::KnowledgeError;
};
struct SchemaError : KnowledgeError {
    using KnowledgeError::KnowledgeError;
};
struct UnknownKind : KnowledgeError {
    using KnowledgeError::KnowledgeError;
};

/// The five per-drawing-type knowledge records spliced into prompts verbatim.
struct KnowledgeRecord {
    std::string useful_info;          // Info1
    std::string mandatory_info;       // Info2
    std::string acquisition_methods;  // Info3
    std::string json_requirement;     // Info4
    std::string codegen_steps;        // Info5
};

class KnowledgeBase {
public:
    static KnowledgeBase load(const std::string& path);

    const KnowledgeRecord& retrieve(ir::DrawingKind kind) const;
    const std::string& source_path() const { return source_path_; }

private:
    std::map<ir::DrawingKind, KnowledgeRecord> records_;
    std::string source_path_;
};

}  // namespace sdgen::knowledge
