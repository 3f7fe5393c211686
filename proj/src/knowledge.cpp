#include "sdgen/knowledge.hpp"

#include <fstream>

#include "json.hpp"

namespace sdgen::knowledge {

namespace {

constexpr const char* kFieldNames[] = {
    "useful_info", "mandatory_info", "acquisition_methods", "json_requirement", "codegen_steps",
};

}  // namespace

KnowledgeBase KnowledgeBase::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open knowledge base: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("knowledge base " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw SchemaError("knowledge base top level must be an object");

    KnowledgeBase kb;
    kb.source_path_ = path;
    for (int i = 0; i < 3; ++i) {
        const auto kind = static_cast<ir::DrawingKind>(i);
        const std::string name = ir::kind_to_string(kind);
        if (!j.contains(name)) {
            throw SchemaError("knowledge base missing entry for \"" + name + "\"");
        }
        const auto& entry = j.at(name);
        if (!entry.is_object()) {
            throw SchemaError("knowledge entry for \"" + name + "\" must be an object");
        }
        KnowledgeRecord rec;
        std::string* slots[] = {&rec.useful_info, &rec.mandatory_info, &rec.acquisition_methods,
                                &rec.json_requirement, &rec.codegen_steps};
        for (int f = 0; f < 5; ++f) {
            if (!entry.contains(kFieldNames[f]) || !entry.at(kFieldNames[f]).is_string()) {
                throw SchemaError("knowledge entry for \"" + name + "\" missing field " +
                                  kFieldNames[f]);
            }
            *slots[f] = entry.at(kFieldNames[f]).get<std::string>();
            if (slots[f]->empty()) {
                throw SchemaError("knowledge entry for \"" + name + "\" has empty field " +
                                  kFieldNames[f]);
            }
        }
        kb.records_[kind] = std::move(rec);
    }
    return kb;
}

const KnowledgeRecord& KnowledgeBase::retrieve(ir::DrawingKind kind) const {
    auto it = records_.find(kind);
    if (it == records_.end()) {
        throw UnknownKind("no knowledge record for " + ir::kind_to_string(kind));
    }
    return it->second;
}

}  // namespace sdgen::knowledge
