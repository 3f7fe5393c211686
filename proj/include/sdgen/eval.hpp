#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdgen/frontend.hpp"
#include "sdgen/pipeline.hpp"

namespace sdgen::eval {

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One evaluation input: a description plus the spec it should resolve to.
struct CorpusEntry {
    std::string id;
    std::string description;
    ir::DrawingKind kind = ir::DrawingKind::RectangularConcrete;
    frontend::SpecVariant spec;
    ir::Unit unit = ir::Unit::Millimeter;
    ir::SaveTarget save;
};

CorpusEntry load_corpus_entry(const std::string& path);
std::vector<CorpusEntry> load_corpus(const std::string& directory);  // *.json, sorted by name

/// Step labels in run order for a kind ("3-1".."3-3" for concrete).
std::vector<std::string> step_labels(ir::DrawingKind kind);

ir::DrawingIR resolve_entry(const CorpusEntry& entry, const geom::PrecastCatalog& catalog);

/// Per-step reference results (extracted form) computed without any model.
std::map<std::string, std::string> oracle_results(const CorpusEntry& entry,
                                                  const geom::PrecastCatalog& catalog,
                                                  const knowledge::KnowledgeBase& kb);

/// Synthesizes correct completions for every step of an entry's pipeline.
class OracleProvider : public pipeline::Provider {
public:
    OracleProvider(CorpusEntry entry, const geom::PrecastCatalog* catalog,
                   const knowledge::KnowledgeBase* kb);

    pipeline::ProviderResult complete(const pipeline::StepRef& ref, const std::string& prompt,
                                      pipeline::ModelRole role,
                                      pipeline::ToolRegistry* tools) override;

private:
    CorpusEntry entry_;
    std::map<std::string, std::string> results_;
};

struct AccuracyCell {
    std::string label;
    int successes = 0;
    int trials = 0;

    double ratio() const { return trials ? static_cast<double>(successes) / trials : 0.0; }
};

struct AccuracyRow {
    std::string id;
    ir::DrawingKind kind = ir::DrawingKind::RectangularConcrete;
    std::vector<AccuracyCell> cells;

    const AccuracyCell* cell(const std::string& label) const;
};

struct AccuracyTable {
    std::vector<AccuracyRow> rows;

    std::string to_csv() const;
};

/// Did this transcript reproduce the reference result for its step?
bool step_success(const std::string& label, const pipeline::StepTranscript& transcript,
                  const std::map<std::string, std::string>& expected,
                  const ir::DrawingIR& expected_ir, double tolerance);

using ProviderFactory =
    std::function<std::unique_ptr<pipeline::Provider>(const CorpusEntry&)>;

AccuracyTable evaluate(const std::vector<CorpusEntry>& entries, int trials,
                       const ProviderFactory& factory, const pipeline::PipelineContext& ctx);

}  // namespace sdgen::eval
