#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdgen/frontend.hpp"
#include "sdgen/geometry.hpp"
#include "sdgen/ir.hpp"
#include "sdgen/knowledge.hpp"

namespace sdgen::pipeline {

struct PipelineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingBinding : PipelineError {
    explicit MissingBinding(const std::string& name)
        : PipelineError("missing binding for placeholder: " + name), name(name) {}
    std::string name;
};
struct UnknownPlaceholder : PipelineError {
    explicit UnknownPlaceholder(const std::string& name)
        : PipelineError("unknown placeholder: " + name), name(name) {}
    std::string name;
};
struct NoResultBlock : PipelineError {
    NoResultBlock() : PipelineError("completion contains no <result> block") {}
};
struct UnterminatedResultBlock : PipelineError {
    UnterminatedResultBlock() : PipelineError("<result> block is never closed") {}
};
struct DivideByZero : PipelineError {
    DivideByZero() : PipelineError("division by zero") {}
};
struct NegativeSqrt : PipelineError {
    NegativeSqrt() : PipelineError("square root of a negative number") {}
};
struct ArityError : PipelineError {
    using PipelineError::PipelineError;
};
struct ProviderError : PipelineError {
    using PipelineError::PipelineError;
};
struct UnknownDrawingKind : PipelineError {
    using PipelineError::PipelineError;
};
struct TemplateIoError : PipelineError {
    using PipelineError::PipelineError;
};
struct ConfigError : PipelineError {
    using PipelineError::PipelineError;
};

struct PromptTemplate {
    int step_id = 0;
    std::string body;
    std::vector<std::string> placeholders;  // required names, {curly} form in body
};

/// Substitutes exactly the declared placeholders; every one must be bound and
/// every binding must be declared.
std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings);

/// Content strictly between the last <result>...</result> pair, trimmed.
std::string extract_result(const std::string& completion);

enum class CalcOp { Multiply, Divide, Minus, Add, Sqrt };

std::optional<CalcOp> calc_op_from_string(const std::string& name);
std::string calc_op_to_string(CalcOp op);

/// Binary ops take two args, Sqrt one; results round to 4 decimals.
double calc_tool(CalcOp op, const std::vector<double>& args);

struct ToolCall {
    std::string name;
    std::vector<double> args;
    double result = 0.0;
};

class ToolRegistry {
public:
    double call(const std::string& name, const std::vector<double>& args);
    const std::vector<ToolCall>& calls() const { return calls_; }
    void clear() { calls_.clear(); }

private:
    std::vector<ToolCall> calls_;
};

enum class ModelRole { Light, Strong };

/// Steps 1, 2, 4 use the light model; 3, 5, 6 the strong one.
ModelRole role_for_step(int step_id);

struct StepRef {
    int step = 0;
    int sub_step = 0;  // 0 = none; 1..3 for the concrete step-3 slices

    std::string label() const;

    friend bool operator==(const StepRef&, const StepRef&) = default;
    friend auto operator<=>(const StepRef&, const StepRef&) = default;
};

struct ProviderResult {
    std::string completion;
    std::vector<ToolCall> tool_calls;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderResult complete(const StepRef& ref, const std::string& prompt, ModelRole role,
                                    ToolRegistry* tools) = 0;
    // Called by the eval harness before each trial; default is stateless.
    virtual void begin_trial(int /*trial*/) {}
};

struct ProviderConfig {
    std::string light_model = "light";
    std::string strong_model = "strong";
    std::string api_key_env;
    std::string base_url;
    double temperature = 0.0;
    int timeout_ms = 60000;
    int retries = 0;
};

enum class StepOutcome { Ok, ExtractionFailed, ProviderFailed };

std::string outcome_to_string(StepOutcome o);

struct StepTranscript {
    StepRef ref;
    std::string prompt;
    std::string completion;
    std::vector<ToolCall> tool_calls;
    std::string result;  // present iff outcome == Ok
    StepOutcome outcome = StepOutcome::Ok;
    std::string error;
};

struct PipelineRun {
    std::string description;
    std::optional<ir::DrawingKind> kind;
    std::vector<StepTranscript> transcripts;
    std::optional<ir::DrawingIR> final_ir;
    std::string script;
    std::optional<geom::VerifyReport> verify;
    bool ok = false;
    std::string failure;  // first failure, empty when ok
};

class PromptLibrary {
public:
    // Reads step1.txt .. step6.txt and checks the required placeholders appear.
    static PromptLibrary load(const std::string& directory);

    const PromptTemplate& step(int step_id) const;

private:
    std::array<PromptTemplate, 6> steps_{};
};

struct PipelineContext {
    const PromptLibrary* prompts = nullptr;
    const knowledge::KnowledgeBase* kb = nullptr;
    const geom::PrecastCatalog* catalog = nullptr;
    double tolerance = 1e-3;
};

/// Slices the concrete acquisition-method text into the three step-3 parts:
/// layout, stirrup lines/arcs, hooks.
std::array<std::string, 3> split_rc_methods(const std::string& acquisition_methods);

PipelineRun run_pipeline(const std::string& description, Provider& provider,
                         const PipelineContext& ctx);

/// Deterministic JSON rendering of a full run (transcripts, IR, verify report).
std::string run_to_json(const PipelineRun& run);

/// FNV-1a 64-bit, lowercase hex; used to pin replay entries to their prompts.
std::string fnv1a_hex(const std::string& text);

// Save/Unit extraction from a step-4 result block.
struct WorkspaceDetails {
    ir::SaveTarget save;
    ir::Unit unit = ir::Unit::Millimeter;
};
WorkspaceDetails parse_workspace_details(const std::string& text);

}  // namespace sdgen::pipeline
