#include "sdgen/pipeline.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sdgen::pipeline {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

const std::vector<std::string>& required_placeholders(int step_id) {
    static const std::array<std::vector<std::string>, 6> kRequired = {{
        {"description"},
        {"useful_info", "description"},
        {"Mandatory_Info", "background_sd", "Input"},
        {"description"},
        {"JSON_Requirement", "Input_Info"},
        {"steps", "JSON_file"},
    }};
    if (step_id < 1 || step_id > 6) throw ConfigError("no such step: " + std::to_string(step_id));
    return kRequired[step_id - 1];
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
}

}  // namespace

std::string render_prompt(const PromptTemplate& tmpl,
                          const std::map<std::string, std::string>& bindings) {
    for (const auto& [name, value] : bindings) {
        (void)value;
        bool declared = false;
        for (const auto& p : tmpl.placeholders) {
            if (p == name) {
                declared = true;
                break;
            }
        }
        if (!declared) throw UnknownPlaceholder(name);
    }
    std::string out = tmpl.body;
    for (const auto& name : tmpl.placeholders) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw MissingBinding(name);
        replace_all(out, "{" + name + "}", it->second);
    }
    return out;
}

std::string extract_result(const std::string& completion) {
    static const std::string kOpen = "<result>";
    static const std::string kClose = "</result>";
    const auto open = completion.rfind(kOpen);
    if (open == std::string::npos) throw NoResultBlock();
    const auto begin = open + kOpen.size();
    const auto close = completion.find(kClose, begin);
    if (close == std::string::npos) throw UnterminatedResultBlock();
    return trim(completion.substr(begin, close - begin));
}

std::optional<CalcOp> calc_op_from_string(const std::string& name) {
    const std::string n = lower(name);
    if (n == "multiply") return CalcOp::Multiply;
    if (n == "divide") return CalcOp::Divide;
    if (n == "minus") return CalcOp::Minus;
    if (n == "add") return CalcOp::Add;
    if (n == "sqrt") return CalcOp::Sqrt;
    return std::nullopt;
}

std::string calc_op_to_string(CalcOp op) {
    switch (op) {
        case CalcOp::Multiply: return "Multiply";
        case CalcOp::Divide: return "Divide";
        case CalcOp::Minus: return "Minus";
        case CalcOp::Add: return "Add";
        case CalcOp::Sqrt: return "Sqrt";
    }
    return "?";
}

double calc_tool(CalcOp op, const std::vector<double>& args) {
    const std::size_t want = op == CalcOp::Sqrt ? 1 : 2;
    if (args.size() != want) {
        throw ArityError(calc_op_to_string(op) + " takes " + std::to_string(want) +
                         " argument(s), got " + std::to_string(args.size()));
    }
    double v = 0.0;
    switch (op) {
        case CalcOp::Multiply: v = args[0] * args[1]; break;
        case CalcOp::Divide:
            if (args[1] == 0.0) throw DivideByZero();
            v = args[0] / args[1];
            break;
        case CalcOp::Minus: v = args[0] - args[1]; break;
        case CalcOp::Add: v = args[0] + args[1]; break;
        case CalcOp::Sqrt:
            if (args[0] < 0.0) throw NegativeSqrt();
            v = std::sqrt(args[0]);
            break;
    }
    return ir::round4(v);
}

double ToolRegistry::call(const std::string& name, const std::vector<double>& args) {
    const auto op = calc_op_from_string(name);
    if (!op) throw ArityError("unknown tool: " + name);
    const double result = calc_tool(*op, args);
    calls_.push_back({calc_op_to_string(*op), args, result});
    return result;
}

ModelRole role_for_step(int step_id) {
    switch (step_id) {
        case 1:
        case 2:
        case 4:
            return ModelRole::Light;
        default:
            return ModelRole::Strong;
    }
}

std::string StepRef::label() const {
    if (step == 3 && sub_step > 0) return "3-" + std::to_string(sub_step);
    return std::to_string(step);
}

std::string outcome_to_string(StepOutcome o) {
    switch (o) {
        case StepOutcome::Ok: return "ok";
        case StepOutcome::ExtractionFailed: return "extraction-failed";
        case StepOutcome::ProviderFailed: return "provider-error";
    }
    return "?";
}

PromptLibrary PromptLibrary::load(const std::string& directory) {
    PromptLibrary lib;
    for (int step = 1; step <= 6; ++step) {
        const fs::path path = fs::path(directory) / ("step" + std::to_string(step) + ".txt");
        std::ifstream in(path);
        if (!in) throw TemplateIoError("cannot open prompt template: " + path.string());
        std::stringstream buf;
        buf << in.rdbuf();
        PromptTemplate tmpl;
        tmpl.step_id = step;
        tmpl.body = buf.str();
        tmpl.placeholders = required_placeholders(step);
        for (const auto& name : tmpl.placeholders) {
            if (tmpl.body.find("{" + name + "}") == std::string::npos) {
                throw TemplateIoError("prompt template " + path.string() +
                                      " is missing placeholder {" + name + "}");
            }
        }
        lib.steps_[step - 1] = std::move(tmpl);
    }
    return lib;
}

const PromptTemplate& PromptLibrary::step(int step_id) const {
    if (step_id < 1 || step_id > 6) throw ConfigError("no such step: " + std::to_string(step_id));
    return steps_[step_id - 1];
}

std::array<std::string, 3> split_rc_methods(const std::string& acquisition_methods) {
    const auto p8 = acquisition_methods.find("(8)");
    const auto p11 = acquisition_methods.find("(11)");
    if (p8 == std::string::npos || p11 == std::string::npos || p11 < p8) {
        return {acquisition_methods, acquisition_methods, acquisition_methods};
    }
    return {acquisition_methods.substr(0, p8), acquisition_methods.substr(p8, p11 - p8),
            acquisition_methods.substr(p11)};
}

WorkspaceDetails parse_workspace_details(const std::string& text) {
    WorkspaceDetails details;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("- ", 0) == 0) t = trim(t.substr(2));
        const auto colon = t.find(':');
        if (colon == std::string::npos) continue;
        const std::string key = lower(trim(t.substr(0, colon)));
        const std::string value = trim(t.substr(colon + 1));
        if (key == "save") {
            if (lower(value) != "false" && !value.empty()) details.save = value;
        } else if (key == "unit") {
            if (const auto u = ir::unit_from_string(value)) details.unit = *u;
        }
    }
    return details;
}

namespace {

StepTranscript do_step(Provider& provider, const PipelineContext& ctx, const StepRef& ref,
                       const std::map<std::string, std::string>& bindings, bool with_tools) {
    StepTranscript t;
    t.ref = ref;
    t.prompt = render_prompt(ctx.prompts->step(ref.step), bindings);
    ToolRegistry tools;
    try {
        auto res = provider.complete(ref, t.prompt, role_for_step(ref.step),
                                     with_tools ? &tools : nullptr);
        t.completion = std::move(res.completion);
        t.tool_calls = res.tool_calls.empty() ? tools.calls() : std::move(res.tool_calls);
    } catch (const std::exception& e) {
        t.outcome = StepOutcome::ProviderFailed;
        t.error = e.what();
        return t;
    }
    try {
        t.result = extract_result(t.completion);
    } catch (const PipelineError& e) {
        t.outcome = StepOutcome::ExtractionFailed;
        t.error = e.what();
    }
    return t;
}

std::string join_results(const std::vector<const StepTranscript*>& parts) {
    std::string out;
    for (const auto* p : parts) {
        if (!out.empty()) out += "\n";
        out += p->result;
    }
    return out;
}

}  // namespace

PipelineRun run_pipeline(const std::string& description, Provider& provider,
                         const PipelineContext& ctx) {
    if (!ctx.prompts || !ctx.kb) throw ConfigError("pipeline context needs prompts and knowledge");
    PipelineRun run;
    run.description = description;
    if (trim(description).empty()) {
        run.failure = "empty description";
        return run;
    }

    auto fail = [&run](const StepTranscript& t) {
        run.failure = "step " + t.ref.label() + ": " + t.error;
    };

    // Step 1: drawing-type identification.
    run.transcripts.push_back(do_step(provider, ctx, {1, 0}, {{"description", description}}, false));
    {
        StepTranscript& t = run.transcripts.back();
        if (t.outcome == StepOutcome::Ok) {
            run.kind = ir::find_kind_in_text(t.result);
            if (!run.kind) {
                t.outcome = StepOutcome::ExtractionFailed;
                t.error = "unknown drawing kind: " + t.result;
            }
        }
        if (t.outcome != StepOutcome::Ok) {
            fail(t);
            return run;
        }
    }
    const knowledge::KnowledgeRecord& rec = ctx.kb->retrieve(*run.kind);

    // Step 2: detail extraction.
    run.transcripts.push_back(do_step(
        provider, ctx, {2, 0},
        {{"useful_info", rec.useful_info}, {"description", description}}, false));
    if (run.transcripts.back().outcome != StepOutcome::Ok) {
        fail(run.transcripts.back());
        return run;
    }
    const std::string step2_result = run.transcripts.back().result;

    // Step 3: secondary details (three slices for the concrete kind).
    std::vector<const StepTranscript*> step3_parts;
    if (*run.kind == ir::DrawingKind::RectangularConcrete) {
        const auto slices = split_rc_methods(rec.acquisition_methods);
        for (int sub = 1; sub <= 3; ++sub) {
            std::string input = step2_result;
            for (const auto* part : step3_parts) input += "\n" + part->result;
            run.transcripts.push_back(do_step(provider, ctx, {3, sub},
                                              {{"Mandatory_Info", rec.mandatory_info},
                                               {"background_sd", slices[sub - 1]},
                                               {"Input", input}},
                                              true));
            if (run.transcripts.back().outcome != StepOutcome::Ok) {
                fail(run.transcripts.back());
                return run;
            }
            step3_parts.push_back(&run.transcripts.back());
        }
    } else {
        run.transcripts.push_back(do_step(provider, ctx, {3, 0},
                                          {{"Mandatory_Info", rec.mandatory_info},
                                           {"background_sd", rec.acquisition_methods},
                                           {"Input", step2_result}},
                                          true));
        if (run.transcripts.back().outcome != StepOutcome::Ok) {
            fail(run.transcripts.back());
            return run;
        }
        step3_parts.push_back(&run.transcripts.back());
    }

    // Step 4: workspace details.
    run.transcripts.push_back(do_step(provider, ctx, {4, 0}, {{"description", description}}, false));
    if (run.transcripts.back().outcome != StepOutcome::Ok) {
        fail(run.transcripts.back());
        return run;
    }
    const std::string step4_result = run.transcripts.back().result;

    // Step 5: JSON formatting.
    std::string input_info = join_results(step3_parts);
    input_info += "\n" + step4_result;
    run.transcripts.push_back(do_step(provider, ctx, {5, 0},
                                      {{"JSON_Requirement", rec.json_requirement},
                                       {"Input_Info", input_info}},
                                      false));
    {
        StepTranscript& t = run.transcripts.back();
        if (t.outcome == StepOutcome::Ok) {
            try {
                run.final_ir = ir::parse_ir(t.result);
            } catch (const ir::IrError& e) {
                t.outcome = StepOutcome::ExtractionFailed;
                t.error = std::string("IR parse: ") + e.what();
            }
        }
        if (t.outcome != StepOutcome::Ok) {
            fail(t);
            return run;
        }
    }
    const std::string step5_result = run.transcripts.back().result;

    // Step 6: code generation.
    run.transcripts.push_back(do_step(provider, ctx, {6, 0},
                                      {{"steps", rec.codegen_steps}, {"JSON_file", step5_result}},
                                      false));
    if (run.transcripts.back().outcome != StepOutcome::Ok) {
        fail(run.transcripts.back());
        return run;
    }
    run.script = run.transcripts.back().result;

    // Oracle verification of the final IR against the step-2 details.
    try {
        const auto fields = frontend::parse_fields(step2_result);
        auto parsed = frontend::fields_to_spec(fields, *run.kind);
        const auto details = parse_workspace_details(step4_result);
        ir::DrawingIR expected;
        if (const auto* rc = std::get_if<geom::RcSectionSpec>(&parsed.spec)) {
            expected = geom::resolve(*rc, details.unit, details.save);
        } else if (const auto* steel = std::get_if<geom::SteelSpec>(&parsed.spec)) {
            expected = geom::resolve(*steel, details.unit, details.save);
        } else {
            const auto& precast = std::get<geom::PrecastSpec>(parsed.spec);
            static const geom::PrecastCatalog kBuiltin = geom::PrecastCatalog::builtin();
            expected = geom::resolve(precast, ctx.catalog ? *ctx.catalog : kBuiltin, details.unit,
                                     details.save);
        }
        run.verify = geom::verify_ir(*run.final_ir, expected, ctx.tolerance);
    } catch (const std::exception&) {
        // Step-2 text not recoverable as a deterministic spec; skip verification.
    }

    run.ok = true;
    return run;
}

std::string run_to_json(const PipelineRun& run) {
    ordered_json j;
    j["description"] = run.description;
    j["kind"] = run.kind ? ordered_json(ir::kind_to_string(*run.kind)) : ordered_json(nullptr);
    ordered_json steps = ordered_json::array();
    for (const auto& t : run.transcripts) {
        ordered_json s;
        s["step"] = t.ref.label();
        s["prompt"] = t.prompt;
        s["completion"] = t.completion;
        ordered_json calls = ordered_json::array();
        for (const auto& c : t.tool_calls) {
            calls.push_back({{"name", c.name}, {"args", c.args}, {"result", c.result}});
        }
        s["tool_calls"] = std::move(calls);
        s["result"] = t.result;
        s["outcome"] = outcome_to_string(t.outcome);
        s["error"] = t.error;
        steps.push_back(std::move(s));
    }
    j["steps"] = std::move(steps);
    j["ir"] = run.final_ir ? ordered_json(ir::serialize_ir(*run.final_ir)) : ordered_json(nullptr);
    j["script"] = run.script;
    if (run.verify) {
        ordered_json mismatches = ordered_json::array();
        for (const auto& m : run.verify->mismatches) {
            mismatches.push_back({{"field", m.field},
                                  {"expected", m.expected},
                                  {"actual", m.actual},
                                  {"delta", m.delta},
                                  {"note", m.note}});
        }
        j["verify"] = {{"mismatches", std::move(mismatches)}};
    } else {
        j["verify"] = nullptr;
    }
    j["ok"] = run.ok;
    j["failure"] = run.failure;
    return j.dump(2) + "\n";
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (const unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sdgen::pipeline
