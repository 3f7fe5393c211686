#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sdgen/emit.hpp"
#include "sdgen/eval.hpp"
#include "sdgen/frontend.hpp"
#include "sdgen/geometry.hpp"
#include "sdgen/ir.hpp"
#include "sdgen/knowledge.hpp"
#include "sdgen/pipeline.hpp"
#include "sdgen/providers.hpp"

#ifndef SDGEN_DATA_DIR
#define SDGEN_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;
using namespace sdgen;

struct Options {
    std::string kb = std::string(SDGEN_DATA_DIR) + "/knowledge.json";
    std::string templates = std::string(SDGEN_DATA_DIR) + "/templates";
    std::string prompts = std::string(SDGEN_DATA_DIR) + "/prompts";
    std::string catalog = std::string(SDGEN_DATA_DIR) + "/precast_catalog.json";
    std::string out_dir = ".";
    double tolerance = 1e-3;
    int trials = 100;
    int jobs = 1;
    std::string provider = "oracle";
    std::string model_light = "light";
    std::string model_strong = "strong";
    std::string api_key_env;
    std::string base_url;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    fs::create_directories(fs::path(path).parent_path().empty()
                               ? fs::path(".")
                               : fs::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

ir::DrawingKind detect_kind(const std::string& text, const frontend::FieldBlock& fields) {
    if (const frontend::Field* f = fields.find("Type of Structure")) {
        if (const auto k = ir::kind_from_string(lower(f->value))) return *k;
    }
    if (const auto k = ir::find_kind_in_text(text)) return *k;
    if (fields.find("Number of Strands")) return ir::DrawingKind::Precast;
    if (fields.find("Steel Beam Cross-section")) return ir::DrawingKind::Steel;
    if (fields.find("Height of cross-section")) return ir::DrawingKind::RectangularConcrete;
    throw std::runtime_error("cannot determine the drawing kind; pass --kind");
}

ir::DrawingIR resolve_parsed(const frontend::ParsedDescription& parsed,
                             const geom::PrecastCatalog& catalog, ir::Unit unit,
                             ir::SaveTarget save) {
    if (const auto* rc = std::get_if<geom::RcSectionSpec>(&parsed.spec)) {
        return geom::resolve(*rc, unit, save);
    }
    if (const auto* steel = std::get_if<geom::SteelSpec>(&parsed.spec)) {
        return geom::resolve(*steel, unit, save);
    }
    return geom::resolve(std::get<geom::PrecastSpec>(parsed.spec), catalog, unit, save);
}

void emit_outputs(const Options& opt, const ir::DrawingIR& drawing,
                  const knowledge::KnowledgeBase& kb, const geom::PrecastCatalog& catalog) {
    const emit::TemplateLibrary templates(opt.templates);
    const auto entities = emit::ir_to_entities(drawing, templates, &catalog);
    write_file(opt.out_dir + "/ir.json", ir::serialize_ir(drawing));
    write_file(opt.out_dir + "/drawing.dxf", emit::emit_dxf(entities, drawing.unit));
    write_file(opt.out_dir + "/script.py.txt",
               emit::emit_script(drawing, kb.retrieve(drawing.kind).codegen_steps));
}

std::unique_ptr<pipeline::Provider> make_agent_provider(const Options& opt) {
    if (opt.provider.rfind("replay:", 0) == 0) {
        return std::make_unique<pipeline::ReplayProvider>(
            pipeline::ReplayProvider::load(opt.provider.substr(7)));
    }
    if (opt.provider == "live") {
        if (opt.base_url.empty()) {
            throw std::runtime_error("--provider live needs --base-url");
        }
        pipeline::ProviderConfig cfg;
        cfg.light_model = opt.model_light;
        cfg.strong_model = opt.model_strong;
        cfg.api_key_env = opt.api_key_env;
        return std::make_unique<pipeline::HttpProvider>(opt.base_url, cfg);
    }
    throw std::runtime_error("unsupported provider for this command: " + opt.provider);
}

int cmd_compile(const Options& opt, const std::string& description_file,
                const std::string& kind_flag) {
    try {
        const std::string text = read_file(description_file);
        const auto fields = frontend::parse_fields(text);
        ir::DrawingKind kind;
        if (!kind_flag.empty()) {
            const auto k = ir::kind_from_string(lower(kind_flag));
            if (!k) throw std::runtime_error("unknown kind: " + kind_flag);
            kind = *k;
        } else {
            kind = detect_kind(text, fields);
        }
        const auto parsed = frontend::fields_to_spec(fields, kind);
        const auto kb = knowledge::KnowledgeBase::load(opt.kb);
        const auto catalog = geom::PrecastCatalog::load(opt.catalog);
        const ir::Unit unit = parsed.unit.value_or(ir::Unit::Millimeter);
        const ir::DrawingIR drawing = resolve_parsed(parsed, catalog, unit, std::nullopt);
        emit_outputs(opt, drawing, kb, catalog);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "compile failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_agent(const Options& opt, const std::string& description_file) {
    try {
        const std::string description = read_file(description_file);
        const auto prompts = pipeline::PromptLibrary::load(opt.prompts);
        const auto kb = knowledge::KnowledgeBase::load(opt.kb);
        const auto catalog = geom::PrecastCatalog::load(opt.catalog);
        pipeline::PipelineContext ctx{&prompts, &kb, &catalog, opt.tolerance};
        auto provider = make_agent_provider(opt);
        const pipeline::PipelineRun run = pipeline::run_pipeline(description, *provider, ctx);
        write_file(opt.out_dir + "/run.json", pipeline::run_to_json(run));
        if (!run.ok || !run.final_ir) {
            std::cerr << "agent run failed: " << run.failure << "\n";
            return 2;
        }
        emit_outputs(opt, *run.final_ir, kb, catalog);
        if (run.verify && !run.verify->empty()) {
            std::cerr << run.verify->summary();
            return 2;
        }
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "agent failed: " << e.what() << "\n";
        return 2;
    }
}

int cmd_verify(const Options& opt, const std::string& ir_file,
               const std::string& description_file) {
    try {
        const ir::DrawingIR actual = ir::parse_ir(read_file(ir_file));
        const std::string text = read_file(description_file);
        const auto fields = frontend::parse_fields(text);
        const auto parsed = frontend::fields_to_spec(fields, actual.kind);
        const auto catalog = geom::PrecastCatalog::load(opt.catalog);
        const ir::DrawingIR expected =
            resolve_parsed(parsed, catalog, actual.unit, actual.save);
        const auto report = geom::verify_ir(actual, expected, opt.tolerance);
        std::cout << report.summary();
        return report.empty() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "verify failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_eval(const Options& opt, const std::string& corpus_dir) {
    try {
        const auto entries = eval::load_corpus(corpus_dir);
        if (entries.empty()) throw std::runtime_error("empty corpus: " + corpus_dir);
        const auto prompts = pipeline::PromptLibrary::load(opt.prompts);
        const auto kb = knowledge::KnowledgeBase::load(opt.kb);
        const auto catalog = geom::PrecastCatalog::load(opt.catalog);
        pipeline::PipelineContext ctx{&prompts, &kb, &catalog, opt.tolerance};

        eval::ProviderFactory factory;
        if (opt.provider == "oracle") {
            factory = [&](const eval::CorpusEntry& entry) -> std::unique_ptr<pipeline::Provider> {
                return std::make_unique<eval::OracleProvider>(entry, &catalog, &kb);
            };
        } else if (opt.provider.rfind("fault:", 0) == 0) {
            nlohmann::json schedule = nlohmann::json::parse(read_file(opt.provider.substr(6)));
            factory = [&, schedule](const eval::CorpusEntry& entry)
                -> std::unique_ptr<pipeline::Provider> {
                std::map<std::string, double> rates;
                const std::string kind = ir::kind_to_string(entry.kind);
                if (schedule.contains(kind)) {
                    for (const auto& [label, rate] : schedule.at(kind).items()) {
                        rates[label] = rate.get<double>();
                    }
                }
                auto oracle = std::make_unique<eval::OracleProvider>(entry, &catalog, &kb);
                return std::make_unique<pipeline::FaultProvider>(std::move(oracle),
                                                                 std::move(rates), opt.trials);
            };
        } else if (opt.provider.rfind("replay:", 0) == 0) {
            const std::string path = opt.provider.substr(7);
            factory = [path](const eval::CorpusEntry& entry)
                -> std::unique_ptr<pipeline::Provider> {
                std::string file = path;
                if (fs::is_directory(path)) file = path + "/" + entry.id + ".json";
                return std::make_unique<pipeline::ReplayProvider>(
                    pipeline::ReplayProvider::load(file));
            };
        } else {
            throw std::runtime_error("unsupported provider for eval: " + opt.provider);
        }

        const auto table = eval::evaluate(entries, opt.trials, factory, ctx);
        const std::string csv = table.to_csv();
        write_file(opt.out_dir + "/accuracy.csv", csv);
        std::cout << csv;
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "eval failed: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beam cross-section drawing pipeline"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--kb", opt.kb, "knowledge base JSON");
    app.add_option("--templates", opt.templates, "template drawing directory");
    app.add_option("--prompts", opt.prompts, "prompt template directory");
    app.add_option("--catalog", opt.catalog, "precast strand catalog JSON");
    app.add_option("--out-dir", opt.out_dir, "output directory");
    app.add_option("--tolerance", opt.tolerance, "verification tolerance")->check(CLI::PositiveNumber);
    app.add_option("--trials", opt.trials, "evaluation trials")->check(CLI::PositiveNumber);
    app.add_option("--jobs", opt.jobs, "parallel trial bound")->check(CLI::PositiveNumber);
    app.add_option("--provider", opt.provider,
                   "provider: live, replay:<path>, oracle, fault:<schedule>");
    app.add_option("--model-light", opt.model_light, "model for the simple steps");
    app.add_option("--model-strong", opt.model_strong, "model for the complex steps");
    app.add_option("--api-key-env", opt.api_key_env, "environment variable holding the API key");
    app.add_option("--base-url", opt.base_url, "chat-completions endpoint base URL");

    std::string description_file, ir_file, corpus_dir, kind_flag;

    auto* compile = app.add_subcommand("compile", "deterministic description -> drawing");
    compile->add_option("description", description_file, "bullet-list description file")
        ->required();
    compile->add_option("--kind", kind_flag, "drawing kind override");

    auto* agent = app.add_subcommand("agent", "run the six-step chain");
    agent->add_option("description", description_file, "natural-language description file")
        ->required();

    auto* verify = app.add_subcommand("verify", "check an IR against a description");
    verify->add_option("ir", ir_file, "IR JSON file")->required();
    verify->add_option("description", description_file, "bullet-list description file")
        ->required();

    auto* eval_cmd = app.add_subcommand("eval", "per-step accuracy over a corpus");
    eval_cmd->add_option("corpus", corpus_dir, "corpus directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (compile->parsed()) return cmd_compile(opt, description_file, kind_flag);
    if (agent->parsed()) return cmd_agent(opt, description_file);
    if (verify->parsed()) return cmd_verify(opt, ir_file, description_file);
    return cmd_eval(opt, corpus_dir);
}
