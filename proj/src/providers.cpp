#include "sdgen/providers.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <sstream>

#include "json.hpp"

// httplib pulls in system networking headers; keep it out of providers.hpp.
#include "httplib.h"

namespace sdgen::pipeline {

namespace {

using nlohmann::json;

std::string format_number(double v) {
    v = ir::round4(v);
    std::ostringstream out;
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        out << static_cast<long long>(v);
    } else {
        out << v;
    }
    return out.str();
}

}  // namespace

ReplayProvider ReplayProvider::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ProviderError("cannot open replay transcript: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ProviderError("replay transcript " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_array()) throw ProviderError("replay transcript must be a JSON list");
    std::vector<ReplayEntry> entries;
    for (const auto& item : j) {
        ReplayEntry e;
        e.ref.step = item.at("step").get<int>();
        e.ref.sub_step = item.value("sub_step", 0);
        e.prompt_hash = item.value("prompt_hash", std::string{});
        e.completion = item.at("completion").get<std::string>();
        for (const auto& call : item.value("tool_calls", json::array())) {
            ToolCall c;
            c.name = call.at("name").get<std::string>();
            c.args = call.at("args").get<std::vector<double>>();
            c.result = call.at("result").get<double>();
            e.tool_calls.push_back(std::move(c));
        }
        entries.push_back(std::move(e));
    }
    return ReplayProvider(std::move(entries));
}

ReplayProvider::ReplayProvider(std::vector<ReplayEntry> entries)
    : entries_(std::move(entries)), consumed_(entries_.size(), false) {}

ProviderResult ReplayProvider::complete(const StepRef& ref, const std::string& prompt,
                                        ModelRole /*role*/, ToolRegistry* tools) {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (consumed_[i] || !(entries_[i].ref == ref)) continue;
        consumed_[i] = true;
        const ReplayEntry& e = entries_[i];
        if (!e.prompt_hash.empty() && e.prompt_hash != fnv1a_hex(prompt)) {
            throw ProviderError("replay prompt mismatch at step " + ref.label() + " (expected " +
                                e.prompt_hash + ", got " + fnv1a_hex(prompt) + ")");
        }
        if (tools) {
            for (const auto& call : e.tool_calls) tools->call(call.name, call.args);
        }
        return {e.completion, e.tool_calls};
    }
    throw ProviderError("no replay entry for step " + ref.label());
}

void ReplayProvider::begin_trial(int /*trial*/) {
    consumed_.assign(entries_.size(), false);
}

HttpProvider::HttpProvider(std::string base_url, ProviderConfig config)
    : base_url_(std::move(base_url)), config_(std::move(config)) {}

ProviderResult HttpProvider::complete(const StepRef& ref, const std::string& prompt,
                                      ModelRole role, ToolRegistry* tools) {
    httplib::Client client(base_url_);
    client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
    std::string api_key;
    if (!config_.api_key_env.empty()) {
        if (const char* v = std::getenv(config_.api_key_env.c_str())) api_key = v;
    }

    json messages = json::array();
    messages.push_back({{"role", "user"}, {"content", prompt}});

    static const std::regex tool_re(R"(<tool>\s*(\w+)\s*\(([^)]*)\)\s*</tool>)");
    ProviderResult result;
    for (int round = 0; round < 8; ++round) {
        json body = {
            {"model", role == ModelRole::Light ? config_.light_model : config_.strong_model},
            {"messages", messages},
            {"temperature", config_.temperature},
        };
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
        httplib::Result res;
        for (int attempt = 0; attempt <= config_.retries; ++attempt) {
            res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
            if (res && res->status == 200) break;
        }
        if (!res) {
            throw ProviderError("request failed at step " + ref.label() + ": " +
                                httplib::to_string(res.error()));
        }
        if (res->status != 200) {
            throw ProviderError("request failed at step " + ref.label() + ": HTTP " +
                                std::to_string(res->status));
        }
        std::string content;
        try {
            content = json::parse(res->body)
                          .at("choices")
                          .at(0)
                          .at("message")
                          .at("content")
                          .get<std::string>();
        } catch (const json::exception& e) {
            throw ProviderError("malformed completion response: " + std::string(e.what()));
        }
        if (!result.completion.empty()) result.completion += "\n";
        result.completion += content;

        std::smatch m;
        if (!tools || !std::regex_search(content, m, tool_re)) break;
        std::vector<double> args;
        std::istringstream arg_in(m[2]);
        std::string piece;
        while (std::getline(arg_in, piece, ',')) {
            try {
                args.push_back(std::stod(piece));
            } catch (const std::exception&) {
                throw ProviderError("bad tool argument: " + piece);
            }
        }
        const double value = tools->call(m[1], args);
        messages.push_back({{"role", "assistant"}, {"content", content}});
        messages.push_back({{"role", "user"}, {"content", "Observation: " + format_number(value)}});
    }
    if (tools) result.tool_calls = tools->calls();
    return result;
}

FaultProvider::FaultProvider(std::unique_ptr<Provider> inner, std::map<std::string, double> rates,
                             int trials)
    : inner_(std::move(inner)), rates_(std::move(rates)), trials_(trials < 1 ? 1 : trials) {}

bool FaultProvider::scheduled_failure(double rate, int trial, int trials) {
    if (trials < 1) return false;
    const long long failures = std::llround((1.0 - rate) * trials);
    if (failures <= 0) return false;
    const long long t = trial % trials;
    return ((t + 1) * failures) / trials > (t * failures) / trials;
}

std::string FaultProvider::corrupt(const std::string& completion) {
    static const std::string kOpen = "<result>";
    static const std::string kClose = "</result>";
    const auto open = completion.rfind(kOpen);
    if (open == std::string::npos) return completion + "\nxx-corrupted";
    const auto begin = open + kOpen.size();
    const auto close = completion.find(kClose, begin);
    if (close == std::string::npos) return completion + "\nxx-corrupted";
    std::string content = completion.substr(begin, close - begin);

    static const std::regex number_re(R"(-?[0-9]+(\.[0-9]+)?)");
    std::smatch m;
    if (std::regex_search(content, m, number_re)) {
        const double bumped = std::stod(m.str()) + 1.0;
        content = content.substr(0, m.position(0)) + format_number(bumped) +
                  content.substr(m.position(0) + m.length(0));
    } else {
        content += "\nxx-corrupted\n";
    }
    return completion.substr(0, begin) + content + completion.substr(close);
}

ProviderResult FaultProvider::complete(const StepRef& ref, const std::string& prompt,
                                       ModelRole role, ToolRegistry* tools) {
    ProviderResult result = inner_->complete(ref, prompt, role, tools);
    const auto it = rates_.find(ref.label());
    if (it != rates_.end() && scheduled_failure(it->second, trial_, trials_)) {
        result.completion = corrupt(result.completion);
    }
    return result;
}

void FaultProvider::begin_trial(int trial) {
    trial_ = trial;
    inner_->begin_trial(trial);
}

}  // namespace sdgen::pipeline
