#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdgen/pipeline.hpp"

namespace sdgen::pipeline {

struct ReplayEntry {
    StepRef ref;
    std::string prompt_hash;  // fnv1a_hex of the rendered prompt; empty = unchecked
    std::string completion;
    std::vector<ToolCall> tool_calls;
};

/// Returns recorded completions in file order, matched by step label.
class ReplayProvider : public Provider {
public:
    static ReplayProvider load(const std::string& path);
    explicit ReplayProvider(std::vector<ReplayEntry> entries);

    ProviderResult complete(const StepRef& ref, const std::string& prompt, ModelRole role,
                            ToolRegistry* tools) override;
    void begin_trial(int trial) override;

private:
    std::vector<ReplayEntry> entries_;
    std::vector<bool> consumed_;
};

/// Chat-completions client. The model may request a calculation by emitting
/// <tool>Name(a, b)</tool>; the observation is appended and the request rerun.
class HttpProvider : public Provider {
public:
    HttpProvider(std::string base_url, ProviderConfig config);

    ProviderResult complete(const StepRef& ref, const std::string& prompt, ModelRole role,
                            ToolRegistry* tools) override;

private:
    std::string base_url_;
    ProviderConfig config_;
};

/// Wraps another provider and corrupts the result block of scheduled trials:
/// the first number is bumped by one, or a marker line is appended when the
/// block has no numbers. The per-step failure counts are spread evenly so a
/// rate r over N trials yields exactly round((1-r)*N) corrupted trials.
class FaultProvider : public Provider {
public:
    FaultProvider(std::unique_ptr<Provider> inner, std::map<std::string, double> rates,
                  int trials);

    ProviderResult complete(const StepRef& ref, const std::string& prompt, ModelRole role,
                            ToolRegistry* tools) override;
    void begin_trial(int trial) override;

    static bool scheduled_failure(double rate, int trial, int trials);
    static std::string corrupt(const std::string& completion);

private:
    std::unique_ptr<Provider> inner_;
    std::map<std::string, double> rates_;  // step label -> success rate
    int trials_ = 1;
    int trial_ = 0;
};

}  // namespace sdgen::pipeline
