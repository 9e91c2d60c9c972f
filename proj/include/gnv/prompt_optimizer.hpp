#pragma once

#include "gnv/backend.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace gnv {

// One loop iteration of the system-prompt optimization: the current prompt,
// its generated downstream prompt, the rewrite candidate pair, the
// evaluator's criticism and the validator's decision.
struct PromptState {
    int iteration = 0;
    std::string system_prompt;
    std::optional<std::string> candidate_system_prompt;
    std::string downstream_prompt;
    std::optional<std::string> candidate_downstream_prompt;
    std::optional<std::string> criticism;
    std::optional<bool> decision;
};

struct OptimizerConfig {
    int max_iterations = 5;
    int token_budget = 75;
    BackendEndpoint agent_endpoint;
    BackendEndpoint evaluator_endpoint;
    BackendEndpoint validator_endpoint;
    // Keys: agent_user, evaluator_system, evaluator_user, tgd_system,
    // tgd_user, validator_system, validator_user. Placeholders in braces.
    std::map<std::string, std::string> role_templates;
};

// Fills any template the caller left out.
std::map<std::string, std::string> default_role_templates();

struct OptimizationTrace {
    std::vector<PromptState> states;
    std::string final_system_prompt;
    bool accepted = false;
    int iterations_used = 0;
};

// Agent reply for one category, trimmed of surrounding whitespace/quotes.
std::string generate_downstream_prompt(const std::string& system_prompt,
                                       const std::string& category,
                                       const OptimizerConfig& cfg);

// Criticism text; opaque to the caller.
std::string evaluate_prompt(const std::string& downstream_prompt, const OptimizerConfig& cfg);

// Textual-gradient rewrite of the system prompt. NoChange when the model
// echoes the input back.
std::string tgd_step(const std::string& system_prompt, const std::string& criticism,
                     const OptimizerConfig& cfg);

// True iff the validator's reply ends in a YES (last YES/NO token wins,
// case-insensitive). Unparseable when neither token appears.
bool validate_prompt(const std::string& candidate_downstream_prompt, const OptimizerConfig& cfg);

// Runs the optimization loop: generate, criticize, rewrite, regenerate,
// validate; stops on acceptance or after max_iterations.
OptimizationTrace optimize_system_prompt(const std::string& initial_system_prompt,
                                         const std::string& category,
                                         const OptimizerConfig& cfg);

// trace_<agent-role>_<timestamp>.json under dir; returns the path written.
std::filesystem::path write_trace(const OptimizationTrace& trace, const std::string& agent_role,
                                  const std::filesystem::path& dir);
OptimizationTrace read_trace(const std::filesystem::path& path);

}  // namespace gnv
