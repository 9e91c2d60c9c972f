#include "gnv/prompt_optimizer.hpp"

#include "gnv/errors.hpp"
#include "gnv/util.hpp"

#include <nlohmann/json.hpp>

#include <regex>

namespace gnv {

namespace {

using json = nlohmann::json;

std::string render(const std::map<std::string, std::string>& templates, const std::string& key,
                   const std::map<std::string, std::string>& values) {
    auto it = templates.find(key);
    if (it == templates.end()) throw ConfigError("missing role template: " + key);
    std::string out = it->second;
    for (const auto& [name, value] : values) {
        std::string placeholder = "{" + name + "}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

std::string chat_for_role(const BackendEndpoint& endpoint, std::string system_prompt,
                          std::string user_prompt) {
    ChatRequest req;
    req.system_prompt = std::move(system_prompt);
    req.user_prompt = std::move(user_prompt);
    return chat(endpoint, req);
}

json state_to_json(const PromptState& s) {
    json j{{"iteration", s.iteration},
           {"system_prompt", s.system_prompt},
           {"downstream_prompt", s.downstream_prompt}};
    if (s.candidate_system_prompt) j["candidate_system_prompt"] = *s.candidate_system_prompt;
    if (s.candidate_downstream_prompt) {
        j["candidate_downstream_prompt"] = *s.candidate_downstream_prompt;
    }
    if (s.criticism) j["criticism"] = *s.criticism;
    if (s.decision) j["decision"] = *s.decision;
    return j;
}

PromptState state_from_json(const json& j) {
    PromptState s;
    s.iteration = j.at("iteration").get<int>();
    s.system_prompt = j.at("system_prompt").get<std::string>();
    s.downstream_prompt = j.at("downstream_prompt").get<std::string>();
    if (j.contains("candidate_system_prompt")) {
        s.candidate_system_prompt = j.at("candidate_system_prompt").get<std::string>();
    }
    if (j.contains("candidate_downstream_prompt")) {
        s.candidate_downstream_prompt = j.at("candidate_downstream_prompt").get<std::string>();
    }
    if (j.contains("criticism")) s.criticism = j.at("criticism").get<std::string>();
    if (j.contains("decision")) s.decision = j.at("decision").get<bool>();
    return s;
}

}  // namespace

std::map<std::string, std::string> default_role_templates() {
    return {
        {"agent_user",
         "Generate one image-generation prompt for the category \"{category}\". "
         "Reply with the prompt text only."},
        {"evaluator_system",
         "You review prompts written for a text-to-image model that renders a single "
         "foreground object on a transparent background. Point out every weakness: "
         "extra objects, background descriptions, missing detail about status, color, "
         "style, mood, lighting, viewpoint, texture or time period, or excessive length. "
         "Reply with the criticism only."},
        {"evaluator_user",
         "Criticize this image-generation prompt:\n\n{downstream_prompt}"},
        {"tgd_system",
         "You improve system prompts for a prompt-writing assistant. Given the current "
         "system prompt and a criticism of the prompts it produces, rewrite the system "
         "prompt so the criticism no longer applies. Keep generated prompts under "
         "{token_budget} tokens. Reply with the new system prompt only."},
        {"tgd_user",
         "Current system prompt:\n{system_prompt}\n\nCriticism of its output:\n{criticism}\n\n"
         "Rewrite the system prompt."},
        {"validator_system",
         "You judge whether an image-generation prompt is good enough to adopt: it must "
         "describe exactly one subject, no background, with rich specific detail. "
         "End your reply with YES to adopt it or NO to reject it."},
        {"validator_user",
         "Should this prompt be adopted?\n\n{candidate}"},
    };
}

std::string generate_downstream_prompt(const std::string& system_prompt,
                                       const std::string& category,
                                       const OptimizerConfig& cfg) {
    if (trim(category).empty()) throw InvalidArgument("category must be nonempty");
    std::string user = render(cfg.role_templates, "agent_user", {{"category", category}});
    std::string reply = strip_quotes(chat_for_role(cfg.agent_endpoint, system_prompt, user));
    if (reply.empty()) throw EmptyReply("agent returned blank downstream prompt");
    return reply;
}

std::string evaluate_prompt(const std::string& downstream_prompt, const OptimizerConfig& cfg) {
    if (trim(downstream_prompt).empty()) throw InvalidArgument("downstream prompt must be nonempty");
    std::string system = render(cfg.role_templates, "evaluator_system", {});
    std::string user = render(cfg.role_templates, "evaluator_user",
                              {{"downstream_prompt", downstream_prompt}});
    std::string reply = trim(chat_for_role(cfg.evaluator_endpoint, system, user));
    if (reply.empty()) throw EmptyReply("evaluator returned blank criticism");
    return reply;
}

std::string tgd_step(const std::string& system_prompt, const std::string& criticism,
                     const OptimizerConfig& cfg) {
    if (trim(system_prompt).empty()) throw InvalidArgument("system prompt must be nonempty");
    if (trim(criticism).empty()) throw InvalidArgument("criticism must be nonempty");
    std::string system = render(cfg.role_templates, "tgd_system",
                                {{"token_budget", std::to_string(cfg.token_budget)}});
    std::string user = render(cfg.role_templates, "tgd_user",
                              {{"system_prompt", system_prompt}, {"criticism", criticism}});
    std::string reply = strip_quotes(chat_for_role(cfg.evaluator_endpoint, system, user));
    if (reply.empty()) throw EmptyReply("rewrite returned blank system prompt");
    if (reply == trim(system_prompt)) throw NoChange("rewrite identical to input");
    return reply;
}

bool validate_prompt(const std::string& candidate_downstream_prompt, const OptimizerConfig& cfg) {
    if (trim(candidate_downstream_prompt).empty()) {
        throw InvalidArgument("candidate prompt must be nonempty");
    }
    std::string system = render(cfg.role_templates, "validator_system", {});
    std::string user = render(cfg.role_templates, "validator_user",
                              {{"candidate", candidate_downstream_prompt}});
    std::string reply = chat_for_role(cfg.validator_endpoint, system, user);

    static const std::regex token(R"([A-Za-z]+)");
    std::optional<bool> verdict;
    for (auto it = std::sregex_iterator(reply.begin(), reply.end(), token);
         it != std::sregex_iterator(); ++it) {
        std::string word = to_lower(it->str());
        if (word == "yes") verdict = true;
        if (word == "no") verdict = false;
    }
    if (!verdict) throw Unparseable("validator reply has no YES/NO token: " + reply);
    return *verdict;
}

OptimizationTrace optimize_system_prompt(const std::string& initial_system_prompt,
                                         const std::string& category,
                                         const OptimizerConfig& cfg) {
    if (trim(initial_system_prompt).empty()) {
        throw InvalidArgument("initial system prompt must be nonempty");
    }
    if (cfg.max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");

    OptimizationTrace trace;
    std::string current = initial_system_prompt;
    std::optional<std::string> last_candidate;

    for (int i = 0; i < cfg.max_iterations; ++i) {
        PromptState state;
        state.iteration = i;
        state.system_prompt = current;
        state.downstream_prompt = generate_downstream_prompt(current, category, cfg);
        state.criticism = evaluate_prompt(state.downstream_prompt, cfg);

        std::string candidate;
        try {
            candidate = tgd_step(current, *state.criticism, cfg);
        } catch (const NoChange&) {
            // failed iteration, not fatal: keep the current prompt and move on
            trace.states.push_back(std::move(state));
            continue;
        }
        state.candidate_system_prompt = candidate;
        state.candidate_downstream_prompt = generate_downstream_prompt(candidate, category, cfg);
        bool decision = validate_prompt(*state.candidate_downstream_prompt, cfg);
        state.decision = decision;
        trace.states.push_back(std::move(state));

        last_candidate = candidate;
        if (decision) {
            trace.accepted = true;
            break;
        }
        current = candidate;
    }

    trace.iterations_used = static_cast<int>(trace.states.size());
    trace.final_system_prompt = last_candidate.value_or(current);
    return trace;
}

std::filesystem::path write_trace(const OptimizationTrace& trace, const std::string& agent_role,
                                  const std::filesystem::path& dir) {
    json j{{"final_system_prompt", trace.final_system_prompt},
           {"accepted", trace.accepted},
           {"iterations_used", trace.iterations_used},
           {"states", json::array()}};
    for (const auto& state : trace.states) {
        j["states"].push_back(state_to_json(state));
    }
    std::filesystem::path path =
        dir / ("trace_" + agent_role + "_" + timestamp_utc_compact() + ".json");
    write_text_file(path, j.dump(2) + "\n");
    return path;
}

OptimizationTrace read_trace(const std::filesystem::path& path) {
    json j = json::parse(read_text_file(path));
    OptimizationTrace trace;
    trace.final_system_prompt = j.at("final_system_prompt").get<std::string>();
    trace.accepted = j.at("accepted").get<bool>();
    trace.iterations_used = j.at("iterations_used").get<int>();
    for (const auto& s : j.at("states")) {
        trace.states.push_back(state_from_json(s));
    }
    return trace;
}

}  // namespace gnv
