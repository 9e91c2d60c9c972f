#include <doctest.h>

#include "gnv/errors.hpp"
#include "gnv/mock_backend.hpp"
#include "gnv/prompt_optimizer.hpp"
#include "gnv/util.hpp"
#include "support.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <regex>

using namespace gnv;
using namespace gnv_test;
using nlohmann::json;

namespace {

OptimizerConfig config_with(const BackendEndpoint& agent, const BackendEndpoint& evaluator,
                            const BackendEndpoint& validator) {
    OptimizerConfig cfg;
    cfg.agent_endpoint = agent;
    cfg.evaluator_endpoint = evaluator;
    cfg.validator_endpoint = validator;
    cfg.role_templates = default_role_templates();
    return cfg;
}

OptimizerConfig single_endpoint_config(const BackendEndpoint& e) {
    return config_with(e, e, e);
}

json last_log_entry(const std::filesystem::path& log) {
    std::ifstream in(log);
    std::string line, last;
    while (std::getline(in, line)) {
        if (!line.empty()) last = line;
    }
    return json::parse(last);
}

// Independent check for the YES/NO rule: scan from the end of the text for
// the first standalone token.
bool yes_no_oracle(const std::string& reply) {
    static const std::regex token(R"(\b(yes|no)\b)", std::regex::icase);
    auto begin = std::sregex_iterator(reply.begin(), reply.end(), token);
    std::string last;
    for (auto it = begin; it != std::sregex_iterator(); ++it) last = it->str();
    REQUIRE(!last.empty());
    return to_lower(last) == "yes";
}

}  // namespace

TEST_CASE("generate_downstream_prompt returns the scripted optimized prompt verbatim") {
    TempDir dir;
    std::string airplane = read_text_file(std::filesystem::path(GNV_ASSETS_DIR) / "golden" /
                                          "optimized_prompt_airplane.txt");
    auto script = write_script(dir / "agent.json",
                               json{{"replies", json::array({airplane})}});
    auto cfg = single_endpoint_config(mock_endpoint(BackendRole::MockChat, script));
    CHECK(generate_downstream_prompt("sys", "airplane", cfg) == trim(airplane));
}

TEST_CASE("generate_downstream_prompt strips quotes and rejects blanks") {
    TempDir dir;
    auto script = write_script(dir / "agent.json",
                               json{{"replies", json::array({"  \"x\"  ", ""})}});
    auto cfg = single_endpoint_config(mock_endpoint(BackendRole::MockChat, script));
    reset_mock_registry();
    CHECK(generate_downstream_prompt("sys", "cat", cfg) == "x");
    CHECK_THROWS_AS(generate_downstream_prompt("sys", "cat", cfg), EmptyReply);
    CHECK_THROWS_AS(generate_downstream_prompt("sys", " ", cfg), InvalidArgument);
}

TEST_CASE("evaluate_prompt passes criticism through untouched") {
    TempDir dir;
    std::string criticism = "prompt lacks lighting details and mentions the background twice";
    auto script = write_script(dir / "eval.json",
                               json{{"replies", json::array({criticism, ""})}});
    auto cfg = single_endpoint_config(mock_endpoint(BackendRole::MockChat, script));
    reset_mock_registry();
    CHECK(evaluate_prompt("a prompt", cfg) == criticism);
    CHECK_THROWS_AS(evaluate_prompt("a prompt", cfg), EmptyReply);
}

TEST_CASE("tgd_step rewrites, embeds both inputs, and detects no-ops") {
    TempDir dir;
    auto script = write_script(dir / "tgd.json",
                               json{{"replies", json::array({"v2", "v1"})},
                                    {"log", "tgd.jsonl"}});
    auto cfg = single_endpoint_config(mock_endpoint(BackendRole::MockChat, script));
    reset_mock_registry();

    CHECK(tgd_step("v1", "too vague", cfg) == "v2");

    json entry = last_log_entry(dir / "tgd.jsonl");
    std::string sent = entry.at("user_prompt").get<std::string>();
    CHECK(sent.find("v1") != std::string::npos);
    CHECK(sent.find("too vague") != std::string::npos);

    CHECK_THROWS_AS(tgd_step("v1", "still vague", cfg), NoChange);
}

TEST_CASE("validate_prompt keys on the last YES/NO token") {
    TempDir dir;
    auto replies = json::array({"Analysis of the prompt follows. Decision: YES",
                                "NO",
                                "yes, but NO",
                                "it said yes and nothing else matters",
                                "nostalgia and yesterday have no tokens... unclear"});
    auto script = write_script(dir / "validator.json", json{{"replies", replies}});
    auto cfg = single_endpoint_config(mock_endpoint(BackendRole::MockChat, script));
    reset_mock_registry();

    CHECK(validate_prompt("p", cfg) == true);
    CHECK(validate_prompt("p", cfg) == false);
    CHECK(validate_prompt("p", cfg) == false);  // last occurrence wins
    CHECK(validate_prompt("p", cfg) == true);
    CHECK_THROWS_AS(validate_prompt("p", cfg), Unparseable);

    CHECK(yes_no_oracle("Analysis of the prompt follows. Decision: YES") == true);
    CHECK(yes_no_oracle("yes, but NO") == false);
}

TEST_CASE("optimize loop: validator approval on iteration 1 stops immediately") {
    TempDir dir;
    auto agent = write_script(dir / "agent.json",
                              json{{"replies", json::array({"pld-0", "pld-0-candidate"})}});
    auto evaluator = write_script(dir / "eval.json",
                                  json{{"replies", json::array({"crit-0", "sys-1"})}});
    auto validator = write_script(dir / "val.json", json{{"replies", json::array({"YES"})}});
    auto cfg = config_with(mock_endpoint(BackendRole::MockChat, agent),
                           mock_endpoint(BackendRole::MockChat, evaluator),
                           mock_endpoint(BackendRole::MockChat, validator));
    reset_mock_registry();

    OptimizationTrace trace = optimize_system_prompt("sys-0", "cat", cfg);
    CHECK(trace.accepted);
    CHECK(trace.iterations_used == 1);
    REQUIRE(trace.states.size() == 1);
    const PromptState& s = trace.states[0];
    CHECK(s.system_prompt == "sys-0");
    CHECK(s.downstream_prompt == "pld-0");
    CHECK(s.criticism == "crit-0");
    CHECK(s.candidate_system_prompt == "sys-1");
    CHECK(s.candidate_downstream_prompt == "pld-0-candidate");
    CHECK(s.decision == true);
    CHECK(trace.final_system_prompt == "sys-1");
}

TEST_CASE("optimize loop: always-reject exhausts exactly max_iterations") {
    TempDir dir;
    auto agent = write_script(dir / "agent.json", json{{"replies", json::array({"pld"})}});
    // alternating criticism / rewrite replies; rewrites must keep changing
    auto evaluator = write_script(
        dir / "eval.json",
        json{{"replies", json::array({"crit", "sys-1", "crit", "sys-2", "crit", "sys-3",
                                      "crit", "sys-4", "crit", "sys-5"})}});
    auto validator = write_script(dir / "val.json", json{{"replies", json::array({"NO"})}});
    auto cfg = config_with(mock_endpoint(BackendRole::MockChat, agent),
                           mock_endpoint(BackendRole::MockChat, evaluator),
                           mock_endpoint(BackendRole::MockChat, validator));
    cfg.max_iterations = 5;
    reset_mock_registry();

    OptimizationTrace trace = optimize_system_prompt("sys-0", "cat", cfg);
    CHECK_FALSE(trace.accepted);
    CHECK(trace.iterations_used == 5);
    CHECK(trace.states.size() == 5);
    CHECK(trace.final_system_prompt == "sys-5");

    // monotone state: the next system prompt is the rejected candidate
    for (std::size_t k = 0; k + 1 < trace.states.size(); ++k) {
        REQUIRE(trace.states[k].decision == false);
        CHECK(trace.states[k + 1].system_prompt == *trace.states[k].candidate_system_prompt);
    }
}

TEST_CASE("optimize loop: approval on iteration 3 and replay-identical traces") {
    TempDir dir;
    auto agent = write_script(dir / "agent.json", json{{"replies", json::array({"pld"})}});
    auto evaluator = write_script(
        dir / "eval.json",
        json{{"replies",
              json::array({"crit", "sys-1", "crit", "sys-2", "crit", "sys-3"})}});
    auto validator = write_script(dir / "val.json",
                                  json{{"replies", json::array({"NO", "NO", "YES"})}});
    auto cfg = config_with(mock_endpoint(BackendRole::MockChat, agent),
                           mock_endpoint(BackendRole::MockChat, evaluator),
                           mock_endpoint(BackendRole::MockChat, validator));
    cfg.max_iterations = 5;

    auto run_once = [&] {
        reset_mock_registry();
        return optimize_system_prompt("sys-0", "cat", cfg);
    };
    OptimizationTrace first = run_once();
    CHECK(first.accepted);
    CHECK(first.iterations_used == 3);
    CHECK(first.final_system_prompt == "sys-3");
    CHECK(first.states.back().decision == true);

    // hand-replayed expectation of the scripted exchange
    CHECK(first.states[0].system_prompt == "sys-0");
    CHECK(first.states[1].system_prompt == "sys-1");
    CHECK(first.states[2].system_prompt == "sys-2");
    CHECK(*first.states[2].candidate_system_prompt == "sys-3");

    OptimizationTrace second = run_once();
    REQUIRE(second.states.size() == first.states.size());
    for (std::size_t i = 0; i < first.states.size(); ++i) {
        CHECK(first.states[i].system_prompt == second.states[i].system_prompt);
        CHECK(first.states[i].downstream_prompt == second.states[i].downstream_prompt);
        CHECK(first.states[i].criticism == second.states[i].criticism);
        CHECK(first.states[i].candidate_system_prompt == second.states[i].candidate_system_prompt);
        CHECK(first.states[i].decision == second.states[i].decision);
    }

    // acceptance is terminal: nothing follows a decision=true state
    for (std::size_t i = 0; i + 1 < first.states.size(); ++i) {
        CHECK(first.states[i].decision != true);
    }
}

TEST_CASE("a NoChange rewrite is a failed iteration, not a fatal error") {
    TempDir dir;
    auto agent = write_script(dir / "agent.json", json{{"replies", json::array({"pld"})}});
    auto evaluator = write_script(dir / "eval.json",
                                  json{{"replies", json::array({"crit", "sys-0",  // echo
                                                                "crit", "sys-1"})}});
    auto validator = write_script(dir / "val.json", json{{"replies", json::array({"YES"})}});
    auto cfg = config_with(mock_endpoint(BackendRole::MockChat, agent),
                           mock_endpoint(BackendRole::MockChat, evaluator),
                           mock_endpoint(BackendRole::MockChat, validator));
    cfg.max_iterations = 3;
    reset_mock_registry();

    OptimizationTrace trace = optimize_system_prompt("sys-0", "cat", cfg);
    CHECK(trace.accepted);
    CHECK(trace.iterations_used == 2);
    CHECK_FALSE(trace.states[0].decision.has_value());
    CHECK_FALSE(trace.states[0].candidate_system_prompt.has_value());
    CHECK(trace.states[1].decision == true);
}

TEST_CASE("trace files serialize and read back") {
    TempDir dir;
    OptimizationTrace trace;
    trace.accepted = true;
    trace.iterations_used = 1;
    trace.final_system_prompt = "final";
    PromptState s;
    s.iteration = 0;
    s.system_prompt = "sys";
    s.downstream_prompt = "pld";
    s.criticism = "crit";
    s.candidate_system_prompt = "cand";
    s.candidate_downstream_prompt = "cand-pld";
    s.decision = true;
    trace.states.push_back(s);

    auto path = write_trace(trace, "ld_agent", dir.path());
    CHECK(path.filename().string().rfind("trace_ld_agent_", 0) == 0);
    OptimizationTrace back = read_trace(path);
    CHECK(back.accepted == trace.accepted);
    CHECK(back.final_system_prompt == "final");
    REQUIRE(back.states.size() == 1);
    CHECK(back.states[0].candidate_downstream_prompt == "cand-pld");
    CHECK(back.states[0].decision == true);
}
