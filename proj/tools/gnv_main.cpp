#include "gnv/config.hpp"
#include "gnv/dataset.hpp"
#include "gnv/errors.hpp"
#include "gnv/pipeline.hpp"
#include "gnv/util.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;

struct CliOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool json_progress = false;
    int count = -1;
};

gnv::RunConfig load_effective_config(const CliOptions& opts) {
    std::string path = opts.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("GNV_CONFIG")) path = env;
    }
    if (path.empty()) {
        throw gnv::ConfigError("no config given; pass --config or set GNV_CONFIG");
    }
    gnv::RunConfig config = gnv::load_config_file(path);
    if (opts.seed) config.seed = *opts.seed;
    if (!opts.out_dir.empty()) config.dataset.out_dir = opts.out_dir;
    return config;
}

gnv::ProgressFn make_progress(const CliOptions& opts) {
    bool as_json = opts.json_progress;
    return [as_json](const gnv::ProgressEvent& event) {
        if (as_json) {
            json j{{"stage", event.stage},
                   {"item", event.item},
                   {"status", event.status},
                   {"message", event.message}};
            std::cout << j.dump() << "\n";
        } else {
            std::cout << "[" << event.stage << "] " << event.item << ": " << event.status;
            if (!event.message.empty()) std::cout << " (" << event.message << ")";
            std::cout << "\n";
        }
        std::cout.flush();
    };
}

void print_counts(const std::string& stage, const gnv::StageCounts& counts) {
    std::cout << stage << ": " << counts.done << " done, " << counts.skipped << " skipped, "
              << counts.failed << " failed\n";
}

// 0 success, 1 config/user error, 2 backend failure
int run_guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const gnv::TransportError& ex) {
        std::cerr << "backend error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::AuthError& ex) {
        std::cerr << "backend auth error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::ProtocolError& ex) {
        std::cerr << "backend protocol error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::ImageTooLarge& ex) {
        std::cerr << "backend error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::ShapeMismatch& ex) {
        std::cerr << "backend error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::EmptyReply& ex) {
        std::cerr << "backend error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::Unparseable& ex) {
        std::cerr << "backend error: " << ex.what() << "\n";
        return 2;
    } catch (const gnv::Error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agentic synthetic-data pipeline: optimize prompts, generate and "
                 "validate single-object instances, composite scenes, emit a COCO dataset"};
    app.require_subcommand(1);

    CliOptions opts;
    app.add_option("--config", opts.config_path, "path to the JSON run config");
    app.add_option("--seed", opts.seed, "override the config seed");
    app.add_option("--out", opts.out_dir, "override the run/output directory");
    app.add_flag("--json", opts.json_progress, "one JSON progress object per line");

    auto* cmd_optimize = app.add_subcommand("optimize-prompts",
                                            "optimize the agent system prompts");
    auto* cmd_generate = app.add_subcommand("generate", "generate foreground instances "
                                                        "and backgrounds");
    cmd_generate->add_option("--count", opts.count, "instances to generate "
                                                    "(default: dataset.size x mean placements)");
    auto* cmd_validate = app.add_subcommand("validate", "run the vision validation agent");
    auto* cmd_compose = app.add_subcommand("compose", "composite validated instances "
                                                      "onto backgrounds");
    auto* cmd_emit = app.add_subcommand("emit", "write the COCO dataset, stats and manifest");
    auto* cmd_run = app.add_subcommand("run", "all stages in order");
    cmd_run->add_option("--count", opts.count, "instances to generate");
    auto* cmd_stats = app.add_subcommand("stats", "print pipeline statistics for a run");
    auto* cmd_check = app.add_subcommand("check", "validate an emitted dataset");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    gnv::ProgressFn progress = make_progress(opts);

    if (cmd_optimize->parsed()) {
        return run_guarded([&] {
            auto counts = gnv::run_optimize_prompts(load_effective_config(opts), progress);
            print_counts("prompts", counts);
        });
    }
    if (cmd_generate->parsed()) {
        return run_guarded([&] {
            auto counts = gnv::run_generate(load_effective_config(opts), opts.count, progress);
            print_counts("generate", counts);
        });
    }
    if (cmd_validate->parsed()) {
        return run_guarded([&] {
            auto counts = gnv::run_validate(load_effective_config(opts), progress);
            print_counts("validate", counts);
        });
    }
    if (cmd_compose->parsed()) {
        return run_guarded([&] {
            auto counts = gnv::run_compose(load_effective_config(opts), progress);
            print_counts("compose", counts);
        });
    }
    if (cmd_emit->parsed()) {
        return run_guarded([&] {
            auto counts = gnv::run_emit(load_effective_config(opts), progress);
            print_counts("emit", counts);
        });
    }
    if (cmd_run->parsed()) {
        return run_guarded([&] {
            gnv::run_all(load_effective_config(opts), opts.count, progress);
            std::cout << "run complete\n";
        });
    }
    if (cmd_stats->parsed()) {
        return run_guarded([&] {
            std::filesystem::path dir = opts.out_dir;
            if (dir.empty()) dir = load_effective_config(opts).dataset.out_dir;
            std::cout << gnv::stats_to_json_text(gnv::compute_stats(dir));
        });
    }
    if (cmd_check->parsed()) {
        std::filesystem::path dir = opts.out_dir;
        int code = run_guarded([&] {
            if (dir.empty()) dir = load_effective_config(opts).dataset.out_dir;
        });
        if (code != 0) return code;
        return run_guarded([&] {
            auto violations = gnv::validate_dataset(dir);
            for (const auto& v : violations) std::cout << "violation: " << v << "\n";
            std::cout << (violations.empty() ? "dataset valid\n" : "dataset INVALID\n");
            if (!violations.empty()) throw gnv::ConsistencyError("dataset has violations");
        });
    }
    return 1;
}
