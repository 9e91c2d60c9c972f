#pragma once

#include "gnv/config.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

namespace gnv {

// One machine-parseable progress line.
struct ProgressEvent {
    std::string stage;
    std::string item;
    std::string status;  // ok | skipped | failed | info
    std::string message;
};

using ProgressFn = std::function<void(const ProgressEvent&)>;

struct StageCounts {
    std::size_t done = 0;
    std::size_t skipped = 0;
    std::size_t failed = 0;
};

// Persisted run identity; a run directory only resumes under the same
// config hash.
struct RunState {
    std::string config_hash;
};

RunState ensure_run_state(const std::filesystem::path& run_dir, const std::string& hash);

// Stage entry points. Outputs are append-only: items that already exist on
// disk are skipped, so re-running a completed stage is a no-op.
StageCounts run_optimize_prompts(const RunConfig& config, const ProgressFn& progress);
StageCounts run_generate(const RunConfig& config, int count, const ProgressFn& progress);
StageCounts run_validate(const RunConfig& config, const ProgressFn& progress);
StageCounts run_compose(const RunConfig& config, const ProgressFn& progress);
StageCounts run_emit(const RunConfig& config, const ProgressFn& progress);

// All five stages in order; count < 0 derives the instance budget from
// dataset.size and the placement policy.
void run_all(const RunConfig& config, int count, const ProgressFn& progress);

// dataset.size x mean(instances_per_image), rounded.
int default_instance_count(const RunConfig& config);

}  // namespace gnv
