#pragma once

#include "morrow_cli/config.hpp"

#include <iosfwd>
#include <string>

namespace morrow::cli {

enum ExitCode { exit_ok = 0, exit_usage = 1, exit_numerical = 2, exit_verification = 3 };

struct RunRequest {
    std::string command = "run";
    std::string config_path;
    std::string config_text;
};

struct RunOutcome {
    int exit_code = exit_ok;
    std::string failed_stage;
    std::string message;
};

// Adds the prerequisites of every requested stage and sorts into canonical order.
std::vector<std::string> resolve_stages(const ExperimentConfig& cfg);

// Runs the resolved stages, writing artifacts and manifest.json under cfg.out.
// Artifacts of completed stages persist when a later stage fails.
RunOutcome run_pipeline(const ExperimentConfig& cfg, const RunRequest& req, std::ostream& log);

} // namespace morrow::cli
