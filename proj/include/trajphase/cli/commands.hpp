#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "trajphase/cli/config.hpp"

namespace trajphase::cli {

struct CommandOptions {
    std::optional<std::uint64_t> seed;  // overrides run.seed
    std::optional<int> steps;           // overrides run.steps
};

/// One output file: suffix "" is the primary output (--out), others are
/// appended to the --out path.
struct OutputFile {
    std::string suffix;
    std::string content;
};

struct CommandResult {
    int exit_code = 0;  // 0 success, 1 numeric failure
    std::vector<OutputFile> files;
    std::vector<std::string> warnings;
    std::string message;  // human-readable summary for the terminal
};

CommandResult run_evolve(const ScenarioConfig& cfg, const CommandOptions& opts);
CommandResult run_nojump_phase(const ScenarioConfig& cfg, const CommandOptions& opts);
CommandResult run_jump_sample(const ScenarioConfig& cfg, const CommandOptions& opts);
CommandResult run_qsd_phase(const ScenarioConfig& cfg, const CommandOptions& opts);
/// Primary output is a JSON verdict; `message` holds the text form.
CommandResult run_symmetry_check(const ScenarioConfig& cfg, const CommandOptions& opts);

/// Dispatches by subcommand name; throws ConfigError for unknown names.
CommandResult run_command(const std::string& name, const ScenarioConfig& cfg, const CommandOptions& opts);

}  // namespace trajphase::cli
