#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "conewalk/config.hpp"

namespace conewalk {

enum class Command { Validate, Analyze, Simulate, Stationary, Recurrence, Harmonic, Report };

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view name);

std::string_view tool_version();

/// Wall-clock seconds per report section, in execution order.
using Timings = std::vector<std::pair<std::string, double>>;

/// Runs one command and writes report.txt, the section CSVs and timings.txt
/// into out_dir (created if needed). Validate writes nothing. Everything except
/// timings.txt is a pure function of the config.
Timings run_command(Command command, const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

/// CLI exit code for a failure: 2 for unreadable or malformed input, 1 otherwise.
int exit_code_for(const std::exception& err);

}  // namespace conewalk
