#pragma once

// Subcommands of the atomcycle tool. Each writes its report to `out`, its
// files below config.output_dir, and throws the library exceptions on error;
// exit_status maps those to the documented exit codes.

#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "atomcycle/analysis.hpp"
#include "atomcycle/config.hpp"

namespace atomcycle::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_data = 3,    // parse errors, unknown keys, insufficient data
    exit_domain = 4,  // parameters outside a formula's domain, state inconsistencies
    exit_io = 5,
};

/// β, N_∞, N_L,eff and the deterministic build-up table.
int cmd_predict(const RunConfiguration& config, std::ostream& out);

/// One trace file per replica plus summary.tsv in the output directory.
int cmd_simulate(const RunConfiguration& config, std::ostream& out);

/// Plans one cycle for the union of the occupancy grids and writes plan.txt.
int cmd_plan(const RunConfiguration& config, const std::vector<std::filesystem::path>& occupancy_files,
             std::ostream& out);

/// Metric tables, correlation report, optional decay fit and the overlay for
/// every trace file.
int cmd_analyze(const RunConfiguration& config, const std::vector<std::filesystem::path>& trace_files,
                const std::optional<DecayWindow>& decay_window, std::ostream& out);

/// Parses "A:B" (inclusive cycle indices); throws ConfigError.
DecayWindow parse_decay_window(const std::string& text);

int exit_status(const std::exception& error);

/// Runs `command`, printing a one-line diagnosis to `err` on failure.
int guarded(const std::function<int()>& command, std::ostream& err);

/// Fixed six-decimal rendering, "NA" for undefined values.
std::string format_value(const MaybeValue& value);
std::string format_value(double value);

}  // namespace atomcycle::cli
