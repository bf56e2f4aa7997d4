#pragma once

// Run configuration: every model parameter with its default, read from a
// nested YAML file. Keys are addressed in flattened form ("loss.alpha_c");
// unknown keys and malformed values raise ConfigError.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "atomcycle/simulator.hpp"

namespace atomcycle {

enum class OutputFormat { table, grid };

std::string to_string(OutputFormat format);
OutputFormat parse_output_format(const std::string& name);

struct RunConfiguration {
    SimulationConfig simulation;
    /// N_0 of the deterministic build-up table.
    double initial_atoms = 0.0;
    std::filesystem::path output_dir = "out";
    OutputFormat format = OutputFormat::table;
    int verbosity = 0;
};

/// All flattened keys in a fixed order.
const std::vector<std::string>& setting_keys();

/// Sets one flattened key from its text value.
void apply_setting(RunConfiguration& config, const std::string& key, const std::string& value);

/// (key, value) for every setting, values formatted to round-trip exactly.
std::vector<std::pair<std::string, std::string>> flatten(const RunConfiguration& config);

/// Applies the settings of a YAML document on top of `base`.
RunConfiguration parse_config(const std::string& yaml_text, const RunConfiguration& base = {});
RunConfiguration load_config(const std::filesystem::path& path, const RunConfiguration& base = {});

/// Nested YAML rendering of the full configuration.
std::string to_yaml(const RunConfiguration& config);

}  // namespace atomcycle
