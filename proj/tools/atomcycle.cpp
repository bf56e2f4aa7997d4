// atomcycle: predict, simulate, plan and analyze continuously reloaded arrays.

#include <CLI11.hpp>

#include <iostream>

#include "atomcycle/cli.hpp"
#include "atomcycle/errors.hpp"

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> replicas;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "YAML configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Base RNG seed");
    cmd->add_option("--replicas", o.replicas, "Number of replicas")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--format", o.format, "Image format in trace files")->check(CLI::IsMember({"table", "grid"}));
    cmd->add_option("--set", o.overrides, "Override a setting, KEY=VALUE (repeatable)");
}

atomcycle::RunConfiguration resolve(const CommonOptions& o) {
    using namespace atomcycle;
    RunConfiguration c = o.config_path.empty() ? RunConfiguration{} : load_config(o.config_path);
    for (const std::string& kv : o.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
        apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (o.seed) c.simulation.rng_seed = *o.seed;
    if (o.replicas) c.simulation.n_replicas = *o.replicas;
    if (o.out_dir) c.output_dir = *o.out_dir;
    if (o.format) c.format = parse_output_format(*o.format);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    namespace cli = atomcycle::cli;
    CLI::App app{"Continuous reloading of lattice-stored atom arrays"};
    app.require_subcommand(1);

    CommonOptions predict_opts, simulate_opts, plan_opts, analyze_opts;
    auto* predict = app.add_subcommand("predict", "Steady state and deterministic build-up");
    add_common(predict, predict_opts);
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo traces over replicas");
    add_common(simulate, simulate_opts);
    auto* plan = app.add_subcommand("plan", "Plan one resorting cycle from occupancy grids");
    add_common(plan, plan_opts);
    std::vector<std::string> grid_files;
    plan->add_option("grids", grid_files, "Occupancy grid files")->required();
    auto* analyze = app.add_subcommand("analyze", "Statistics of trace files");
    add_common(analyze, analyze_opts);
    std::vector<std::string> trace_files;
    std::string decay_window;
    analyze->add_option("traces", trace_files, "Trace files")->required();
    analyze->add_option("--decay-window", decay_window, "Inclusive cycle window A:B for the decay fit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_usage;
    }

    auto paths = [](const std::vector<std::string>& v) {
        return std::vector<std::filesystem::path>(v.begin(), v.end());
    };
    return cli::guarded(
        [&] {
            if (*predict) return cli::cmd_predict(resolve(predict_opts), std::cout);
            if (*simulate) return cli::cmd_simulate(resolve(simulate_opts), std::cout);
            if (*plan) return cli::cmd_plan(resolve(plan_opts), paths(grid_files), std::cout);
            std::optional<atomcycle::DecayWindow> window;
            if (!decay_window.empty()) window = cli::parse_decay_window(decay_window);
            return cli::cmd_analyze(resolve(analyze_opts), paths(trace_files), window, std::cout);
        },
        std::cerr);
}
