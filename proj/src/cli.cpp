#include "atomcycle/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "atomcycle/errors.hpp"
#include "atomcycle/trace_io.hpp"

namespace atomcycle::cli {
namespace fs = std::filesystem;

namespace {

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

// Writes the file in one go so a failed write never leaves a partial report.
void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string replica_name(int r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%03d.txt", r);
    return buf;
}

// Cycles used for the plateau: the last 40% of the resorting phase.
std::pair<int, int> plateau_window(const SimulationConfig& c) {
    const int end = c.resort_disable_after ? std::max(*c.resort_disable_after, 1) : c.n_cycles;
    const int first = static_cast<int>(0.6 * end);
    return {first, end - 1};
}

}  // namespace

std::string format_value(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

std::string format_value(const MaybeValue& value) { return value ? format_value(*value) : "NA"; }

int cmd_predict(const RunConfiguration& config, std::ostream& out) {
    const LossParameters& p = config.simulation.loss;
    validate(p);
    const double n_load = p.loaded_atoms();
    const double beta = amplification_factor(p.alpha_r, p.alpha_c);
    const double n_inf = steady_state(n_load, p.alpha_r, p.alpha_c);
    const double n_eff = effective_load(n_load, p.alpha_r);
    const std::vector<double> n =
        iterate_recurrence(config.initial_atoms, n_load, p.alpha_r, p.alpha_c, config.simulation.n_cycles);

    std::ostringstream s;
    s << "alpha_r " << format_value(p.alpha_r) << "\n";
    s << "alpha_c " << format_value(p.alpha_c) << "\n";
    s << "n_load " << format_value(n_load) << "\n";
    s << "beta " << format_value(beta) << "\n";
    s << "n_inf " << format_value(n_inf) << "\n";
    s << "n_load_eff " << format_value(n_eff) << "\n";
    s << "cycle\tN\n";
    for (std::size_t i = 0; i < n.size(); ++i) s << i << '\t' << format_value(n[i]) << "\n";
    out << s.str();
    return exit_ok;
}

int cmd_simulate(const RunConfiguration& config, std::ostream& out) {
    const SimulationConfig& c = config.simulation;
    validate(c);
    ensure_directory(config.output_dir);
    const Ensemble ens = run_replicas(c);

    for (const RunTrace& t : ens.traces) {
        std::ostringstream s;
        write_trace(s, t, config.format);
        write_file(config.output_dir / replica_name(t.replica), s.str());
    }

    // Emergent averages over the resorting phase, pooled over replicas.
    const auto [first, last] = plateau_window(c);
    const int resort_end = c.resort_disable_after ? *c.resort_disable_after : c.n_cycles;
    double sum_ac = 0.0, sum_ar = 0.0, sum_nl = 0.0;
    int n_ac = 0, n_ar = 0;
    for (const RunTrace& t : ens.traces) {
        if (auto a = t.wall_parameters.mean_alpha_c(1, resort_end - 1)) {
            sum_ac += *a;
            ++n_ac;
        }
        if (auto a = t.wall_parameters.mean_alpha_r(0, resort_end - 1)) {
            sum_ar += *a;
            ++n_ar;
        }
        sum_nl += t.wall_parameters.mean_n_loaded(0, resort_end - 1);
    }
    const double n_rep = static_cast<double>(ens.traces.size());
    const MaybeValue alpha_c = n_ac ? MaybeValue(sum_ac / n_ac) : std::nullopt;
    const MaybeValue alpha_r = n_ar ? MaybeValue(sum_ar / n_ar) : std::nullopt;
    const double n_load = sum_nl / n_rep;
    MaybeValue n_inf;
    std::vector<double> model;
    if (alpha_c && alpha_r && *alpha_c > 0.0) {
        n_inf = steady_state(n_load, *alpha_r, *alpha_c);
        model = iterate_recurrence(0.0, n_load, *alpha_r, *alpha_c, c.n_cycles);
    }

    double plateau = 0.0;
    for (int i = first; i <= last; ++i) plateau += ens.mean[static_cast<std::size_t>(i)];
    plateau /= static_cast<double>(last - first + 1);

    std::ostringstream s;
    s << "# replicas " << ens.traces.size() << "\n";
    s << "# seed " << c.rng_seed << "\n";
    s << "# plateau_window " << first << ' ' << last << "\n";
    s << "# plateau_mean " << format_value(plateau) << "\n";
    s << "# mean_n_loaded " << format_value(n_load) << "\n";
    s << "# emergent_alpha_c " << format_value(alpha_c) << "\n";
    s << "# emergent_alpha_r " << format_value(alpha_r) << "\n";
    s << "# predicted_n_inf " << format_value(n_inf) << "\n";
    s << "cycle\tmean\tstddev\tmodel\n";
    for (std::size_t i = 0; i < ens.mean.size(); ++i) {
        // model[i + 1] is the count after cycle i when starting from an empty array.
        const MaybeValue m = model.empty() ? std::nullopt : MaybeValue(model[i + 1]);
        s << i << '\t' << format_value(ens.mean[i]) << '\t' << format_value(ens.stddev[i]) << '\t' << format_value(m)
          << "\n";
    }
    write_file(config.output_dir / "summary.tsv", s.str());

    out << "replicas " << ens.traces.size() << "\n";
    out << "plateau_mean " << format_value(plateau) << "\n";
    out << "mean_n_loaded " << format_value(n_load) << "\n";
    out << "emergent_alpha_c " << format_value(alpha_c) << "\n";
    out << "emergent_alpha_r " << format_value(alpha_r) << "\n";
    out << "predicted_n_inf " << format_value(n_inf) << "\n";
    return exit_ok;
}

int cmd_plan(const RunConfiguration& config, const std::vector<fs::path>& occupancy_files, std::ostream& out) {
    const SimulationConfig& c = config.simulation;
    validate(c);
    if (occupancy_files.empty()) throw ConfigError("plan needs at least one occupancy grid file");
    const LatticeGeometry g(c.geometry);
    const TargetPattern target = make_target_pattern(g, c.target, c.collateral.d_min);

    SiteMask occupied(g.site_count());
    for (const fs::path& f : occupancy_files) {
        try {
            occupied |= read_occupancy_grid_file(f.string(), g);
        } catch (const ParseError& e) {
            throw ParseError(e.line(), e.column(), f.string() + ": " + e.message());
        }
    }
    const SiteMask storage = occupied & g.storage_zone();
    const MovePlan plan = plan_cycle(g, occupied, storage, target, PlannerOptions{c.assignment, c.collateral.d_min});
    const double duration = plan_duration(plan, c.kinematics);

    ensure_directory(config.output_dir);
    std::ostringstream s;
    write_plan(s, plan, c.kinematics);
    write_file(config.output_dir / "plan.txt", s.str());

    out << "moves " << plan.moves.size() << "\n";
    out << "duration_ms " << format_value(duration) << "\n";
    out << "violations " << plan.violations.size() << "\n";
    out << "output " << (config.output_dir / "plan.txt").string() << "\n";
    return exit_ok;
}

int cmd_analyze(const RunConfiguration& config, const std::vector<fs::path>& trace_files,
                const std::optional<DecayWindow>& decay_window, std::ostream& out) {
    if (trace_files.empty()) throw ConfigError("analyze needs at least one trace file");
    ensure_directory(config.output_dir);
    for (const fs::path& file : trace_files) {
        RunTrace trace;
        try {
            trace = read_trace_file(file.string());
        } catch (const ParseError& e) {
            throw ParseError(e.line(), e.column(), file.string() + ": " + e.message());
        }
        const LatticeGeometry g(trace.config.geometry);
        const ImageSequence seq = image_sequence(trace);
        validate(seq, g);
        const std::size_t n = seq.n_cycles();
        if (n < kMinCorrelationPairs + 1)
            throw InsufficientDataError(file.string() + ": analysis needs at least " +
                                        std::to_string(kMinCorrelationPairs + 1) + " cycles, trace has " +
                                        std::to_string(n));
        const FractionSeries f = per_cycle_metrics(seq);
        const CorrelationReport report = correlation_report(f);
        const Overlay overlay = model_overlay(overlay_inputs(seq));
        const std::string stem = file.stem().string();

        std::ostringstream m;
        m << "cycle\tloading_fraction\tmove_success\tshelved_survival\tstored_survival\tcycle_survival\ts_1p2p"
             "\ta_1p2p\ta_21p\ta_22p\tdelta_ns_over_ns\tstored_count\toverlay\n";
        for (std::size_t i = 0; i < n; ++i) {
            m << i << '\t' << format_value(f.loading_fraction[i]) << '\t' << format_value(f.move_success[i]) << '\t'
              << format_value(f.shelved_survival[i]) << '\t' << format_value(f.stored_survival[i]) << '\t'
              << format_value(f.cycle_survival[i]) << '\t' << format_value(f.survival_1p2p[i]) << '\t'
              << format_value(f.gain_1p2p[i]) << '\t' << format_value(f.gain_21p[i]) << '\t'
              << format_value(f.gain_22p[i]) << '\t' << format_value(f.fluctuation[i]) << '\t'
              << format_value(f.stored_count[i]) << '\t' << format_value(overlay.predicted[i]) << "\n";
        }
        write_file(config.output_dir / (stem + "_metrics.tsv"), m.str());

        std::ostringstream r;
        r << "quantity\trho\tn_pairs\n";
        for (const CorrelationEntry& e : report.entries)
            r << e.quantity << '\t' << format_value(e.rho) << '\t' << e.n_pairs << "\n";
        write_file(config.output_dir / (stem + "_correlations.tsv"), r.str());

        out << "trace " << file.string() << "\n";
        out << "cycles " << n << "\n";
        out << "overlay_alpha_c " << format_value(overlay.alpha_c_resort) << "\n";
        out << "overlay_alpha_r " << format_value(overlay.alpha_r) << "\n";
        out << "overlay_n_load " << format_value(overlay.n_load) << "\n";
        if (overlay.alpha_c_decay != overlay.alpha_c_resort)
            out << "overlay_alpha_c_decay " << format_value(overlay.alpha_c_decay) << "\n";
        for (const CorrelationEntry& e : report.entries) out << "rho " << e.quantity << ' ' << format_value(e.rho) << "\n";

        if (decay_window) {
            const DecayFit fit = fit_decay(f.stored_count, *decay_window);
            std::ostringstream d;
            d << "window_first " << fit.window.first << "\n";
            d << "window_last " << fit.window.last << "\n";
            d << "survival " << format_value(fit.survival) << "\n";
            d << "alpha_c " << format_value(fit.alpha_c) << "\n";
            d << "slope_stderr " << format_value(fit.slope_stderr) << "\n";
            d << "residual_norm " << format_value(fit.residual_norm) << "\n";
            write_file(config.output_dir / (stem + "_decay.txt"), d.str());
            out << "decay_survival " << format_value(fit.survival) << "\n";
            out << "decay_alpha_c " << format_value(fit.alpha_c) << "\n";
        }
    }
    return exit_ok;
}

DecayWindow parse_decay_window(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("decay window must be A:B, got '" + text + "'");
    DecayWindow w;
    auto parse = [&](std::string_view part, std::size_t& v) {
        const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
        if (part.empty() || ec != std::errc() || ptr != part.data() + part.size())
            throw ConfigError("decay window must be A:B with cycle indices, got '" + text + "'");
    };
    const std::string_view all(text);
    parse(all.substr(0, colon), w.first);
    parse(all.substr(colon + 1), w.last);
    if (w.last < w.first) throw ConfigError("decay window end precedes its start");
    return w;
}

int exit_status(const std::exception& error) {
    if (dynamic_cast<const IoError*>(&error)) return exit_io;
    if (dynamic_cast<const ConfigError*>(&error) || dynamic_cast<const ParseError*>(&error) ||
        dynamic_cast<const InsufficientDataError*>(&error))
        return exit_data;
    if (dynamic_cast<const DomainError*>(&error) || dynamic_cast<const RangeError*>(&error) ||
        dynamic_cast<const StateError*>(&error))
        return exit_domain;
    return exit_domain;
}

int guarded(const std::function<int()>& command, std::ostream& err) {
    try {
        return command();
    } catch (const std::exception& e) {
        const int code = exit_status(e);
        const char* kind = code == exit_io ? "i/o error" : code == exit_data ? "data error" : "domain error";
        err << "atomcycle: " << kind << ": " << e.what() << "\n";
        return code;
    }
}

}  // namespace atomcycle::cli
