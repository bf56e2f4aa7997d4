#include "atomcycle/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "atomcycle/errors.hpp"

namespace atomcycle {
namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& text) {
    Int v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return v;
}

bool is_none(const std::string& text) { return text == "none" || text == "~" || text == "null"; }

struct Setting {
    std::string key;
    std::function<std::string(const RunConfiguration&)> get;
    std::function<void(RunConfiguration&, const std::string&)> set;
};

using DoubleRef = double& (*)(RunConfiguration&);
using IntRef = int& (*)(RunConfiguration&);

Setting number(std::string key, DoubleRef ref) {
    return {key, [ref](const RunConfiguration& c) { return format_double(ref(const_cast<RunConfiguration&>(c))); },
            [ref, key](RunConfiguration& c, const std::string& v) { ref(c) = parse_double(key, v); }};
}

Setting integer(std::string key, IntRef ref) {
    return {key,
            [ref](const RunConfiguration& c) { return std::to_string(ref(const_cast<RunConfiguration&>(c))); },
            [ref, key](RunConfiguration& c, const std::string& v) { ref(c) = parse_int<int>(key, v); }};
}

#define ATOMCYCLE_NUMBER(key, member) number(key, [](RunConfiguration& c) -> double& { return c.member; })
#define ATOMCYCLE_INTEGER(key, member) integer(key, [](RunConfiguration& c) -> int& { return c.member; })

std::vector<Setting> build_settings() {
    std::vector<Setting> s = {
        ATOMCYCLE_NUMBER("geometry.spacing_x", simulation.geometry.spacing_x),
        ATOMCYCLE_NUMBER("geometry.spacing_y", simulation.geometry.spacing_y),
        ATOMCYCLE_INTEGER("geometry.n_cols", simulation.geometry.n_cols),
        ATOMCYCLE_INTEGER("geometry.n_rows", simulation.geometry.n_rows),
        ATOMCYCLE_INTEGER("geometry.loading_cols", simulation.geometry.loading_cols),
        ATOMCYCLE_INTEGER("geometry.guard_cols", simulation.geometry.guard_cols),
        ATOMCYCLE_INTEGER("geometry.tweezers.cols", simulation.geometry.tweezers.cols),
        ATOMCYCLE_INTEGER("geometry.tweezers.rows", simulation.geometry.tweezers.rows),
        ATOMCYCLE_INTEGER("geometry.tweezers.col_stride", simulation.geometry.tweezers.col_stride),
        ATOMCYCLE_INTEGER("geometry.tweezers.row_stride", simulation.geometry.tweezers.row_stride),
        ATOMCYCLE_INTEGER("geometry.tweezers.col_offset", simulation.geometry.tweezers.col_offset),
        ATOMCYCLE_INTEGER("geometry.tweezers.row_offset", simulation.geometry.tweezers.row_offset),
    };
    s.push_back({"geometry.tweezer_sites",
                 [](const RunConfiguration& c) {
                     const auto& sites = c.simulation.geometry.tweezer_sites;
                     if (!sites) return std::string("none");
                     std::string out;
                     for (std::size_t i = 0; i < sites->size(); ++i) {
                         if (i) out += ',';
                         out += std::to_string((*sites)[i]);
                     }
                     return out;
                 },
                 [](RunConfiguration& c, const std::string& v) {
                     if (is_none(v)) {
                         c.simulation.geometry.tweezer_sites.reset();
                         return;
                     }
                     std::vector<SiteIndex> sites;
                     std::stringstream in(v);
                     std::string item;
                     while (std::getline(in, item, ','))
                         sites.push_back(parse_int<SiteIndex>("geometry.tweezer_sites", item));
                     c.simulation.geometry.tweezer_sites = std::move(sites);
                 }});
    const std::vector<Setting> rest = {
        ATOMCYCLE_NUMBER("potential.lattice_depth", simulation.potential.lattice_depth),
        ATOMCYCLE_NUMBER("potential.tweezer_depth_ratio", simulation.potential.tweezer_depth_ratio),
        ATOMCYCLE_NUMBER("potential.row_confinement", simulation.potential.row_confinement),
        ATOMCYCLE_NUMBER("loss.alpha_r", simulation.loss.alpha_r),
        ATOMCYCLE_NUMBER("loss.alpha_c", simulation.loss.alpha_c),
        ATOMCYCLE_NUMBER("loss.load_fraction", simulation.loss.load_fraction),
        ATOMCYCLE_INTEGER("loss.n_tweezers", simulation.loss.n_tweezers),
        ATOMCYCLE_NUMBER("loss.shelving_roundtrip_infidelity", simulation.loss.shelving_roundtrip_infidelity),
        ATOMCYCLE_NUMBER("loss.shelving_lifetime", simulation.loss.shelving_lifetime),
        ATOMCYCLE_NUMBER("loss.hold_time", simulation.loss.hold_time),
        ATOMCYCLE_NUMBER("loss.mot_extra_loss", simulation.loss.mot_extra_loss),
        ATOMCYCLE_NUMBER("loss.vacuum_lifetime", simulation.loss.vacuum_lifetime),
        ATOMCYCLE_NUMBER("loss.cycle_time", simulation.loss.cycle_time),
        ATOMCYCLE_NUMBER("loss.heating_extinction", simulation.loss.heating_extinction),
        ATOMCYCLE_NUMBER("loss.detection_infidelity", simulation.loss.detection_infidelity),
        ATOMCYCLE_NUMBER("loss.imaging_loss", simulation.loss.imaging_loss),
        ATOMCYCLE_NUMBER("move_success.p0", simulation.move_success.p0),
        ATOMCYCLE_NUMBER("move_success.decay_length_between", simulation.move_success.decay_length_between),
        ATOMCYCLE_NUMBER("move_success.decay_length_through", simulation.move_success.decay_length_through),
        ATOMCYCLE_NUMBER("collateral.d_min", simulation.collateral.d_min),
        ATOMCYCLE_NUMBER("collateral.loss_probability_inside", simulation.collateral.loss_probability_inside),
        ATOMCYCLE_NUMBER("collateral.disturbance_per_move", simulation.collateral.disturbance_per_move),
        ATOMCYCLE_NUMBER("ionization.quadratic_coefficient", simulation.ionization.quadratic_coefficient),
        ATOMCYCLE_NUMBER("ionization.linear_coefficient", simulation.ionization.linear_coefficient),
        ATOMCYCLE_NUMBER("ionization.constant_rate", simulation.ionization.constant_rate),
        ATOMCYCLE_NUMBER("kinematics.peak_velocity", simulation.kinematics.peak_velocity),
        ATOMCYCLE_NUMBER("kinematics.ramp_duration", simulation.kinematics.ramp_duration),
        ATOMCYCLE_NUMBER("kinematics.depth_ratio", simulation.kinematics.depth_ratio),
        ATOMCYCLE_NUMBER("kinematics.accel_duration", simulation.kinematics.accel_duration),
        ATOMCYCLE_NUMBER("kinematics.sample_interval", simulation.kinematics.sample_interval),
        ATOMCYCLE_INTEGER("target.row_offset", simulation.target.row_offset),
        ATOMCYCLE_INTEGER("target.row_stride", simulation.target.row_stride),
        ATOMCYCLE_INTEGER("target.col_offset", simulation.target.col_offset),
        ATOMCYCLE_INTEGER("target.col_stride", simulation.target.col_stride),
        ATOMCYCLE_INTEGER("simulation.n_cycles", simulation.n_cycles),
        ATOMCYCLE_INTEGER("simulation.replicas", simulation.n_replicas),
        ATOMCYCLE_NUMBER("simulation.mot_background", simulation.mot_background),
        ATOMCYCLE_NUMBER("simulation.accidental_shelving", simulation.accidental_shelving),
        ATOMCYCLE_NUMBER("simulation.tweezer_depth_mk", simulation.tweezer_depth_mk),
        ATOMCYCLE_NUMBER("predict.initial_atoms", initial_atoms),
        ATOMCYCLE_INTEGER("output.verbosity", verbosity),
    };
    s.insert(s.end(), rest.begin(), rest.end());

    // Settings that are not plain numbers.
    s.push_back({"potential.form", [](const RunConfiguration& c) { return to_string(c.simulation.potential.form); },
                 [](RunConfiguration& c, const std::string& v) {
                     try {
                         c.simulation.potential.form = parse_potential_form(v);
                     } catch (const DomainError& e) {
                         throw ConfigError(std::string("potential.form: ") + e.what());
                     }
                 }});
    s.push_back({"loss.n_load",
                 [](const RunConfiguration& c) {
                     return c.simulation.loss.n_load ? format_double(*c.simulation.loss.n_load) : std::string("none");
                 },
                 [](RunConfiguration& c, const std::string& v) {
                     if (is_none(v))
                         c.simulation.loss.n_load.reset();
                     else
                         c.simulation.loss.n_load = parse_double("loss.n_load", v);
                 }});
    s.push_back({"assignment.exact_limit",
                 [](const RunConfiguration& c) { return std::to_string(c.simulation.assignment.exact_limit); },
                 [](RunConfiguration& c, const std::string& v) {
                     c.simulation.assignment.exact_limit = parse_int<std::size_t>("assignment.exact_limit", v);
                 }});
    s.push_back({"kinematics.profile", [](const RunConfiguration&) { return std::string("smooth_trapezoid"); },
                 [](RunConfiguration&, const std::string& v) {
                     if (v != "smooth_trapezoid")
                         throw ConfigError("kinematics.profile: unknown profile '" + v + "' (expected smooth_trapezoid)");
                 }});
    s.push_back({"simulation.resort_disable_after",
                 [](const RunConfiguration& c) {
                     return c.simulation.resort_disable_after ? std::to_string(*c.simulation.resort_disable_after)
                                                              : std::string("none");
                 },
                 [](RunConfiguration& c, const std::string& v) {
                     if (is_none(v))
                         c.simulation.resort_disable_after.reset();
                     else
                         c.simulation.resort_disable_after = parse_int<int>("simulation.resort_disable_after", v);
                 }});
    s.push_back({"simulation.seed", [](const RunConfiguration& c) { return std::to_string(c.simulation.rng_seed); },
                 [](RunConfiguration& c, const std::string& v) {
                     c.simulation.rng_seed = parse_int<std::uint64_t>("simulation.seed", v);
                 }});
    s.push_back({"output.dir", [](const RunConfiguration& c) { return c.output_dir.string(); },
                 [](RunConfiguration& c, const std::string& v) { c.output_dir = v; }});
    s.push_back({"output.format", [](const RunConfiguration& c) { return to_string(c.format); },
                 [](RunConfiguration& c, const std::string& v) {
                     try {
                         c.format = parse_output_format(v);
                     } catch (const DomainError& e) {
                         throw ConfigError(std::string("output.format: ") + e.what());
                     }
                 }});

    // Keep each section contiguous so the nested rendering is well formed.
    std::map<std::string, std::size_t> first_seen;
    for (std::size_t i = 0; i < s.size(); ++i) first_seen.emplace(s[i].key.substr(0, s[i].key.find('.')), i);
    std::stable_sort(s.begin(), s.end(), [&](const Setting& a, const Setting& b) {
        return first_seen[a.key.substr(0, a.key.find('.'))] < first_seen[b.key.substr(0, b.key.find('.'))];
    });
    return s;
}

const std::vector<Setting>& settings() {
    static const std::vector<Setting> table = build_settings();
    return table;
}

const std::map<std::string, const Setting*>& settings_by_key() {
    static const std::map<std::string, const Setting*> index = [] {
        std::map<std::string, const Setting*> m;
        for (const Setting& s : settings()) m.emplace(s.key, &s);
        return m;
    }();
    return index;
}

void apply_node(RunConfiguration& config, const YAML::Node& node, const std::string& prefix) {
    if (node.IsMap()) {
        for (const auto& kv : node) {
            const std::string name = kv.first.as<std::string>();
            apply_node(config, kv.second, prefix.empty() ? name : prefix + "." + name);
        }
        return;
    }
    if (prefix.empty()) throw ConfigError("configuration must be a mapping of sections");
    if (node.IsNull()) {
        apply_setting(config, prefix, "none");
        return;
    }
    if (node.IsSequence()) {
        std::string joined;
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (!node[i].IsScalar()) throw ConfigError(prefix + ": expected a list of scalars");
            if (i) joined += ',';
            joined += node[i].as<std::string>();
        }
        apply_setting(config, prefix, joined);
        return;
    }
    apply_setting(config, prefix, node.as<std::string>());
}

}  // namespace

std::string to_string(OutputFormat format) { return format == OutputFormat::grid ? "grid" : "table"; }

OutputFormat parse_output_format(const std::string& name) {
    if (name == "table") return OutputFormat::table;
    if (name == "grid") return OutputFormat::grid;
    throw DomainError("unknown output format '" + name + "' (expected table or grid)");
}

const std::vector<std::string>& setting_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const Setting& s : settings()) k.push_back(s.key);
        return k;
    }();
    return keys;
}

void apply_setting(RunConfiguration& config, const std::string& key, const std::string& value) {
    const auto& index = settings_by_key();
    const auto it = index.find(key);
    if (it == index.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->second->set(config, value);
}

std::vector<std::pair<std::string, std::string>> flatten(const RunConfiguration& config) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const Setting& s : settings()) out.emplace_back(s.key, s.get(config));
    return out;
}

RunConfiguration parse_config(const std::string& yaml_text, const RunConfiguration& base) {
    RunConfiguration config = base;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(static_cast<std::size_t>(e.mark.line) + 1, static_cast<std::size_t>(e.mark.column) + 1,
                         e.msg);
    }
    if (!root || root.IsNull()) return config;
    if (!root.IsMap()) throw ConfigError("configuration must be a mapping of sections");
    apply_node(config, root, "");
    return config;
}

RunConfiguration load_config(const std::filesystem::path& path, const RunConfiguration& base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read configuration file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), base);
}

std::string to_yaml(const RunConfiguration& config) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    std::vector<std::string> open;
    for (const auto& [key, value] : flatten(config)) {
        std::vector<std::string> parts;
        std::stringstream ks(key);
        std::string part;
        while (std::getline(ks, part, '.')) parts.push_back(part);
        std::size_t common = 0;
        while (common < open.size() && common + 1 < parts.size() && open[common] == parts[common]) ++common;
        while (open.size() > common) {
            out << YAML::EndMap;
            open.pop_back();
        }
        for (std::size_t i = common; i + 1 < parts.size(); ++i) {
            out << YAML::Key << parts[i] << YAML::Value << YAML::BeginMap;
            open.push_back(parts[i]);
        }
        out << YAML::Key << parts.back() << YAML::Value << value;
    }
    while (!open.empty()) {
        out << YAML::EndMap;
        open.pop_back();
    }
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

}  // namespace atomcycle
