#include "qnls/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qnls {

using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + (path.empty() ? std::string("<root>") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const ordered_json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : obj.items()) {
        if (!allowed.count(k)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(join(path, k), "unknown field (allowed: " + list + ")");
        }
    }
}

double get_number(const ordered_json& obj, const std::string& path, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) fail(join(path, key), "expected a number");
    return v.get<double>();
}

long get_integer(const ordered_json& obj, const std::string& path, const std::string& key, long fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number_integer() || v.is_number_unsigned()) return v.get<long>();
    if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) return static_cast<long>(v.get<double>());
    fail(join(path, key), "expected an integer");
}

bool get_bool(const ordered_json& obj, const std::string& path, const std::string& key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_boolean()) fail(join(path, key), "expected true or false");
    return obj.at(key).get<bool>();
}

std::string get_string(const ordered_json& obj, const std::string& path, const std::string& key,
                       const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_string()) fail(join(path, key), "expected a string");
    return obj.at(key).get<std::string>();
}

cplx get_complex(const ordered_json& obj, const std::string& path, const std::string& key, cplx fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    fail(join(path, key), "expected a number or [re, im]");
}

template <class F>
void guarded(const std::string& path, F&& f) {
    try {
        f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(path, e.what());
    }
}

EvolveConfig parse_evolve(const ordered_json& obj, const std::string& path, EvolveConfig base) {
    check_keys(obj, path,
               {"kappa", "dt", "t_max", "solver_tol", "max_picard", "blowup_K_factor", "dt_min", "sample_every",
                "order", "r_max"});
    base.kappa = get_number(obj, path, "kappa", base.kappa);
    base.dt = get_number(obj, path, "dt", base.dt);
    base.t_max = get_number(obj, path, "t_max", base.t_max);
    base.solver_tol = get_number(obj, path, "solver_tol", base.solver_tol);
    base.max_picard = static_cast<int>(get_integer(obj, path, "max_picard", base.max_picard));
    base.blowup_K_factor = get_number(obj, path, "blowup_K_factor", base.blowup_K_factor);
    base.dt_min = get_number(obj, path, "dt_min", base.dt_min);
    base.sample_every = static_cast<int>(get_integer(obj, path, "sample_every", base.sample_every));
    base.order = static_cast<int>(get_integer(obj, path, "order", base.order));
    guarded(path, [&] { base.validate(); });
    return base;
}

void parse_data_parameters(const ordered_json& obj, const std::string& path, ExperimentSpec& spec) {
    check_keys(obj, path, {"scale_factor", "amplitude_u", "amplitude_v", "width"});
    spec.scale_factor = get_number(obj, path, "scale_factor", spec.scale_factor);
    spec.amplitude_u = get_number(obj, path, "amplitude_u", spec.amplitude_u);
    spec.amplitude_v = get_number(obj, path, "amplitude_v", spec.amplitude_v);
    spec.width = get_number(obj, path, "width", spec.width);
}

ExperimentSpec parse_experiment(const ordered_json& obj, const std::string& path, const EvolveConfig& evolve,
                                double evolve_r_max) {
    check_keys(obj, path, {"family", "parameters", "evolve", "label"});
    ExperimentSpec spec;
    spec.evolve = evolve;
    spec.r_max = evolve_r_max;
    spec.family = get_string(obj, path, "family", spec.family);
    spec.label = get_string(obj, path, "label", "");
    if (obj.contains("parameters")) parse_data_parameters(obj.at("parameters"), join(path, "parameters"), spec);
    if (obj.contains("evolve")) {
        const auto& e = obj.at("evolve");
        spec.evolve = parse_evolve(e, join(path, "evolve"), evolve);
        spec.r_max = get_number(e, join(path, "evolve"), "r_max", evolve_r_max);
    }
    guarded(path, [&] { spec.validate(); });
    return spec;
}

}  // namespace

ordered_json default_config_json() {
    const GroundStateConfig g;
    const EvolveConfig e;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["grid"] = {{"n", g.n}, {"r_max", g.r_max}, {"num_nodes", g.num_nodes}};
    j["system"] = {{"kappa", 0.5}};
    j["ground_state"] = {{"tol_J", g.tol_J},
                         {"max_iters", g.max_iters},
                         {"rearrange_every", g.rearrange_every},
                         {"tol_pohozaev", g.tol_pohozaev},
                         {"tol_pde", g.tol_pde},
                         {"load", ""}};
    j["evolve"] = {{"dt", e.dt},
                   {"t_max", e.t_max},
                   {"solver_tol", e.solver_tol},
                   {"max_picard", e.max_picard},
                   {"blowup_K_factor", e.blowup_K_factor},
                   {"dt_min", e.dt_min},
                   {"sample_every", e.sample_every},
                   {"order", e.order},
                   {"r_max", 0.0}};
    j["initial_data"] = {{"family", "scaled_ground_state"},
                         {"parameters", {{"scale_factor", 0.9}}}};
    j["experiments"] = ordered_json::array();
    j["output"] = {{"directory", "out"}, {"formats", {"csv", "json"}}, {"emit_plot_scripts", false}};
    j["verify"] = {{"scaling_draws", 100}, {"random_fields", 200}, {"minimality_fields", 50}, {"virial_t_max", 0.2}};
    j["seed"] = 20240601;
    return j;
}

void apply_override(ordered_json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("--set expects key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    ordered_json value = ordered_json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    ordered_json* node = &doc;
    std::stringstream ss(key);
    std::string part, walked;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("--set: empty path segment in '" + key + "'");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        walked = join(walked, parts[i]);
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(parts[i]);
            } catch (const std::exception&) {
                throw ConfigError("--set: '" + walked + "' indexes an array with a non-integer");
            }
            if (idx >= node->size()) throw ConfigError("--set: index out of range at '" + walked + "'");
            node = &(*node)[idx];
            continue;
        }
        if (!node->is_object()) throw ConfigError("--set: '" + walked + "' is not an object");
        if (!node->contains(parts[i])) (*node)[parts[i]] = ordered_json::object();
        node = &(*node)[parts[i]];
    }
    if (node->is_array()) {
        std::size_t idx = 0;
        try {
            idx = std::stoul(parts.back());
        } catch (const std::exception&) {
            throw ConfigError("--set: '" + key + "' indexes an array with a non-integer");
        }
        if (idx >= node->size()) throw ConfigError("--set: index out of range at '" + key + "'");
        (*node)[idx] = value;
        return;
    }
    if (!node->is_object()) throw ConfigError("--set: parent of '" + key + "' is not an object");
    (*node)[parts.back()] = value;
}

void merge_json(ordered_json& base, const ordered_json& overlay) {
    if (!base.is_object() || !overlay.is_object()) {
        base = overlay;
        return;
    }
    for (const auto& [k, v] : overlay.items()) {
        if (base.contains(k) && base[k].is_object() && v.is_object()) {
            merge_json(base[k], v);
        } else {
            base[k] = v;
        }
    }
}

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

RunConfig parse_config(const ordered_json& doc, const std::string& subcommand) {
    static const std::set<std::string> kSubcommands{"ground-state", "evolve", "dichotomy", "verify"};
    if (!kSubcommands.count(subcommand)) throw ConfigError("unknown subcommand '" + subcommand + "'");
    check_keys(doc, "",
               {"schema_version", "grid", "system", "ground_state", "evolve", "initial_data", "experiments", "output",
                "verify", "seed"});
    RunConfig cfg;
    cfg.subcommand = subcommand;

    const long version = get_integer(doc, "", "schema_version", kSchemaVersion);
    if (version != kSchemaVersion) {
        fail("schema_version", "unsupported version " + std::to_string(version) + " (this build reads " +
                                   std::to_string(kSchemaVersion) + ")");
    }

    const ordered_json empty = ordered_json::object();
    const auto& grid = doc.contains("grid") ? doc.at("grid") : empty;
    check_keys(grid, "grid", {"n", "r_max", "num_nodes"});
    cfg.n = static_cast<int>(get_integer(grid, "grid", "n", cfg.n));
    if (cfg.n >= 6) fail("grid.n", "ground states do not exist for n >= 6; n must lie in 1..5 (got " + std::to_string(cfg.n) + ")");
    if (cfg.n < 1) fail("grid.n", "n must lie in 1..5 (got " + std::to_string(cfg.n) + ")");
    cfg.r_max = get_number(grid, "grid", "r_max", cfg.r_max);
    if (!(cfg.r_max > 0.0)) fail("grid.r_max", "must be positive");
    const long nodes = get_integer(grid, "grid", "num_nodes", static_cast<long>(cfg.num_nodes));
    if (nodes < 16) fail("grid.num_nodes", "must be at least 16");
    cfg.num_nodes = static_cast<std::size_t>(nodes);

    const auto& sys = doc.contains("system") ? doc.at("system") : empty;
    check_keys(sys, "system", {"kappa", "m", "M", "lambda", "mu", "c"});
    const bool raw = sys.contains("m") || sys.contains("M") || sys.contains("lambda") || sys.contains("mu") ||
                     sys.contains("c");
    guarded("system", [&] {
        if (raw) {
            RawConstants rc;
            rc.m = get_number(sys, "system", "m", rc.m);
            rc.M = get_number(sys, "system", "M", rc.M);
            rc.lambda = get_complex(sys, "system", "lambda", rc.lambda);
            rc.mu = get_complex(sys, "system", "mu", rc.mu);
            rc.c = get_number(sys, "system", "c", rc.c);
            cfg.system = SystemParams::from_raw(rc);
            if (sys.contains("kappa") && std::abs(get_number(sys, "system", "kappa", 0.0) - cfg.system.kappa) >
                                             1e-14 * cfg.system.kappa) {
                fail("system.kappa", "disagrees with m / M");
            }
        } else {
            cfg.system = SystemParams::from_kappa(get_number(sys, "system", "kappa", 0.5));
        }
    });
    const double kappa = cfg.system.kappa;

    const auto& gs = doc.contains("ground_state") ? doc.at("ground_state") : empty;
    check_keys(gs, "ground_state", {"tol_J", "max_iters", "rearrange_every", "tol_pohozaev", "tol_pde", "load"});
    cfg.ground_state.n = cfg.n;
    cfg.ground_state.kappa = kappa;
    cfg.ground_state.r_max = cfg.r_max;
    cfg.ground_state.num_nodes = cfg.num_nodes;
    cfg.ground_state.tol_J = get_number(gs, "ground_state", "tol_J", cfg.ground_state.tol_J);
    cfg.ground_state.max_iters = static_cast<int>(get_integer(gs, "ground_state", "max_iters", cfg.ground_state.max_iters));
    cfg.ground_state.rearrange_every =
        static_cast<int>(get_integer(gs, "ground_state", "rearrange_every", cfg.ground_state.rearrange_every));
    cfg.ground_state.tol_pohozaev = get_number(gs, "ground_state", "tol_pohozaev", cfg.ground_state.tol_pohozaev);
    cfg.ground_state.tol_pde = get_number(gs, "ground_state", "tol_pde", cfg.ground_state.tol_pde);
    cfg.ground_state_csv = get_string(gs, "ground_state", "load", "");
    guarded("ground_state", [&] { cfg.ground_state.validate(); });

    EvolveConfig ev;
    ev.kappa = kappa;
    double evolve_r_max = 0.0;
    if (doc.contains("evolve")) {
        const auto& e = doc.at("evolve");
        if (e.contains("kappa")) fail("evolve.kappa", "set kappa in the system block");
        ev = parse_evolve(e, "evolve", ev);
        evolve_r_max = get_number(e, "evolve", "r_max", 0.0);
        if (evolve_r_max < 0.0) fail("evolve.r_max", "must be >= 0");
    }
    cfg.evolve = ev;

    if (doc.contains("initial_data")) {
        cfg.initial_data = parse_experiment(doc.at("initial_data"), "initial_data", ev, evolve_r_max);
    } else {
        cfg.initial_data.evolve = ev;
        cfg.initial_data.r_max = evolve_r_max;
    }
    if (doc.contains("experiments")) {
        const auto& arr = doc.at("experiments");
        if (!arr.is_array()) fail("experiments", "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            cfg.experiments.push_back(
                parse_experiment(arr[i], "experiments." + std::to_string(i), ev, evolve_r_max));
        }
    }
    for (const auto& e : cfg.experiments) {
        if (std::abs(e.evolve.kappa - kappa) > 0.0) fail("experiments", "kappa must match the system block");
    }

    const auto& out = doc.contains("output") ? doc.at("output") : empty;
    check_keys(out, "output", {"directory", "formats", "emit_plot_scripts"});
    cfg.output.directory = get_string(out, "output", "directory", cfg.output.directory);
    if (cfg.output.directory.empty()) fail("output.directory", "must not be empty");
    if (out.contains("formats")) {
        const auto& f = out.at("formats");
        if (!f.is_array()) fail("output.formats", "expected an array of \"csv\" / \"json\"");
        cfg.output.csv = cfg.output.json = false;
        for (const auto& x : f) {
            if (x == "csv") {
                cfg.output.csv = true;
            } else if (x == "json") {
                cfg.output.json = true;
            } else {
                fail("output.formats", "unknown format " + x.dump());
            }
        }
    }
    cfg.output.emit_plot_scripts = get_bool(out, "output", "emit_plot_scripts", false);

    const auto& ver = doc.contains("verify") ? doc.at("verify") : empty;
    check_keys(ver, "verify", {"scaling_draws", "random_fields", "minimality_fields", "virial_t_max"});
    cfg.verify.scaling_draws = static_cast<int>(get_integer(ver, "verify", "scaling_draws", cfg.verify.scaling_draws));
    cfg.verify.random_fields = static_cast<int>(get_integer(ver, "verify", "random_fields", cfg.verify.random_fields));
    cfg.verify.minimality_fields =
        static_cast<int>(get_integer(ver, "verify", "minimality_fields", cfg.verify.minimality_fields));
    cfg.verify.virial_t_max = get_number(ver, "verify", "virial_t_max", cfg.verify.virial_t_max);
    if (cfg.verify.scaling_draws < 1 || cfg.verify.random_fields < 1 || cfg.verify.minimality_fields < 1) {
        fail("verify", "draw counts must be positive");
    }
    if (!(cfg.verify.virial_t_max > 0.0)) fail("verify.virial_t_max", "must be positive");

    const long seed = get_integer(doc, "", "seed", static_cast<long>(cfg.seed));
    if (seed < 0) fail("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    return cfg;
}

ordered_json to_json(const EvolveConfig& e) {
    return {{"kappa", e.kappa},
            {"dt", e.dt},
            {"t_max", e.t_max},
            {"solver_tol", e.solver_tol},
            {"max_picard", e.max_picard},
            {"blowup_K_factor", e.blowup_K_factor},
            {"dt_min", e.effective_dt_min()},
            {"sample_every", e.sample_every},
            {"order", e.order}};
}

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["subcommand"] = c.subcommand;
    j["grid"] = {{"n", c.n}, {"r_max", c.r_max}, {"num_nodes", c.num_nodes}};
    ordered_json sys = {{"kappa", c.system.kappa}};
    if (c.system.raw) {
        const auto& r = *c.system.raw;
        sys["m"] = r.m;
        sys["M"] = r.M;
        sys["lambda"] = {r.lambda.real(), r.lambda.imag()};
        sys["mu"] = {r.mu.real(), r.mu.imag()};
        sys["c"] = r.c;
    }
    j["system"] = sys;
    j["ground_state"] = {{"tol_J", c.ground_state.tol_J},
                         {"max_iters", c.ground_state.max_iters},
                         {"rearrange_every", c.ground_state.rearrange_every},
                         {"tol_pohozaev", c.ground_state.tol_pohozaev},
                         {"tol_pde", c.ground_state.tol_pde},
                         {"load", c.ground_state_csv}};
    j["evolve"] = to_json(c.evolve);
    j["seed"] = c.seed;
    return j;
}

}  // namespace qnls
