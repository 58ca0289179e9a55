#include "qnls/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include "qnls/dichotomy.hpp"
#include "qnls/evolution.hpp"
#include "qnls/json_writer.hpp"
#include "qnls/verify.hpp"

namespace qnls::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ordered_json opt(const std::optional<double>& x) { return x ? ordered_json(*x) : ordered_json(nullptr); }

ordered_json experiment_json(const ExperimentSpec& e) {
    ordered_json p;
    if (e.family == "scaled_ground_state") {
        p = {{"scale_factor", e.scale_factor}};
    } else {
        p = {{"amplitude_u", e.amplitude_u}, {"amplitude_v", e.amplitude_v}, {"width", e.width}};
    }
    ordered_json ev = to_json(e.evolve);
    ev["r_max"] = e.r_max;
    return {{"family", e.family}, {"label", e.label}, {"parameters", p}, {"evolve", ev}};
}

ordered_json config_echo(const RunConfig& cfg) {
    ordered_json j = to_json(cfg);
    j["initial_data"] = experiment_json(cfg.initial_data);
    ordered_json ex = ordered_json::array();
    for (const auto& e : cfg.experiments) ex.push_back(experiment_json(e));
    j["experiments"] = ex;
    j["output"] = {{"csv", cfg.output.csv}, {"json", cfg.output.json}, {"emit_plot_scripts", cfg.output.emit_plot_scripts}};
    j["verify"] = {{"scaling_draws", cfg.verify.scaling_draws},
                   {"random_fields", cfg.verify.random_fields},
                   {"minimality_fields", cfg.verify.minimality_fields},
                   {"virial_t_max", cfg.verify.virial_t_max}};
    return j;
}

ordered_json values_json(const FunctionalValues& v) {
    return {{"Q", v.Q}, {"K", v.K}, {"P", v.P}, {"E", v.E}, {"omega", v.omega}, {"I_omega", v.I_omega}, {"J", opt(v.J)}};
}

ordered_json ground_state_json(const GroundStateResult& gs) {
    const RadialGrid& g = gs.grid();
    const SharpConstant sc = sharp_constant(gs);
    return {{"n", gs.n},
            {"kappa", gs.kappa},
            {"omega", gs.omega},
            {"num_nodes", g.size()},
            {"r_max", g.r_max()},
            {"h", g.spacing()},
            {"iterations", gs.iterations},
            {"converged", gs.converged},
            {"diagnostic", gs.diagnostic},
            {"functionals", values_json(gs.values)},
            {"alpha1", gs.alpha1},
            {"alpha1_formula", alpha1_formula(gs.n, gs.values.Q)},
            {"C_op", gs.C_op},
            {"inverse_J", sc.inverse_J},
            {"sharp_constant_gap", sc.relative_gap},
            {"C_op_times_alpha1", gs.C_op * gs.alpha1},
            {"pohozaev_residuals", {{"P_2I", gs.pohozaev.p}, {"K_nI", gs.pohozaev.k}, {"omegaQ_6mnI", gs.pohozaev.q}}},
            {"elliptic_residual", gs.elliptic_residual}};
}

ordered_json detection_json(const Detection& d) {
    return {{"verdict", to_string(d.verdict)}, {"t_detect", opt(d.t_detect)}, {"reason", d.reason}};
}

ordered_json report_json(const DichotomyReport& r, const std::string& label) {
    ordered_json j;
    j["label"] = label;
    j["kappa"] = r.kappa;
    j["Q0"] = r.Q0;
    j["E0"] = r.E0;
    j["K0"] = r.K0;
    j["EQ"] = r.EQ;
    j["KQ"] = r.KQ;
    j["EQ_star"] = r.EQ_star;
    j["KQ_star"] = r.KQ_star;
    j["EQ_ratio"] = r.EQ_star != 0.0 ? r.EQ / r.EQ_star : std::numeric_limits<double>::quiet_NaN();
    j["KQ_ratio"] = r.KQ_star != 0.0 ? r.KQ / r.KQ_star : std::numeric_limits<double>::quiet_NaN();
    j["thresholds"] = {{"Q_gs", r.limits.Q_gs},
                       {"b", r.limits.b},
                       {"q", r.limits.q},
                       {"gamma", r.limits.gamma},
                       {"gamma_closed_form", r.limits.gamma_closed_form},
                       {"route_gap", r.limits.route_gap},
                       {"routes_consistent", r.limits.consistent},
                       {"a_bound", r.limits.a_bound}};
    j["margins"] = {{"EQ_margin", r.EQ_star - r.EQ}, {"KQ_margin", r.KQ_star - r.KQ}};
    j["comparison"] = {{"verdict", to_string(r.comparison.verdict)},
                       {"gamma", r.comparison.gamma},
                       {"delta2", opt(r.comparison.delta2)},
                       {"upper_root", opt(r.comparison.upper_root)},
                       {"reason", r.comparison.reason}};
    j["classification"] = to_string(r.classification);
    j["reason"] = r.reason;
    if (r.simulation) {
        const auto& s = *r.simulation;
        j["simulation"] = {{"detection", detection_json(s.detection)},
                           {"t_end", s.t_end},
                           {"samples", s.samples},
                           {"max_KQ_ratio", s.max_KQ_ratio},
                           {"min_f_relative", s.min_f_relative},
                           {"Q_drift", s.Q_drift},
                           {"E_drift", s.E_drift},
                           {"max_wall_fraction", s.max_wall_fraction},
                           {"warnings", s.warnings},
                           {"trajectory_csv", s.trajectory_csv.empty() ? ordered_json(nullptr)
                                                                       : ordered_json(fs::path(s.trajectory_csv).filename().string())}};
    } else {
        j["simulation"] = nullptr;
    }
    j["consistency"] = r.consistency ? ordered_json(to_string(*r.consistency)) : ordered_json(nullptr);
    return j;
}

ordered_json envelope(const RunConfig& cfg, const std::string& kind) {
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind;
    j["config"] = config_echo(cfg);
    return j;
}

void write_script(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
}

const char* kGroundStatePlot = R"(import csv, sys
import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "ground_state.csv"
with open(path) as f:
    rows = list(csv.reader(f))
r, phi, psi = [], [], []
for row in rows[3:]:
    r.append(float(row[0])); phi.append(float(row[1])); psi.append(float(row[2]))
plt.plot(r, phi, label="phi")
plt.plot(r, psi, label="psi")
plt.xlabel("r"); plt.legend(); plt.xlim(0, r[-1] / 2)
plt.savefig(path.replace(".csv", ".png"), dpi=120)
)";

const char* kTrajectoryPlot = R"(import csv, sys
import matplotlib.pyplot as plt

for path in sys.argv[1:] or ["trajectory.csv"]:
    with open(path) as f:
        rd = csv.DictReader(f)
        data = {k: [] for k in rd.fieldnames}
        for row in rd:
            for k in rd.fieldnames:
                data[k].append(float(row[k]))
    fig, ax = plt.subplots(1, 2, figsize=(10, 4))
    for k in ("Q", "E", "K"):
        ax[0].plot(data["t"], data[k], label=k)
    ax[0].set_yscale("symlog"); ax[0].legend(); ax[0].set_xlabel("t")
    ax[1].plot(data["t"], data["V"], label="V")
    ax[1].legend(); ax[1].set_xlabel("t")
    fig.savefig(path.replace(".csv", ".png"), dpi=120)
)";

GroundStateResult obtain_ground_state(const RunConfig& cfg) {
    if (cfg.ground_state_csv.empty()) return solve(cfg.ground_state);
    GroundStateResult gs = load_ground_state_csv(cfg.ground_state_csv);
    if (gs.n != cfg.n || std::abs(gs.kappa - cfg.system.kappa) > 0.0) {
        throw ConfigError("ground_state.load: file holds n = " + std::to_string(gs.n) + ", kappa = " +
                          std::to_string(gs.kappa) + ", which does not match the grid/system blocks");
    }
    refresh_diagnostics(gs, cfg.ground_state.tol_pohozaev, cfg.ground_state.tol_pde);
    return gs;
}

void require_converged(const GroundStateResult& gs) {
    if (!gs.converged) {
        std::string why = "ground state did not converge (pohozaev max " + std::to_string(gs.pohozaev.max()) +
                          ", elliptic residual " + std::to_string(gs.elliptic_residual) + ")";
        if (!gs.diagnostic.empty()) why += ": " + gs.diagnostic;
        throw NumericalFailure(why);
    }
}

int run_ground_state(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const GroundStateResult gs = obtain_ground_state(cfg);
    ordered_json j = envelope(cfg, "ground_state");
    j["result"] = ground_state_json(gs);
    if (cfg.output.csv) {
        save_ground_state_csv(gs, (dir / "ground_state.csv").string());
        j["files"] = {{"ground_state_csv", "ground_state.csv"}};
    }
    if (cfg.output.json) write_json_file(j, (dir / "ground_state.json").string());
    if (cfg.output.emit_plot_scripts) write_script(dir / "plot_ground_state.py", kGroundStatePlot);
    out << "ground-state n=" << gs.n << " kappa=" << gs.kappa << " alpha1=" << gs.alpha1 << " C_op=" << gs.C_op
        << " iterations=" << gs.iterations << " converged=" << (gs.converged ? "yes" : "no") << "\n";
    require_converged(gs);
    return 0;
}

int run_evolve(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const GroundStateResult gs = obtain_ground_state(cfg);
    const ExperimentSpec& spec = cfg.initial_data;
    if (spec.family == "scaled_ground_state") require_converged(gs);
    const FieldPair data = initial_data(spec, gs);
    const TrajectoryRecord rec = evolve(data, spec.evolve);
    const Detection det = detect_blowup(rec, spec.evolve);

    const double Q0 = rec.Q_series.front(), E0 = rec.E_series.front();
    double dq = 0.0, de = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (Q0 > 0.0) dq = std::max(dq, std::abs(rec.Q_series[i] - Q0) / Q0);
        if (E0 != 0.0) de = std::max(de, std::abs(rec.E_series[i] - E0) / std::abs(E0));
    }
    ordered_json j = envelope(cfg, "evolve");
    j["initial"] = {{"Q", Q0}, {"E", E0}, {"K", rec.K_series.front()}, {"P", rec.P_series.front()}, {"V", rec.V_series.front()}};
    j["detection"] = detection_json(det);
    j["trajectory"] = {{"samples", rec.size()},
                       {"steps", rec.steps},
                       {"reduced_steps", rec.substeps},
                       {"t_end", rec.times.back()},
                       {"reached_t_max", rec.reached_t_max},
                       {"step_failure", rec.step_failure},
                       {"Q_drift", dq},
                       {"E_drift", de},
                       {"max_wall_fraction", rec.max_wall_fraction},
                       {"warnings", rec.warnings}};
    if (cfg.output.csv) {
        write_trajectory_csv(rec, (dir / "trajectory.csv").string());
        j["files"] = {{"trajectory_csv", "trajectory.csv"}};
    }
    if (cfg.output.json) write_json_file(j, (dir / "evolve.json").string());
    if (cfg.output.emit_plot_scripts) write_script(dir / "plot_trajectory.py", kTrajectoryPlot);
    out << "evolve verdict=" << to_string(det.verdict) << " t_end=" << rec.times.back() << " dQ=" << dq << " dE=" << de
        << "\n";
    return 0;
}

int run_dichotomy(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    if (cfg.n != 5) throw ConfigError("grid.n: the dichotomy is stated for n = 5 (got " + std::to_string(cfg.n) + ")");
    const GroundStateResult gs = obtain_ground_state(cfg);
    require_converged(gs);
    std::vector<ExperimentSpec> specs = cfg.experiments;
    if (specs.empty()) specs.push_back(cfg.initial_data);
    std::vector<std::string> csvs;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        csvs.push_back(cfg.output.csv ? (dir / ("trajectory_" + std::to_string(i) + ".csv")).string() : std::string());
    }
    const auto reports = run_experiments(specs, gs, csvs);

    ordered_json j = envelope(cfg, "dichotomy");
    j["ground_state"] = ground_state_json(gs);
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string label = specs[i].label.empty() ? "experiment_" + std::to_string(i) : specs[i].label;
        arr.push_back(report_json(reports[i], label));
        const auto& r = reports[i];
        out << label << ": " << to_string(r.classification) << " + "
            << (r.simulation ? to_string(r.simulation->detection.verdict) : std::string("-")) << " ("
            << (r.consistency ? to_string(*r.consistency) : std::string("-")) << ")\n";
    }
    j["reports"] = arr;
    if (cfg.output.json) write_json_file(j, (dir / "dichotomy.json").string());
    if (cfg.output.emit_plot_scripts && cfg.output.csv) write_script(dir / "plot_trajectory.py", kTrajectoryPlot);
    int status = 0;
    for (const auto& r : reports) {
        if (!r.limits.consistent) {
            throw NumericalFailure("threshold routes disagree: gamma gap " + std::to_string(r.limits.route_gap));
        }
        if (r.consistency && *r.consistency == Consistency::DISAGREE) status = 1;
    }
    if (status) throw NumericalFailure("simulation verdict contradicts the classification");
    return 0;
}

int run_verify_cmd(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const GroundStateResult gs = obtain_ground_state(cfg);
    const VerifyReport rep = run_verify(cfg, &gs);
    ordered_json j = envelope(cfg, "verify");
    j["ground_state"] = ground_state_json(gs);
    ordered_json arr = ordered_json::array();
    for (const auto& c : rep.checks) {
        arr.push_back({{"name", c.name},
                       {"measured", c.measured},
                       {"tolerance", c.tolerance},
                       {"status", c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL")},
                       {"detail", c.detail}});
        out << (c.skipped ? "SKIP " : (c.passed ? "PASS " : "FAIL ")) << c.name << " measured=" << c.measured
            << " tol=" << c.tolerance << "\n";
    }
    j["checks"] = arr;
    j["all_passed"] = rep.all_passed() && gs.converged;
    if (cfg.output.json) write_json_file(j, (dir / "verify.json").string());
    require_converged(gs);
    if (const auto* f = rep.first_failure()) {
        throw NumericalFailure("invariant " + f->name + " failed: measured " + std::to_string(f->measured) +
                               " > tolerance " + std::to_string(f->tolerance));
    }
    return 0;
}

}  // namespace

RunConfig build_config(const Options& opts) {
    ordered_json doc = default_config_json();
    if (!opts.config_path.empty()) merge_json(doc, load_json_file(opts.config_path));
    for (const auto& s : opts.sets) apply_override(doc, s);
    if (opts.out) doc["output"]["directory"] = *opts.out;
    if (opts.seed) doc["seed"] = *opts.seed;
    return parse_config(doc, opts.subcommand);
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        const fs::path dir(cfg.output.directory);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec || !fs::is_directory(dir)) {
            err << "error: output directory '" << dir.string() << "' is not writable\n";
            return 2;
        }
        if (cfg.subcommand == "ground-state") return run_ground_state(cfg, dir, out);
        if (cfg.subcommand == "evolve") return run_evolve(cfg, dir, out);
        if (cfg.subcommand == "dichotomy") return run_dichotomy(cfg, dir, out);
        if (cfg.subcommand == "verify") return run_verify_cmd(cfg, dir, out);
        err << "error: unknown subcommand '" << cfg.subcommand << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

int main_entry(const Options& opts, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = build_config(opts);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    }
    return run(cfg, out, err);
}

}  // namespace qnls::cli
