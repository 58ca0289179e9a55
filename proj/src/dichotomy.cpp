#include "qnls/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace qnls {

namespace {

constexpr double kBoundaryTol = 1e-9;

bool near(double x, double y, double tol) { return std::abs(x - y) <= tol * std::max(std::abs(x), std::abs(y)); }

}  // namespace

void ComparisonSetup::validate() const {
    if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("comparison: b must be positive");
    if (!(q > 1.0)) throw std::invalid_argument("comparison: q must exceed 1");
    if (delta1 && !(*delta1 >= 0.0 && *delta1 < 1.0)) {
        throw std::invalid_argument("comparison: delta1 must lie in [0, 1)");
    }
}

double ComparisonSetup::gamma() const { return std::pow(b * q, -1.0 / (q - 1.0)); }

double ComparisonSetup::f(double r) const { return a - r + b * std::pow(r, q); }

double ComparisonSetup::a_bound() const { return (1.0 - 1.0 / q) * gamma(); }

std::string to_string(ComparisonVerdict v) {
    switch (v) {
        case ComparisonVerdict::STAYS_BELOW: return "STAYS_BELOW";
        case ComparisonVerdict::STAYS_ABOVE: return "STAYS_ABOVE";
        case ComparisonVerdict::INDETERMINATE: return "INDETERMINATE";
    }
    return "INDETERMINATE";
}

ComparisonResult comparison_classify(const ComparisonSetup& setup, double G0) {
    setup.validate();
    ComparisonResult res;
    res.gamma = setup.gamma();
    const double gamma = res.gamma;
    if (!(setup.a < setup.a_bound())) {
        res.reason = "a >= (1 - 1/q) gamma: hypothesis of the comparison argument fails";
        return res;
    }
    if (G0 == gamma) {
        res.reason = "G(0) = gamma is the excluded boundary case";
        return res;
    }
    if (G0 < gamma) {
        res.verdict = ComparisonVerdict::STAYS_BELOW;
        res.reason = "G(0) < gamma";
        return res;
    }
    res.verdict = ComparisonVerdict::STAYS_ABOVE;
    res.reason = "G(0) > gamma";
    const double d1 = setup.delta1.value_or(0.0);
    if (setup.a < (1.0 - d1) * setup.a_bound()) {
        // f < 0 on (gamma, r+) and f(G(t)) >= 0, so G(t) >= r+ = (1 + delta2) gamma.
        double lo = gamma, hi = 2.0 * gamma;
        while (setup.f(hi) < 0.0) {
            lo = hi;
            hi *= 2.0;
        }
        while (hi - lo > 1e-10) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            (setup.f(mid) < 0.0 ? lo : hi) = mid;
        }
        res.upper_root = hi;
        res.delta2 = hi / gamma - 1.0;
    }
    return res;
}

Thresholds thresholds(const GroundStateResult& gs, double Q0) {
    if (gs.n != 5) throw std::invalid_argument("thresholds are stated for n = 5 ground states");
    if (gs.omega != 1.0) throw std::invalid_argument("thresholds need the omega = 1 ground state");
    if (!(Q0 > 0.0)) throw std::invalid_argument("thresholds need Q0 > 0");
    Thresholds t;
    const FunctionalValues v = evaluate(gs.state, gs.kappa, 1.0);
    t.Q_gs = v.Q;
    t.EQ_star = v.E * v.Q;
    t.KQ_star = v.K * v.Q;
    t.q = 1.25;
    t.b = 2.0 * sharp_constant_formula(5, v.Q) * std::pow(Q0, 0.25);
    ComparisonSetup cs{0.0, t.b, t.q, std::nullopt};
    t.gamma = cs.gamma();
    t.gamma_closed_form = 5.0 * v.Q * v.Q / Q0;
    t.route_gap = std::abs(t.gamma - t.gamma_closed_form) / t.gamma_closed_form;
    t.consistent = t.route_gap <= 1e-6;
    t.a_bound = cs.a_bound();
    return t;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::GLOBAL: return "GLOBAL";
        case Classification::BLOWUP_CANDIDATE: return "BLOWUP_CANDIDATE";
        case Classification::INDETERMINATE: return "INDETERMINATE";
    }
    return "INDETERMINATE";
}

std::string to_string(Consistency c) {
    switch (c) {
        case Consistency::AGREE: return "AGREE";
        case Consistency::DISAGREE: return "DISAGREE";
        case Consistency::OUTSIDE_THEOREM: return "OUTSIDE_THEOREM";
        case Consistency::UNRESOLVED: return "UNRESOLVED";
    }
    return "UNRESOLVED";
}

DichotomyReport classify_data(const FieldPair& state, const GroundStateResult& gs, double kappa) {
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    if (g.dimension() != 5 || gs.n != 5) {
        throw std::invalid_argument("classify_data: the dichotomy is stated for n = 5 (got data n = " +
                                    std::to_string(g.dimension()) + ", ground state n = " + std::to_string(gs.n) + ")");
    }
    if (!near(kappa, gs.kappa, 1e-14)) {
        throw std::invalid_argument("classify_data: ground state was computed for a different kappa");
    }
    DichotomyReport rep;
    rep.kappa = kappa;
    const FunctionalValues v = evaluate(s, kappa, 1.0);
    rep.Q0 = v.Q;
    rep.E0 = v.E;
    rep.K0 = v.K;
    rep.EQ = v.E * v.Q;
    rep.KQ = v.K * v.Q;
    const FunctionalValues w = evaluate(gs.state, gs.kappa, 1.0);
    rep.EQ_star = w.E * w.Q;
    rep.KQ_star = w.K * w.Q;

    if (rep.Q0 == 0.0) {
        rep.classification = Classification::GLOBAL;
        rep.reason = "zero data";
        rep.comparison.verdict = ComparisonVerdict::STAYS_BELOW;
        rep.comparison.gamma = std::numeric_limits<double>::infinity();
        rep.comparison.reason = "Q0 = 0";
        rep.limits.EQ_star = rep.EQ_star;
        rep.limits.KQ_star = rep.KQ_star;
        rep.limits.Q_gs = w.Q;
        rep.limits.gamma = rep.limits.gamma_closed_form = rep.limits.a_bound =
            std::numeric_limits<double>::infinity();
        rep.limits.consistent = true;
        return rep;
    }

    rep.limits = thresholds(gs, rep.Q0);
    rep.comparison = comparison_classify(ComparisonSetup{rep.E0, rep.limits.b, rep.limits.q, std::nullopt}, rep.K0);

    if (rep.EQ >= rep.EQ_star * (1.0 - kBoundaryTol)) {
        rep.classification = Classification::INDETERMINATE;
        rep.reason = "E Q >= E Q of the ground state: outside both theorems";
    } else if (near(rep.KQ, rep.KQ_star, kBoundaryTol)) {
        rep.classification = Classification::INDETERMINATE;
        rep.reason = "K Q equals the ground-state value";
    } else if (rep.KQ < rep.KQ_star) {
        rep.classification = Classification::GLOBAL;
        rep.reason = "E Q < E Q* and K Q < K Q*";
    } else {
        rep.classification = Classification::BLOWUP_CANDIDATE;
        rep.reason = "E Q < E Q* and K Q > K Q*";
        if (std::abs(kappa - 0.5) > 1e-12) rep.reason += " (blow-up result assumes kappa = 1/2)";
    }
    return rep;
}

void ExperimentSpec::validate() const {
    if (family != "scaled_ground_state" && family != "gaussian") {
        throw std::invalid_argument("experiment family must be scaled_ground_state or gaussian, got '" + family + "'");
    }
    if (family == "scaled_ground_state" && !(scale_factor > 0.0)) {
        throw std::invalid_argument("scale_factor must be positive");
    }
    if (family == "gaussian" && !(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
    if (r_max < 0.0) throw std::invalid_argument("experiment r_max must be >= 0");
    evolve.validate();
}

FieldPair initial_data(const ExperimentSpec& spec, const GroundStateResult& gs) {
    spec.validate();
    const FieldPair base = materialize(gs.state);
    const auto& g = common_grid(base);
    const double h = g.spacing();
    std::size_t N = g.size();
    if (spec.r_max > g.r_max()) N = static_cast<std::size_t>(std::ceil(spec.r_max / h - 1e-9));
    const GridPtr grid = N == g.size() ? base.u.base_grid_ptr()
                                       : std::make_shared<const RadialGrid>(RadialGrid::with_spacing(g.dimension(), h, N));
    std::vector<cplx> u(N), v(N);
    if (spec.family == "scaled_ground_state") {
        const auto phi = base.u.samples();
        const auto psi = base.v.samples();
        for (std::size_t j = 0; j < g.size(); ++j) {
            u[j] = spec.scale_factor * phi[j];
            v[j] = spec.scale_factor * psi[j];
        }
    } else {
        const auto r = grid->nodes();
        for (std::size_t j = 0; j < N; ++j) {
            const double e = std::exp(-(r[j] * r[j]) / (spec.width * spec.width));
            u[j] = spec.amplitude_u * e;
            v[j] = spec.amplitude_v * e;
        }
    }
    return make_field_pair(grid, std::move(u), std::move(v));
}

DichotomyReport run_experiment(const ExperimentSpec& spec, const GroundStateResult& gs,
                               const std::string& trajectory_csv) {
    const FieldPair data = initial_data(spec, gs);
    DichotomyReport rep = classify_data(data, gs, spec.evolve.kappa);
    const TrajectoryRecord rec = evolve(data, spec.evolve);
    if (!trajectory_csv.empty()) write_trajectory_csv(rec, trajectory_csv);

    SimulationSummary sim;
    const double gamma = rep.Q0 > 0.0 ? rep.KQ_star / rep.Q0 : std::numeric_limits<double>::infinity();
    sim.detection = detect_blowup(rec, spec.evolve, gamma);
    sim.t_end = rec.times.empty() ? 0.0 : rec.times.back();
    sim.samples = rec.size();
    sim.max_wall_fraction = rec.max_wall_fraction;
    sim.warnings = rec.warnings;
    sim.trajectory_csv = trajectory_csv;
    const ComparisonSetup cs{rep.E0, rep.limits.b, rep.limits.q, std::nullopt};
    sim.min_f_relative = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rec.size(); ++i) {
        const double K = rec.K_series[i];
        if (rep.KQ_star > 0.0) sim.max_KQ_ratio = std::max(sim.max_KQ_ratio, K * rep.Q0 / rep.KQ_star);
        if (rep.Q0 > 0.0 && K > 0.0) sim.min_f_relative = std::min(sim.min_f_relative, cs.f(K) / K);
        if (rep.Q0 > 0.0) {
            sim.Q_drift = std::max(sim.Q_drift, std::abs(rec.Q_series[i] - rep.Q0) / rep.Q0);
            if (rep.E0 != 0.0) sim.E_drift = std::max(sim.E_drift, std::abs(rec.E_series[i] - rep.E0) / std::abs(rep.E0));
        }
    }
    if (!std::isfinite(sim.min_f_relative)) sim.min_f_relative = 0.0;

    const bool resonant = std::abs(spec.evolve.kappa - 0.5) <= 1e-12;
    const BlowupVerdict verdict = sim.detection.verdict;
    Consistency c = Consistency::UNRESOLVED;
    if (rep.classification == Classification::INDETERMINATE) {
        c = Consistency::OUTSIDE_THEOREM;
    } else if (rep.classification == Classification::BLOWUP_CANDIDATE && !resonant) {
        c = Consistency::OUTSIDE_THEOREM;
    } else if (verdict == BlowupVerdict::INCONCLUSIVE) {
        c = Consistency::UNRESOLVED;
    } else if (rep.classification == Classification::GLOBAL) {
        c = verdict == BlowupVerdict::BOUNDED ? Consistency::AGREE : Consistency::DISAGREE;
    } else {
        c = verdict == BlowupVerdict::BLOWUP ? Consistency::AGREE : Consistency::DISAGREE;
    }
    rep.consistency = c;
    rep.simulation = std::move(sim);
    return rep;
}

std::vector<DichotomyReport> run_experiments(const std::vector<ExperimentSpec>& specs, const GroundStateResult& gs,
                                             const std::vector<std::string>& trajectory_csvs) {
    if (!trajectory_csvs.empty() && trajectory_csvs.size() != specs.size()) {
        throw std::invalid_argument("run_experiments: one trajectory path per experiment expected");
    }
    std::vector<std::future<DichotomyReport>> jobs;
    jobs.reserve(specs.size());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const std::string path = trajectory_csvs.empty() ? std::string() : trajectory_csvs[i];
        jobs.push_back(std::async(std::launch::async, [&specs, &gs, i, path] { return run_experiment(specs[i], gs, path); }));
    }
    std::vector<DichotomyReport> out;
    out.reserve(specs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace qnls
