#include "qnls/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>

namespace qnls {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_mass_resonance(double kappa, const char* what) {
    if (std::abs(kappa - 0.5) > 1e-12) {
        throw std::invalid_argument(std::string(what) +
                                    " holds only under mass resonance kappa = 1/2 (got kappa = " +
                                    std::to_string(kappa) + ")");
    }
}

struct Snapshot {
    double Q, K, P;
};

Snapshot snapshot(const RadialGrid& g, const std::vector<cplx>& u, const std::vector<cplx>& v,
                  double kappa) {
    return {charge(g, std::span<const cplx>(u), std::span<const cplx>(v)),
            kinetic(g, std::span<const cplx>(u), std::span<const cplx>(v), kappa),
            interaction(g, std::span<const cplx>(u), std::span<const cplx>(v))};
}

double weight_sum(const RadialGrid& g, std::span<const cplx> u, std::span<const cplx> v,
                  const std::vector<double>& phi) {
    const auto w = g.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += w[j] * phi[j] * (std::norm(u[j]) + 2.0 * std::norm(v[j]));
    return 0.5 * acc;
}

double wall_fraction_raw(const RadialGrid& g, std::span<const cplx> u, std::span<const cplx> v) {
    const auto w = g.weights();
    const std::size_t N = g.size();
    double total = 0.0, outer = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const double m = w[j] * (std::norm(u[j]) + 2.0 * std::norm(v[j]));
        total += m;
        if (j >= N - N / 10) outer += m;
    }
    return total > 0.0 ? outer / total : 0.0;
}

}  // namespace

void EvolveConfig::validate() const {
    if (!(kappa > 0.0)) throw std::invalid_argument("evolve.kappa must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve.dt must be positive");
    if (!(t_max > 0.0)) throw std::invalid_argument("evolve.t_max must be positive");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("evolve.solver_tol must be positive");
    if (max_picard < 1) throw std::invalid_argument("evolve.max_picard must be at least 1");
    if (!(blowup_K_factor > 1.0)) throw std::invalid_argument("evolve.blowup_K_factor must exceed 1");
    if (dt_min < 0.0 || dt_min > dt) throw std::invalid_argument("evolve.dt_min must lie in [0, dt]");
    if (sample_every < 1) throw std::invalid_argument("evolve.sample_every must be at least 1");
    if (order != 2 && order != 4) throw std::invalid_argument("evolve.order must be 2 or 4");
}

MidpointStepper::MidpointStepper(const RadialGrid& grid, double kappa, double dt, double solver_tol,
                                 int max_picard)
    : grid_(grid),
      kappa_(kappa),
      dt_(dt),
      tol_(solver_tol),
      max_picard_(max_picard),
      A_u_(stiffness_plus_mass<cplx>(grid, kI * (0.5 * dt), cplx(1.0))),
      A_v_(stiffness_plus_mass<cplx>(grid, kI * (0.5 * dt * kappa), cplx(1.0))) {
    if (!(kappa > 0.0)) throw std::invalid_argument("MidpointStepper: kappa must be positive");
    if (dt == 0.0 || !std::isfinite(dt)) throw std::invalid_argument("MidpointStepper: dt must be finite and nonzero");
}

// Midpoint y = (x0 + x1)/2 solves
//   (W + i dt/2 S) y_u = W (u0 + i dt y_v conj(y_u))
//   (W + i dt/2 kappa S) y_v = W (v0 + i dt/2 y_u^2)
// with Lap = -W^{-1} S; then x1 = 2y - x0.
bool MidpointStepper::advance(std::vector<cplx>& u, std::vector<cplx>& v) const {
    const std::size_t N = grid_.size();
    if (u.size() != N || v.size() != N) throw std::invalid_argument("MidpointStepper: state size mismatch");
    const auto w = grid_.weights();
    std::vector<cplx> yu(u), yv(v), ru(N), rv(N);
    const cplx a_u = kI * dt_;
    const cplx a_v = kI * (0.5 * dt_);
    double prev_change = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_picard_; ++k) {
        last_iterations_ = k;
        for (std::size_t j = 0; j < N; ++j) ru[j] = w[j] * (u[j] + a_u * yv[j] * std::conj(yu[j]));
        A_u_.solve_in_place(ru);
        for (std::size_t j = 0; j < N; ++j) rv[j] = w[j] * (v[j] + a_v * ru[j] * ru[j]);
        A_v_.solve_in_place(rv);
        double change = 0.0, size = 0.0;
        for (std::size_t j = 0; j < N; ++j) {
            change += w[j] * (std::norm(ru[j] - yu[j]) + 2.0 * std::norm(rv[j] - yv[j]));
            size += w[j] * (std::norm(ru[j]) + 2.0 * std::norm(rv[j]));
        }
        yu.swap(ru);
        yv.swap(rv);
        change = std::sqrt(change);
        size = std::sqrt(size);
        if (!std::isfinite(change) || !std::isfinite(size)) return false;
        if (change <= tol_ * size) {
            for (std::size_t j = 0; j < N; ++j) {
                u[j] = 2.0 * yu[j] - u[j];
                v[j] = 2.0 * yv[j] - v[j];
            }
            return true;
        }
        // A growing update after the first few sweeps means the contraction is lost.
        if (k > 3 && change > 2.0 * prev_change) return false;
        prev_change = change;
    }
    return false;
}

Propagator::Propagator(const RadialGrid& grid, double kappa, double dt, double solver_tol, int max_picard,
                       int order)
    : dt_(dt), order_(order) {
    if (order == 2) {
        stages_.emplace_back(grid, kappa, dt, solver_tol, max_picard);
    } else if (order == 4) {
        const double g1 = 1.0 / (2.0 - std::cbrt(2.0));
        const double g2 = 1.0 - 2.0 * g1;
        stages_.emplace_back(grid, kappa, g1 * dt, solver_tol, max_picard);
        stages_.emplace_back(grid, kappa, g2 * dt, solver_tol, max_picard);
    } else {
        throw std::invalid_argument("integrator order must be 2 or 4");
    }
}

bool Propagator::advance(std::vector<cplx>& u, std::vector<cplx>& v) const {
    if (order_ == 2) return stages_[0].advance(u, v);
    const std::vector<cplx> u0(u), v0(v);
    if (stages_[0].advance(u, v) && stages_[1].advance(u, v) && stages_[0].advance(u, v)) return true;
    u = u0;
    v = v0;
    return false;
}

FieldPair step(const FieldPair& state, const EvolveConfig& cfg) {
    cfg.validate();
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    std::vector<cplx> u(s.u.samples().begin(), s.u.samples().end());
    std::vector<cplx> v(s.v.samples().begin(), s.v.samples().end());
    Propagator stepper(g, cfg.kappa, cfg.dt, cfg.solver_tol, cfg.max_picard, cfg.order);
    if (!stepper.advance(u, v)) {
        throw StepFailure("midpoint fixed-point iteration did not converge in " +
                          std::to_string(cfg.max_picard) + " sweeps (dt = " + std::to_string(cfg.dt) + ")");
    }
    return make_field_pair(s.u.base_grid_ptr(), std::move(u), std::move(v));
}

TrajectoryRecord evolve(const FieldPair& state, const EvolveConfig& cfg, const std::vector<Monitor>& monitors,
                        FieldPair* final_state) {
    cfg.validate();
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    const GridPtr gp = s.u.base_grid_ptr();
    const int n = g.dimension();
    const bool resonant = std::abs(cfg.kappa - 0.5) <= 1e-12;
    std::vector<cplx> u(s.u.samples().begin(), s.u.samples().end());
    std::vector<cplx> v(s.v.samples().begin(), s.v.samples().end());

    std::vector<double> r2(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) r2[j] = g.nodes()[j] * g.nodes()[j];

    TrajectoryRecord rec;
    rec.kappa = cfg.kappa;
    rec.t_max = cfg.t_max;

    auto record = [&](double t) {
        const Snapshot sn = snapshot(g, u, v, cfg.kappa);
        const double E = sn.K - 2.0 * sn.P;
        rec.times.push_back(t);
        rec.Q_series.push_back(sn.Q);
        rec.E_series.push_back(E);
        rec.K_series.push_back(sn.K);
        rec.P_series.push_back(sn.P);
        rec.V_series.push_back(weight_sum(g, u, v, r2));
        if (resonant) rec.rhs_series.push_back(2.0 * n * E + 2.0 * (4.0 - n) * sn.K);
        const double wf = wall_fraction_raw(g, u, v);
        if (wf > rec.max_wall_fraction) rec.max_wall_fraction = wf;
        if (wf > 1e-6 && rec.warnings.empty()) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "reflection risk: %.3g of the charge in the outer 10%% of the grid at t = %.6g",
                          wf, t);
            rec.warnings.emplace_back(buf);
        }
        if (!monitors.empty()) {
            const FieldPair cur = make_field_pair(gp, u, v);
            FunctionalValues fv;
            fv.Q = sn.Q;
            fv.K = sn.K;
            fv.P = sn.P;
            fv.E = E;
            fv.omega = 1.0;
            fv.I_omega = 0.5 * (E + sn.Q);
            for (const auto& m : monitors) m(t, cur, fv);
        }
        return sn.K;
    };

    const double K0 = record(0.0);
    const double K_limit = cfg.blowup_K_factor * K0;
    const double dt_min = cfg.effective_dt_min();

    std::map<int, std::unique_ptr<Propagator>> steppers;
    auto stepper_at = [&](int level) -> const Propagator& {
        auto& slot = steppers[level];
        if (!slot) {
            slot = std::make_unique<Propagator>(g, cfg.kappa, std::ldexp(cfg.dt, -level), cfg.solver_tol,
                                                cfg.max_picard, cfg.order);
        }
        return *slot;
    };
    // Advance by dt * 2^{-level}, halving on failure down to dt_min.
    std::function<bool(int)> advance = [&](int level) -> bool {
        if (stepper_at(level).advance(u, v)) {
            if (level > 0) ++rec.substeps;
            return true;
        }
        if (std::ldexp(cfg.dt, -(level + 1)) < dt_min * (1.0 - 1e-12)) return false;
        return advance(level + 1) && advance(level + 1);
    };

    const long nsteps = std::max(1L, std::lround(cfg.t_max / cfg.dt));
    for (long k = 1; k <= nsteps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        if (!advance(0)) {
            rec.step_failure = true;
            rec.blowup_detected = true;
            rec.t_detect = static_cast<double>(k - 1) * cfg.dt;
            break;
        }
        ++rec.steps;
        const bool sample = (k % cfg.sample_every == 0) || k == nsteps;
        double K;
        if (sample) {
            K = record(t);
        } else {
            K = kinetic(g, std::span<const cplx>(u), std::span<const cplx>(v), cfg.kappa);
        }
        if (K0 > 0.0 && K >= K_limit) {
            if (!sample) record(t);
            rec.blowup_detected = true;
            rec.t_detect = t;
            break;
        }
        if (k == nsteps) rec.reached_t_max = true;
    }
    if (final_state) *final_state = make_field_pair(gp, std::move(u), std::move(v));
    return rec;
}

double virial_rhs(const FieldPair& state, double kappa) {
    require_mass_resonance(kappa, "the virial identity");
    const FieldPair s = materialize(state);
    const int n = common_grid(s).dimension();
    const double K = kinetic(s, kappa);
    const double E = K - 2.0 * interaction(s);
    return 2.0 * n * E + 2.0 * (4.0 - n) * K;
}

double virial_weight(const FieldPair& state) {
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    std::vector<double> r2(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) r2[j] = g.nodes()[j] * g.nodes()[j];
    return weight_sum(g, s.u.samples(), s.v.samples(), r2);
}

double localized_virial_weight(const FieldPair& state, const CutoffProfile& cutoff) {
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    if (!cutoff.matches(g)) throw std::invalid_argument("cutoff profile sampled on a different grid");
    return weight_sum(g, s.u.samples(), s.v.samples(), cutoff.chi());
}

double localized_virial_rhs(const FieldPair& state, const CutoffProfile& cutoff, double kappa) {
    require_mass_resonance(kappa, "the localized virial identity");
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    if (!cutoff.matches(g)) throw std::invalid_argument("cutoff profile sampled on a different grid");
    const auto u = s.u.samples();
    const auto v = s.v.samples();
    const auto w = g.weights();
    const auto c = g.face_coefficients();
    const auto& chi2 = cutoff.chi2_faces();
    const auto& lap = cutoff.laplacian();
    const auto& bilap = cutoff.bilaplacian();
    const std::size_t N = g.size();
    double grad = 0.0, bi = 0.0, coupling = 0.0;
    for (std::size_t j = 0; j < N; ++j) {
        const cplx du = (j + 1 < N ? u[j + 1] : cplx{}) - u[j];
        const cplx dv = (j + 1 < N ? v[j + 1] : cplx{}) - v[j];
        grad += c[j] * chi2[j] * (std::norm(du) + 0.5 * std::norm(dv));
        bi += w[j] * bilap[j] * (std::norm(u[j]) + 0.5 * std::norm(v[j]));
        coupling += w[j] * lap[j] * (std::conj(v[j]) * u[j] * u[j]).real();
    }
    return 2.0 * grad - 0.5 * bi - coupling;
}

double wall_fraction(const FieldPair& state) {
    const FieldPair s = materialize(state);
    return wall_fraction_raw(common_grid(s), s.u.samples(), s.v.samples());
}

std::string to_string(BlowupVerdict v) {
    switch (v) {
        case BlowupVerdict::BLOWUP: return "BLOWUP";
        case BlowupVerdict::BOUNDED: return "BOUNDED";
        case BlowupVerdict::INCONCLUSIVE: return "INCONCLUSIVE";
    }
    return "INCONCLUSIVE";
}

Detection detect_blowup(const TrajectoryRecord& record, const EvolveConfig& cfg, std::optional<double> k_threshold) {
    Detection d;
    if (record.times.empty() || record.K_series.empty()) {
        d.reason = "empty trajectory";
        return d;
    }
    const double K0 = record.K_series.front();
    const double K_limit = cfg.blowup_K_factor * K0;
    if (record.step_failure) {
        d.verdict = BlowupVerdict::BLOWUP;
        d.t_detect = record.t_detect;
        d.reason = "time step failed at dt_min";
        return d;
    }
    for (std::size_t i = 0; i < record.K_series.size(); ++i) {
        if (K0 > 0.0 && record.K_series[i] >= K_limit) {
            d.verdict = BlowupVerdict::BLOWUP;
            d.t_detect = record.times[i];
            d.reason = "K grew past blowup_K_factor * K(0)";
            return d;
        }
    }
    if (record.blowup_detected) {
        d.verdict = BlowupVerdict::BLOWUP;
        d.t_detect = record.t_detect;
        d.reason = "flagged during integration";
        return d;
    }
    if (!record.reached_t_max) {
        d.reason = "run stopped before t_max";
        return d;
    }
    const double bound = k_threshold.value_or(K_limit);
    double K_peak = 0.0;
    for (double K : record.K_series) K_peak = std::max(K_peak, K);
    if (K_peak < bound || K0 == 0.0) {
        d.verdict = BlowupVerdict::BOUNDED;
        d.reason = "t_max reached with K below the threshold";
    } else {
        d.reason = "t_max reached but K exceeded the threshold";
    }
    return d;
}

void write_trajectory_csv(const TrajectoryRecord& rec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    const bool rhs = rec.rhs_series.size() == rec.times.size() && !rec.rhs_series.empty();
    out << "t,Q,E,K,P,V" << (rhs ? ",virial_rhs" : "") << "\n";
    char buf[512];
    for (std::size_t i = 0; i < rec.times.size(); ++i) {
        int len = std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", rec.times[i],
                                rec.Q_series[i], rec.E_series[i], rec.K_series[i], rec.P_series[i],
                                rec.V_series[i]);
        out.write(buf, len);
        if (rhs) {
            len = std::snprintf(buf, sizeof buf, ",%.17g", rec.rhs_series[i]);
            out.write(buf, len);
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

double second_difference5(const std::vector<double>& y, std::size_t i, double tau) {
    if (i < 2 || i + 2 >= y.size()) throw std::out_of_range("second_difference5: stencil leaves the series");
    return (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) / (12.0 * tau * tau);
}

}  // namespace qnls
