#pragma once

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qnls/cutoff.hpp"
#include "qnls/functionals.hpp"
#include "qnls/tridiagonal.hpp"

namespace qnls {

struct EvolveConfig {
    double kappa = 0.5;
    double dt = 1e-3;
    double t_max = 1.0;
    double solver_tol = 1e-12;
    int max_picard = 100;
    double blowup_K_factor = 50.0;
    double dt_min = 0.0;   // 0 means dt / 1024
    int sample_every = 10;  // steps between recorded samples
    int order = 4;          // 2: plain implicit midpoint; 4: symmetric triple-jump of midpoint substeps

    void validate() const;
    double effective_dt_min() const { return dt_min > 0.0 ? dt_min : dt / 1024.0; }
};

/// Raised by step() when the midpoint fixed-point iteration does not converge.
class StepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrajectoryRecord {
    double kappa = 0.5;
    std::vector<double> times;
    std::vector<double> Q_series, E_series, K_series, P_series, V_series;
    std::vector<double> rhs_series;  // 2nE + 2(4-n)K, only when kappa = 1/2
    bool blowup_detected = false;
    std::optional<double> t_detect;
    bool step_failure = false;
    bool reached_t_max = false;
    double t_max = 0.0;
    long steps = 0;
    long substeps = 0;  // steps taken with a reduced dt
    double max_wall_fraction = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const { return times.size(); }
};

/// Implicit midpoint for
///   i u_t + Lap u = -2 v conj(u),   i v_t + kappa Lap v = -u^2
/// on a fixed grid. The linear part is factored once per step size; the
/// quadratic terms are iterated to a fixed point at the midpoint.
class MidpointStepper {
public:
    MidpointStepper(const RadialGrid& grid, double kappa, double dt, double solver_tol = 1e-12,
                    int max_picard = 100);

    double dt() const { return dt_; }

    /// Advance (u, v) by dt in place. Returns false (state untouched) if the
    /// fixed-point iteration fails.
    bool advance(std::vector<cplx>& u, std::vector<cplx>& v) const;

    int last_iterations() const { return last_iterations_; }

private:
    RadialGrid grid_;
    double kappa_;
    double dt_;
    double tol_;
    int max_picard_;
    Tridiagonal<cplx> A_u_;
    Tridiagonal<cplx> A_v_;
    mutable int last_iterations_ = 0;
};

/// A step of size dt built from midpoint substeps: a single substep for order 2,
/// the symmetric composition (g1, g2, g1) dt with g1 = 1/(2 - 2^{1/3}),
/// g2 = 1 - 2 g1 for order 4. Every substep conserves the discrete charge, and
/// the composition is symmetric, so the map stays time-reversible.
class Propagator {
public:
    Propagator(const RadialGrid& grid, double kappa, double dt, double solver_tol = 1e-12, int max_picard = 100,
               int order = 4);

    double dt() const { return dt_; }
    int order() const { return order_; }

    /// Same contract as MidpointStepper::advance.
    bool advance(std::vector<cplx>& u, std::vector<cplx>& v) const;

private:
    double dt_;
    int order_;
    std::vector<MidpointStepper> stages_;
};

/// One step of size cfg.dt (cfg.order selects the composition); throws StepFailure on non-convergence.
FieldPair step(const FieldPair& state, const EvolveConfig& cfg);

using Monitor = std::function<void(double t, const FieldPair& state, const FunctionalValues& values)>;

/// Integrate to cfg.t_max or until K >= blowup_K_factor * K(0), or until the
/// step fails even at dt_min.
TrajectoryRecord evolve(const FieldPair& state, const EvolveConfig& cfg,
                        const std::vector<Monitor>& monitors = {}, FieldPair* final_state = nullptr);

/// 2n E + 2(4-n) K. Requires kappa = 1/2.
double virial_rhs(const FieldPair& state, double kappa);

/// (1/2) int |x|^2 (|u|^2 + 2|v|^2)
double virial_weight(const FieldPair& state);

/// (1/2) int chi_R (|u|^2 + 2|v|^2)
double localized_virial_weight(const FieldPair& state, const CutoffProfile& cutoff);

/// 2 int chi_R'' (|u_r|^2 + |v_r|^2 / 2) - (1/2) int Lap^2 chi_R (|u|^2 + |v|^2 / 2)
///   - Re int Lap chi_R conj(v) u^2.
/// Requires kappa = 1/2.
double localized_virial_rhs(const FieldPair& state, const CutoffProfile& cutoff, double kappa = 0.5);

/// Share of the charge sitting in the outer 10% of the grid.
double wall_fraction(const FieldPair& state);

enum class BlowupVerdict { BLOWUP, BOUNDED, INCONCLUSIVE };

struct Detection {
    BlowupVerdict verdict = BlowupVerdict::INCONCLUSIVE;
    std::optional<double> t_detect;
    std::string reason;
};

std::string to_string(BlowupVerdict v);

/// BLOWUP when K crossed blowup_K_factor * K(0) or the step failed at dt_min;
/// BOUNDED when t_max was reached with K below k_threshold throughout
/// (defaults to blowup_K_factor * K(0)); INCONCLUSIVE otherwise.
Detection detect_blowup(const TrajectoryRecord& record, const EvolveConfig& cfg,
                        std::optional<double> k_threshold = std::nullopt);

/// CSV with columns t,Q,E,K,P,V[,virial_rhs].
void write_trajectory_csv(const TrajectoryRecord& record, const std::string& path);

/// Fourth-order central second difference of a uniformly sampled series at index i.
double second_difference5(const std::vector<double>& y, std::size_t i, double tau);

}  // namespace qnls
