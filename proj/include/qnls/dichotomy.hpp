#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qnls/evolution.hpp"
#include "qnls/ground_state.hpp"

namespace qnls {

/// f(r) = a - r + b r^q with its critical point gamma = (b q)^{-1/(q-1)}.
struct ComparisonSetup {
    double a = 0.0;
    double b = 1.0;
    double q = 1.25;
    std::optional<double> delta1;

    void validate() const;
    double gamma() const;
    double f(double r) const;
    /// (1 - 1/q) gamma, the largest a for which f(gamma) < 0.
    double a_bound() const;
};

enum class ComparisonVerdict { STAYS_BELOW, STAYS_ABOVE, INDETERMINATE };
std::string to_string(ComparisonVerdict v);

struct ComparisonResult {
    ComparisonVerdict verdict = ComparisonVerdict::INDETERMINATE;
    double gamma = 0.0;
    std::optional<double> delta2;  // G(t) >= (1 + delta2) gamma
    std::optional<double> upper_root;
    std::string reason;
};

ComparisonResult comparison_classify(const ComparisonSetup& setup, double G0);

struct Thresholds {
    double Q_gs = 0.0;
    double EQ_star = 0.0;
    double KQ_star = 0.0;
    double b = 0.0;
    double q = 1.25;
    double gamma = 0.0;              // (b q)^{-1/(q-1)}
    double gamma_closed_form = 0.0;  // 5 Q_gs^2 / Q0
    double route_gap = 0.0;
    bool consistent = false;         // routes agree within 1e-6
    double a_bound = 0.0;            // (1 - 1/q) gamma = gamma / 5
};

/// Ground-state thresholds for n = 5 data of charge Q0.
Thresholds thresholds(const GroundStateResult& gs, double Q0);

enum class Classification { GLOBAL, BLOWUP_CANDIDATE, INDETERMINATE };
std::string to_string(Classification c);

enum class Consistency { AGREE, DISAGREE, OUTSIDE_THEOREM, UNRESOLVED };
std::string to_string(Consistency c);

struct SimulationSummary {
    Detection detection;
    double t_end = 0.0;
    double max_KQ_ratio = 0.0;     // max_t K(t) Q0 / KQ_star
    double min_f_relative = 0.0;   // min_t f(K(t)) / K(t)
    double Q_drift = 0.0;
    double E_drift = 0.0;
    double max_wall_fraction = 0.0;
    std::size_t samples = 0;
    std::vector<std::string> warnings;
    std::string trajectory_csv;
};

struct DichotomyReport {
    double kappa = 0.5;
    double Q0 = 0.0, E0 = 0.0, K0 = 0.0;
    double EQ = 0.0, KQ = 0.0;
    double EQ_star = 0.0, KQ_star = 0.0;
    Thresholds limits;
    ComparisonResult comparison;
    Classification classification = Classification::INDETERMINATE;
    std::string reason;
    std::optional<SimulationSummary> simulation;
    std::optional<Consistency> consistency;
};

/// Classify (u0, v0) by E Q and K Q against the ground-state products.
DichotomyReport classify_data(const FieldPair& state, const GroundStateResult& gs, double kappa);

struct ExperimentSpec {
    std::string family = "scaled_ground_state";  // or "gaussian"
    double scale_factor = 0.9;                     // scaled_ground_state
    double amplitude_u = 1.0, amplitude_v = 1.0, width = 1.0;  // gaussian: A e^{-r^2/w^2}
    double r_max = 0.0;  // evolution domain; 0 keeps the ground-state domain
    EvolveConfig evolve;
    std::string label;

    void validate() const;
};

/// Initial data of the experiment on the evolution grid (the ground-state grid,
/// zero-padded to spec.r_max when that is larger).
FieldPair initial_data(const ExperimentSpec& spec, const GroundStateResult& gs);

/// Classify, evolve and attach the detection verdict. When trajectory_csv is
/// non-empty the trajectory is written there.
DichotomyReport run_experiment(const ExperimentSpec& spec, const GroundStateResult& gs,
                               const std::string& trajectory_csv = "");

/// Runs experiments concurrently; the result order matches the input order.
std::vector<DichotomyReport> run_experiments(const std::vector<ExperimentSpec>& specs, const GroundStateResult& gs,
                                             const std::vector<std::string>& trajectory_csvs = {});

}  // namespace qnls
