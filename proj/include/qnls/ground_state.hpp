#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qnls/functionals.hpp"

namespace qnls {

struct GroundStateConfig {
    int n = 5;
    double kappa = 0.5;
    double r_max = 32.0;          // extent of the working grid (iterates with K = Q = 1)
    std::size_t num_nodes = 2048;
    double tol_J = 1e-10;         // relative change of J over 10 iterations
    int max_iters = 20000;
    int rearrange_every = 50;
    double tol_pohozaev = 1e-4;
    double tol_pde = 1e-3;

    void validate() const;
};

struct PohozaevResiduals {
    double p = 0.0;  // |P - 2I| / I
    double k = 0.0;  // |K - nI| / I
    double q = 0.0;  // |omega Q - (6-n) I| / I

    double max() const;
};

struct GroundStateResult {
    FieldPair state;  // (phi, psi), real and non-negative, materialized
    double omega = 1.0;
    int n = 5;
    double kappa = 0.5;
    FunctionalValues values;
    double alpha1 = 0.0;
    double C_op = 0.0;
    PohozaevResiduals pohozaev;
    double elliptic_residual = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string diagnostic;
    std::vector<double> j_history;  // J after each accepted iteration

    const RadialField& phi() const { return state.u; }
    const RadialField& psi() const { return state.v; }
    const RadialGrid& grid() const { return state.u.base_grid(); }
};

/// Minimize J over non-negative radial pairs and post-scale the minimizer to a
/// solution of
///   -Lap phi + omega phi = 2 phi psi,   -kappa Lap psi + 2 omega psi = phi^2
/// with omega = 1.
GroundStateResult solve(const GroundStateConfig& cfg);

/// Gradient of J with respect to the nodal values of (f, p) on a fixed grid.
std::pair<std::vector<double>, std::vector<double>> weinstein_gradient(
    const RadialGrid& grid, std::span<const double> f, std::span<const double> p, double kappa);

/// Value of J on raw samples; +inf outside {P > 0}.
double weinstein_value(const RadialGrid& grid, std::span<const double> f, std::span<const double> p,
                       double kappa);

PohozaevResiduals verify_pohozaev(const GroundStateResult& result);
PohozaevResiduals pohozaev_residuals(const FieldPair& state, double kappa, double omega);

double elliptic_residual(const GroundStateResult& result);
double elliptic_residual(const FieldPair& state, double kappa, double omega);

/// (n^{n/4}/2) (6-n)^{1-n/4} Q^{1/2}
double alpha1_formula(int n, double Q);
/// 2 (6-n)^{n/4-1} n^{-n/4} Q^{-1/2}
double sharp_constant_formula(int n, double Q);

struct SharpConstant {
    double C_op = 0.0;       // closed form in Q
    double inverse_J = 0.0;  // 1 / J(phi, psi)
    double relative_gap = 0.0;
    bool consistent = false;  // routes agree within 1e-3
};

SharpConstant sharp_constant(const GroundStateResult& result);

/// (omega phi(sqrt(omega) x), omega psi(sqrt(omega) x)) with refreshed diagnostics.
GroundStateResult rescale_omega(const GroundStateResult& result, double omega);

/// Fill values, alpha1, C_op, residuals from result.state (and the flags against cfg tolerances).
void refresh_diagnostics(GroundStateResult& result, double tol_pohozaev = 1e-4, double tol_pde = 1e-3);

/// Flat CSV: header line with n, kappa, omega, num_nodes, r_max, h and one row r, phi, psi per node.
void save_ground_state_csv(const GroundStateResult& result, const std::string& path);
GroundStateResult load_ground_state_csv(const std::string& path);

}  // namespace qnls
