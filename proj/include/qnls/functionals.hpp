#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qnls/field.hpp"

namespace qnls {

/// Constants of the unnormalised system
///   i u_t + (1/2m) Lap u = lambda conj(u) v,   i v_t + (1/2M) Lap v = mu u^2,
/// with lambda = c conj(mu) for a real nonzero c.
struct RawConstants {
    double m = 0.5;
    double M = 0.5;
    cplx lambda{-2.0, 0.0};
    cplx mu{-1.0, 0.0};
    double c = 2.0;
};

struct SystemParams {
    double kappa = 0.5;
    std::optional<RawConstants> raw;

    static SystemParams from_kappa(double kappa);
    /// kappa = m / M; validates lambda = c conj(mu).
    static SystemParams from_raw(const RawConstants& raw);

    void validate() const;
};

struct FunctionalValues {
    double Q = 0.0;
    double E = 0.0;
    double K = 0.0;
    double P = 0.0;
    double omega = 1.0;
    double I_omega = 0.0;
    std::optional<double> J;  // only on the admissible set P > 0
};

/// Map a state of the raw system to the normalised system
///   i u_t + Lap u = -2 v conj(u),   i v_t + kappa Lap v = -u^2.
/// The spatial change of variables is carried by the dilation metadata.
FieldPair normalize_system(const SystemParams& params, const FieldPair& state);

/// Q = ||u||^2 + 2 ||v||^2
double charge(const FieldPair& state);
/// K = ||grad u||^2 + kappa ||grad v||^2 (face-based quadrature)
double kinetic(const FieldPair& state, double kappa);
/// P = Re int u^2 conj(v)
double interaction(const FieldPair& state);
/// E = K - 2P
double energy(const FieldPair& state, double kappa);
/// I_omega = (E + omega Q) / 2
double action(const FieldPair& state, double kappa, double omega);
/// J = Q^{3/2 - n/4} K^{n/4} / P; throws std::domain_error outside {P > 0}.
double weinstein(const FieldPair& state, double kappa);

FunctionalValues evaluate(const FieldPair& state, double kappa, double omega = 1.0);

/// (a delta_l u, a delta_l v), applied through the lazy scaling metadata.
FieldPair scale(const FieldPair& state, double a, double l);

/// Symmetric-decreasing rearrangement of both components (real, non-negative input).
FieldPair rearrange(const FieldPair& state);
/// Equimeasurable nonincreasing rearrangement of non-negative samples on the weighted grid.
std::vector<double> rearrange(const RadialGrid& grid, std::span<const double> values);

/// Exponent of Q in the Weinstein functional, 3/2 - n/4.
double weinstein_charge_exponent(int dimension);
/// Exponent of K in the Weinstein functional, n/4.
double weinstein_kinetic_exponent(int dimension);

// Kernels on materialized samples sharing one grid.
double charge(const RadialGrid& grid, std::span<const double> u, std::span<const double> v);
double charge(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v);
double kinetic(const RadialGrid& grid, std::span<const double> u, std::span<const double> v,
               double kappa);
double kinetic(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v,
               double kappa);
double interaction(const RadialGrid& grid, std::span<const double> u, std::span<const double> v);
double interaction(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v);

}  // namespace qnls
