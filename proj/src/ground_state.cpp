#include "qnls/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "qnls/tridiagonal.hpp"

namespace qnls {

namespace {

struct Parts {
    double Q, K, P;
};

Parts parts(const RadialGrid& g, std::span<const double> f, std::span<const double> p, double kappa) {
    return {charge(g, f, p), kinetic(g, f, p, kappa), interaction(g, f, p)};
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

// 2 S f, the gradient of the face-based gradient energy.
std::vector<double> stiffness_gradient(const RadialGrid& g, std::span<const double> f) {
    const auto c = g.face_coefficients();
    const std::size_t n = f.size();
    std::vector<double> out(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double right = (j + 1 < n) ? f[j + 1] : 0.0;
        const double flux = c[j] * (right - f[j]);
        out[j] -= 2.0 * flux;
        if (j + 1 < n) out[j + 1] += 2.0 * flux;
    }
    return out;
}

void clamp_nonnegative(std::vector<double>& x) {
    for (auto& v : x) v = std::max(v, 0.0);
}

// Descent on J restricted to the gauge K / Q = 1. J is dilation invariant, so
// fixing K / Q only removes the dilation direction; without it the discrete
// minimization drifts towards under-resolved profiles.
class Minimizer {
public:
    Minimizer(const RadialGrid& grid, double kappa)
        : g_(grid),
          kappa_(kappa),
          pre_u_(stiffness_plus_mass(grid, 1.0, 1.0)),
          pre_v_(stiffness_plus_mass(grid, kappa, 2.0)) {}

    // Gradient of the constraint K/Q, and its preconditioned image.
    struct Constraint {
        std::vector<double> cf, cp, uf, up;
        double metric;
    };

    Constraint constraint(std::span<const double> f, std::span<const double> p) const {
        const Parts s = parts(g_, f, p, kappa_);
        const auto w = g_.weights();
        Constraint c;
        c.cf = stiffness_gradient(g_, f);
        c.cp = stiffness_gradient(g_, p);
        for (std::size_t j = 0; j < f.size(); ++j) {
            c.cf[j] = c.cf[j] / s.Q - s.K / (s.Q * s.Q) * 2.0 * w[j] * f[j];
            c.cp[j] = kappa_ * c.cp[j] / s.Q - s.K / (s.Q * s.Q) * 4.0 * w[j] * p[j];
        }
        c.uf = pre_u_.solve(c.cf);
        c.up = pre_v_.solve(c.cp);
        c.metric = dot(c.cf, c.uf) + dot(c.cp, c.up);
        return c;
    }

    // Newton steps along the preconditioned constraint gradient until K / Q = 1.
    void restore(std::vector<double>& f, std::vector<double>& p) const {
        for (int it = 0; it < 60; ++it) {
            const Parts s = parts(g_, f, p, kappa_);
            const double gap = s.K / s.Q - 1.0;
            if (std::abs(gap) < 1e-15) return;
            const Constraint c = constraint(f, p);
            const double step = gap / c.metric;
            for (std::size_t j = 0; j < f.size(); ++j) {
                f[j] -= step * c.uf[j];
                p[j] -= step * c.up[j];
            }
            clamp_nonnegative(f);
            clamp_nonnegative(p);
        }
    }

    // (t_j, l_j) normalization. After restore() l_j = sqrt(K/Q) is 1 to rounding,
    // so only the amplitude t_j is applied and the grid stays fixed.
    void normalize(std::vector<double>& f, std::vector<double>& p) const {
        const Parts s = parts(g_, f, p, kappa_);
        const int n = g_.dimension();
        const double t = std::pow(s.Q, 0.25 * n - 0.5) / std::pow(s.K, 0.25 * n);
        for (auto& x : f) x *= t;
        for (auto& x : p) x *= t;
    }

    std::pair<std::vector<double>, std::vector<double>> direction(std::span<const double> f,
                                                                  std::span<const double> p) const {
        const Parts s = parts(g_, f, p, kappa_);
        const int n = g_.dimension();
        const auto w = g_.weights();
        const double a = weinstein_charge_exponent(n) / s.Q;
        const double b = weinstein_kinetic_exponent(n) / s.K;
        auto gf = stiffness_gradient(g_, f);
        auto gp = stiffness_gradient(g_, p);
        for (std::size_t j = 0; j < f.size(); ++j) {
            gf[j] = a * 2.0 * w[j] * f[j] + b * gf[j] - 2.0 * w[j] * f[j] * p[j] / s.P;
            gp[j] = a * 4.0 * w[j] * p[j] + b * kappa_ * gp[j] - w[j] * f[j] * f[j] / s.P;
        }
        const Constraint c = constraint(f, p);
        const double lam = (dot(gf, c.uf) + dot(gp, c.up)) / c.metric;
        for (std::size_t j = 0; j < f.size(); ++j) {
            gf[j] -= lam * c.cf[j];
            gp[j] -= lam * c.cp[j];
        }
        return {pre_u_.solve(gf), pre_v_.solve(gp)};
    }

    double J(std::span<const double> f, std::span<const double> p) const {
        return weinstein_value(g_, f, p, kappa_);
    }

private:
    const RadialGrid& g_;
    double kappa_;
    Tridiagonal<double> pre_u_;
    Tridiagonal<double> pre_v_;
};

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

void GroundStateConfig::validate() const {
    if (n >= 6) {
        throw std::invalid_argument("ground states do not exist for n >= 6 (got n = " +
                                    std::to_string(n) + ")");
    }
    if (n < 1) throw std::invalid_argument("dimension must be at least 1");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
    if (!(r_max > 0.0)) throw std::invalid_argument("r_max must be positive");
    if (num_nodes < 16) throw std::invalid_argument("num_nodes must be at least 16");
    if (!(tol_J > 0.0)) throw std::invalid_argument("tol_J must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (rearrange_every < 0) throw std::invalid_argument("rearrange_every must be >= 0");
}

double PohozaevResiduals::max() const { return std::max({p, k, q}); }

double weinstein_value(const RadialGrid& grid, std::span<const double> f, std::span<const double> p,
                       double kappa) {
    const Parts s = parts(grid, f, p, kappa);
    if (!(s.P > 0.0)) return std::numeric_limits<double>::infinity();
    const int n = grid.dimension();
    return std::pow(s.Q, weinstein_charge_exponent(n)) * std::pow(s.K, weinstein_kinetic_exponent(n)) /
           s.P;
}

std::pair<std::vector<double>, std::vector<double>> weinstein_gradient(
    const RadialGrid& grid, std::span<const double> f, std::span<const double> p, double kappa) {
    const Parts s = parts(grid, f, p, kappa);
    if (!(s.P > 0.0)) {
        throw std::domain_error("weinstein_gradient: state outside {P > 0}");
    }
    const int n = grid.dimension();
    const double Jv = weinstein_value(grid, f, p, kappa);
    const auto w = grid.weights();
    const double a = weinstein_charge_exponent(n) / s.Q;
    const double b = weinstein_kinetic_exponent(n) / s.K;
    auto gf = stiffness_gradient(grid, f);
    auto gp = stiffness_gradient(grid, p);
    for (std::size_t j = 0; j < f.size(); ++j) {
        gf[j] = Jv * (a * 2.0 * w[j] * f[j] + b * gf[j] - 2.0 * w[j] * f[j] * p[j] / s.P);
        gp[j] = Jv * (a * 4.0 * w[j] * p[j] + b * kappa * gp[j] - w[j] * f[j] * f[j] / s.P);
    }
    return {gf, gp};
}

double alpha1_formula(int n, double Q) {
    return 0.5 * std::pow(n, 0.25 * n) * std::pow(6.0 - n, 1.0 - 0.25 * n) * std::sqrt(Q);
}

double sharp_constant_formula(int n, double Q) {
    return 2.0 * std::pow(6.0 - n, 0.25 * n - 1.0) / std::pow(n, 0.25 * n) / std::sqrt(Q);
}

PohozaevResiduals pohozaev_residuals(const FieldPair& state, double kappa, double omega) {
    const FunctionalValues v = evaluate(state, kappa, omega);
    const double I = v.I_omega;
    if (!(I > 0.0)) {
        throw std::domain_error("Pohozaev residuals need I_omega > 0 (got " + std::to_string(I) + ")");
    }
    const int n = materialize(state).u.base_grid().dimension();
    return {std::abs(v.P - 2.0 * I) / I, std::abs(v.K - n * I) / I,
            std::abs(omega * v.Q - (6.0 - n) * I) / I};
}

PohozaevResiduals verify_pohozaev(const GroundStateResult& result) {
    return pohozaev_residuals(result.state, result.kappa, result.omega);
}

double elliptic_residual(const FieldPair& state, double kappa, double omega) {
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    const auto phi = s.u.real_values();
    const auto psi = s.v.real_values();
    const auto lphi = apply_laplacian(g, phi);
    const auto lpsi = apply_laplacian(g, psi);
    std::vector<double> r1(phi.size()), r2(phi.size());
    for (std::size_t j = 0; j < phi.size(); ++j) {
        r1[j] = -lphi[j] + omega * phi[j] - 2.0 * phi[j] * psi[j];
        r2[j] = -kappa * lpsi[j] + 2.0 * omega * psi[j] - phi[j] * phi[j];
    }
    const double denom = l2_norm(g, phi) + l2_norm(g, psi);
    if (denom == 0.0) return 0.0;
    return (l2_norm(g, r1) + l2_norm(g, r2)) / denom;
}

double elliptic_residual(const GroundStateResult& result) {
    return elliptic_residual(result.state, result.kappa, result.omega);
}

void refresh_diagnostics(GroundStateResult& r, double tol_pohozaev, double tol_pde) {
    r.state = materialize(r.state);
    r.values = evaluate(r.state, r.kappa, r.omega);
    r.alpha1 = r.values.J.value_or(std::numeric_limits<double>::quiet_NaN());
    // C_op is stated for omega = 1; Q_omega = omega^{2 - n/2} Q_1.
    const double q1 = r.values.Q * std::pow(r.omega, 0.5 * r.n - 2.0);
    r.C_op = sharp_constant_formula(r.n, q1);
    r.pohozaev = verify_pohozaev(r);
    r.elliptic_residual = elliptic_residual(r);
    const bool ok = r.pohozaev.max() <= tol_pohozaev && r.elliptic_residual <= tol_pde;
    r.converged = r.converged && ok;
}

SharpConstant sharp_constant(const GroundStateResult& result) {
    SharpConstant s;
    const FunctionalValues v = evaluate(result.state, result.kappa, result.omega);
    if (!v.J) throw std::domain_error("sharp_constant: ground state has P <= 0");
    const double q1 = v.Q * std::pow(result.omega, 0.5 * result.n - 2.0);
    s.C_op = sharp_constant_formula(result.n, q1);
    s.inverse_J = 1.0 / *v.J;
    s.relative_gap = relative(s.C_op, s.inverse_J);
    s.consistent = s.relative_gap <= 1e-3;
    return s;
}

GroundStateResult rescale_omega(const GroundStateResult& result, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("rescale_omega: omega must be positive");
    if (result.omega != 1.0) throw std::invalid_argument("rescale_omega: input must have omega = 1");
    GroundStateResult out = result;
    out.omega = omega;
    out.state = materialize(scale(result.state, omega, 1.0 / std::sqrt(omega)));
    // Relative PDE residual scales like omega; keep the base tolerance relative to that.
    refresh_diagnostics(out, 1e-4, 1e-3 * std::max(1.0, omega));
    return out;
}

GroundStateResult solve(const GroundStateConfig& cfg) {
    cfg.validate();
    const int n = cfg.n;
    const RadialGrid g(n, cfg.r_max, cfg.num_nodes);
    const Minimizer mz(g, cfg.kappa);
    const std::size_t N = g.size();
    const auto r = g.nodes();

    // Initial pair e^{-r^2}, brought to K = Q = 1 by the (t, l) rescaling.
    std::vector<double> f(N), p(N);
    {
        std::vector<double> e(N);
        for (std::size_t j = 0; j < N; ++j) e[j] = std::exp(-r[j] * r[j]);
        const Parts s = parts(g, e, e, cfg.kappa);
        const double t = std::pow(s.Q, 0.25 * n - 0.5) / std::pow(s.K, 0.25 * n);
        const double l = std::sqrt(s.K / s.Q);
        for (std::size_t j = 0; j < N; ++j) {
            const double x = r[j] / l;
            f[j] = p[j] = t * std::exp(-x * x);
        }
    }
    mz.restore(f, p);
    mz.normalize(f, p);

    GroundStateResult res;
    res.n = n;
    res.kappa = cfg.kappa;
    res.omega = 1.0;
    double Jv = mz.J(f, p);
    const double J_start = Jv;
    res.j_history.push_back(Jv);

    bool terminated = false;
    int it = 0;
    std::vector<double> f2(N), p2(N);
    for (; it < cfg.max_iters; ++it) {
        const auto [df, dp] = mz.direction(f, p);
        double s = 1.0;
        double J2 = Jv;
        bool accepted = false;
        while (s >= 1e-14) {
            for (std::size_t j = 0; j < N; ++j) {
                f2[j] = std::max(f[j] - s * df[j], 0.0);
                p2[j] = std::max(p[j] - s * dp[j], 0.0);
            }
            mz.restore(f2, p2);
            J2 = mz.J(f2, p2);
            if (J2 < Jv) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if (!accepted) {
            // Line search cannot improve J at machine precision.
            terminated = true;
            break;
        }
        f.swap(f2);
        p.swap(p2);
        mz.normalize(f, p);
        Jv = mz.J(f, p);

        if (cfg.rearrange_every > 0 && (it + 1) % cfg.rearrange_every == 0) {
            auto fr = rearrange(g, f);
            auto pr = rearrange(g, p);
            mz.restore(fr, pr);
            mz.normalize(fr, pr);
            const double Jr = mz.J(fr, pr);
            if (Jr <= Jv) {
                f.swap(fr);
                p.swap(pr);
                Jv = Jr;
            }
        }
        res.j_history.push_back(Jv);
        const std::size_t m = res.j_history.size();
        if (m > 10 && std::abs(res.j_history[m - 11] - Jv) / Jv < cfg.tol_J) {
            terminated = true;
            ++it;
            break;
        }
    }
    res.iterations = it;
    if (!terminated) {
        res.diagnostic = "J did not settle within max_iters";
    }
    if (Jv < 1e-3 * J_start) {
        res.diagnostic = "J collapsing towards 0: grid or domain too small";
        terminated = false;
    }

    // Post-scaling (t0, l0) to a solution with omega = 1.
    const double alpha1 = Jv;
    const double t0 = 2.0 * alpha1 / (6.0 - n);
    const double l0 = std::sqrt((6.0 - n) / static_cast<double>(n));
    auto grid1 = std::make_shared<const RadialGrid>(g.dilated(l0));
    for (auto& x : f) x *= t0;
    for (auto& x : p) x *= t0;
    res.state = make_real_pair(grid1, f, p);
    res.converged = terminated;
    refresh_diagnostics(res, cfg.tol_pohozaev, cfg.tol_pde);

    // Mass near the wall: the working domain is too small for this profile.
    const auto w = grid1->weights();
    double tail = 0.0;
    for (std::size_t j = N - N / 10; j < N; ++j) tail += w[j] * (f[j] * f[j] + 2.0 * p[j] * p[j]);
    if (tail > 1e-6 * res.values.Q && res.diagnostic.empty()) {
        res.diagnostic = "ground state reaches the outer wall; increase r_max";
    }
    return res;
}

void save_ground_state_csv(const GroundStateResult& result, const std::string& path) {
    const FieldPair s = materialize(result.state);
    const auto& g = common_grid(s);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[256];
    out << "n,kappa,omega,num_nodes,r_max,h\n";
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%zu,%.17g,%.17g\n", g.dimension(), result.kappa,
                  result.omega, g.size(), g.r_max(), g.spacing());
    out << buf << "r,phi,psi\n";
    const auto phi = s.u.real_values();
    const auto psi = s.v.real_values();
    const auto r = g.nodes();
    for (std::size_t j = 0; j < g.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[j], phi[j], psi[j]);
        out << buf;
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

GroundStateResult load_ground_state_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    auto fail = [&](const std::string& why) {
        throw std::runtime_error(path + ": " + why);
    };
    if (!std::getline(in, line) || line != "n,kappa,omega,num_nodes,r_max,h") fail("bad header");
    if (!std::getline(in, line)) fail("missing metadata row");
    int n = 0;
    double kappa = 0, omega = 0, r_max = 0, h = 0;
    std::size_t N = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%zu,%lf,%lf", &n, &kappa, &omega, &N, &r_max, &h) != 6) {
        fail("malformed metadata row");
    }
    if (!std::getline(in, line) || line != "r,phi,psi") fail("bad column header");
    auto grid = std::make_shared<const RadialGrid>(RadialGrid::with_spacing(n, h, N));
    std::vector<double> phi(N), psi(N);
    const auto nodes = grid->nodes();
    for (std::size_t j = 0; j < N; ++j) {
        double rj = 0;
        if (!std::getline(in, line) ||
            std::sscanf(line.c_str(), "%lf,%lf,%lf", &rj, &phi[j], &psi[j]) != 3) {
            fail("malformed row " + std::to_string(j));
        }
        if (std::abs(rj - nodes[j]) > 1e-12 * nodes[j]) fail("node radius mismatch at row " + std::to_string(j));
    }
    GroundStateResult res;
    res.n = n;
    res.kappa = kappa;
    res.omega = omega;
    res.state = make_real_pair(grid, phi, psi);
    res.converged = true;
    refresh_diagnostics(res, 1e-4, 1e-3 * std::max(1.0, omega));
    return res;
}

}  // namespace qnls
