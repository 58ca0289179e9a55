#include "qnls/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qnls {

namespace {

double sq_abs(double x) { return x * x; }
double sq_abs(const cplx& z) { return std::norm(z); }

double coupling(double u, double v) { return u * u * v; }
double coupling(const cplx& u, const cplx& v) { return (u * u * std::conj(v)).real(); }

template <class T>
void check_pair(const RadialGrid& grid, std::span<const T> u, std::span<const T> v) {
    if (u.size() != grid.size() || v.size() != grid.size()) {
        throw std::invalid_argument("field samples do not match the grid size");
    }
}

template <class T>
double charge_impl(const RadialGrid& grid, std::span<const T> u, std::span<const T> v) {
    check_pair(grid, u, v);
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += w[j] * (sq_abs(u[j]) + 2.0 * sq_abs(v[j]));
    return acc;
}

template <class T>
double interaction_impl(const RadialGrid& grid, std::span<const T> u, std::span<const T> v) {
    check_pair(grid, u, v);
    const auto w = grid.weights();
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += w[j] * coupling(u[j], v[j]);
    return acc;
}

void check_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("kappa must be positive, got " + std::to_string(kappa));
    }
}

}  // namespace

SystemParams SystemParams::from_kappa(double kappa) {
    SystemParams p;
    p.kappa = kappa;
    p.validate();
    return p;
}

SystemParams SystemParams::from_raw(const RawConstants& raw) {
    SystemParams p;
    p.raw = raw;
    if (!(raw.m > 0.0) || !(raw.M > 0.0)) {
        throw std::invalid_argument("masses m and M must be positive");
    }
    p.kappa = raw.m / raw.M;
    p.validate();
    return p;
}

void SystemParams::validate() const {
    check_kappa(kappa);
    if (!raw) return;
    if (!(raw->m > 0.0) || !(raw->M > 0.0)) {
        throw std::invalid_argument("masses m and M must be positive");
    }
    if (raw->c == 0.0) {
        throw std::invalid_argument("coupling ratio c must be nonzero");
    }
    const double mismatch = std::abs(raw->lambda - raw->c * std::conj(raw->mu));
    const double scale = std::max({1.0, std::abs(raw->lambda), std::abs(raw->c * raw->mu)});
    if (mismatch > 1e-12 * scale) {
        throw std::invalid_argument("constants violate lambda = c * conj(mu) (mismatch " +
                                    std::to_string(mismatch) + ")");
    }
    if (std::abs(kappa - raw->m / raw->M) > 1e-14 * kappa) {
        throw std::invalid_argument("kappa disagrees with m / M");
    }
}

FieldPair normalize_system(const SystemParams& params, const FieldPair& state) {
    params.validate();
    if (!params.raw) {
        throw std::invalid_argument("normalize_system needs the raw constants m, M, lambda, mu, c");
    }
    const RawConstants& k = *params.raw;
    if (!(k.c > 0.0)) {
        throw std::invalid_argument(
            "normalize_system: the amplitude factor sqrt(c/2) |mu| needs c > 0 (got c = " +
            std::to_string(k.c) + ")");
    }
    // u~(x) = sqrt(c/2) |mu| u(x / sqrt(2m)),  v~(x) = -(lambda/2) v(x / sqrt(2m))
    const double l = std::sqrt(2.0 * k.m);
    const cplx amp_u = std::sqrt(0.5 * k.c) * std::abs(k.mu);
    const cplx amp_v = -0.5 * k.lambda;
    return FieldPair{state.u.multiplied(amp_u).scaled(1.0, l), state.v.multiplied(amp_v).scaled(1.0, l)};
}

double charge(const RadialGrid& grid, std::span<const double> u, std::span<const double> v) {
    return charge_impl(grid, u, v);
}
double charge(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v) {
    return charge_impl(grid, u, v);
}

double kinetic(const RadialGrid& grid, std::span<const double> u, std::span<const double> v,
               double kappa) {
    check_pair(grid, u, v);
    return gradient_energy(grid, u) + kappa * gradient_energy(grid, v);
}
double kinetic(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v,
               double kappa) {
    check_pair(grid, u, v);
    return gradient_energy(grid, u) + kappa * gradient_energy(grid, v);
}

double interaction(const RadialGrid& grid, std::span<const double> u, std::span<const double> v) {
    return interaction_impl(grid, u, v);
}
double interaction(const RadialGrid& grid, std::span<const cplx> u, std::span<const cplx> v) {
    return interaction_impl(grid, u, v);
}

double charge(const FieldPair& state) {
    const FieldPair s = materialize(state);
    return charge(common_grid(s), s.u.samples(), s.v.samples());
}

double kinetic(const FieldPair& state, double kappa) {
    check_kappa(kappa);
    const FieldPair s = materialize(state);
    return kinetic(common_grid(s), s.u.samples(), s.v.samples(), kappa);
}

double interaction(const FieldPair& state) {
    const FieldPair s = materialize(state);
    return interaction(common_grid(s), s.u.samples(), s.v.samples());
}

double energy(const FieldPair& state, double kappa) {
    check_kappa(kappa);
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    return kinetic(g, s.u.samples(), s.v.samples(), kappa) -
           2.0 * interaction(g, s.u.samples(), s.v.samples());
}

double action(const FieldPair& state, double kappa, double omega) {
    if (!(omega > 0.0)) {
        throw std::invalid_argument("action: omega must be positive");
    }
    return 0.5 * (energy(state, kappa) + omega * charge(state));
}

double weinstein_charge_exponent(int dimension) { return 1.5 - 0.25 * dimension; }
double weinstein_kinetic_exponent(int dimension) { return 0.25 * dimension; }

double weinstein(const FieldPair& state, double kappa) {
    check_kappa(kappa);
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    const double P = interaction(g, s.u.samples(), s.v.samples());
    if (!(P > 0.0)) {
        throw std::domain_error(
            "Weinstein functional is defined only on the admissible set {(u, v) : int u^2 v > 0}; "
            "got P = " + std::to_string(P));
    }
    const int n = g.dimension();
    const double Q = charge(g, s.u.samples(), s.v.samples());
    const double K = kinetic(g, s.u.samples(), s.v.samples(), kappa);
    return std::pow(Q, weinstein_charge_exponent(n)) * std::pow(K, weinstein_kinetic_exponent(n)) / P;
}

FunctionalValues evaluate(const FieldPair& state, double kappa, double omega) {
    check_kappa(kappa);
    if (!(omega > 0.0)) {
        throw std::invalid_argument("evaluate: omega must be positive");
    }
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    FunctionalValues fv;
    fv.Q = charge(g, s.u.samples(), s.v.samples());
    fv.K = kinetic(g, s.u.samples(), s.v.samples(), kappa);
    fv.P = interaction(g, s.u.samples(), s.v.samples());
    fv.E = fv.K - 2.0 * fv.P;
    fv.omega = omega;
    fv.I_omega = 0.5 * (fv.E + omega * fv.Q);
    if (fv.P > 0.0) {
        const int n = g.dimension();
        fv.J = std::pow(fv.Q, weinstein_charge_exponent(n)) *
               std::pow(fv.K, weinstein_kinetic_exponent(n)) / fv.P;
    }
    return fv;
}

FieldPair scale(const FieldPair& state, double a, double l) {
    if (!(l > 0.0)) {
        throw std::invalid_argument("scale: l must be positive");
    }
    return FieldPair{state.u.scaled(a, l), state.v.scaled(a, l)};
}

std::vector<double> rearrange(const RadialGrid& grid, std::span<const double> values) {
    if (values.size() != grid.size()) {
        throw std::invalid_argument("rearrange: sample count does not match grid size");
    }
    for (double x : values) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw std::invalid_argument(
                "rearrange: input must be finite and non-negative (take the modulus first)");
        }
    }
    const std::size_t N = values.size();
    std::vector<double> out(values.begin(), values.end());
    if (std::is_sorted(out.rbegin(), out.rend())) return out;  // already nonincreasing

    // Model f by its piecewise-linear interpolant: constant on [0, r_0], linear
    // between nodes, linear down to 0 at the wall. mu(t) = |{f > t}| is exact for
    // that model; f*(r) is the t with mu(t) = |B_r|.
    const int n = grid.dimension();
    const double S = unit_sphere_measure(n) / n;
    const auto r = grid.nodes();
    auto vol = [&](double x) { return S * std::pow(x, n); };

    struct Segment {
        double r0, r1, a, b;  // f(r0) = a, f(r1) = b
        double lo() const { return std::min(a, b); }
        double hi() const { return std::max(a, b); }
    };
    std::vector<Segment> seg;
    seg.reserve(N + 1);
    seg.push_back({0.0, r[0], values[0], values[0]});
    for (std::size_t i = 0; i + 1 < N; ++i) seg.push_back({r[i], r[i + 1], values[i], values[i + 1]});
    seg.push_back({r[N - 1], grid.r_max(), values[N - 1], 0.0});

    auto partial = [&](const Segment& s, double t) {
        if (t >= s.hi()) return 0.0;
        if (t <= s.lo() || s.a == s.b) return vol(s.r1) - vol(s.r0);
        const double x = s.r0 + (t - s.a) / (s.b - s.a) * (s.r1 - s.r0);
        return s.b > s.a ? vol(s.r1) - vol(x) : vol(x) - vol(s.r0);
    };

    // Levels: every sample value and 0, descending. Sweep with an active set of
    // segments whose range straddles the level.
    std::vector<double> levels(values.begin(), values.end());
    levels.push_back(0.0);
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    std::vector<std::size_t> by_hi(seg.size()), by_lo(seg.size());
    std::iota(by_hi.begin(), by_hi.end(), std::size_t{0});
    std::iota(by_lo.begin(), by_lo.end(), std::size_t{0});
    std::sort(by_hi.begin(), by_hi.end(), [&](auto i, auto j) { return seg[i].hi() > seg[j].hi(); });
    std::sort(by_lo.begin(), by_lo.end(), [&](auto i, auto j) { return seg[i].lo() > seg[j].lo(); });

    std::vector<double> mu(levels.size());
    std::vector<char> state(seg.size(), 0);  // 0 above, 1 straddling, 2 fully below
    std::vector<std::size_t> active;
    double full = 0.0;
    std::size_t ih = 0, il = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        const double t = levels[k];
        while (ih < by_hi.size() && seg[by_hi[ih]].hi() > t) {
            state[by_hi[ih]] = 1;
            active.push_back(by_hi[ih]);
            ++ih;
        }
        while (il < by_lo.size() && seg[by_lo[il]].lo() > t) {
            const std::size_t i = by_lo[il++];
            state[i] = 2;
            full += vol(seg[i].r1) - vol(seg[i].r0);
        }
        double m = full;
        std::size_t keep = 0;
        for (std::size_t q = 0; q < active.size(); ++q) {
            const std::size_t i = active[q];
            if (state[i] != 1) continue;
            m += partial(seg[i], t);
            active[keep++] = i;
        }
        active.resize(keep);
        mu[k] = m;
    }

    // Invert at the node radii, interpolating t linearly in mu between levels.
    std::size_t k = 0;
    for (std::size_t j = 0; j < N; ++j) {
        const double V = vol(r[j]);
        while (k + 1 < levels.size() && mu[k + 1] <= V) ++k;
        if (k + 1 == levels.size() || V <= mu[k]) {
            out[j] = k + 1 == levels.size() && V > mu[k] ? 0.0 : levels[k];
        } else {
            const double w = (V - mu[k]) / (mu[k + 1] - mu[k]);
            out[j] = levels[k] + w * (levels[k + 1] - levels[k]);
        }
    }
    return out;
}

FieldPair rearrange(const FieldPair& state) {
    const FieldPair s = materialize(state);
    const auto& g = common_grid(s);
    if (s.u.max_imag() != 0.0 || s.v.max_imag() != 0.0) {
        throw std::invalid_argument("rearrange: complex input (apply the modulus first)");
    }
    const auto u = rearrange(g, s.u.real_values());
    const auto v = rearrange(g, s.v.real_values());
    return make_real_pair(s.u.base_grid_ptr(), u, v);
}

}  // namespace qnls
