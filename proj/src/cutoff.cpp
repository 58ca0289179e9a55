#include "qnls/cutoff.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qnls {

namespace {

constexpr std::array<double, 6> kKnots{0.0, 0.4, 0.45, 0.9, 1.9, 2.0};

// Smoothstep S(x) = 6x^5 - 15x^4 + 10x^3, its derivatives and two antiderivatives.
double smooth(int k, double x) {
    switch (k) {
        case -2: return x * x * x * x * x * (x * x / 7.0 - x / 2.0 + 0.5);
        case -1: return x * x * x * x * (x * x - 3.0 * x + 2.5);
        case 0: return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
        case 1: return 30.0 * x * x * (x - 1.0) * (x - 1.0);
        case 2: return 60.0 * x * (2.0 * x * x - 3.0 * x + 1.0);
        default: throw std::logic_error("smooth: order out of range");
    }
}

struct Levels {
    std::array<double, 6> v;
};

Levels levels(double D, double G) { return {{2.0, -D, -D, G, G, 0.0}}; }

// g = chi'' on s in [0, 2]: k = 0, 1, 2 gives g, g', g''; k = -1 gives int_0^s g,
// k = -2 gives int_0^s int_0^t g.
double bridge(const Levels& lv, int k, double s) {
    double G1 = 0.0;  // int_0^a g
    double G2 = 0.0;  // int_0^a int_0^t g
    for (std::size_t i = 0; i + 1 < kKnots.size(); ++i) {
        const double a = kKnots[i], b = kKnots[i + 1], L = b - a;
        const double A = lv.v[i], B = lv.v[i + 1];
        const bool last = i + 2 == kKnots.size();
        if (s <= b || last) {
            const double x = std::min(std::max((s - a) / L, 0.0), 1.0);
            switch (k) {
                case 0: return A + (B - A) * smooth(0, x);
                case 1: return (B - A) * smooth(1, x) / L;
                case 2: return (B - A) * smooth(2, x) / (L * L);
                case -1: return G1 + L * (A * x + (B - A) * smooth(-1, x));
                case -2: return G2 + G1 * (s - a) + L * L * (A * x * x / 2.0 + (B - A) * smooth(-2, x));
                default: throw std::logic_error("bridge: order out of range");
            }
        }
        G2 += G1 * L + L * L * (A / 2.0 + (B - A) * smooth(-2, 1.0));
        G1 += L * (A + (B - A) * smooth(-1, 1.0));
    }
    return 0.0;
}

// (int_0^2 g, int_0^2 s g) for given D, G; int s g = 2 int g - int int g.
std::array<double, 2> moments(double D, double G) {
    const Levels lv = levels(D, G);
    const double i1 = bridge(lv, -1, 2.0);
    const double i2 = bridge(lv, -2, 2.0);
    return {i1, 2.0 * i1 - i2};
}

}  // namespace

CutoffBridge::CutoffBridge() {
    // chi'(3) = 0 and chi(3) = 0 with chi(1) = 1, chi'(1) = 2 read
    //   int_0^2 g = -2,   int_0^2 s g = 1.
    // Both moments are affine in (D, G).
    const auto m0 = moments(0.0, 0.0);
    const auto mD = moments(1.0, 0.0);
    const auto mG = moments(0.0, 1.0);
    const double a11 = mD[0] - m0[0], a12 = mG[0] - m0[0];
    const double a21 = mD[1] - m0[1], a22 = mG[1] - m0[1];
    const double b1 = -2.0 - m0[0], b2 = 1.0 - m0[1];
    const double det = a11 * a22 - a12 * a21;
    D_ = (b1 * a22 - a12 * b2) / det;
    G_ = (a11 * b2 - a21 * b1) / det;

    max_chi2_ = 2.0;
    for (int i = 0; i <= 20000; ++i) {
        const double r = 1.0 + 2.0 * i / 20000.0;
        max_chi2_ = std::max(max_chi2_, derivative(2, r));
    }
    if (max_chi2_ > 2.0 + 1e-9) {
        throw std::logic_error("cutoff bridge violates chi'' <= 2 (max " + std::to_string(max_chi2_) + ")");
    }
    if (std::abs(derivative(0, 3.0)) > 1e-12 || std::abs(derivative(1, 3.0)) > 1e-12) {
        throw std::logic_error("cutoff bridge does not vanish at r = 3");
    }
}

const CutoffBridge& CutoffBridge::instance() {
    static const CutoffBridge bridge_instance;
    return bridge_instance;
}

double CutoffBridge::derivative(int k, double r) const {
    if (k < 0 || k > 4) throw std::invalid_argument("cutoff derivative order must be 0..4");
    if (r <= 1.0) {
        switch (k) {
            case 0: return r * r;
            case 1: return 2.0 * r;
            case 2: return 2.0;
            default: return 0.0;
        }
    }
    if (r >= 3.0) return 0.0;
    const Levels lv = levels(D_, G_);
    const double s = r - 1.0;
    switch (k) {
        case 0: return 1.0 + 2.0 * s + bridge(lv, -2, s);
        case 1: return 2.0 + bridge(lv, -1, s);
        default: return bridge(lv, k - 2, s);
    }
}

CutoffProfile::CutoffProfile(double R, const RadialGrid& grid) : R_(R), grid_(grid) {
    if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("cutoff radius R must be positive");
    const auto& chi = CutoffBridge::instance();
    const int n = grid.dimension();
    const double m = n - 1.0;
    const auto nodes = grid.nodes();
    const auto faces = grid.face_radii();
    const std::size_t N = grid.size();
    chi_.resize(N);
    chi2_nodes_.resize(N);
    chi2_faces_.resize(N);
    lap_.resize(N);
    bilap_.resize(N);
    for (std::size_t j = 0; j < N; ++j) {
        const double s = nodes[j] / R;
        chi_[j] = R * R * chi.derivative(0, s);
        chi2_nodes_[j] = chi.derivative(2, s);
        chi2_faces_[j] = chi.derivative(2, faces[j] / R);
        if (s <= 1.0) {
            lap_[j] = 2.0 * n;
            bilap_[j] = 0.0;
            continue;
        }
        const double c1 = chi.derivative(1, s), c2 = chi.derivative(2, s);
        const double c3 = chi.derivative(3, s), c4 = chi.derivative(4, s);
        // L = chi'' + m chi'/s;  Lap L = L'' + m L'/s  (unit scale), then / R^2.
        const double L1 = c3 + m * (c2 / s - c1 / (s * s));
        const double L2 = c4 + m * (c3 / s - 2.0 * c2 / (s * s) + 2.0 * c1 / (s * s * s));
        lap_[j] = c2 + m * c1 / s;
        bilap_[j] = (L2 + m * L1 / s) / (R * R);
    }
}

}  // namespace qnls
