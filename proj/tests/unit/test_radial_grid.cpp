#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "qnls/radial_grid.hpp"

using namespace qnls;

namespace {

std::vector<double> sample(const RadialGrid& g, double (*f)(double)) {
    std::vector<double> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = f(g.nodes()[j]);
    return out;
}

double gauss(double r) { return std::exp(-r * r); }

}  // namespace

TEST_SUITE("radial_grid") {

TEST_CASE("sphere measure against the Gamma function") {
    for (int n = 1; n <= 5; ++n) {
        const double oracle = 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
        CHECK(unit_sphere_measure(n) == doctest::Approx(oracle).epsilon(1e-14));
        CHECK(ball_volume(n, 2.0) == doctest::Approx(oracle * std::pow(2.0, n) / n).epsilon(1e-14));
    }
    CHECK(unit_sphere_measure(1) == doctest::Approx(2.0));
    CHECK(ball_volume(3, 1.0) == doctest::Approx(4.0 * std::numbers::pi / 3.0));
}

TEST_CASE("rejects bad construction") {
    CHECK_THROWS(RadialGrid(0, 1.0, 10));
    CHECK_THROWS(RadialGrid(6, 1.0, 10));
    CHECK_THROWS(RadialGrid(3, -1.0, 10));
}

TEST_CASE("cell-centred layout") {
    const RadialGrid g(3, 2.0, 4);
    CHECK(g.spacing() == doctest::Approx(0.5));
    CHECK(g.nodes()[0] == doctest::Approx(0.25));
    CHECK(g.nodes()[3] == doctest::Approx(1.75));
    CHECK(g.r_max() == doctest::Approx(2.0));
}

TEST_CASE("Gaussian integral int exp(-2 r^2) = (pi/2)^{n/2}") {
    for (int n = 1; n <= 5; ++n) {
        const RadialGrid g(n, 32.0, 2048);
        std::vector<double> f(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) f[j] = std::exp(-2.0 * g.nodes()[j] * g.nodes()[j]);
        const double oracle = std::pow(std::numbers::pi / 2.0, n / 2.0);
        // midpoint rule: spectral for odd n (even integrand), O(h^2) for even n
        const double tol = (n % 2 == 1) ? 1e-12 : 1e-3;
        CHECK(integrate(g, f) == doctest::Approx(oracle).epsilon(tol));
    }
}

TEST_CASE("integrate rejects non-finite samples") {
    const RadialGrid g(2, 1.0, 8);
    std::vector<double> f(8, 1.0);
    f[3] = std::nan("");
    CHECK_THROWS(integrate(g, f));
}

TEST_CASE("Laplacian of exp(-r^2) is (4 r^2 - 2n) exp(-r^2)") {
    for (int n = 1; n <= 5; ++n) {
        const RadialGrid g(n, 12.0, 4096);
        const auto f = sample(g, gauss);
        const auto lap = apply_laplacian(g, f);
        // midpoint weights make the first cells inconsistent for n >= 3 (error ~ h^2 / r^2),
        // so check pointwise away from the origin and in the weighted norm everywhere
        double worst = 0.0;
        std::vector<double> err(g.size()), exact(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double r = g.nodes()[j];
            exact[j] = (4.0 * r * r - 2.0 * n) * gauss(r);
            err[j] = lap[j] - exact[j];
            if (r >= 0.5) worst = std::max(worst, std::abs(err[j]));
        }
        CAPTURE(n);
        CHECK(worst < 1e-3);
        CHECK(l2_norm(g, err) < 1e-3 * l2_norm(g, exact));
    }
}

TEST_CASE("self-adjointness and the two routes to the gradient energy") {
    const RadialGrid g(5, 10.0, 500);
    std::vector<double> f(g.size()), h(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double r = g.nodes()[j];
        f[j] = std::exp(-r * r) * (1.0 + 0.3 * std::cos(3.0 * r));
        h[j] = 1.0 / (1.0 + r * r * r * r);
    }
    const double a = inner(g, apply_laplacian(g, f), h);
    const double b = inner(g, f, apply_laplacian(g, h));
    CHECK(std::abs(a - b) < 1e-12 * std::abs(a));
    CHECK(gradient_energy(g, f) == doctest::Approx(-inner(g, apply_laplacian(g, f), f)).epsilon(1e-12));
}

TEST_CASE("gradient energy of exp(-r^2) is n (pi/2)^{n/2}") {
    for (int n = 1; n <= 5; ++n) {
        const RadialGrid g(n, 32.0, 2048);
        const double oracle = n * std::pow(std::numbers::pi / 2.0, n / 2.0);
        CHECK(gradient_energy(g, sample(g, gauss)) == doctest::Approx(oracle).epsilon(1e-4));
    }
}

TEST_CASE("dilation rescales integrals exactly") {
    const RadialGrid g(5, 8.0, 300);
    const auto f = sample(g, gauss);
    for (double l : {0.3, 1.7, 9.0}) {
        const RadialGrid d = g.dilated(l);
        CHECK(integrate(d, f) == doctest::Approx(std::pow(l, 5) * integrate(g, f)).epsilon(1e-13));
        CHECK(gradient_energy(d, f) == doctest::Approx(std::pow(l, 3) * gradient_energy(g, f)).epsilon(1e-13));
        CHECK(d.same_as(RadialGrid::with_spacing(5, l * g.spacing(), 300)));
    }
    CHECK_FALSE(g.same_as(g.dilated(1.0 + 1e-15)));
}

TEST_CASE("complex overloads agree with real parts") {
    const RadialGrid g(3, 6.0, 200);
    const auto f = sample(g, gauss);
    std::vector<cplx> z(f.size());
    const cplx phase = std::polar(1.0, 0.7);
    for (std::size_t j = 0; j < f.size(); ++j) z[j] = phase * f[j];
    CHECK(l2_norm(g, z) == doctest::Approx(l2_norm(g, f)).epsilon(1e-14));
    CHECK(gradient_energy(g, z) == doctest::Approx(gradient_energy(g, f)).epsilon(1e-14));
    const auto lz = apply_laplacian(g, z);
    const auto lf = apply_laplacian(g, f);
    for (std::size_t j = 0; j < f.size(); j += 37) CHECK(std::abs(lz[j] - phase * lf[j]) < 1e-12);
}

}
