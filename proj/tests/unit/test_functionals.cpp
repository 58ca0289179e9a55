#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qnls/functionals.hpp"

using namespace qnls;

namespace {

constexpr double kPi = std::numbers::pi;

GridPtr grid5() { return make_grid(5, 32.0, 2048); }

FieldPair pair_of(const GridPtr& g, double au, double wu, double av, double wv) {
    return FieldPair{RadialField::from_function(g, [=](double r) { return cplx(au * std::exp(-r * r / (wu * wu))); }),
                     RadialField::from_function(g, [=](double r) { return cplx(av * std::exp(-r * r / (wv * wv))); })};
}

}  // namespace

TEST_SUITE("functionals") {

TEST_CASE("Gaussian oracles in n = 5") {
    const auto g = grid5();
    const double base = std::pow(kPi / 2.0, 2.5);  // 3.0925
    CHECK(base == doctest::Approx(3.0925).epsilon(1e-4));

    const FieldPair u_only = pair_of(g, 1, 1, 0, 1);
    const FieldPair v_only = pair_of(g, 0, 1, 1, 1);
    const FieldPair both = pair_of(g, 1, 1, 1, 1);

    CHECK(charge(zero_pair(g)) == 0.0);
    CHECK(kinetic(zero_pair(g), 0.5) == 0.0);
    CHECK(charge(u_only) == doctest::Approx(base).epsilon(1e-12));
    CHECK(charge(v_only) == doctest::Approx(2.0 * base).epsilon(1e-12));
    CHECK(kinetic(u_only, 0.5) == doctest::Approx(5.0 * base).epsilon(1e-4));
    CHECK(kinetic(u_only, 3.0) == doctest::Approx(5.0 * base).epsilon(1e-4));
    CHECK(kinetic(v_only, 0.5) == doctest::Approx(2.5 * base).epsilon(1e-4));
    CHECK(interaction(both) == doctest::Approx(std::pow(kPi / 3.0, 2.5)).epsilon(1e-12));
    CHECK(interaction(u_only) == 0.0);
    CHECK(energy(u_only, 0.5) == doctest::Approx(kinetic(u_only, 0.5)));
    CHECK(action(u_only, 0.5, 2.0) == doctest::Approx(0.5 * (5.0 * base + 2.0 * base)).epsilon(1e-4));
    CHECK(action(u_only, 0.5, 2.0) == doctest::Approx(10.824).epsilon(1e-4));
    CHECK(action(zero_pair(g), 0.5, 3.0) == 0.0);
    CHECK_THROWS(action(u_only, 0.5, 0.0));

    // J = Q^{1/4} K^{5/4} / P with Q = 3 base, K = 7.5 base, P = (pi/3)^{5/2}
    const double J = std::pow(3.0 * base, 0.25) * std::pow(7.5 * base, 1.25) / std::pow(kPi / 3.0, 2.5);
    CHECK(J == doctest::Approx(79.156).epsilon(1e-4));
    CHECK(weinstein(both, 0.5) == doctest::Approx(J).epsilon(1e-4));
}

TEST_CASE("weinstein outside P > 0 is a domain error") {
    const auto g = grid5();
    CHECK_THROWS_AS(weinstein(pair_of(g, 1, 1, -1, 1), 0.5), std::domain_error);
    CHECK_THROWS_AS(weinstein(pair_of(g, 1, 1, 0, 1), 0.5), std::domain_error);
    CHECK_FALSE(evaluate(pair_of(g, 1, 1, -1, 1), 0.5).J.has_value());
}

TEST_CASE("kappa must be positive") {
    const auto g = grid5();
    CHECK_THROWS(kinetic(pair_of(g, 1, 1, 1, 1), 0.0));
    CHECK_THROWS(kinetic(pair_of(g, 1, 1, 1, 1), -1.0));
}

TEST_CASE("scaling laws") {
    const auto g = grid5();
    const FieldPair s = pair_of(g, 1.3, 1.1, 0.7, 1.6);
    const auto b = evaluate(s, 0.5);
    {
        const auto v = evaluate(scale(s, 1.0, 1.0), 0.5);
        CHECK(v.Q == doctest::Approx(b.Q).epsilon(1e-15));
        CHECK(v.K == doctest::Approx(b.K).epsilon(1e-15));
    }
    {
        const auto v = evaluate(scale(s, 2.0, 1.0), 0.5);
        CHECK(v.Q == doctest::Approx(4.0 * b.Q).epsilon(1e-14));
        CHECK(v.P == doctest::Approx(8.0 * b.P).epsilon(1e-14));
    }
    {
        const auto v = evaluate(scale(s, 1.0, 2.0), 0.5);
        CHECK(v.K == doctest::Approx(8.0 * b.K).epsilon(1e-14));
        CHECK(v.Q == doctest::Approx(32.0 * b.Q).epsilon(1e-14));
    }
    CHECK(*evaluate(scale(s, 2.0, 3.0), 0.5).J == doctest::Approx(*b.J).epsilon(1e-13));
    CHECK_THROWS(scale(s, 1.0, 0.0));
    CHECK_THROWS(scale(s, 1.0, -2.0));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(std::log(0.1), std::log(10.0));
    for (int i = 0; i < 100; ++i) {
        const double a = std::exp(U(rng)), l = std::exp(U(rng));
        const auto v = evaluate(scale(s, a, l), 0.5);
        CHECK(v.Q == doctest::Approx(a * a * std::pow(l, 5) * b.Q).epsilon(1e-12));
        CHECK(v.K == doctest::Approx(a * a * std::pow(l, 3) * b.K).epsilon(1e-12));
        CHECK(v.P == doctest::Approx(a * a * a * std::pow(l, 5) * b.P).epsilon(1e-12));
        CHECK(*v.J == doctest::Approx(*b.J).epsilon(1e-12));
    }
}

TEST_CASE("gauge covariance") {
    const auto g = grid5();
    const FieldPair s = pair_of(g, 1.0, 1.0, 0.8, 1.4);
    const auto b = evaluate(s, 0.5);
    for (double th : {0.3, 1.9, 4.4}) {
        const FieldPair t{s.u.multiplied(std::polar(1.0, th)), s.v.multiplied(std::polar(1.0, 2 * th))};
        const auto v = evaluate(t, 0.5);
        CHECK(v.Q == doctest::Approx(b.Q).epsilon(1e-14));
        CHECK(v.K == doctest::Approx(b.K).epsilon(1e-14));
        CHECK(v.P == doctest::Approx(b.P).epsilon(1e-13));
        CHECK(v.E == doctest::Approx(b.E).epsilon(1e-13));
    }
    // a mismatched phase on v changes P: u^2 conj(v) picks up e^{i theta}
    const FieldPair w{s.u, s.v.multiplied(std::polar(1.0, 1.0))};
    CHECK(interaction(w) == doctest::Approx(std::cos(1.0) * b.P).epsilon(1e-13));
}

TEST_CASE("E = K - 2 Re(v, u^2) for complex fields") {
    const auto g = grid5();
    FieldPair s{RadialField::from_function(g, [](double r) { return cplx(1.0, 0.5 * r) * std::exp(-r * r); }),
                RadialField::from_function(g, [](double r) { return cplx(0.3, -0.8) * std::exp(-0.5 * r * r); })};
    const auto v = evaluate(s, 0.5);
    CHECK(v.E == doctest::Approx(v.K - 2.0 * v.P).epsilon(1e-14));
    // direct quadrature of Re u^2 conj(v)
    const auto& gr = s.u.base_grid();
    double P = 0.0;
    for (std::size_t j = 0; j < gr.size(); ++j) {
        P += gr.weights()[j] * std::real(s.u.samples()[j] * s.u.samples()[j] * std::conj(s.v.samples()[j]));
    }
    CHECK(v.P == doctest::Approx(P).epsilon(1e-13));
}

TEST_CASE("normalize_system") {
    const auto g = grid5();
    const FieldPair s = pair_of(g, 1.0, 1.0, 1.0, 1.0);

    RawConstants id;  // m = M = 1/2, lambda = -2, mu = -1, c = 2
    const SystemParams p = SystemParams::from_raw(id);
    CHECK(p.kappa == doctest::Approx(1.0));
    const FieldPair t = materialize(normalize_system(p, s));
    CHECK(t.u.base_grid().same_as(s.u.base_grid()));
    for (std::size_t j = 0; j < g->size(); j += 101) {
        CHECK(std::abs(t.u.samples()[j] - s.u.samples()[j]) < 1e-15);
        CHECK(std::abs(t.v.samples()[j] - s.v.samples()[j]) < 1e-15);
    }

    RawConstants heavy{1.0, 2.0, {-2.0, 0.0}, {-1.0, 0.0}, 2.0};
    const SystemParams q = SystemParams::from_raw(heavy);
    CHECK(q.kappa == doctest::Approx(0.5));
    const FieldPair h = normalize_system(q, s);
    // u~(x) = u(x / sqrt 2) = exp(-x^2 / 2): charge pi^{5/2}
    CHECK(charge(FieldPair{h.u, h.u.multiplied(0.0)}) == doctest::Approx(std::pow(kPi, 2.5)).epsilon(1e-12));
    const FieldPair hm = materialize(h);
    CHECK(hm.u.base_grid().spacing() == doctest::Approx(std::sqrt(2.0) * g->spacing()).epsilon(1e-15));

    // zero state stays zero
    CHECK(charge(normalize_system(q, zero_pair(g))) == 0.0);

    // complex constants: amplitude sqrt(c/2)|mu| and -lambda/2
    RawConstants cx{0.5, 0.5, {0.0, 0.0}, {0.0, 2.0}, 3.0};
    cx.lambda = cx.c * std::conj(cx.mu);
    const FieldPair z = materialize(normalize_system(SystemParams::from_raw(cx), s));
    CHECK(std::abs(z.u.samples()[0] - std::sqrt(1.5) * 2.0 * s.u.samples()[0]) < 1e-14);
    CHECK(std::abs(z.v.samples()[0] - (-0.5 * cx.lambda) * s.v.samples()[0]) < 1e-14);

    RawConstants bad = id;
    bad.lambda = {5.0, 0.0};
    CHECK_THROWS(SystemParams::from_raw(bad));
    RawConstants negc{0.5, 0.5, {1.0, 0.0}, {-1.0, 0.0}, -1.0};
    CHECK_THROWS(normalize_system(SystemParams::from_raw(negc), s));
    CHECK_THROWS(normalize_system(SystemParams::from_kappa(0.5), s));
}

TEST_CASE("rearrangement") {
    const auto g = grid5();
    SUBCASE("monotone field is fixed") {
        const FieldPair s = pair_of(g, 1.0, 1.0, 2.0, 0.7);
        const FieldPair r = rearrange(s);
        for (std::size_t j = 0; j < g->size(); ++j) {
            CHECK(std::abs(r.u.samples()[j] - s.u.samples()[j]) <= 1e-15 * std::abs(s.u.samples()[0]) + 1e-300);
            CHECK(std::abs(r.v.samples()[j] - s.v.samples()[j]) <= 1e-15 * std::abs(s.v.samples()[0]) + 1e-300);
        }
    }
    SUBCASE("bimodal bump moved to the origin") {
        auto bump = [](double r) { return cplx(std::exp(-(r - 5.0) * (r - 5.0)) + 0.5 * std::exp(-(r - 9.0) * (r - 9.0) * 4.0)); };
        const FieldPair s{RadialField::from_function(g, bump), RadialField::from_function(g, bump)};
        const FieldPair r = rearrange(s);
        const auto ru = r.u.real_values();
        for (std::size_t j = 1; j < ru.size(); ++j) CHECK(ru[j] <= ru[j - 1]);
        CHECK(charge(r) == doctest::Approx(charge(s)).epsilon(1e-3));
        CHECK(kinetic(r, 0.5) <= kinetic(s, 0.5) * (1.0 + 1e-2));
    }
    SUBCASE("rejects negative and complex input") {
        CHECK_THROWS(rearrange(pair_of(g, 1.0, 1.0, -1.0, 1.0)));
        FieldPair c{RadialField::from_function(g, [](double r) { return cplx(0.0, std::exp(-r * r)); }),
                    RadialField::zeros(g)};
        CHECK_THROWS(rearrange(c));
    }
}

TEST_CASE("grid mismatch is rejected") {
    const FieldPair s{RadialField::zeros(make_grid(5, 10.0, 100)), RadialField::zeros(make_grid(5, 10.0, 101))};
    CHECK_THROWS(charge(s));
}

}
