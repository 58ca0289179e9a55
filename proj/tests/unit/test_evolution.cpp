#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "qnls/evolution.hpp"

using namespace qnls;

namespace {

FieldPair gaussian_pair(const GridPtr& g, cplx au, cplx av) {
    return FieldPair{RadialField::from_function(g, [=](double r) { return au * std::exp(-r * r); }),
                     RadialField::from_function(g, [=](double r) { return av * std::exp(-0.7 * r * r); })};
}

double max_diff(std::span<const cplx> a, std::span<const cplx> b) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
    return m;
}

}  // namespace

TEST_SUITE("evolution") {

TEST_CASE("config validation") {
    EvolveConfig c;
    CHECK_NOTHROW(c.validate());
    c.dt = 0.0;
    CHECK_THROWS(c.validate());
    c = EvolveConfig{};
    c.order = 3;
    CHECK_THROWS(c.validate());
    c = EvolveConfig{};
    CHECK(c.effective_dt_min() == doctest::Approx(1e-3 / 1024));
}

TEST_CASE("small data follows the free Schrodinger flow") {
    // exp(-r^2) evolves to (1 + 4it)^{-n/2} exp(-r^2 / (1 + 4it)) under i u_t + Lap u = 0
    const int n = 3;
    const auto g = make_grid(n, 20.0, 2000);
    const double eps = 1e-7;
    FieldPair s = gaussian_pair(g, eps, 0.0);
    EvolveConfig c;
    c.dt = 1e-3;
    c.t_max = 0.1;
    FieldPair end;
    evolve(s, c, {}, &end);
    const auto u = end.u.samples();
    double worst = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
        const double r = g->nodes()[j];
        const cplx d(1.0, 4.0 * 0.1);
        const cplx exact = eps * std::pow(d, -0.5 * n) * std::exp(-r * r / d);
        worst = std::max(worst, std::abs(u[j] - exact));
    }
    CHECK(worst < 5e-4 * eps);  // O(h^2) spatial error, h = 0.01
}

TEST_CASE("time reversal") {
    const auto g = make_grid(5, 12.0, 400);
    const FieldPair s = materialize(gaussian_pair(g, cplx(2.0, 0.5), cplx(1.0, -0.3)));
    for (int order : {2, 4}) {
        std::vector<cplx> u(s.u.samples().begin(), s.u.samples().end());
        std::vector<cplx> v(s.v.samples().begin(), s.v.samples().end());
        const Propagator fwd(*g, 0.5, 2e-3, 1e-14, 100, order);
        const Propagator bwd(*g, 0.5, -2e-3, 1e-14, 100, order);
        for (int k = 0; k < 20; ++k) REQUIRE(fwd.advance(u, v));
        for (int k = 0; k < 20; ++k) REQUIRE(bwd.advance(u, v));
        CHECK(max_diff(u, s.u.samples()) < 1e-10);
        CHECK(max_diff(v, s.v.samples()) < 1e-10);
    }
}

TEST_CASE("charge is conserved by every step") {
    const auto g = make_grid(5, 12.0, 400);
    FieldPair s = gaussian_pair(g, cplx(3.0, 0.0), cplx(2.0, 1.0));
    EvolveConfig c;
    c.dt = 5e-3;
    const double Q0 = charge(s);
    const double E0 = energy(s, 0.5);
    for (int k = 0; k < 10; ++k) s = step(s, c);
    CHECK(charge(s) == doctest::Approx(Q0).epsilon(1e-12));
    CHECK(energy(s, 0.5) == doctest::Approx(E0).epsilon(1e-6));
}

TEST_CASE("gauge equivariance of the flow") {
    const auto g = make_grid(5, 12.0, 300);
    const FieldPair s = gaussian_pair(g, cplx(2.0, 0.0), cplx(1.5, 0.0));
    const double th = 0.9;
    const FieldPair t{s.u.multiplied(std::polar(1.0, th)), s.v.multiplied(std::polar(1.0, 2 * th))};
    EvolveConfig c;
    c.dt = 2e-3;
    FieldPair a = s, b = t;
    for (int k = 0; k < 10; ++k) {
        a = step(a, c);
        b = step(b, c);
    }
    std::vector<cplx> ua(a.u.samples().begin(), a.u.samples().end());
    std::vector<cplx> va(a.v.samples().begin(), a.v.samples().end());
    for (auto& x : ua) x *= std::polar(1.0, th);
    for (auto& x : va) x *= std::polar(1.0, 2 * th);
    CHECK(max_diff(ua, b.u.samples()) < 1e-11);
    CHECK(max_diff(va, b.v.samples()) < 1e-11);
}

TEST_CASE("order 4 beats order 2 on the energy error") {
    const auto g = make_grid(5, 12.0, 400);
    const FieldPair s = gaussian_pair(g, cplx(3.0, 0.0), cplx(2.0, 0.0));
    const double E0 = energy(s, 0.5);
    double err[2];
    for (int i = 0; i < 2; ++i) {
        EvolveConfig c;
        c.dt = 1e-2;
        c.t_max = 0.2;
        c.order = i == 0 ? 2 : 4;
        FieldPair end;
        evolve(s, c, {}, &end);
        err[i] = std::abs(energy(end, 0.5) - E0);
    }
    CHECK(err[1] < 0.1 * err[0]);
}

TEST_CASE("virial rhs requires mass resonance") {
    const auto g = make_grid(5, 12.0, 300);
    const FieldPair s = gaussian_pair(g, 1.0, 1.0);
    CHECK_THROWS(virial_rhs(s, 1.0));
    const double K = kinetic(s, 0.5), E = energy(s, 0.5);
    CHECK(virial_rhs(s, 0.5) == doctest::Approx(10.0 * E - 2.0 * K).epsilon(1e-14));
    // V = (1/2) int r^2 (|u|^2 + 2|v|^2) by direct quadrature
    const auto& gr = *g;
    double V = 0.0;
    for (std::size_t j = 0; j < gr.size(); ++j) {
        const double r = gr.nodes()[j];
        V += 0.5 * gr.weights()[j] * r * r * (std::norm(s.u.samples()[j]) + 2.0 * std::norm(s.v.samples()[j]));
    }
    CHECK(virial_weight(s) == doctest::Approx(V).epsilon(1e-14));
    const CutoffProfile p(gr.r_max(), gr);
    CHECK(localized_virial_weight(s, p) == doctest::Approx(V).epsilon(1e-13));
    CHECK(2.0 * localized_virial_rhs(s, p) == doctest::Approx(virial_rhs(s, 0.5)).epsilon(1e-10));
}

TEST_CASE("second_difference5 is exact on quintics") {
    std::vector<double> y(9);
    const double tau = 0.1;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double t = i * tau;
        y[i] = 1 + t - 2 * t * t + 0.5 * t * t * t + t * t * t * t - 0.3 * t * t * t * t * t;
    }
    for (std::size_t i = 2; i + 2 < y.size(); ++i) {
        const double t = i * tau;
        const double exact = -4 + 3 * t + 12 * t * t - 6 * t * t * t;
        CHECK(second_difference5(y, i, tau) == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("detect_blowup on synthetic records") {
    EvolveConfig c;
    c.t_max = 1.0;
    TrajectoryRecord r;
    r.times = {0.0, 0.5, 1.0};
    r.K_series = {1.0, 2.0, 3.0};
    r.reached_t_max = true;
    CHECK(detect_blowup(r, c).verdict == BlowupVerdict::BOUNDED);
    CHECK(detect_blowup(r, c, 2.5).verdict == BlowupVerdict::INCONCLUSIVE);
    r.K_series[2] = 60.0;
    const Detection d = detect_blowup(r, c);
    CHECK(d.verdict == BlowupVerdict::BLOWUP);
    CHECK(*d.t_detect == 1.0);
    r.K_series[2] = 3.0;
    r.reached_t_max = false;
    CHECK(detect_blowup(r, c).verdict == BlowupVerdict::INCONCLUSIVE);
    r.step_failure = true;
    r.t_detect = 0.7;
    CHECK(detect_blowup(r, c).verdict == BlowupVerdict::BLOWUP);
    CHECK(detect_blowup(TrajectoryRecord{}, c).verdict == BlowupVerdict::INCONCLUSIVE);
    CHECK(to_string(BlowupVerdict::BOUNDED) == "BOUNDED");
}

TEST_CASE("trajectory CSV columns") {
    const auto g = make_grid(5, 12.0, 200);
    EvolveConfig c;
    c.t_max = 0.05;
    const auto rec = evolve(gaussian_pair(g, 1.0, 1.0), c);
    CHECK(rec.reached_t_max);
    CHECK(rec.times.front() == 0.0);
    CHECK(rec.times.back() == doctest::Approx(0.05));
    const auto path = (std::filesystem::temp_directory_path() / "qnls_traj.csv").string();
    write_trajectory_csv(rec, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,Q,E,K,P,V,virial_rhs");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == rec.size());
    std::remove(path.c_str());

    EvolveConfig c1 = c;
    c1.kappa = 1.0;
    const auto rec1 = evolve(gaussian_pair(g, 1.0, 1.0), c1);
    CHECK(rec1.rhs_series.empty());
}

TEST_CASE("zero data stays zero") {
    const auto g = make_grid(5, 12.0, 100);
    EvolveConfig c;
    c.t_max = 0.02;
    const auto rec = evolve(zero_pair(g), c);
    CHECK(rec.reached_t_max);
    for (double K : rec.K_series) CHECK(K == 0.0);
    CHECK(detect_blowup(rec, c).verdict == BlowupVerdict::BOUNDED);
}

}
