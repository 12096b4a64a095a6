#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "tiltgrid/error.hpp"
#include "tiltgrid/transforms.hpp"

using namespace tiltgrid;
using fx::kPi;

TEST_CASE("exp_moment closed forms") {
    CHECK(exp_moment(make_point_mass(), 0.7).value == 1.0);
    CHECK(exp_moment(make_exp_pareto(1.0, 2.0), 1.0).value == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(exp_moment(make_exp_pareto(1.0, 3.0), 1.0).value == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(exp_moment(make_xi(), 1.0).value == doctest::Approx(fx::kXiMoment).epsilon(1e-13));
    CHECK(fx::kXiMoment == doctest::Approx(11.4247780).epsilon(1e-8));
    CHECK(exp_moment(make_exponential(1.0), 1.0).infinite);
    CHECK(exp_moment(make_exp_pareto(1.0, 2.0), 1.2).infinite);
    // exponential(theta): theta / (theta - gamma)
    CHECK(exp_moment(make_exponential(3.0), 1.0).value == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("xi moment: independent quadrature cross-check") {
    const auto q = quadrature_moment(make_xi(), 1.0, 2 * kPi, 256, 2 * kPi * 4096);
    CHECK(fx::rel(q.value, fx::kXiMoment) <= 1e-3);
    CHECK(std::abs(q.value - fx::kXiMoment) <= q.error_bound + 1e-3 * fx::kXiMoment);
}

TEST_CASE("grid exp_moment is within its error bound") {
    const auto m = exp_moment(fx::exp_pareto(), 1.0);
    CHECK(std::abs(m.value - 2.0) <= m.error_bound);
    const auto mx = exp_moment(fx::xi(), 1.0);
    CHECK(std::abs(mx.value - fx::kXiMoment) <= mx.error_bound);
    CHECK(fx::rel(exp_moment(fx::exp_pareto(), 0.5).value, exp_moment(make_exp_pareto(1.0, 2.0), 0.5).value) < 1e-4);
    CHECK_THROWS_AS(exp_moment(fx::exp_pareto(), 1.5), ConfigError);
}

TEST_CASE("complex transform basics") {
    const auto pm = complex_transform(make_point_mass(), 1.0, 0.0, 4.0, 0.5);
    for (auto v : pm.values) CHECK(std::abs(v - 1.0) < 1e-15);

    for (const auto& s : {make_exp_pareto(1.0, 2.0), make_xi(), make_m_mixture({1.0, 0.5, 2.0, 1.0, 1.0})}) {
        const auto at0 = transform_at(s, {1.0, 0.0});
        CHECK(at0.real() == doctest::Approx(exp_moment(s, 1.0).value).epsilon(1e-10));
        CHECK(std::abs(at0.imag()) < 1e-12);
    }
    double eb = 0.0;
    const auto z1 = transform_at(make_xi(), {1.0, 1.0}, &eb);
    CHECK(std::abs(z1) <= 1e-4 * fx::kXiMoment);
    CHECK(std::abs(z1) <= 1e-10);
    CHECK_THROWS_AS(complex_transform(make_exponential(1.0), 1.0, 0.0, 1.0, 0.1), ConfigError);
}

TEST_CASE("property: conjugate symmetry and modulus bound") {
    for (const auto& s : {make_exp_pareto(1.0, 2.0), make_xi()}) {
        const double m = exp_moment(s, 1.0).value;
        for (double z : {0.3, 1.0, 2.7, 6.1}) {
            const auto a = transform_at(s, {1.0, z}), b = transform_at(s, {1.0, -z});
            CHECK(std::abs(a - std::conj(b)) < 1e-10 * m);
            CHECK(std::abs(a) <= m * (1 + 1e-12));
        }
    }
}

TEST_CASE("grid transform tracks the closed form") {
    const auto spec = make_exp_pareto(1.0, 2.0);
    for (double z : {0.0, 0.5, 1.0, 3.0}) {
        double eb = 0.0;
        const auto g = transform_at(fx::exp_pareto(), {1.0, z}, &eb);
        const auto c = transform_at(spec, {1.0, z});
        CHECK(std::abs(g - c) <= eb);
        // the bound scales with |s| times the truncated tilted mass
        CHECK(eb <= 10 * std::abs(std::complex<double>(1.0, z)) * fx::exp_pareto().trunc_mass_bound);
    }
}

TEST_CASE("zero candidates") {
    const auto ep = make_exp_pareto(1.0, 2.0);
    const auto pe = complex_transform(ep, 1.0, 0.0, 8.0, 0.01);
    CHECK(find_zero_candidates(pe, 1e-3, [&](double z) { return transform_at(ep, {1.0, z}); }).empty());
    // brute-force scan: the modulus stays away from 0
    CHECK(pe.min_modulus > 0.05);

    const auto xs = make_xi();
    const auto px = complex_transform(xs, 1.0, 0.0, 8.0, 0.01);
    const auto zx = find_zero_candidates(px, 1e-3, [&](double z) { return transform_at(xs, {1.0, z}); });
    REQUIRE(!zx.empty());
    CHECK(std::any_of(zx.begin(), zx.end(), [](const ZeroCandidate& c) { return std::abs(c.z - 1.0) < 0.01; }));

    // sampled-only refinement on the grid profile
    const auto pg = complex_transform(fx::xi(), 1.0, 0.0, 2.0, 0.01);
    const auto zg = find_zero_candidates(pg, 1e-3);
    CHECK(std::any_of(zg.begin(), zg.end(), [](const ZeroCandidate& c) { return std::abs(c.z - 1.0) < 0.01; }));

    const auto pp = complex_transform(make_point_mass(), 1.0, 0.0, 8.0, 0.1);
    CHECK(find_zero_candidates(pp, 1e-3).empty());
}

TEST_CASE("tilt closed forms") {
    const double h = fx::kH, X = fx::kXMax;
    const auto tp = tilt(make_point_mass(), 1.0, 1.0, h, X);
    CHECK(std::all_of(tp.W.begin(), tp.W.end(), [](double w) { return w == 0.0; }));

    const auto te = tilt(make_exp_pareto(1.0, 2.0), 1.0, 1.0, h, X);
    CHECK(te.gamma0 == 0.0);
    const std::size_t j1 = 163; // x = 163 pi / 512, a node
    const double x = te.x(j1);
    CHECK(te.W[j1] == doctest::Approx(0.5 * (1 / ((1 + x) * (1 + x)) + 1 / (1 + x))).epsilon(1e-12));
    // tilted tail at exactly x = 1 from the same formula
    CHECK(0.5 * (0.25 + 0.5) == doctest::Approx(3.0 / 8.0));

    // the rep path normalizes by the in-grid moment, so it differs by the truncated share
    const auto trep = tilt(fx::exp_pareto(), 1.0);
    const double share = fx::exp_pareto().trunc_mass_bound / 2.0;
    CHECK(trep.W[j1] == doctest::Approx(te.W[j1]).epsilon(2 * share));
}

TEST_CASE("property: tilt round trip and inverse moment") {
    for (const auto* r : {&fx::exp_pareto(), &fx::xi(), &fx::m_mixture()}) {
        const auto t = tilt(*r, 0.6);
        const auto back = tilt(t, -0.6);
        CHECK(back.gamma0 == doctest::Approx(r->gamma0));
        double worst = 0.0;
        for (std::size_t j = 0; j < r->W.size(); ++j)
            if (r->W[j] > 0) worst = std::max(worst, std::abs(back.W[j] - r->W[j]) / r->W[j]);
        CHECK(worst <= 1e-10);

        const double m = exp_moment(*r, 0.6).value;
        CHECK(exp_moment(t, -0.6).value == doctest::Approx(1.0 / m).epsilon(1e-10));
    }
    CHECK_THROWS_AS(tilt(make_exponential(1.0), 1.0, 1.0, fx::kH, fx::kXMax), ConfigError);
}

TEST_CASE("smoothing kernel") {
    const SmoothingKernel k(1.0, 1.0);
    CHECK(k.c1 == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.c1 == doctest::Approx(0.3678794).epsilon(1e-6));
    CHECK(k.tilted_integral() == doctest::Approx(std::exp(1.0) / 2).epsilon(1e-14));
    CHECK(k.tail(0.0) == doctest::Approx(1.0));
    CHECK(k.tail(1.0) == doctest::Approx(0.0).epsilon(1e-15));

    // density integrates to one (Simpson)
    const int n = 2000;
    double s = k.density(0) + k.density(1.0 - 1e-15);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * k.density(double(i) / n);
    CHECK(s / (3.0 * n) == doctest::Approx(1.0).epsilon(1e-9));

    // general c, gamma: c1 = \int_0^c e^{-gamma x}(1 - x/c) dx
    const SmoothingKernel k2(0.5, 2.0);
    const double g = 0.5, c = 2.0;
    CHECK(k2.c1 == doctest::Approx(1 / g - (1 - std::exp(-g * c)) / (g * g * c)).epsilon(1e-13));
}

TEST_CASE("smooth(point_mass) is the kernel") {
    const SmoothingKernel k(1.0, 1.0);
    const auto sm = smooth(make_point_mass(), 1.0, 1.0, 1.0, fx::kH, 10.0);
    for (std::size_t j = 0; j < sm.W.size(); j += 37) {
        const double x = sm.x(j);
        CHECK(sm.tail(j) == doctest::Approx(k.tail(x)).epsilon(1e-3).scale(1e-3));
    }
}

TEST_CASE("smoothing ratio and sandwich") {
    const auto& ep = fx::exp_pareto();
    const auto sm = smooth(ep, 1.0, 1.0);
    // tail ratio at the end of the grid against e/2
    const std::size_t last = ep.W.size() - 1;
    CHECK(sm.W[last] / ep.W[last] == doctest::Approx(std::exp(1.0) / 2).epsilon(5e-3));

    // tail_c(x + c) <= tail(x) <= tail_c(x) in tilted form, with grid tolerance
    const long kc = ep.steps_for(1.0);
    const double tol = 1e-9 + 2 * (sm.disc_error_rel + ep.disc_error_rel);
    const double back = std::exp(-ep.gamma0 * kc * ep.step);
    bool ok = true;
    for (std::size_t j = 0; j + kc < ep.W.size(); ++j) {
        const double lo = sm.W[j + kc] * back, mid = ep.W[j], hi = sm.W[j];
        if (lo > mid * (1 + tol) || mid > hi * (1 + tol)) ok = false;
    }
    CHECK(ok);
}
