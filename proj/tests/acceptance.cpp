// One line per acceptance criterion at the default grid. Exit status is
// non-zero when any criterion is red.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/counterexample.hpp"
#include "tiltgrid/defaults.hpp"
#include "tiltgrid/diagnostics.hpp"
#include "tiltgrid/dist_core.hpp"
#include "tiltgrid/transforms.hpp"

using namespace tiltgrid;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kH = defaults::kStep;
constexpr double kXMax = defaults::kXMax;
constexpr double kXiMoment = 3 * kPi + 2;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (ok ? "" : "!") << what << "; ";
    }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string band(const LimitEstimate& e) { return "[" + fmt(e.window_inf) + ", " + fmt(e.window_sup) + "]"; }

bool band_within(const LimitEstimate& e, double target, double rel) {
    return e.window_inf >= target * (1 - rel) && e.window_sup <= target * (1 + rel);
}

const ReproductionReport& report() {
    static const auto r = full_report(CounterexampleConfig{});
    return r;
}

const GriddedTiltRep& exp_pareto() {
    static const auto r = to_grid(make_exp_pareto(1.0, 2.0), 1.0, kH, kXMax);
    return r;
}

Outcome moment() {
    Outcome o;
    const auto& m = report().moment_zero;
    o.require(m.moment_closed_rel_error <= 1e-6, "closed-form rel err " + fmt(m.moment_closed_rel_error) + " <= 1e-6");
    o.require(m.moment_quadrature_rel_error <= 1e-3, "quadrature rel err " + fmt(m.moment_quadrature_rel_error) + " <= 1e-3");
    return o;
}

Outcome transform_zero() {
    Outcome o;
    const auto& r = report();
    const double mod = r.moment_zero.transform_zero_modulus;
    o.require(mod <= 1e-4 * kXiMoment, "|xi^(1+i)| = " + fmt(mod));
    const auto near = std::find_if(r.xi_zeros.begin(), r.xi_zeros.end(),
                                   [](const ZeroCandidate& z) { return std::abs(z.z - 1.0) <= 0.01; });
    o.require(near != r.xi_zeros.end(), near != r.xi_zeros.end() ? "xi candidate at z=" + fmt(near->z) : "no xi candidate near z=1");
    o.require(r.exp_pareto_zeros.empty(), "exp_pareto candidates: " + std::to_string(r.exp_pareto_zeros.size()));
    return o;
}

Outcome not_long_tailed() {
    Outcome o;
    const auto& l = report().lattice;
    for (const auto& row : l.rows) {
        const double v = row.closed_form.last_value;
        o.require(std::abs(v - row.expected) <= 0.02 * row.expected,
                  "lambda=" + fmt(row.lambda) + " limit " + fmt(v) + " vs " + fmt(row.expected));
    }
    o.require(l.spread - l.spread_error >= 0.5, "spread " + fmt(l.spread) + " +- " + fmt(l.spread_error));
    o.require(l.grid_verdict.verdict == Verdict::fails, "L(1) verdict " + to_string(l.grid_verdict.verdict));
    return o;
}

Outcome two_fold() {
    Outcome o;
    const auto& t = report().two_fold_powers;
    o.require(band_within(t.two_fold, t.two_fold_target, 0.10) && t.two_fold.trend < 0,
              "e^x x^2 tail band " + band(t.two_fold) + " vs " + fmt(t.two_fold_target) + ", trend " + fmt(t.two_fold.trend));
    o.require(band_within(t.four_fold, t.four_fold_target, 0.10),
              "four-fold ratio band " + band(t.four_fold) + " vs " + fmt(t.four_fold_target));
    o.require(t.lambda_spread <= 0.03, "lambda spread " + fmt(t.lambda_spread));
    return o;
}

Outcome root_ratio() {
    Outcome o;
    const auto& r = report();
    const auto& x = r.root_ratio.band;
    o.require(x.window_inf >= 0.0378 * 0.9 && x.window_sup <= 0.0497 * 1.1, "xi band " + band(x));
    o.require(r.root_ratio.collapse == Verdict::fails, "xi collapse " + to_string(r.root_ratio.collapse));
    o.require(band_within(r.root_ratio_exp_pareto.band, 0.25, 0.02), "exp_pareto band " + band(r.root_ratio_exp_pareto.band));
    return o;
}

// O(N^2) Stieltjes sum over midpoint atoms taken from the closed-form tails.
std::vector<long double> direct_tail(const TailSpec& sa, const TailSpec& sb, double step, std::size_t n) {
    struct Atom { long double pos, mass; };
    auto atoms = [&](const TailSpec& s) {
        std::vector<Atom> out{{0.0L, 1.0L - s.tail(0.0)}};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const long double lo = i * step, hi = (i + 1) * step;
            out.push_back({(lo + hi) / 2, (long double)s.tail(lo) - s.tail(hi)});
        }
        return out;
    };
    const auto A = atoms(sa), B = atoms(sb);
    const long double xmax = (n - 1) * step, ta = sa.tail(xmax), tb = sb.tail(xmax);
    std::vector<long double> tail(n);
    for (std::size_t j = 0; j < n; ++j) {
        long double t = ta + tb - ta * tb;
        for (const auto& a : A)
            for (const auto& b : B) {
                const long double d = a.pos + b.pos - (long double)(j * step);
                if (d > 1e-9L * step)
                    t += a.mass * b.mass;
                else if (d > -1e-9L * step)
                    t += 0.5L * a.mass * b.mass;
            }
        tail[j] = t;
    }
    return tail;
}

Outcome engine() {
    Outcome o;
    const auto e = to_grid(make_exponential(2.0), 1.9, kH, 64.0);
    const auto c = conv(e, e);
    double worst = 0.0;
    for (std::size_t j = 0; c.x(j) <= 50.0; ++j) {
        const double want = std::exp(1.9 * c.x(j)) * std::exp(-2.0 * c.x(j)) * (1 + 2 * c.x(j));
        worst = std::max(worst, std::abs(c.W[j] - want) / want);
    }
    o.require(worst <= 1e-4, "Exp(2)*Exp(2) max rel err on [0,50] " + fmt(worst));

    const double m2 = exp_moment(conv(exp_pareto(), exp_pareto()), 1.0).value;
    o.require(std::abs(m2 - 4.0) <= 0.005 * 4.0, "exp_pareto two-fold moment " + fmt(m2) + " vs 4");

    const std::size_t n = 64;
    double toy = 0.0;
    for (auto [a, b, step] : {std::tuple{make_exp_pareto(1.0, 2.0), make_exp_pareto(1.0, 2.0), 0.1},
                              std::tuple{make_xi(), make_xi(), 2 * kPi / 32}}) {
        const double xmax = (n - 1) * step;
        const auto out = conv(to_grid(a, 1.0, step, xmax), to_grid(b, 1.0, step, xmax), 1.0);
        const auto ref = direct_tail(a, b, step, n);
        for (std::size_t j = 0; j < n; ++j) {
            const double want = static_cast<double>(ref[j]) * std::exp(out.x(j));
            toy = std::max(toy, std::abs(out.W[j] - want) / std::max(want, 1e-14));
        }
    }
    o.require(toy <= 1e-11, "toy grid vs direct sum max rel err " + fmt(toy));
    return o;
}

Outcome inequalities() {
    Outcome o;
    const auto xi = to_grid(make_xi(), 1.0, kH, kXMax);
    const auto mm = to_grid(make_m_mixture({1.0, 0.5, 2.0, 1.0, 1.0}), 1.0, kH, kXMax);
    struct Member { const char* name; const GriddedTiltRep* rep; bool in_S1; };
    double worst41 = 0.0, worst42 = 0.0;
    for (const Member& m : {Member{"exp_pareto", &exp_pareto(), true}, Member{"xi", &xi, false}, Member{"m_mixture", &mm, true}}) {
        std::vector<double> eps;
        for (int n : {2, 3})
            for (double A : {10.0, 20.0, 40.0}) {
                const auto r = jk_decomposition(*m.rep, n, A);
                worst41 = std::min(worst41, r.min_residual_41);
                worst42 = std::min(worst42, r.min_residual_42);
                if (n == 2) eps.push_back(r.epsilon_A);
            }
        if (m.in_S1)
            o.require(eps[1] < eps[0] && eps[2] < eps[1],
                      std::string(m.name) + " eps(A) " + fmt(eps[0]) + ", " + fmt(eps[1]) + ", " + fmt(eps[2]));
    }
    o.require(worst41 >= -1e-9, "min first residual " + fmt(worst41));
    o.require(worst42 >= -1e-9, "min second residual " + fmt(worst42));
    for (const auto& row : report().envelope_g)
        o.require(row.middle_sup <= row.bound, "g middle ratio at A=" + fmt(row.A) + " " + fmt(row.middle_sup) + " <= " + fmt(row.bound));
    return o;
}

double max_rel_diff(const GriddedTiltRep& a, const GriddedTiltRep& b, double x_to) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.W.size() && a.x(j) <= x_to; ++j)
        if (b.W[j] > 0) worst = std::max(worst, std::abs(a.W[j] - b.W[j]) / b.W[j]);
    return worst;
}

Outcome tilt_machinery() {
    Outcome o;
    const auto te = tilt(make_exp_pareto(1.0, 2.0), 1.0, 1.0, kH, kXMax);
    for (double c : {0.5, 1.0, 2.0}) {
        const auto v = test_S_delta(te, c);
        o.require(v.verdict == Verdict::holds, "S_Delta c=" + fmt(c) + " " + to_string(v.verdict) + " " + band(v.estimate));
        const auto m = tilted_interval_masses(te, c);
        double worst = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j) {
            const double x = te.x(j);
            if (x < 0.75 * kXMax || std::isnan(m[j])) continue;
            const double want = 0.5 * c / ((1 + x) * (1 + x));
            worst = std::max(worst, std::abs(m[j] - want) / want);
        }
        o.require(worst <= 0.05, "interval masses c=" + fmt(c) + " max rel dev " + fmt(worst));
    }

    const auto mm = to_grid(make_m_mixture({1.0, 0.5, 2.0, 1.0, 1.0}), 1.0, kH, kXMax);
    const auto lhs = tilt(conv(exp_pareto(), mm), 0.5);
    const auto rhs = conv(tilt(exp_pareto(), 0.5), tilt(mm, 0.5));
    const double tol = 2 * (lhs.disc_error_rel + rhs.disc_error_rel) + exp_pareto().trunc_mass_bound + mm.trunc_mass_bound;
    const double diff = max_rel_diff(lhs, rhs, 0.75 * kXMax);
    o.require(diff <= tol, "commutation " + fmt(diff) + " <= " + fmt(tol));

    const auto back = tilt(tilt(exp_pareto(), 0.6), -0.6);
    const double rt = max_rel_diff(back, exp_pareto(), kXMax);
    o.require(rt <= 1e-10, "round trip " + fmt(rt));
    return o;
}

Outcome local_instance() {
    Outcome o;
    const auto xi = to_grid(make_xi(), 1.0, kH, kXMax);
    const auto l = test_L_delta(tilt(xi, 1.0), 1.0);
    o.require(l.verdict == Verdict::fails, "tilted xi L_Delta " + to_string(l.verdict));
    const auto s = test_S_delta(tilt(conv(xi, xi), 1.0), 1.0);
    o.require(s.verdict == Verdict::holds, "tilted xi^{2*} S_Delta " + to_string(s.verdict) + " " + band(s.estimate) + " vs 2");
    return o;
}

Outcome smoothing() {
    Outcome o;
    const auto& ep = exp_pareto();
    const auto sm = smooth(ep, 1.0, 1.0);
    std::vector<double> xs, ratio;
    for (std::size_t j = 0; j < ep.W.size(); ++j) {
        xs.push_back(ep.x(j));
        ratio.push_back(sm.W[j] / ep.W[j]);
    }
    const auto e = estimate_limit(xs, ratio, defaults::kWindowFrac);
    o.require(band_within(e, std::exp(1.0) / 2, 0.01), "ratio band " + band(e) + " vs e/2");

    const long kc = ep.steps_for(1.0);
    const double tol = 1e-9 + 2 * (sm.disc_error_rel + ep.disc_error_rel);
    const double back = std::exp(-ep.gamma0 * kc * ep.step);
    std::size_t bad = 0;
    for (std::size_t j = 0; j + kc < ep.W.size(); ++j) {
        const double lo = sm.W[j + kc] * back, mid = ep.W[j], hi = sm.W[j];
        if (lo > mid * (1 + tol) || mid > hi * (1 + tol)) ++bad;
    }
    o.require(bad == 0, "sandwich violations " + std::to_string(bad));
    return o;
}

Outcome refinement() {
    Outcome o;
    std::vector<ReproductionReport> levels;
    for (double div : {1.0, 2.0, 4.0}) {
        CounterexampleConfig cfg;
        cfg.step = kH / div;
        levels.push_back(div == 1.0 ? report() : full_report(cfg));
    }
    struct Quantity { const char* name; std::function<double(const ReproductionReport&)> mid; double target; };
    const std::vector<Quantity> qs{
        {"xi moment", [](const ReproductionReport& r) { return r.moment_zero.moment_grid.value; }, kXiMoment},
        {"two-fold constant", [](const ReproductionReport& r) { return r.two_fold_powers.two_fold.mid(); }, levels[0].two_fold_powers.two_fold_target},
        {"four-fold ratio", [](const ReproductionReport& r) { return r.two_fold_powers.four_fold.mid(); }, levels[0].two_fold_powers.four_fold_target},
        {"xi root ratio", [](const ReproductionReport& r) { return r.root_ratio.band.mid(); }, 0.5 * (0.0378 + 0.0497)},
        {"exp_pareto root ratio", [](const ReproductionReport& r) { return r.root_ratio_exp_pareto.band.mid(); }, 0.25},
    };
    for (const auto& q : qs) {
        double d[3];
        for (int i = 0; i < 3; ++i) d[i] = std::abs(q.mid(levels[i]) - q.target);
        o.require(d[1] < d[0] && d[2] < d[1],
                  std::string(q.name) + " |mid-target| " + fmt(d[0]) + ", " + fmt(d[1]) + ", " + fmt(d[2]));
    }
    return o;
}

} // namespace

int main() {
    struct Criterion { int id; const char* name; Outcome (*run)(); };
    const Criterion all[] = {
        {1, "xi moment", moment},
        {2, "transform zero", transform_zero},
        {3, "xi not long-tailed", not_long_tailed},
        {4, "xi^{2*} convolution equivalence", two_fold},
        {5, "convolution-root witness", root_ratio},
        {6, "convolution engine exactness", engine},
        {7, "J decomposition inequalities", inequalities},
        {8, "tilt machinery", tilt_machinery},
        {9, "local classes via tilting", local_instance},
        {10, "smoothing", smoothing},
        {11, "grid refinement", refinement},
    };
    int failed = 0;
    for (const auto& c : all) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        if (!o.pass) ++failed;
        std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of 11 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
