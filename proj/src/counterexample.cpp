#include "tiltgrid/counterexample.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/error.hpp"

namespace tiltgrid {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(8);
    os << v;
    return os.str();
}

double rel(double v, double target) { return std::abs(v - target) / std::abs(target); }

bool band_within(const LimitEstimate& e, double target, double rel_tol) {
    return e.sufficient && rel(e.window_inf, target) <= rel_tol && rel(e.window_sup, target) <= rel_tol;
}

PassFlag flag(std::string name, bool pass, std::string detail) { return {std::move(name), pass, std::move(detail)}; }

double xi_moment_exact() { return 3.0 * kPi + 2.0; }

template <class F>
auto run(bool parallel, F&& f) {
    return std::async(parallel ? std::launch::async : std::launch::deferred, std::forward<F>(f));
}

} // namespace

double xi_lattice_limit(double lambda, double a) {
    const double s2 = std::sqrt(2.0);
    return (xi::kLevel + s2 * std::sin(lambda + a - kPi / 4.0)) / (xi::kLevel + s2 * std::sin(lambda - kPi / 4.0));
}

double g_middle_ratio(double x, double A) {
    if (!(A >= 1.0) || !(x > 2.0 * A)) return 0.0;
    return 2.0 * (1.0 / A - 1.0 / (x - A)) + (4.0 / x) * std::log((x - A) / A);
}

MomentZeroReport verify_moment_and_zero(const CounterexampleConfig& cfg) {
    MomentZeroReport r;
    const auto xi = make_xi();
    const double target = xi_moment_exact();

    const auto m = exp_moment(xi, 1.0);
    r.moment_closed = m.value;
    r.moment_closed_rel_error = rel(m.value, target);

    const auto q = quadrature_moment(xi, 1.0, 2.0 * kPi, 256, 2.0 * kPi * 4096.0);
    r.moment_quadrature = q.value;
    r.moment_quadrature_rel_error = rel(q.value, target);

    const auto rep = to_grid(xi, cfg.gamma0, cfg.step, cfg.x_max);
    r.moment_grid = exp_moment(rep, 1.0);

    double err = 0.0;
    const auto z = transform_at(xi, {1.0, 1.0}, &err);
    r.transform_zero_modulus = std::abs(z);
    r.transform_zero_error_bound = err;

    r.envelope_curve.name = "xi_envelope_ratio";
    for (std::size_t j = 1; j < rep.W.size(); ++j) {
        const double x = rep.x(j);
        // tail / (e^{-x} x^{-2}) = e^{(1 - gamma0) x} W x^2
        r.envelope_curve.x.push_back(x);
        r.envelope_curve.value.push_back(std::exp((1.0 - rep.gamma0) * x) * rep.W[j] * x * x);
    }
    r.envelope = estimate_limit(r.envelope_curve.x, r.envelope_curve.value, cfg.tol.window_frac);

    r.flags.push_back(flag("xi_moment_closed_form", r.moment_closed_rel_error <= defaults::kMomentRelTol,
                           "rel error " + fmt(r.moment_closed_rel_error)));
    r.flags.push_back(flag("xi_moment_quadrature", r.moment_quadrature_rel_error <= defaults::kMomentQuadRelTol,
                           "rel error " + fmt(r.moment_quadrature_rel_error)));
    r.flags.push_back(flag("xi_transform_zero",
                           r.transform_zero_modulus <= defaults::kTransformZeroRelTol * m.value,
                           "|xi^(1+i)| = " + fmt(r.transform_zero_modulus)));
    r.flags.push_back(flag("xi_envelope",
                           r.envelope.sufficient && r.envelope.window_inf >= defaults::kEnvelopeLo &&
                               r.envelope.window_sup <= defaults::kEnvelopeHi,
                           "band [" + fmt(r.envelope.window_inf) + ", " + fmt(r.envelope.window_sup) + "]"));
    return r;
}

LatticeReport verify_not_long_tailed(const CounterexampleConfig& cfg) {
    LatticeReport r;
    const auto xi = make_xi();
    const double x_far = 2.0 * kPi * static_cast<double>(cfg.lattice_max_index + 1);
    const auto closed = TailSampler::from_spec(xi, 1.0, cfg.step, x_far);
    const auto rep = to_grid(xi, cfg.gamma0, cfg.step, cfg.x_max);
    const auto grid = TailSampler::from_rep(rep);

    for (const double a : cfg.shifts) {
        const auto c = lattice_limits(closed, 1.0, a, cfg.lambdas, cfg.tol);
        const auto g = lattice_limits(grid, 1.0, a, cfg.lambdas, cfg.tol);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo, err = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            LatticeRow row;
            row.lambda = c[k].lambda;
            row.a = c[k].a;
            row.expected = xi_lattice_limit(c[k].lambda, c[k].a);
            row.closed_form = c[k];
            row.grid = g[k];
            lo = std::min(lo, c[k].estimate.mid());
            hi = std::max(hi, c[k].estimate.mid());
            err = std::max(err, c[k].estimate.width());
            r.rows.push_back(std::move(row));
        }
        r.spread = std::max(r.spread, hi - lo);
        r.spread_error = std::max(r.spread_error, err);
    }
    r.grid_verdict = test_L_gamma(rep, 1.0, cfg.shifts, cfg.tol);

    bool within = !r.rows.empty();
    std::string detail;
    for (const auto& row : r.rows) {
        const double d = rel(row.closed_form.estimate.mid(), row.expected);
        within = within && row.closed_form.estimate.sufficient && d <= defaults::kLatticeRelTol;
        detail += "lambda=" + fmt(row.lambda) + ": " + fmt(row.closed_form.estimate.mid()) + " vs " +
                  fmt(row.expected) + "; ";
    }
    r.flags.push_back(flag("lattice_limits", within, detail));
    r.flags.push_back(flag("lattice_spread", r.spread - r.spread_error >= defaults::kLatticeMinSpread,
                           "spread " + fmt(r.spread) + " minus error " + fmt(r.spread_error)));
    r.flags.push_back(flag("not_in_L1", r.grid_verdict.verdict == Verdict::fails,
                           "grid L(1) verdict " + to_string(r.grid_verdict.verdict)));
    return r;
}

TwoFoldReport verify_two_fold(const CounterexampleConfig& cfg, const GriddedTiltRep* xi2, const GriddedTiltRep* xi4) {
    if (cfg.x_max < 300.0) throw ConfigError("xi^{2*} checks need x_max >= 300");
    TwoFoldReport r;
    GriddedTiltRep own2, own4;
    if (xi2 == nullptr) {
        own2 = conv_pow(to_grid(make_xi(), cfg.gamma0, cfg.step, cfg.x_max), 2);
        xi2 = &own2;
    }
    if (xi4 == nullptr) {
        own4 = conv(*xi2, *xi2);
        xi4 = &own4;
    }
    const double M = xi_moment_exact();
    r.two_fold_target = 8.0 * (3.0 * kPi + 1.0) * M / kPi;
    r.four_fold_target = 2.0 * M * M;
    r.trunc_two_fold = xi2->trunc_mass_bound;
    r.trunc_four_fold = xi4->trunc_mass_bound;

    r.two_fold_curve.name = "xi2_scaled_tail";
    r.four_fold_curve.name = "xi4_over_xi2";
    for (std::size_t j = 1; j < xi2->W.size(); ++j) {
        const double x = xi2->x(j);
        r.two_fold_curve.x.push_back(x);
        r.two_fold_curve.value.push_back(std::exp((1.0 - xi2->gamma0) * x) * xi2->W[j] * x * x);
        r.four_fold_curve.x.push_back(x);
        r.four_fold_curve.value.push_back(xi4->W[j] / xi2->W[j]);
    }
    r.two_fold = estimate_limit(r.two_fold_curve.x, r.two_fold_curve.value, cfg.tol.window_frac);
    r.four_fold = estimate_limit(r.four_fold_curve.x, r.four_fold_curve.value, cfg.tol.window_frac);

    // the same scaled tail along lattices with different residues
    const long period = std::lround(2.0 * kPi / xi2->step);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    for (const double lam : {0.0, 0.5 * kPi, kPi, 1.5 * kPi}) {
        const long off = std::lround(lam / xi2->step);
        std::vector<double> n_values, values;
        for (long n = 0;; ++n) {
            const long j = off + n * period;
            if (j <= 0) continue;
            if (static_cast<std::size_t>(j) >= xi2->W.size()) break;
            const double x = xi2->x(static_cast<std::size_t>(j));
            n_values.push_back(static_cast<double>(n));
            values.push_back(std::exp((1.0 - xi2->gamma0) * x) * xi2->W[static_cast<std::size_t>(j)] * x * x);
        }
        const auto e = estimate_limit(n_values, values, cfg.tol.window_frac, 1);
        r.lattice_two_fold.emplace_back(lam, e);
        lo = std::min(lo, e.mid());
        hi = std::max(hi, e.mid());
        sum += e.mid();
    }
    r.lambda_spread = (hi - lo) / (sum / 4.0);

    r.flags.push_back(flag("xi2_constant",
                           band_within(r.two_fold, r.two_fold_target, defaults::kTwoFoldRelTol) && r.two_fold.trend < 0.0,
                           "band [" + fmt(r.two_fold.window_inf) + ", " + fmt(r.two_fold.window_sup) + "] vs " +
                               fmt(r.two_fold_target) + ", trend " + fmt(r.two_fold.trend)));
    r.flags.push_back(flag("xi2_in_S1", band_within(r.four_fold, r.four_fold_target, defaults::kFourFoldRelTol),
                           "band [" + fmt(r.four_fold.window_inf) + ", " + fmt(r.four_fold.window_sup) + "] vs " +
                               fmt(r.four_fold_target)));
    r.flags.push_back(flag("xi2_lambda_independent", r.lambda_spread <= defaults::kLambdaSpreadTol,
                           "relative spread " + fmt(r.lambda_spread)));
    return r;
}

ReproductionReport full_report(const CounterexampleConfig& cfg) {
    ReproductionReport rep;
    rep.config = cfg;
    const auto xi = make_xi();
    const auto ep = make_exp_pareto(1.0, 2.0);

    auto f31 = run(cfg.parallel, [&] { return verify_moment_and_zero(cfg); });
    auto f32 = run(cfg.parallel, [&] { return verify_not_long_tailed(cfg); });
    auto fzero = run(cfg.parallel, [&] {
        auto p = complex_transform(xi, 1.0, cfg.z_lo, cfg.z_hi, cfg.z_step);
        auto z = find_zero_candidates(p, cfg.zero_tol, [&](double zz) { return transform_at(xi, {1.0, zz}); });
        auto pe = complex_transform(ep, 1.0, cfg.z_lo, cfg.z_hi, cfg.z_step);
        auto ze = find_zero_candidates(pe, cfg.zero_tol, [&](double zz) { return transform_at(ep, {1.0, zz}); });
        return std::make_tuple(std::move(p), std::move(z), std::move(ze));
    });
    auto fep = run(cfg.parallel, [&] {
        const auto r = to_grid(ep, cfg.gamma0, cfg.step, cfg.x_max);
        return conv_root_ratio(r, 2, 1.0, cfg.tol, exp_moment(ep, 1.0).value);
    });

    const auto xi_rep = to_grid(xi, cfg.gamma0, cfg.step, cfg.x_max);
    const auto xi2 = conv(xi_rep, xi_rep);
    const auto xi4 = conv(xi2, xi2);
    auto f33 = run(cfg.parallel, [&] { return verify_two_fold(cfg, &xi2, &xi4); });
    rep.root_ratio = conv_root_ratio(xi_rep, 2, 1.0, cfg.tol, xi_moment_exact(), &xi2);

    const double x_from = cfg.x_max * (1.0 - cfg.tol.window_frac);
    for (const double A : {10.0, 20.0, 40.0}) {
        EnvelopeRow row;
        row.A = A;
        row.bound = 8.0 / A;
        for (std::size_t j = 0; j < xi_rep.W.size(); ++j) {
            const double x = xi_rep.x(j);
            if (x >= x_from) row.middle_sup = std::max(row.middle_sup, g_middle_ratio(x, A));
        }
        const double x = xi_rep.x_max();
        row.boundary_at_xmax = x * x / ((x - A) * (x - A) * A * A);
        row.boundary_limit = 1.0 / (A * A);
        rep.envelope_g.push_back(row);
    }

    rep.moment_zero = f31.get();
    rep.lattice = f32.get();
    rep.two_fold_powers = f33.get();
    std::tie(rep.xi_profile, rep.xi_zeros, rep.exp_pareto_zeros) = fzero.get();
    rep.root_ratio_exp_pareto = fep.get();

    for (const auto* list : {&rep.moment_zero.flags, &rep.lattice.flags, &rep.two_fold_powers.flags})
        rep.flags.insert(rep.flags.end(), list->begin(), list->end());

    bool near_one = false;
    for (const auto& z : rep.xi_zeros)
        if (std::abs(z.z - 1.0) <= defaults::kZeroLocationTol) near_one = true;
    rep.flags.push_back(flag("xi_zero_candidate", near_one, std::to_string(rep.xi_zeros.size()) + " candidate(s)"));
    rep.flags.push_back(flag("exp_pareto_no_zero", rep.exp_pareto_zeros.empty(),
                             std::to_string(rep.exp_pareto_zeros.size()) + " candidate(s)"));

    const auto& rr = rep.root_ratio;
    const double lo_target = (4.0 / kPi) * (xi::kLevel - std::sqrt(2.0)) / rep.two_fold_powers.two_fold_target;
    const double hi_target = (4.0 / kPi) * (xi::kLevel + std::sqrt(2.0)) / rep.two_fold_powers.two_fold_target;
    const bool band_ok = rr.band.sufficient && rel(rr.D_star_lower, lo_target) <= defaults::kRootBandRelTol &&
                         rel(rr.D_star_upper, hi_target) <= defaults::kRootBandRelTol;
    rep.flags.push_back(flag("xi_root_ratio_band", band_ok,
                             "band [" + fmt(rr.D_star_lower) + ", " + fmt(rr.D_star_upper) + "] vs [" + fmt(lo_target) +
                                 ", " + fmt(hi_target) + "]"));
    rep.flags.push_back(flag("xi_root_ratio_non_collapsing", rr.collapse == Verdict::fails,
                             "collapse verdict " + to_string(rr.collapse) + ": " + rr.reason));
    const auto& re = rep.root_ratio_exp_pareto;
    rep.flags.push_back(flag("exp_pareto_root_ratio_collapse",
                             band_within(re.band, re.predicted, defaults::kRootCollapseRelTol),
                             "band [" + fmt(re.D_star_lower) + ", " + fmt(re.D_star_upper) + "] vs " +
                                 fmt(re.predicted)));
    bool env_ok = true;
    for (const auto& row : rep.envelope_g) env_ok = env_ok && row.middle_sup <= row.bound;
    rep.flags.push_back(flag("g_envelope", env_ok, "middle-integral ratio <= 8/A at A = 10, 20, 40"));

    rep.pass = std::all_of(rep.flags.begin(), rep.flags.end(), [](const PassFlag& f) { return f.pass; });
    return rep;
}

} // namespace tiltgrid
