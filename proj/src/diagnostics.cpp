#include "tiltgrid/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/error.hpp"
#include "tiltgrid/transforms.hpp"

namespace tiltgrid {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void require_origin(const GriddedTiltRep& rep, const char* what) {
    if (std::abs(rep.x_lo) > 1e-12) throw ConfigError(std::string(what) + ": rep must start at x = 0");
}

void require_same_grid(const GriddedTiltRep& a, const GriddedTiltRep& b, const char* what) {
    if (std::abs(a.step - b.step) > 1e-12 * a.step || a.W.size() != b.W.size() ||
        std::abs(a.gamma0 - b.gamma0) > 1e-12 || std::abs(a.x_lo - b.x_lo) > 1e-12)
        throw ConfigError(std::string(what) + ": reps are not on the same grid");
}

// Combine sub-verdicts: any failure fails, all holds hold.
Verdict combine(const std::vector<ClassVerdict>& parts) {
    bool all_hold = !parts.empty();
    for (const auto& p : parts) {
        if (p.verdict == Verdict::fails) return Verdict::fails;
        if (p.verdict != Verdict::holds) all_hold = false;
    }
    return all_hold ? Verdict::holds : Verdict::inconclusive;
}

// The part with the largest relative deviation from its target (or widest band).
const ClassVerdict& worst_part(const std::vector<ClassVerdict>& parts) {
    std::size_t best = 0;
    double score = -1.0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto& e = parts[k].estimate;
        const double t = parts[k].target.value_or(e.mid());
        const double s = std::abs(t) > 0.0 ? std::max(std::abs(e.window_sup - t), std::abs(e.window_inf - t)) / std::abs(t)
                                           : e.width();
        if (parts[k].verdict == Verdict::fails) return parts[k];
        if (s > score) {
            score = s;
            best = k;
        }
    }
    return parts[best];
}

ClassVerdict ratio_verdict(std::string name, double gamma, const Curve& curve, std::optional<double> target,
                           const Tolerances& tol, double err) {
    ClassVerdict v;
    v.class_name = std::move(name);
    v.gamma = gamma;
    v.target = target;
    v.tolerances = tol;
    v.numerical_error = err;
    v.evidence.push_back(curve);
    v.estimate = estimate_limit(curve.x, curve.value, tol.window_frac);
    bool vanished = false;
    for (std::size_t k = 0; k < curve.x.size(); ++k)
        if (curve.x[k] >= v.estimate.x_from && !std::isfinite(curve.value[k])) vanished = true;
    if (vanished) {
        v.verdict = Verdict::inconclusive;
        v.reason = "tail numerically zero in the window";
        return v;
    }
    v.verdict = decide(v.estimate, target, tol, err, &v.reason);
    return v;
}

// Sample ratio e^{(gamma - gamma0) a} W(x + a) / W(x) on nodes x of [from, to].
Curve shift_ratio(const TailSampler& s, double gamma, double a, double from, double to) {
    Curve c;
    c.name = "shift_ratio_a=" + fmt(a);
    const double factor = std::exp((gamma - s.gamma0) * a);
    for (const double x : s.nodes(from, to)) {
        const double w = s.W(x);
        c.x.push_back(x);
        c.value.push_back(w > 0.0 ? factor * s.W(x + a) / w : kNaN);
    }
    return c;
}

// Averaged half-node kernel: W of the base at (k + 1/2) h.
std::vector<double> half_node_kernel(const GriddedTiltRep& rep) {
    const double up = std::exp(0.5 * rep.gamma0 * rep.step);
    const double down = 1.0 / up;
    std::vector<double> k(rep.W.size() - 1);
    for (std::size_t i = 0; i + 1 < rep.W.size(); ++i) k[i] = 0.5 * (up * rep.W[i] + down * rep.W[i + 1]);
    return k;
}

// Middle integral e^{gamma0 x_j} \int_{(A, x_j - A]} tail(x_j - u) rho(du) for every node j,
// with tail taken from `base` and rho from `integrator` (tilted cell masses at midpoints).
std::vector<double> middle_integral(const std::vector<double>& kmid, const TiltedMassVector& rho, std::size_t kA) {
    const auto full = fft_convolve(rho.masses, kmid);
    const std::vector<double> head(rho.masses.begin(), rho.masses.begin() + std::min(kA, rho.masses.size()));
    const std::vector<double> kernel_head(kmid.begin(), kmid.begin() + std::min(kA, kmid.size()));
    const auto low = head.empty() ? std::vector<double>{} : fft_convolve(head, kmid);
    const auto high = kernel_head.empty() ? std::vector<double>{} : fft_convolve(rho.masses, kernel_head);
    const std::size_t n_nodes = kmid.size() + 1;
    std::vector<double> out(n_nodes, 0.0);
    for (std::size_t j = 2 * kA + 1; j < n_nodes; ++j) {
        const std::size_t i = j - 1;
        double v = full[i];
        if (i < low.size()) v -= low[i];
        if (i < high.size()) v -= high[i];
        out[j] = std::max(v, 0.0);
    }
    return out;
}

// e^{gamma0 x_j} \int_{(-inf, A]} tail(x_j - u) rho(du)
std::vector<double> head_integral(const GriddedTiltRep& base, const std::vector<double>& kmid,
                                  const TiltedMassVector& rho, std::size_t kA) {
    const std::vector<double> head(rho.masses.begin(), rho.masses.begin() + std::min(kA, rho.masses.size()));
    const auto low = head.empty() ? std::vector<double>{} : fft_convolve(head, kmid);
    std::vector<double> out(base.W.size(), 0.0);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = rho.atom_at_lo * base.W[j];
        if (j >= 1 && j - 1 < low.size()) out[j] += low[j - 1];
    }
    return out;
}

} // namespace

LimitEstimate estimate_limit(const std::vector<double>& x, const std::vector<double>& value, double window_frac,
                             std::size_t min_samples) {
    if (x.size() != value.size()) throw ConfigError("estimate_limit: x and value sizes differ");
    if (!(window_frac > 0.0 && window_frac < 1.0)) throw ConfigError("estimate_limit: window_frac must lie in (0,1)");
    LimitEstimate e;
    if (x.empty()) return e;
    const double x_hi = x.back();
    const double x_from = x_hi >= 0.0 ? x_hi * (1.0 - window_frac) : x_hi * (1.0 + window_frac);
    std::vector<double> wx, wv;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] >= x_from - 1e-12 * std::abs(x_from)) {
            wx.push_back(x[k]);
            wv.push_back(value[k]);
        }
    }
    e.windows_used = wv.size();
    e.x_from = wx.empty() ? x_hi : wx.front();
    e.x_to = x_hi;
    e.sufficient = wv.size() >= min_samples;
    if (wv.empty()) return e;
    e.window_inf = *std::min_element(wv.begin(), wv.end());
    e.window_sup = *std::max_element(wv.begin(), wv.end());
    const double split = 0.5 * (e.x_from + e.x_to);
    double s1 = 0.0, s2 = 0.0;
    std::size_t n1 = 0, n2 = 0;
    for (std::size_t k = 0; k < wx.size(); ++k) {
        if (wx[k] < split) {
            s1 += wv[k];
            ++n1;
        } else {
            s2 += wv[k];
            ++n2;
        }
    }
    if (n1 > 0 && n2 > 0) e.trend = s2 / static_cast<double>(n2) - s1 / static_cast<double>(n1);
    return e;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Verdict decide(const LimitEstimate& e, std::optional<double> target, const Tolerances& tol, double err,
               std::string* reason) {
    auto say = [&](std::string r) {
        if (reason) *reason = std::move(r);
    };
    if (!e.sufficient) {
        say("fewer than " + std::to_string(defaults::kMinWindowSamples) + " samples in the trailing window");
        return Verdict::inconclusive;
    }
    const double scale = target ? std::abs(*target) : std::abs(e.mid());
    if (!(scale > 0.0)) {
        say("limit scale is zero");
        return Verdict::inconclusive;
    }
    const double width = e.width() / scale;
    const double trend = e.trend / scale;
    const double dev = target ? std::abs(e.mid() - *target) / scale : 0.0;
    const bool moving_toward = target && ((e.mid() > *target && e.trend < 0.0) || (e.mid() < *target && e.trend > 0.0));
    if (width <= tol.band_tol && dev <= tol.value_tol && std::abs(trend) <= tol.band_tol / 4.0) {
        say("band width " + fmt(width) + ", deviation " + fmt(dev) + ", trend " + fmt(trend));
        return Verdict::holds;
    }
    // Drift toward the target may still close a gap of a few trend lengths.
    const double drift_allowance = moving_toward ? 4.0 * std::abs(trend) : 0.0;
    if (dev > tol.value_tol + err + drift_allowance) {
        say("limit misses target by " + fmt(dev) + " (relative) beyond tolerance " + fmt(tol.value_tol) + " + error " +
            fmt(err));
        return Verdict::fails;
    }
    if (width > tol.band_tol + err && width > 4.0 * std::abs(trend)) {
        say("oscillation band " + fmt(width) + " (relative) exceeds tolerance " + fmt(tol.band_tol) + " + error " +
            fmt(err));
        return Verdict::fails;
    }
    say("not settled: band width " + fmt(width) + ", deviation " + fmt(dev) + ", trend " + fmt(trend));
    return Verdict::inconclusive;
}

TailSampler TailSampler::from_rep(const GriddedTiltRep& rep) {
    TailSampler s;
    s.gamma0 = rep.gamma0;
    s.step = rep.step;
    s.x_lo = rep.x_lo;
    s.x_hi = rep.x_max();
    s.error_rel = rep.disc_error_rel;
    const auto* W = &rep.W;
    const double x_lo = rep.x_lo, h = rep.step;
    s.W = [W, x_lo, h](double x) {
        const long long j = std::llround((x - x_lo) / h);
        if (j < 0 || static_cast<std::size_t>(j) >= W->size()) return kNaN;
        return (*W)[static_cast<std::size_t>(j)];
    };
    return s;
}

TailSampler TailSampler::from_spec(const TailSpec& spec, double gamma0, double step, double x_hi) {
    if (!(step > 0.0)) throw ConfigError("sampler step must be > 0");
    TailSampler s;
    s.gamma0 = gamma0;
    s.step = step;
    s.x_lo = spec.support_lo();
    s.x_hi = x_hi;
    auto sp = std::make_shared<const TailSpec>(spec);
    s.W = [sp, gamma0](double x) { return sp->tilted_tail(x, gamma0); };
    return s;
}

std::vector<double> TailSampler::nodes(double from, double to) const {
    std::vector<double> out;
    const double first = std::ceil((std::max(from, x_lo) - x_lo) / step - 1e-9);
    for (double k = first;; k += 1.0) {
        const double x = x_lo + k * step;
        if (x > to + 1e-9 * step) break;
        out.push_back(x);
    }
    return out;
}

double TailSampler::snap(double a) const { return std::round(a / step) * step; }

ClassVerdict test_L_gamma(const TailSampler& s, double gamma, const std::vector<double>& shifts, const Tolerances& tol) {
    if (shifts.empty()) throw ConfigError("test_L_gamma: need at least one shift");
    double a_max = 0.0;
    for (const double a : shifts) a_max = std::max(a_max, std::abs(s.snap(a)));
    const double top = s.x_hi - a_max;
    const double from = top * (1.0 - tol.window_frac) - s.step;
    ClassVerdict v;
    v.class_name = "L";
    v.gamma = gamma;
    v.target = 1.0;
    v.tolerances = tol;
    v.numerical_error = 2.0 * s.error_rel;
    for (const double a0 : shifts) {
        const double a = s.snap(a0);
        auto part = ratio_verdict("L(a=" + fmt(a) + ")", gamma, shift_ratio(s, gamma, a, from, top), 1.0, tol,
                                  2.0 * s.error_rel);
        v.evidence.push_back(part.evidence.front());
        v.parts.push_back(std::move(part));
    }
    v.verdict = combine(v.parts);
    const auto& w = worst_part(v.parts);
    v.estimate = w.estimate;
    v.reason = w.class_name + ": " + w.reason;
    return v;
}

ClassVerdict test_L_gamma(const GriddedTiltRep& rep, double gamma, const std::vector<double>& shifts,
                          const Tolerances& tol) {
    return test_L_gamma(TailSampler::from_rep(rep), gamma, shifts, tol);
}

std::vector<LatticeLimit> lattice_limits(const TailSampler& s, double gamma, double a, const std::vector<double>& lambdas,
                                         const Tolerances& tol, double period) {
    std::vector<LatticeLimit> out;
    const double as = s.snap(a);
    const double factor = std::exp((gamma - s.gamma0) * as);
    const long period_steps = std::lround(period / s.step);
    for (const double lam : lambdas) {
        LatticeLimit L;
        L.lambda = s.snap(lam);
        L.a = as;
        L.series.name = "lattice_lambda=" + fmt(L.lambda);
        for (long n = 0;; ++n) {
            const double x = s.x_lo + L.lambda + static_cast<double>(n * period_steps) * s.step;
            if (x + as > s.x_hi + 1e-9) break;
            const double w = s.W(x);
            L.series.x.push_back(static_cast<double>(n));
            L.series.value.push_back(w > 0.0 ? factor * s.W(x + as) / w : kNaN);
        }
        L.estimate = estimate_limit(L.series.x, L.series.value, tol.window_frac);
        L.last_value = L.series.value.empty() ? kNaN : L.series.value.back();
        out.push_back(std::move(L));
    }
    return out;
}

std::vector<std::pair<double, double>> epsilon_sweep(const GriddedTiltRep& rep, const std::vector<double>& A_values,
                                                     const Tolerances& tol) {
    require_origin(rep, "epsilon_sweep");
    const auto kmid = half_node_kernel(rep);
    const auto rho = to_masses(rep);
    const double x_hi = rep.x_max();
    const double x_from = x_hi * (1.0 - tol.window_frac);
    std::vector<std::pair<double, double>> out;
    for (const double A : A_values) {
        const long kA = rep.steps_for(A);
        if (kA < 1 || A > x_from / 4.0) {
            out.emplace_back(A, kNaN);
            continue;
        }
        const auto mid = middle_integral(kmid, rho, static_cast<std::size_t>(kA));
        double sup = 0.0;
        for (std::size_t j = 0; j < rep.W.size(); ++j) {
            if (rep.x(j) < x_from || rep.W[j] <= 0.0) continue;
            sup = std::max(sup, mid[j] / rep.W[j]);
        }
        out.emplace_back(A, sup);
    }
    return out;
}

ClassVerdict test_S_gamma(const GriddedTiltRep& rep, double gamma, const Tolerances& tol, std::optional<double> moment,
                          const std::vector<double>& A_values) {
    const auto rep2 = conv(rep, rep);
    return test_S_gamma(rep, rep2, gamma, tol, moment, A_values);
}

ClassVerdict test_S_gamma(const GriddedTiltRep& rep, const GriddedTiltRep& rep2, double gamma, const Tolerances& tol,
                          std::optional<double> moment, const std::vector<double>& A_values) {
    ClassVerdict v;
    v.class_name = "S";
    v.gamma = gamma;
    v.tolerances = tol;
    if (std::abs(rep.gamma0 - rep2.gamma0) > 1e-12 || std::abs(rep.step - rep2.step) > 1e-12 * rep.step ||
        rep.W.size() != rep2.W.size())
        throw ConfigError("test_S_gamma: mu and mu^{2*} grids differ");

    double M = 0.0;
    double m_err = 0.0;
    if (moment) {
        M = *moment;
    } else {
        const auto m = exp_moment(rep, gamma);
        if (m.infinite) {
            v.verdict = Verdict::fails;
            v.reason = "exponential moment diverges at gamma";
            return v;
        }
        M = m.value;
        m_err = m.error_bound / m.value;
    }
    v.target = 2.0 * M;

    auto L = test_L_gamma(rep, gamma, {1.0, std::numbers::pi, 2.0}, tol);
    const Verdict l_verdict = L.verdict;
    v.parts.push_back(std::move(L));

    Curve ratio;
    ratio.name = "tail2_over_tail";
    for (std::size_t j = 0; j < rep.W.size(); ++j) {
        const double x = rep.x(j);
        const std::size_t j2 = static_cast<std::size_t>(std::llround((x - rep2.x_lo) / rep2.step));
        if (x < rep2.x_lo || j2 >= rep2.W.size()) continue;
        ratio.x.push_back(x);
        ratio.value.push_back(rep.W[j] > 0.0 ? rep2.W[j2] / rep.W[j] : kNaN);
    }
    const double err = rep.disc_error_rel + rep2.disc_error_rel + m_err;
    auto r = ratio_verdict("S ratio", gamma, ratio, v.target, tol, err);
    v.estimate = r.estimate;
    v.numerical_error = err;
    v.evidence = r.evidence;
    if (std::abs(rep.x_lo) < 1e-12) {
        v.epsilon_sweep = epsilon_sweep(rep, A_values, tol);
        Curve eps;
        eps.name = "epsilon_sweep";
        for (const auto& [A, e] : v.epsilon_sweep) {
            eps.x.push_back(A);
            eps.value.push_back(e);
        }
        v.evidence.push_back(eps);
    }

    if (l_verdict == Verdict::fails) {
        v.verdict = Verdict::fails;
        v.reason = "not in L(gamma): " + v.parts.front().reason;
    } else if (l_verdict == Verdict::inconclusive && r.verdict == Verdict::holds) {
        v.verdict = Verdict::inconclusive;
        v.reason = "ratio settles but L(gamma) is inconclusive: " + v.parts.front().reason;
    } else {
        v.verdict = r.verdict;
        v.reason = r.reason;
    }
    return v;
}

std::vector<double> tilted_interval_masses(const GriddedTiltRep& rep, double c) {
    const long k = rep.steps_for(c);
    if (k < 1) throw ConfigError("interval length c must be at least one grid step");
    const double decay = std::exp(-rep.gamma0 * static_cast<double>(k) * rep.step);
    std::vector<double> m(rep.W.size(), kNaN);
    for (std::size_t j = 0; j + static_cast<std::size_t>(k) < rep.W.size(); ++j)
        m[j] = std::max(0.0, rep.W[j] - decay * rep.W[j + static_cast<std::size_t>(k)]);
    return m;
}

ClassVerdict test_L_delta(const GriddedTiltRep& rep, double c, const Tolerances& tol, const std::vector<double>& shifts) {
    ClassVerdict v;
    v.class_name = "L_delta(c=" + fmt(c) + ")";
    v.gamma = 0.0;
    v.target = 1.0;
    v.tolerances = tol;
    v.numerical_error = 2.0 * rep.disc_error_rel;
    const auto m = tilted_interval_masses(rep, c);
    const long kc = rep.steps_for(c);
    long k_max = 0;
    for (const double a : shifts) k_max = std::max(k_max, rep.steps_for(a));
    const std::size_t top = rep.W.size() - 1 - static_cast<std::size_t>(kc + k_max);
    const double x_top = rep.x(top);
    const double from = x_top * (1.0 - tol.window_frac) - rep.step;

    bool all_zero = true;
    for (std::size_t j = 0; j <= top; ++j)
        if (rep.x(j) >= from && m[j] > 0.0) all_zero = false;
    if (all_zero) {
        v.verdict = Verdict::fails;
        v.reason = "interval masses vanish in the window";
        return v;
    }
    for (const double a0 : shifts) {
        const long ka = rep.steps_for(a0);
        const double a = static_cast<double>(ka) * rep.step;
        const double factor = std::exp(-rep.gamma0 * a);
        Curve curve;
        curve.name = "interval_shift_ratio_a=" + fmt(a);
        for (std::size_t j = 0; j <= top; ++j) {
            if (rep.x(j) < from) continue;
            const double noise = 1e-12 * rep.W[j];
            curve.x.push_back(rep.x(j));
            curve.value.push_back(m[j] > noise ? factor * m[j + static_cast<std::size_t>(ka)] / m[j] : kNaN);
        }
        auto part = ratio_verdict("L_delta(a=" + fmt(a) + ")", 0.0, curve, 1.0, tol, v.numerical_error);
        if (part.verdict == Verdict::inconclusive && part.reason.find("zero") != std::string::npos)
            part.reason = "interval masses below the noise floor";
        v.evidence.push_back(curve);
        v.parts.push_back(std::move(part));
    }
    v.verdict = combine(v.parts);
    const auto& w = worst_part(v.parts);
    v.estimate = w.estimate;
    v.reason = w.class_name + ": " + w.reason;
    return v;
}

ClassVerdict test_S_delta(const GriddedTiltRep& rep, double c, const Tolerances& tol, const GriddedTiltRep* rep2) {
    GriddedTiltRep own;
    if (rep2 == nullptr) {
        own = conv(rep, rep);
        rep2 = &own;
    }
    require_same_grid(rep, *rep2, "test_S_delta");
    ClassVerdict v;
    v.class_name = "S_delta(c=" + fmt(c) + ")";
    v.gamma = 0.0;
    v.tolerances = tol;
    auto L = test_L_delta(rep, c, tol);
    const Verdict l_verdict = L.verdict;
    v.parts.push_back(L);

    v.target = 2.0;
    const auto m1 = tilted_interval_masses(rep, c);
    const auto m2 = tilted_interval_masses(*rep2, c);
    const long kc = rep.steps_for(c);
    const std::size_t top = rep.W.size() - 1 - static_cast<std::size_t>(kc);
    Curve curve;
    curve.name = "interval_mass_ratio";
    for (std::size_t j = 0; j <= top; ++j) {
        curve.x.push_back(rep.x(j));
        curve.value.push_back(m1[j] > 1e-12 * rep.W[j] ? m2[j] / m1[j] : kNaN);
    }
    const double err = 2.0 * (rep.disc_error_rel + rep2->disc_error_rel);
    auto r = ratio_verdict("S_delta ratio", 0.0, curve, v.target, tol, err);
    v.estimate = r.estimate;
    v.numerical_error = err;
    v.evidence = r.evidence;
    if (l_verdict == Verdict::fails) {
        v.verdict = Verdict::fails;
        v.reason = "not in L_delta: " + L.reason;
    } else if (l_verdict == Verdict::inconclusive && r.verdict == Verdict::holds) {
        v.verdict = Verdict::inconclusive;
        v.reason = "ratio settles but L_delta is inconclusive: " + L.reason;
    } else {
        v.verdict = r.verdict;
        v.reason = r.reason;
    }
    return v;
}

ClassVerdict test_S_loc(const GriddedTiltRep& rep, const std::vector<double>& c_ladder, const Tolerances& tol) {
    const auto rep2 = conv(rep, rep);
    ClassVerdict v;
    v.class_name = "S_loc";
    v.tolerances = tol;
    v.target = 2.0;
    for (const double c : c_ladder) v.parts.push_back(test_S_delta(rep, c, tol, &rep2));
    v.verdict = combine(v.parts);
    const auto& w = worst_part(v.parts);
    v.estimate = w.estimate;
    v.numerical_error = w.numerical_error;
    v.reason = w.class_name + ": " + w.reason;
    for (const auto& p : v.parts)
        for (const auto& e : p.evidence) v.evidence.push_back({p.class_name + ":" + e.name, e.x, e.value});
    return v;
}

ClassVerdict density_subexp_check(const DensityGrid& d, const Tolerances& tol) {
    if (!(d.step > 0.0) || d.g.size() < 3) throw ConfigError("density grid needs step > 0 and at least 3 nodes");
    for (const double v : d.g)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("density must be finite and nonnegative");
    const double h = d.step;
    double integral = 0.0;
    for (std::size_t j = 0; j < d.g.size(); ++j)
        integral += (j == 0 || j + 1 == d.g.size() ? 0.5 : 1.0) * d.g[j];
    integral *= h;
    if (std::abs(integral - 1.0) > 1e-2) throw ConfigError("density integrates to " + fmt(integral) + ", not 1");

    // trapezoid (g*g)(x_j) = h (sum_i g_i g_{j-i} - g_0 g_j)
    const auto full = fft_convolve(d.g, d.g);
    std::size_t top = d.g.size() - 1;
    while (top > 0 && d.g[top] == 0.0) --top;
    if (top + 1 < d.g.size()) ++top; // include the first node past the support
    Curve curve;
    curve.name = "g2_over_g";
    for (std::size_t j = 0; j <= top; ++j) {
        const double gg = h * (full[j] - d.g[0] * d.g[j]);
        const double x = static_cast<double>(j) * h;
        curve.x.push_back(x);
        curve.value.push_back(d.g[j] > 0.0 ? gg / d.g[j] : (gg > 0.0 ? std::numeric_limits<double>::infinity() : kNaN));
    }
    ClassVerdict v;
    v.class_name = "S_ac";
    v.target = 2.0;
    v.tolerances = tol;
    v.numerical_error = h;
    v.evidence.push_back(curve);
    v.estimate = estimate_limit(curve.x, curve.value, tol.window_frac);
    if (std::isinf(v.estimate.window_sup)) {
        v.verdict = Verdict::fails;
        v.reason = "g vanishes where g*g does not (not long-tailed)";
        return v;
    }
    v.verdict = decide(v.estimate, 2.0, tol, v.numerical_error, &v.reason);
    return v;
}

JkReport jk_decomposition(const GriddedTiltRep& rep, int n, double A, const Tolerances& tol,
                          const GriddedTiltRep* power_n_minus_1, const GriddedTiltRep* power_n) {
    require_origin(rep, "jk_decomposition");
    if (n < 2) throw ConfigError("jk_decomposition: n must be >= 2");
    if (!(A > 0.0)) throw ConfigError("jk_decomposition: A must be > 0");
    const long kA_l = rep.steps_for(A);
    if (kA_l < 1) throw ConfigError("jk_decomposition: A is below one grid step");
    const auto kA = static_cast<std::size_t>(kA_l);
    if (static_cast<double>(n) * A >= rep.x_max()) throw ConfigError("jk_decomposition: window violates x > n A");

    GriddedTiltRep pm1_own, pn_own;
    if (power_n_minus_1 == nullptr) {
        pm1_own = n == 2 ? rep : conv_pow(rep, n - 1);
        power_n_minus_1 = &pm1_own;
    }
    if (power_n == nullptr) {
        pn_own = conv(*power_n_minus_1, rep);
        power_n = &pn_own;
    }
    require_same_grid(rep, *power_n_minus_1, "jk_decomposition");
    require_same_grid(rep, *power_n, "jk_decomposition");

    const auto kmid = half_node_kernel(rep);
    const auto nu_p = to_masses(*power_n_minus_1);
    const auto nu_1 = to_masses(rep);
    const auto j1 = head_integral(rep, kmid, nu_p, kA);
    const auto mid_p = middle_integral(kmid, nu_p, kA);
    const auto mid_1 = middle_integral(kmid, nu_1, kA);

    JkReport r;
    r.n = n;
    r.A = static_cast<double>(kA) * rep.step;
    const double nn = n;
    const double x_from = rep.x_max() * (1.0 - tol.window_frac);
    r.min_residual_41 = std::numeric_limits<double>::infinity();
    r.min_residual_42 = std::numeric_limits<double>::infinity();
    const std::size_t first = static_cast<std::size_t>(n) * kA + 1;
    for (std::size_t j = first; j < rep.W.size(); ++j) {
        const double T = power_n->W[j];
        if (!(T > 0.0)) continue;
        const double J1 = j1[j];
        const double J2 = mid_p[j] + rep.W[kA] * power_n_minus_1->W[j - kA];
        const double J3 = mid_1[j] + rep.W[kA] * rep.W[j - kA];
        const double r41 = (nn * J1 + nn * J2 - T) / T;
        const double r42 = (T - (nn * J1 - 0.5 * nn * (nn - 3.0) * J2 - 0.5 * nn * (nn - 1.0) * J3)) / T;
        r.x.push_back(rep.x(j));
        r.J1.push_back(J1);
        r.J2.push_back(J2);
        r.J3.push_back(J3);
        r.tail_n.push_back(T);
        r.residual_41.push_back(r41);
        r.residual_42.push_back(r42);
        r.min_residual_41 = std::min(r.min_residual_41, r41);
        r.min_residual_42 = std::min(r.min_residual_42, r42);
        if (rep.x(j) >= x_from) r.epsilon_A = std::max(r.epsilon_A, (J2 + J3) / T);
    }
    return r;
}

RootRatioReport conv_root_ratio(const GriddedTiltRep& rep, int n, double gamma, const Tolerances& tol,
                                std::optional<double> moment, const GriddedTiltRep* power_n) {
    if (n < 2) throw ConfigError("conv_root_ratio: n must be >= 2");
    GriddedTiltRep own;
    if (power_n == nullptr) {
        own = conv_pow(rep, n);
        power_n = &own;
    }
    require_same_grid(rep, *power_n, "conv_root_ratio");
    double M = 0.0;
    double m_err = 0.0;
    if (moment) {
        M = *moment;
    } else {
        const auto m = exp_moment(rep, gamma);
        if (m.infinite) throw ConfigError("conv_root_ratio: moment diverges");
        M = m.value;
        m_err = m.error_bound / m.value;
    }
    RootRatioReport r;
    r.n = n;
    r.predicted = std::pow(M, 1.0 - n) / n;
    r.curve.name = "tail_over_tail_n";
    bool any_positive = false;
    for (std::size_t j = 0; j < rep.W.size(); ++j) {
        const double T = power_n->W[j];
        r.curve.x.push_back(rep.x(j));
        r.curve.value.push_back(T > 0.0 ? rep.W[j] / T : kNaN);
        if (T > 0.0 && rep.W[j] > 0.0) any_positive = true;
    }
    if (!any_positive) throw NumericalError("conv_root_ratio: tails vanish on the grid (degenerate input)");
    r.band = estimate_limit(r.curve.x, r.curve.value, tol.window_frac);
    r.D_star_upper = r.band.window_sup;
    r.D_star_lower = r.band.window_inf;
    r.collapse = decide(r.band, r.predicted, tol, rep.disc_error_rel + power_n->disc_error_rel + (n - 1) * m_err,
                        &r.reason);
    return r;
}

} // namespace tiltgrid
