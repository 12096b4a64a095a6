// tiltgrid command line: build, conv, transform, diagnose, counterexample, plot.
//
// Exit codes: 0 success, 1 verdict differs from --expect, 2 configuration
// error, 3 numerical failure.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tiltgrid/convolve.hpp"
#include "tiltgrid/counterexample.hpp"
#include "tiltgrid/defaults.hpp"
#include "tiltgrid/diagnostics.hpp"
#include "tiltgrid/dist_core.hpp"
#include "tiltgrid/error.hpp"
#include "tiltgrid/io.hpp"
#include "tiltgrid/transforms.hpp"

using namespace tiltgrid;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::optional<double> step, x_max, gamma0;
    std::optional<double> window_frac, band_tol, value_tol;
    std::string out;
    bool deterministic = false;
    std::string expect;
};

void add_common(CLI::App* app, Common& c, bool grid_flags = true) {
    if (grid_flags) {
        app->add_option("--step", c.step, "grid step h")->check(CLI::PositiveNumber);
        app->add_option("--xmax", c.x_max, "grid end x_max")->check(CLI::PositiveNumber);
        app->add_option("--gamma0", c.gamma0, "reference tilt gamma0")->check(CLI::PositiveNumber);
    }
    app->add_option("--window-frac", c.window_frac, "trailing window fraction")->check(CLI::Range(0.0, 1.0));
    app->add_option("--band-tol", c.band_tol, "band width tolerance")->check(CLI::PositiveNumber);
    app->add_option("--value-tol", c.value_tol, "target deviation tolerance")->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "output file or directory (stdout when omitted, where allowed)");
    app->add_flag("--deterministic", c.deterministic, "omit timestamps from artifacts");
}

struct Grid {
    double gamma0 = defaults::kGamma0;
    double step = defaults::kStep;
    double x_max = defaults::kXMax;
};

// CLI flags > spec file > defaults.
Grid resolve_grid(const Common& c, const io::SpecGrid* file = nullptr) {
    Grid g;
    if (file) {
        g.gamma0 = file->gamma0.value_or(g.gamma0);
        g.step = file->step.value_or(g.step);
        g.x_max = file->x_max.value_or(g.x_max);
    }
    g.gamma0 = c.gamma0.value_or(g.gamma0);
    g.step = c.step.value_or(g.step);
    g.x_max = c.x_max.value_or(g.x_max);
    if (!(g.x_max > g.step)) throw ConfigError("x_max must exceed the step");
    return g;
}

Tolerances resolve_tol(const Common& c) {
    Tolerances t;
    t.window_frac = c.window_frac.value_or(t.window_frac);
    t.band_tol = c.band_tol.value_or(t.band_tol);
    t.value_tol = c.value_tol.value_or(t.value_tol);
    return t;
}

io::json config_json(const Grid& g, const Tolerances& t) {
    return io::json{{"gamma0", g.gamma0}, {"step", g.step}, {"x_max", g.x_max},
                    {"window_frac", t.window_frac}, {"band_tol", t.band_tol}, {"value_tol", t.value_tol}};
}

void emit(const std::string& out, const std::string& content) {
    if (out.empty() || out == "-")
        std::cout << content;
    else
        io::write_atomic(out, content);
}

int check_expect(const std::string& expect, const std::string& got) {
    if (expect.empty() || expect == got) return 0;
    std::cerr << "expected " << expect << ", got " << got << "\n";
    return 1;
}

// ---- build ----------------------------------------------------------------

struct BuildArgs {
    Common c;
    std::string spec;
    std::optional<double> tilt_gamma;
};

int run_build(const BuildArgs& a) {
    const auto sf = io::load_spec(a.spec);
    const Grid g = resolve_grid(a.c, &sf.grid);
    GriddedTiltRep rep = a.tilt_gamma ? tilt(sf.spec, *a.tilt_gamma, g.gamma0, g.step, g.x_max)
                                      : to_grid(sf.spec, g.gamma0, g.step, g.x_max);
    io::Provenance prov{config_json(g, resolve_tol(a.c)), a.c.deterministic, {}};
    prov.config["spec"] = sf.raw;
    if (a.tilt_gamma) prov.config["tilt_gamma"] = *a.tilt_gamma;
    emit(a.c.out, io::format_grid(rep, prov));
    return 0;
}

// ---- conv -----------------------------------------------------------------

struct ConvArgs {
    Common c;
    std::string a, b;
    int power = 0;
    double trunc_cap = defaults::kTruncCap;
};

int run_conv(const ConvArgs& a) {
    const auto A = io::load_grid(a.a);
    GriddedTiltRep out;
    io::Provenance prov{io::json{{"trunc_cap", a.trunc_cap}}, a.c.deterministic, {}};
    prov.extra.push_back("operand_a=" + io::fnv1a_hex(A.W) + " trunc_a=" + std::to_string(A.trunc_mass_bound));
    if (a.power > 0) {
        if (!a.b.empty()) throw ConfigError("--power and --b are mutually exclusive");
        out = conv_pow(A, a.power, a.trunc_cap);
        prov.extra.push_back("power=" + std::to_string(a.power));
    } else {
        if (a.b.empty()) throw ConfigError("conv needs --b or --power");
        const auto B = io::load_grid(a.b);
        prov.extra.push_back("operand_b=" + io::fnv1a_hex(B.W) + " trunc_b=" + std::to_string(B.trunc_mass_bound));
        out = conv(A, B, a.trunc_cap);
    }
    prov.extra.push_back("composed_trunc=" + std::to_string(out.trunc_mass_bound) +
                         " composed_disc_error_rel=" + std::to_string(out.disc_error_rel));
    emit(a.c.out, io::format_grid(out, prov));
    return 0;
}

// ---- transform ------------------------------------------------------------

struct TransformArgs {
    Common c;
    std::string spec, grid;
    double gamma = 1.0;
    double z_lo = 0.0, z_hi = 8.0, z_step = defaults::kZStep;
    double zero_tol = defaults::kZeroTol;
};

int run_transform(const TransformArgs& a) {
    if (a.spec.empty() == a.grid.empty()) throw ConfigError("transform needs exactly one of --spec or --grid");
    TransformProfile p;
    std::vector<ZeroCandidate> zeros;
    io::Provenance prov{io::json{{"gamma", a.gamma}, {"z_lo", a.z_lo}, {"z_hi", a.z_hi}, {"z_step", a.z_step}},
                        a.c.deterministic, {}};
    if (!a.spec.empty()) {
        const auto sf = io::load_spec(a.spec);
        prov.config["spec"] = sf.raw;
        p = complex_transform(sf.spec, a.gamma, a.z_lo, a.z_hi, a.z_step);
        const TailSpec s = sf.spec;
        const double g = a.gamma;
        zeros = find_zero_candidates(p, a.zero_tol, [s, g](double z) { return transform_at(s, {g, z}); });
    } else {
        const auto rep = io::load_grid(a.grid);
        p = complex_transform(rep, a.gamma, a.z_lo, a.z_hi, a.z_step);
        const double g = a.gamma;
        zeros = find_zero_candidates(p, a.zero_tol, [&rep, g](double z) { return transform_at(rep, {g, z}); });
    }
    emit(a.c.out, io::format_transform(p, zeros, prov));
    for (const auto& z : zeros) std::cerr << "zero candidate z=" << z.z << " |F|=" << z.modulus << "\n";
    if (!a.c.expect.empty()) return check_expect(a.c.expect, zeros.empty() ? "no_zero" : "zero");
    return 0;
}

// ---- diagnose -------------------------------------------------------------

struct DiagnoseArgs {
    Common c;
    std::string spec, grid, klass;
    double gamma = 1.0;
    double c_len = 1.0;
    std::optional<double> tilt_gamma;
};

int run_diagnose(const DiagnoseArgs& a) {
    if (a.spec.empty() == a.grid.empty()) throw ConfigError("diagnose needs exactly one of --spec or --grid");
    const Tolerances tol = resolve_tol(a.c);
    GriddedTiltRep rep;
    std::optional<double> moment;
    io::json config;
    std::optional<TailSpec> spec;
    if (!a.spec.empty()) {
        const auto sf = io::load_spec(a.spec);
        Grid g = resolve_grid(a.c, &sf.grid);
        // exp_moment on a grid needs gamma <= gamma0.
        if (!a.c.gamma0 && !sf.grid.gamma0 && a.gamma > g.gamma0 && sf.spec.moment_finite(a.gamma)) g.gamma0 = a.gamma;
        spec = sf.spec;
        rep = a.tilt_gamma ? tilt(sf.spec, *a.tilt_gamma, g.gamma0, g.step, g.x_max)
                           : to_grid(sf.spec, g.gamma0, g.step, g.x_max);
        if (!a.tilt_gamma && (a.klass == "S" || a.klass == "L")) {
            if (!sf.spec.moment_finite(a.gamma)) {
                moment = std::numeric_limits<double>::infinity();
            } else {
                moment = exp_moment(sf.spec, a.gamma).value;
            }
        }
        config = config_json(g, tol);
        config["spec"] = sf.raw;
    } else {
        rep = io::load_grid(a.grid);
        if (a.tilt_gamma) rep = tilt(rep, *a.tilt_gamma);
        config = config_json({rep.gamma0, rep.step, rep.x_max()}, tol);
        config["grid"] = a.grid;
    }
    config["class"] = a.klass;
    config["gamma"] = a.gamma;
    config["c"] = a.c_len;
    if (a.tilt_gamma) config["tilt_gamma"] = *a.tilt_gamma;

    ClassVerdict v;
    if (a.klass == "L") {
        v = spec && !a.tilt_gamma
                ? test_L_gamma(TailSampler::from_spec(*spec, rep.gamma0, rep.step, rep.x_max()), a.gamma,
                               {1.0, std::numbers::pi, 2.0}, tol)
                : test_L_gamma(rep, a.gamma, {1.0, std::numbers::pi, 2.0}, tol);
    } else if (a.klass == "S") {
        if (moment && std::isinf(*moment)) {
            v.class_name = "S";
            v.gamma = a.gamma;
            v.tolerances = tol;
            v.verdict = Verdict::fails;
            v.reason = "exponential moment diverges at gamma";
        } else {
            v = test_S_gamma(rep, a.gamma, tol, moment);
        }
    } else if (a.klass == "L_delta") {
        v = test_L_delta(rep, a.c_len, tol);
    } else if (a.klass == "S_delta") {
        v = test_S_delta(rep, a.c_len, tol);
    } else if (a.klass == "S_loc") {
        v = test_S_loc(rep, {0.25, 0.5, 1.0, 2.0, 4.0}, tol);
    } else {
        throw ConfigError("unknown class '" + a.klass + "'");
    }

    const std::string verdict = to_string(v.verdict);
    std::vector<std::string> evidence_files;
    if (!a.c.out.empty()) {
        const fs::path dir(a.c.out);
        io::Provenance prov{config, a.c.deterministic, {}};
        auto write_curves = [&](const ClassVerdict& cv, const std::string& prefix) {
            for (const auto& curve : cv.evidence) {
                const std::string name = prefix + (curve.name.empty() ? "curve" : curve.name) + ".csv";
                io::write_atomic((dir / name).string(), io::format_curve(curve, prov));
                evidence_files.push_back(name);
            }
        };
        write_curves(v, "");
        for (std::size_t i = 0; i < v.parts.size(); ++i) write_curves(v.parts[i], "part" + std::to_string(i) + "_");
        auto j = io::verdict_json(v, evidence_files);
        j["provenance"] = io::provenance_json(prov);
        io::write_atomic((dir / "verdict.json").string(), io::format_json(j));
    } else {
        auto j = io::verdict_json(v, {});
        j["provenance"] = io::provenance_json({config, a.c.deterministic, {}});
        std::cout << io::format_json(j);
    }
    std::cerr << v.class_name << "(" << a.gamma << "): " << verdict << " -- " << v.reason << "\n";
    return check_expect(a.c.expect, verdict);
}

// ---- counterexample -------------------------------------------------------

struct CounterexampleArgs {
    Common c;
    std::size_t lattice_max_index = defaults::kLatticeMaxIndex;
    bool serial = false;
};

int run_counterexample(const CounterexampleArgs& a) {
    const Grid g = resolve_grid(a.c);
    CounterexampleConfig cfg;
    cfg.gamma0 = g.gamma0;
    cfg.step = g.step;
    cfg.x_max = g.x_max;
    cfg.tol = resolve_tol(a.c);
    cfg.lattice_max_index = a.lattice_max_index;
    cfg.parallel = !a.serial;
    const auto r = full_report(cfg);

    for (const auto& f : r.flags) std::cerr << (f.pass ? "PASS " : "FAIL ") << f.name << "  " << f.detail << "\n";
    auto j = io::report_json(r);
    io::Provenance prov{config_json(g, cfg.tol), a.c.deterministic, {}};
    j["provenance"] = io::provenance_json(prov);

    if (a.c.out.empty()) {
        std::cout << io::format_json(j);
    } else {
        const fs::path dir(a.c.out);
        std::vector<std::pair<std::string, const Curve*>> curves{
            {"envelope", &r.moment_zero.envelope_curve},
            {"two_fold", &r.two_fold_powers.two_fold_curve},
            {"four_fold", &r.two_fold_powers.four_fold_curve},
            {"root_ratio_xi", &r.root_ratio.curve},
            {"root_ratio_exp_pareto", &r.root_ratio_exp_pareto.curve},
        };
        Curve modulus{"transform_modulus", r.xi_profile.z_values, {}};
        for (auto v : r.xi_profile.values) modulus.value.push_back(std::abs(v));
        curves.emplace_back("transform_modulus", &modulus);
        io::json files = io::json::array();
        for (const auto& [name, curve] : curves) {
            io::write_atomic((dir / (name + ".csv")).string(), io::format_curve(*curve, prov));
            io::write_atomic((dir / (name + ".svg")).string(),
                             io::render_svg({*curve}, name, name == "transform_modulus"));
            files.push_back(name + ".csv");
        }
        j["evidence_csv"] = files;
        io::write_atomic((dir / "report.json").string(), io::format_json(j));
    }
    std::cerr << "counterexample: " << (r.pass ? "pass" : "fail") << "\n";
    return check_expect(a.c.expect, r.pass ? "pass" : "fail");
}

// ---- plot -----------------------------------------------------------------

struct PlotArgs {
    Common c;
    std::vector<std::string> inputs;
    std::string title;
    bool log_y = false;
};

int run_plot(const PlotArgs& a) {
    std::vector<Curve> curves;
    for (const auto& path : a.inputs) {
        auto c = io::parse_curve(io::read_file(path));
        if (c.name.empty()) c.name = fs::path(path).stem().string();
        curves.push_back(std::move(c));
    }
    emit(a.c.out, io::render_svg(curves, a.title.empty() ? curves.front().name : a.title, a.log_y));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tilted-grid numerics for convolution equivalence"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(defaults::kCodeVersion) + " (" + defaults::kDefaultsVersion + ")");

    BuildArgs build;
    auto* b = app.add_subcommand("build", "sample a distribution spec onto a tilted grid (grid CSV)");
    add_common(b, build.c);
    b->add_option("--spec", build.spec, "spec JSON file")->required();
    b->add_option("--tilt", build.tilt_gamma, "grid the exponentially tilted distribution instead");

    ConvArgs cv;
    auto* c = app.add_subcommand("conv", "convolve grid CSVs");
    add_common(c, cv.c, false);
    c->add_option("--a", cv.a, "first operand grid CSV")->required();
    c->add_option("--b", cv.b, "second operand grid CSV");
    c->add_option("--power", cv.power, "n-fold convolution power of --a")->check(CLI::Range(1, 64));
    c->add_option("--trunc-cap", cv.trunc_cap, "max truncation mass as a fraction of the total")->check(CLI::PositiveNumber);

    TransformArgs tr;
    auto* t = app.add_subcommand("transform", "complex transform profile along gamma + i z and zero candidates");
    add_common(t, tr.c, false);
    t->add_option("--spec", tr.spec, "spec JSON file");
    t->add_option("--grid", tr.grid, "grid CSV file");
    t->add_option("--gamma", tr.gamma, "real part of s");
    t->add_option("--z-lo", tr.z_lo, "first z");
    t->add_option("--z-hi", tr.z_hi, "last z");
    t->add_option("--z-step", tr.z_step, "z spacing")->check(CLI::PositiveNumber);
    t->add_option("--zero-tol", tr.zero_tol, "modulus accepted as a zero")->check(CLI::PositiveNumber);
    t->add_option("--expect", tr.c.expect, "zero | no_zero")->check(CLI::IsMember({"zero", "no_zero"}));

    DiagnoseArgs dg;
    auto* d = app.add_subcommand("diagnose", "class-membership verdict with evidence");
    add_common(d, dg.c);
    d->add_option("--spec", dg.spec, "spec JSON file");
    d->add_option("--grid", dg.grid, "grid CSV file");
    d->add_option("--class", dg.klass, "L | S | L_delta | S_delta | S_loc")
        ->required()
        ->check(CLI::IsMember({"L", "S", "L_delta", "S_delta", "S_loc"}));
    d->add_option("--gamma", dg.gamma, "index gamma of L(gamma) / S(gamma)");
    d->add_option("--c", dg.c_len, "interval length for L_delta / S_delta")->check(CLI::PositiveNumber);
    d->add_option("--tilt", dg.tilt_gamma, "diagnose the exponentially tilted distribution");
    d->add_option("--expect", dg.c.expect, "holds | fails | inconclusive")
        ->check(CLI::IsMember({"holds", "fails", "inconclusive"}));

    CounterexampleArgs cx;
    auto* x = app.add_subcommand("counterexample", "full reproduction report for xi");
    add_common(x, cx.c);
    x->add_option("--lattice-max-index", cx.lattice_max_index, "largest lattice index n")->check(CLI::PositiveNumber);
    x->add_flag("--serial", cx.serial, "run the report stages sequentially");
    x->add_option("--expect", cx.c.expect, "pass | fail")->check(CLI::IsMember({"pass", "fail"}));

    PlotArgs pl;
    auto* p = app.add_subcommand("plot", "render evidence CSVs as an SVG line chart");
    add_common(p, pl.c, false);
    p->add_option("--in", pl.inputs, "evidence CSV (repeatable)")->required();
    p->add_option("--title", pl.title, "chart title");
    p->add_flag("--log-y", pl.log_y, "log10 vertical axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*b) return run_build(build);
        if (*c) return run_conv(cv);
        if (*t) return run_transform(tr);
        if (*d) return run_diagnose(dg);
        if (*x) return run_counterexample(cx);
        if (*p) return run_plot(pl);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
