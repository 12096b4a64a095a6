#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "fixtures.hpp"
#include "tiltgrid/diagnostics.hpp"
#include "tiltgrid/error.hpp"
#include "tiltgrid/io.hpp"

using namespace tiltgrid;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    auto d = fs::temp_directory_path() / ("tiltgrid_io_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("spec parsing") {
    const auto ep = io::parse_spec(R"({"kind": "exp_pareto", "gamma": 1, "alpha": 2})");
    CHECK(ep.spec.family() == Family::exp_pareto);
    CHECK(ep.spec.tail(5.0) == doctest::Approx(std::exp(-5.0) / 36.0));

    CHECK(io::parse_spec(R"({"kind": "xi"})").spec.family() == Family::xi_counterexample);
    CHECK(io::parse_spec(R"({"kind": "point_mass"})").spec.family() == Family::point_mass);
    CHECK(io::parse_spec(R"({"kind": "exponential", "theta": 2})").spec.tail(1.0) == doctest::Approx(std::exp(-2.0)));
    const auto mm = io::parse_spec(R"({"kind": "m_mixture", "gamma": 1, "a": 0.5, "alpha": 2, "beta": 1})");
    CHECK(mm.spec.tail(1.0) == doctest::Approx(std::exp(-1.0) * 0.5 * (0.25 + std::exp(-1.0))));

    const auto g = io::parse_spec(R"({"kind": "xi", "step": 0.01, "x_max": 50})");
    CHECK(g.grid.step.value() == 0.01);
    CHECK(g.grid.x_max.value() == 50.0);
    CHECK_FALSE(g.grid.gamma0.has_value());

    CHECK_THROWS_AS(io::parse_spec(R"({"kind": "exp_pareto", "gamma": 1})"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"({"kind": "xi", "alpha": 2})"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"({"kind": "exponential", "theta": "two"})"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"({"kind": "nope"})"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"({"gamma": 1})"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec("{not json"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"([1, 2])"), ConfigError);
    CHECK_THROWS_AS(io::parse_spec(R"({"kind": "m_mixture", "gamma": 1, "a": 0.5, "alpha": 2})"), ConfigError);
}

TEST_CASE("grid CSV round trip is exact") {
    const auto rep = conv(fx::exp_pareto(), fx::exp_pareto());
    const auto text = io::format_grid(rep, {io::json{{"note", "test"}}, true, {"operand_a=abc"}});
    CHECK(text.rfind("# gamma0=1 step=", 0) == 0);
    CHECK(text.find("trunc=") != std::string::npos);
    CHECK(text.find("generated_at") == std::string::npos);
    const auto back = io::parse_grid(text);
    CHECK(back.W == rep.W);
    CHECK(back.step == rep.step);
    CHECK(back.gamma0 == rep.gamma0);
    CHECK(back.trunc_mass_bound == rep.trunc_mass_bound);
    CHECK(back.disc_error_rel == rep.disc_error_rel);

    std::string broken = text;
    broken.replace(broken.find("n=65537"), 7, "n=65536");
    CHECK_THROWS_AS(io::parse_grid(broken), ConfigError);
    CHECK_THROWS_AS(io::parse_grid("x,W\n0,1\n"), ConfigError);
}

TEST_CASE("timestamps only outside deterministic mode") {
    Curve c{"c", {1, 2, 3}, {4, 5, 6}};
    const auto a = io::format_curve(c, {{}, true, {}});
    const auto b = io::format_curve(c, {{}, true, {}});
    CHECK(a == b);
    CHECK(io::format_curve(c, {{}, false, {}}).find("generated_at=") != std::string::npos);
}

TEST_CASE("curve CSV round trip") {
    Curve c{"ratio", {0.5, 1.0, 1.5}, {2.0, std::nan(""), 2.25}};
    const auto back = io::parse_curve(io::format_curve(c, {}));
    CHECK(back.name == "ratio");
    CHECK(back.x == c.x);
    CHECK(back.value[0] == 2.0);
    CHECK(std::isnan(back.value[1]));
}

TEST_CASE("fnv1a hash") {
    CHECK(io::fnv1a_hex({}) == "cbf29ce484222325");
    CHECK(io::fnv1a_hex({1.0}) == io::fnv1a_hex({1.0}));
    CHECK(io::fnv1a_hex({1.0}) != io::fnv1a_hex({1.0 + 1e-16 * 2}));
    CHECK(io::fnv1a_hex({1.0}).size() == 16);
}

TEST_CASE("atomic writes leave no temporaries") {
    const auto dir = scratch_dir();
    const auto target = dir / "sub" / "out.txt";
    io::write_atomic(target.string(), "first");
    io::write_atomic(target.string(), "second");
    CHECK(io::read_file(target.string()) == "second");
    std::size_t entries = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir / "sub")) ++entries;
    CHECK(entries == 1);
    CHECK_THROWS_AS(io::read_file((dir / "missing").string()), ConfigError);
    fs::remove_all(dir);
}

TEST_CASE("verdict JSON layout") {
    const auto v = test_S_gamma(fx::exp_pareto(), 1.0);
    const auto j = io::verdict_json(v, {"tail2_over_tail.csv"});
    for (const char* key : {"class", "gamma", "verdict", "target", "band", "trend", "tolerances", "evidence_csv"})
        CHECK(j.contains(key));
    CHECK(j["verdict"] == "holds");
    CHECK(j["band"].size() == 2);
    CHECK(j["tolerances"].contains("band_tol"));
    CHECK(j["evidence_csv"][0] == "tail2_over_tail.csv");
    CHECK(j.contains("parts"));
    // NaN-free output that parses back
    CHECK(io::json::parse(io::format_json(j))["verdict"] == "holds");
}

TEST_CASE("svg rendering") {
    Curve c{"a<b", {0, 1, 2}, {1, 4, 9}};
    const auto svg = io::render_svg({c}, "t & u");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("a&lt;b") != std::string::npos);
    CHECK(svg.find("t &amp; u") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    Curve empty{"nothing", {0, 1}, {std::nan(""), std::nan("")}};
    CHECK_THROWS_AS(io::render_svg({empty}, "x"), ConfigError);
}
