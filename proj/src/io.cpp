#include "tiltgrid/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>
#include <unistd.h>

#include "tiltgrid/defaults.hpp"
#include "tiltgrid/error.hpp"

namespace tiltgrid::io {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_num(const std::string& s, const std::string& what) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("cannot parse " + what + ": '" + s + "'");
    }
}

double json_num(const json& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw ConfigError(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

std::optional<double> opt_num(const json& j, const char* key) {
    if (!j.contains(key)) return std::nullopt;
    return json_num(j, key);
}

void require(const json& j, std::initializer_list<const char*> keys, const std::string& kind) {
    for (const char* k : keys)
        if (!j.contains(k)) throw ConfigError("spec of kind '" + kind + "' is missing key '" + k + "'");
}

// Map "k1=v1 k2=v2" from a header line body.
std::map<std::string, std::string> header_pairs(const std::string& body) {
    std::map<std::string, std::string> out;
    std::istringstream in(body);
    std::string tok;
    while (in >> tok) {
        auto eq = tok.find('=');
        if (eq != std::string::npos) out[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return out;
}

std::string timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void provenance_lines(std::ostringstream& os, const Provenance& prov) {
    os << "# code_version=" << defaults::kCodeVersion << " defaults_version=" << defaults::kDefaultsVersion << "\n";
    if (!prov.config.is_null()) os << "# config=" << prov.config.dump() << "\n";
    for (const auto& e : prov.extra) os << "# " << e << "\n";
    if (!prov.deterministic) os << "# generated_at=" << timestamp() << "\n";
}

json estimate_json(const LimitEstimate& e) {
    return json{{"band", {e.window_inf, e.window_sup}},
                {"trend", e.trend},
                {"window", {e.x_from, e.x_to}},
                {"samples", e.windows_used},
                {"sufficient", e.sufficient}};
}

json flags_json(const std::vector<PassFlag>& flags) {
    json a = json::array();
    for (const auto& f : flags) a.push_back({{"name", f.name}, {"pass", f.pass}, {"detail", f.detail}});
    return a;
}

// JSON cannot hold NaN or inf; emit them as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += ch;
        }
    }
    return out;
}

} // namespace

SpecFile parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("spec is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("spec must be a JSON object");
    if (!j.contains("kind") || !j["kind"].is_string()) throw ConfigError("spec is missing string key 'kind'");
    const std::string kind = j["kind"].get<std::string>();

    std::set<std::string> allowed{"kind", "gamma0", "step", "x_max"};
    std::optional<TailSpec> spec;
    try {
        if (kind == "exp_pareto") {
            require(j, {"gamma", "alpha"}, kind);
            allowed.insert({"gamma", "alpha"});
            spec = make_exp_pareto(json_num(j, "gamma"), json_num(j, "alpha"));
        } else if (kind == "exponential") {
            require(j, {"theta"}, kind);
            allowed.insert("theta");
            spec = make_exponential(json_num(j, "theta"));
        } else if (kind == "point_mass") {
            spec = make_point_mass();
        } else if (kind == "xi") {
            spec = make_xi();
        } else if (kind == "m_mixture") {
            require(j, {"gamma", "a"}, kind);
            allowed.insert({"gamma", "a", "alpha", "beta", "scale"});
            MMixtureSpec m;
            m.gamma = json_num(j, "gamma");
            m.a = json_num(j, "a");
            if (m.a > 0.0) require(j, {"alpha"}, kind);
            if (m.a < 1.0) require(j, {"beta"}, kind);
            m.alpha = opt_num(j, "alpha").value_or(m.alpha);
            m.beta = opt_num(j, "beta").value_or(m.beta);
            m.scale = opt_num(j, "scale").value_or(1.0);
            spec = make_m_mixture(m);
        } else {
            throw ConfigError("unknown spec kind '" + kind + "'");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed spec: ") + e.what());
    }
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' for spec kind '" + kind + "'");

    SpecFile out{*spec, {}, j};
    out.grid.gamma0 = opt_num(j, "gamma0");
    out.grid.step = opt_num(j, "step");
    out.grid.x_max = opt_num(j, "x_max");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

SpecFile load_spec(const std::string& path) { return parse_spec(read_file(path)); }

void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    std::error_code dir_ec;
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), dir_ec);
    if (dir_ec) throw ConfigError("cannot create directory for '" + path + "': " + dir_ec.message());
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ConfigError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot rename into '" + path + "': " + ec.message());
    }
}

std::string fnv1a_hex(const std::vector<double>& values) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : values) {
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_grid(const GriddedTiltRep& rep, const Provenance& prov) {
    std::ostringstream os;
    os << "# gamma0=" << num(rep.gamma0) << " step=" << num(rep.step) << " x_lo=" << num(rep.x_lo)
       << " n=" << rep.W.size() << " trunc=" << num(rep.trunc_mass_bound) << "\n";
    os << "# disc_error_rel=" << num(rep.disc_error_rel) << " hash=" << fnv1a_hex(rep.W) << "\n";
    provenance_lines(os, prov);
    os << "x,W\n";
    for (std::size_t j = 0; j < rep.W.size(); ++j) os << num(rep.x(j)) << "," << num(rep.W[j]) << "\n";
    return os.str();
}

GriddedTiltRep parse_grid(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::map<std::string, std::string> meta;
    GriddedTiltRep rep;
    bool header_row = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.rfind("# config=", 0) == 0) continue;
            for (auto& kv : header_pairs(line.substr(1))) meta.insert(kv);
            continue;
        }
        if (!header_row && line.rfind("x,", 0) == 0) {
            header_row = true;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("grid row without comma: '" + line + "'");
        rep.W.push_back(parse_num(line.substr(comma + 1), "W"));
    }
    for (const char* k : {"gamma0", "step", "x_lo", "n", "trunc"})
        if (!meta.count(k)) throw ConfigError(std::string("grid file header is missing '") + k + "'");
    rep.gamma0 = parse_num(meta["gamma0"], "gamma0");
    rep.step = parse_num(meta["step"], "step");
    rep.x_lo = parse_num(meta["x_lo"], "x_lo");
    rep.trunc_mass_bound = parse_num(meta["trunc"], "trunc");
    if (meta.count("disc_error_rel")) rep.disc_error_rel = parse_num(meta["disc_error_rel"], "disc_error_rel");
    const auto n = static_cast<std::size_t>(parse_num(meta["n"], "n"));
    if (n != rep.W.size())
        throw ConfigError("grid file declares n=" + std::to_string(n) + " but has " + std::to_string(rep.W.size()) + " rows");
    validate(rep);
    return rep;
}

GriddedTiltRep load_grid(const std::string& path) { return parse_grid(read_file(path)); }

std::string format_transform(const TransformProfile& p, const std::vector<ZeroCandidate>& zeros, const Provenance& prov) {
    std::ostringstream os;
    os << "# gamma=" << num(p.gamma) << " step=" << num(p.step) << " quadrature_error_bound=" << num(p.quadrature_error_bound)
       << " min_modulus=" << num(p.min_modulus) << " argmin_z=" << num(p.argmin_z) << "\n";
    os << "# zero_refinement=" << kZeroRefinementRule << "\n";
    for (const auto& z : zeros) os << "# zero_candidate z=" << num(z.z) << " modulus=" << num(z.modulus) << "\n";
    provenance_lines(os, prov);
    os << "z,re,im,modulus\n";
    for (std::size_t i = 0; i < p.z_values.size(); ++i) {
        const auto v = p.values[i];
        os << num(p.z_values[i]) << "," << num(v.real()) << "," << num(v.imag()) << "," << num(std::abs(v)) << "\n";
    }
    return os.str();
}

std::string format_curve(const Curve& c, const Provenance& prov) {
    std::ostringstream os;
    os << "# curve=" << (c.name.empty() ? "value" : c.name) << "\n";
    provenance_lines(os, prov);
    os << "x,value\n";
    for (std::size_t i = 0; i < c.x.size(); ++i) os << num(c.x[i]) << "," << num(c.value[i]) << "\n";
    return os.str();
}

Curve parse_curve(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    Curve c;
    bool header_row = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto kv = header_pairs(line.substr(1));
            if (kv.count("curve")) c.name = kv["curve"];
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("curve row without comma: '" + line + "'");
        if (!header_row) {
            header_row = true;
            const std::string first = line.substr(0, comma);
            if (!first.empty() && (std::isalpha(static_cast<unsigned char>(first[0])) && first != "nan" && first != "inf")) {
                // column header of any two- or more-column CSV
                continue;
            }
        }
        auto comma2 = line.find(',', comma + 1);
        c.x.push_back(parse_num(line.substr(0, comma), "x"));
        c.value.push_back(parse_num(line.substr(comma + 1, comma2 == std::string::npos ? std::string::npos : comma2 - comma - 1), "value"));
    }
    return c;
}

json verdict_json(const ClassVerdict& v, const std::vector<std::string>& evidence_csv) {
    json j;
    j["class"] = v.class_name;
    j["gamma"] = v.gamma;
    j["verdict"] = to_string(v.verdict);
    j["target"] = v.target ? finite_or_null(*v.target) : json(nullptr);
    j["band"] = {finite_or_null(v.estimate.window_inf), finite_or_null(v.estimate.window_sup)};
    j["trend"] = finite_or_null(v.estimate.trend);
    j["tolerances"] = {{"window_frac", v.tolerances.window_frac},
                       {"band_tol", v.tolerances.band_tol},
                       {"value_tol", v.tolerances.value_tol}};
    j["evidence_csv"] = evidence_csv;
    j["window"] = {v.estimate.x_from, v.estimate.x_to};
    j["numerical_error"] = finite_or_null(v.numerical_error);
    j["reason"] = v.reason;
    if (!v.epsilon_sweep.empty()) {
        json eps = json::array();
        for (auto [A, e] : v.epsilon_sweep) eps.push_back({{"A", A}, {"epsilon", finite_or_null(e)}});
        j["epsilon_sweep"] = eps;
    }
    if (!v.parts.empty()) {
        json parts = json::array();
        for (const auto& p : v.parts) parts.push_back(verdict_json(p, {}));
        j["parts"] = parts;
    }
    return j;
}

json report_json(const ReproductionReport& r) {
    const auto& c = r.config;
    json j;
    j["pass"] = r.pass;
    j["config"] = {{"gamma0", c.gamma0},
                   {"step", c.step},
                   {"x_max", c.x_max},
                   {"window_frac", c.tol.window_frac},
                   {"band_tol", c.tol.band_tol},
                   {"value_tol", c.tol.value_tol},
                   {"lattice_max_index", c.lattice_max_index},
                   {"z_range", {c.z_lo, c.z_hi}},
                   {"z_step", c.z_step},
                   {"zero_tol", c.zero_tol}};
    j["flags"] = flags_json(r.flags);

    const auto& m = r.moment_zero;
    j["moment"] = {{"closed_form", m.moment_closed},
                   {"closed_form_rel_error", m.moment_closed_rel_error},
                   {"quadrature", m.moment_quadrature},
                   {"quadrature_rel_error", m.moment_quadrature_rel_error},
                   {"grid", m.moment_grid.value},
                   {"grid_error_bound", m.moment_grid.error_bound},
                   {"transform_zero_modulus", m.transform_zero_modulus},
                   {"transform_zero_error_bound", m.transform_zero_error_bound},
                   {"envelope", estimate_json(m.envelope)},
                   {"flags", flags_json(m.flags)}};

    json rows = json::array();
    for (const auto& row : r.lattice.rows)
        rows.push_back({{"lambda", row.lambda},
                        {"a", row.a},
                        {"expected", row.expected},
                        {"closed_form", estimate_json(row.closed_form.estimate)},
                        {"closed_form_last", row.closed_form.last_value},
                        {"grid", estimate_json(row.grid.estimate)}});
    j["lattice"] = {{"rows", rows},
                    {"spread", r.lattice.spread},
                    {"spread_error", r.lattice.spread_error},
                    {"grid_L1", verdict_json(r.lattice.grid_verdict, {})},
                    {"flags", flags_json(r.lattice.flags)}};

    const auto& l3 = r.two_fold_powers;
    json lam = json::array();
    for (const auto& [lambda, e] : l3.lattice_two_fold) lam.push_back({{"lambda", lambda}, {"estimate", estimate_json(e)}});
    j["convolution_powers"] = {{"two_fold_target", l3.two_fold_target},
                               {"two_fold", estimate_json(l3.two_fold)},
                               {"four_fold_target", l3.four_fold_target},
                               {"four_fold", estimate_json(l3.four_fold)},
                               {"lattice_two_fold", lam},
                               {"lambda_spread", l3.lambda_spread},
                               {"trunc_two_fold", l3.trunc_two_fold},
                               {"trunc_four_fold", l3.trunc_four_fold},
                               {"flags", flags_json(l3.flags)}};

    auto zeros = [](const std::vector<ZeroCandidate>& zs) {
        json a = json::array();
        for (const auto& z : zs) a.push_back({{"z", z.z}, {"modulus", z.modulus}});
        return a;
    };
    j["zeros"] = {{"xi", zeros(r.xi_zeros)},
                  {"exp_pareto", zeros(r.exp_pareto_zeros)},
                  {"xi_quadrature_error_bound", r.xi_profile.quadrature_error_bound},
                  {"rule", kZeroRefinementRule}};

    auto root = [](const RootRatioReport& rr) {
        return json{{"n", rr.n},
                    {"band", {rr.band.window_inf, rr.band.window_sup}},
                    {"trend", rr.band.trend},
                    {"D_star_lower", rr.D_star_lower},
                    {"D_star_upper", rr.D_star_upper},
                    {"predicted", rr.predicted},
                    {"collapse", to_string(rr.collapse)},
                    {"reason", rr.reason}};
    };
    j["root_ratio"] = {{"xi", root(r.root_ratio)}, {"exp_pareto", root(r.root_ratio_exp_pareto)}};

    json env = json::array();
    for (const auto& e : r.envelope_g)
        env.push_back({{"A", e.A},
                       {"middle_sup", e.middle_sup},
                       {"bound", e.bound},
                       {"boundary_at_xmax", e.boundary_at_xmax},
                       {"boundary_limit", e.boundary_limit}});
    j["g_envelope"] = env;
    return j;
}

json provenance_json(const Provenance& prov) {
    json j{{"code_version", defaults::kCodeVersion}, {"defaults_version", defaults::kDefaultsVersion}};
    if (!prov.config.is_null()) j["config"] = prov.config;
    if (!prov.deterministic) j["generated_at"] = timestamp();
    return j;
}

std::string format_json(const json& j) { return j.dump(2) + "\n"; }

std::string render_svg(const std::vector<Curve>& curves, const std::string& title, bool log_y) {
    constexpr double W = 800, H = 480, L = 80, R = 20, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
    for (const auto& c : curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            const double y = ty(c.value[i]);
            if (!std::isfinite(c.x[i]) || !std::isfinite(y)) continue;
            x0 = std::min(x0, c.x[i]);
            x1 = std::max(x1, c.x[i]);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!std::isfinite(x0)) throw ConfigError("nothing to plot: no finite points");
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
        os << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
           << (log_y ? "1e" : "") << yv << "</text>\n";
    }
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        const char* color = colors[ci % 6];
        // Thin dense curves so files stay small.
        const std::size_t stride = std::max<std::size_t>(1, c.x.size() / 4000);
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < c.x.size(); i += stride) {
            const double y = ty(c.value[i]);
            if (!std::isfinite(c.x[i]) || !std::isfinite(y)) continue;
            os << px(c.x[i]) << "," << py(y) << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 16 * ci << "\" fill=\"" << color << "\">"
           << xml_escape(c.name.empty() ? "curve" : c.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace tiltgrid::io
