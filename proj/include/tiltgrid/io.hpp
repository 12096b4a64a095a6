#pragma once

// File formats: distribution spec JSON, grid CSV, transform CSV, evidence
// CSV, verdict and report JSON, SVG line charts. All writes are atomic.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tiltgrid/counterexample.hpp"
#include "tiltgrid/diagnostics.hpp"
#include "tiltgrid/dist_core.hpp"
#include "tiltgrid/transforms.hpp"

namespace tiltgrid::io {

using json = nlohmann::ordered_json;

/// Grid parameters a spec file may carry (below CLI flags, above defaults).
struct SpecGrid {
    std::optional<double> gamma0;
    std::optional<double> step;
    std::optional<double> x_max;
};

struct SpecFile {
    TailSpec spec;
    SpecGrid grid;
    json raw;
};

/// Parses {"kind": ..., parameters...}; unknown or missing keys throw ConfigError.
SpecFile parse_spec(const std::string& text);
SpecFile load_spec(const std::string& path);

std::string read_file(const std::string& path);
/// Write to a temporary sibling, then rename over the target.
void write_atomic(const std::string& path, const std::string& content);

/// Provenance lines written into every artifact header.
struct Provenance {
    json config;
    bool deterministic = true;
    std::vector<std::string> extra; ///< additional "key=value" header lines
};

std::string fnv1a_hex(const std::vector<double>& values);

std::string format_grid(const GriddedTiltRep& rep, const Provenance& prov);
GriddedTiltRep parse_grid(const std::string& text);
GriddedTiltRep load_grid(const std::string& path);

std::string format_transform(const TransformProfile& p, const std::vector<ZeroCandidate>& zeros, const Provenance& prov);
std::string format_curve(const Curve& c, const Provenance& prov);
Curve parse_curve(const std::string& text);

json verdict_json(const ClassVerdict& v, const std::vector<std::string>& evidence_csv);
json report_json(const ReproductionReport& r);
json provenance_json(const Provenance& prov);

std::string format_json(const json& j);

/// Static SVG line chart of one or more curves.
std::string render_svg(const std::vector<Curve>& curves, const std::string& title, bool log_y = false);

} // namespace tiltgrid::io
