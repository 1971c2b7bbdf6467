#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fieldctl/field_eval.hpp"
#include "fieldctl/solver.hpp"

namespace fieldctl {

inline constexpr int kConfigSchema = 1;

struct SourceConfig {
    Point3 center = Point3::Zero();
    double radius = 0.0;
    double fictitious_ratio = 0.8;
};

/// Sources spread along the perimeter of a rectangle in the z = 0 plane.
struct SourceArrayConfig {
    bool enabled = false;
    double width = 0.0;   // along x
    double height = 0.0;  // along y
    int count = 0;
    double radius = 0.0;
    double fictitious_ratio = 0.8;
    PerimeterStart start = PerimeterStart::mid_spacing;
};

struct RegionConfig {
    std::string name;
    Point3 center = Point3::Zero();
    double radius = 0.0;
    RegionRole role = RegionRole::target;
    int points = 0;
};

/// Plane wave on one named region; its wavenumber is the line's k.
struct TargetConfig {
    std::string region;
    Vec3 direction = Vec3::UnitY();
};

/// One static wavenumber. Regions without a target entry are prescribed zero.
struct LineConfig {
    double k = 0.0;
    std::vector<TargetConfig> targets;
};

struct SolverConfig {
    double delta_fraction = 0.01;
    double log10_alpha_min = -14.0;
    double log10_alpha_max = 2.0;
    double stability_epsilon = 1e-3;  // 0 disables the probe
};

struct SweepConfig {
    bool enabled = false;
    std::string region;
    Vec3 direction = Vec3::UnitY();
    std::vector<double> k;
    double horizon = 0.0;          // synthesis interval [0, horizon)
    double source_duration = 0.0;  // T of the windowed feed
    int samples = 64;
    int frames = 0;                // frame grids on the first output plane
};

struct OutputConfig {
    std::vector<PlaneSpec> planes;
    bool normal_velocity = true;
};

struct ScenarioConfig {
    int schema = kConfigSchema;
    std::string name;
    std::uint64_t seed = 1;
    Medium medium;
    MeshResolution mesh;
    std::vector<SourceConfig> sources;  // explicit ones
    SourceArrayConfig source_array;     // appended after the explicit sources
    std::vector<RegionConfig> regions;
    std::vector<LineConfig> lines;
    SolverConfig solver;
    SweepConfig sweep;
    OutputConfig outputs;

    std::size_t region_index(const std::string& name) const;  // throws ConfigError
};

/// Parses and validates; every default is written into the result.
/// Parse errors carry line:column, schema errors the field path.
ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ScenarioConfig load_config(const std::filesystem::path& path);

/// Fully materialized config as pretty JSON (stable key order).
std::string config_to_json(const ScenarioConfig& config);

/// Presets shipped in the source tree.
std::filesystem::path preset_path(const std::string& name);

struct Scenario {
    std::vector<SourcePair> sources;
    std::vector<ControlRegion> regions;
    double separation = 0.0;  // min_separation, > 0
};

/// Meshes, point sets and the separation check. GeometryError on overlap.
Scenario build_scenario(const ScenarioConfig& config);

/// Per-region prescriptions for one static line.
std::vector<Prescription> line_prescriptions(const ScenarioConfig& config, const LineConfig& line);

/// Sweep line q: plane wave on the sweep region, zero elsewhere.
LineConfig sweep_line(const ScenarioConfig& config, double k);

MorozovOptions morozov_options(const SolverConfig& solver);

}  // namespace fieldctl
