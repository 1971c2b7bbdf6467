#pragma once

#include <optional>
#include <vector>

#include "fieldctl/config.hpp"
#include "fieldctl/time_synth.hpp"

namespace fieldctl {

struct RunOptions {
    bool stability = true;  // static lines only; sweeps never probe
    bool planes = true;
    bool normal_velocity = true;
};

struct StabilityOutcome {
    double epsilon = 0.0;
    double relative_drift = 0.0;   // ||c - c_eps|| / ||c||
    double base_error = 0.0;       // sup relative error of the solved field
    double perturbed_error = 0.0;  // same for c_eps
};

struct LineResult {
    FrequencyLine line;  // k, omega, density, prescriptions, report, alpha
    MorozovStatus status = MorozovStatus::converged;
    double residual = 0.0;
    double delta = 0.0;
    int iterations = 0;
    std::optional<StabilityOutcome> stability;
    std::vector<PlaneGrid> planes;                 // one per output plane
    std::vector<std::vector<cplx>> normal_velocity;  // per source, at physical vertices
};

/// Over all lines. A target region counts toward the relative error only on
/// lines where it is prescribed; null regions are reduced pointwise (max over
/// lines) before the median.
struct StaticSummary {
    double target_sup_relative = 0.0;
    double null_sup = 0.0;
    double null_median = 0.0;
    double silent_sup = 0.0;  // target regions on lines that prescribe them zero
    int warnings = 0;         // lines whose Morozov status is not converged
};

struct RegionAverage {
    std::string name;
    RegionRole role = RegionRole::target;
    bool prescribed = false;
    std::vector<Point3> points;
    TimeAverage real_part;
    TimeAverage magnitude;
    double mean_rms_error = 0.0;        // mean over points of ||f-u||_t / ||f||_t
    double sup_rms_error = 0.0;
    double mean_pointwise_error = 0.0;  // mean over points and samples of |f-u|/|f|
    double sup_magnitude = 0.0;         // max over points of mean_t |u|
};

struct SweepResult {
    TimeWindow window;
    std::vector<RegionAverage> regions;
    double target_error = 0.0;  // mean_rms_error of the swept region
    double null_sup = 0.0;      // over null regions, time-averaged |u|
    std::vector<double> frame_times;
    std::vector<PlaneGrid> frames;
};

struct RunArtifacts {
    ScenarioConfig config;
    Scenario scenario;
    std::vector<LineResult> lines;
    StaticSummary summary;
    std::optional<SweepResult> sweep;
};

/// Solves one wavenumber with the given prescriptions.
LineResult solve_line(const ScenarioConfig& config, const Scenario& scenario, const LineConfig& line,
                      const RunOptions& opts, std::uint64_t seed);

StaticSummary summarize(std::span<const LineResult> lines);

/// Every static line of the config. Lines that fail are collected and
/// reported together after the rest have run.
RunArtifacts run_static(const ScenarioConfig& config, const RunOptions& opts = {});

/// One line per sweep wavenumber, then the time-domain synthesis.
RunArtifacts run_sweep(const ScenarioConfig& config, const RunOptions& opts = {});

SweepResult synthesize_sweep(const ScenarioConfig& config, const Scenario& scenario,
                             std::span<const LineResult> lines);

}  // namespace fieldctl
