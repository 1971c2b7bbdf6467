#include "fieldctl/run.hpp"

#include <algorithm>
#include <cstdio>

#include "fieldctl/error.hpp"

namespace fieldctl {

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string k_label(double k)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "k=%g", k);
    return buf;
}

double sup_relative(const FieldReport& rep)
{
    return rep.sup_relative_error;
}

}  // namespace

LineResult solve_line(const ScenarioConfig& config, const Scenario& scenario, const LineConfig& line_cfg,
                      const RunOptions& opts, std::uint64_t seed)
{
    const WaveContext ctx(line_cfg.k, config.medium);
    auto prescriptions = line_prescriptions(config, line_cfg);

    const auto A = assemble_matrix(scenario.sources, scenario.regions, ctx);
    TargetVector b(A.rows());
    for (Eigen::Index r = 0; r < A.rows(); ++r)
        b[r] = prescriptions[A.row_region[r]].value(A.row_points[r]);

    const TikhonovSystem system(A.entries, b);
    const double delta = config.solver.delta_fraction * b.norm();
    const auto sol = morozov_select(system, delta, morozov_options(config.solver));

    LineResult out;
    out.line = make_line(line_cfg.k, config.medium, sol.coefficients, std::move(prescriptions));
    out.line.alpha = sol.alpha;
    out.status = sol.status;
    out.residual = sol.residual_norm;
    out.delta = delta;
    out.iterations = sol.iterations;
    out.line.report = evaluate_report(out.line.density, scenario.sources, ctx, scenario.regions,
                                      out.line.prescriptions);

    if (opts.stability && config.solver.stability_epsilon > 0.0 && b.norm() > 0.0) {
        const auto probe = stability_probe(system, sol.coefficients, sol.alpha, config.solver.stability_epsilon, seed);
        const auto perturbed =
            evaluate_report(probe.perturbed, scenario.sources, ctx, scenario.regions, out.line.prescriptions);
        out.stability = StabilityOutcome{probe.epsilon, probe.relative_drift, sup_relative(out.line.report),
                                         sup_relative(perturbed)};
    }

    if (opts.planes)
        for (const auto& spec : config.outputs.planes)
            out.planes.push_back(cut_plane(out.line.density, scenario.sources, ctx, spec));

    if (opts.normal_velocity && config.outputs.normal_velocity) {
        Eigen::Index offset = 0;
        for (const auto& src : scenario.sources) {
            const auto n = static_cast<Eigen::Index>(src.mesh.vertices.size());
            const DensityVector part = out.line.density.segment(offset, n);
            out.normal_velocity.push_back(normal_velocity(part, src, ctx));
            offset += n;
        }
    }
    return out;
}

StaticSummary summarize(std::span<const LineResult> lines)
{
    StaticSummary s;
    std::vector<std::vector<double>> null_max;  // per null region, per point
    for (const auto& lr : lines) {
        if (lr.status != MorozovStatus::converged)
            ++s.warnings;
        std::size_t null_index = 0;
        for (const auto& reg : lr.line.report.regions) {
            if (reg.role == RegionRole::null) {
                if (null_max.size() <= null_index)
                    null_max.emplace_back(reg.values.size(), 0.0);
                auto& acc = null_max[null_index++];
                for (std::size_t i = 0; i < reg.values.size(); ++i)
                    acc[i] = std::max(acc[i], reg.values[i]);
                s.null_sup = std::max(s.null_sup, reg.sup);
            } else if (reg.relative) {
                s.target_sup_relative = std::max(s.target_sup_relative, reg.sup);
            } else {
                s.silent_sup = std::max(s.silent_sup, reg.sup);
            }
        }
    }
    std::vector<double> all;
    for (const auto& v : null_max)
        all.insert(all.end(), v.begin(), v.end());
    s.null_median = median_of(std::move(all));
    return s;
}

RunArtifacts run_static(const ScenarioConfig& config, const RunOptions& opts)
{
    RunArtifacts art;
    art.config = config;
    art.scenario = build_scenario(config);
    if (config.lines.empty())
        throw ConfigError("config has no static lines");

    std::string failures;
    for (std::size_t q = 0; q < config.lines.size(); ++q) {
        try {
            art.lines.push_back(solve_line(config, art.scenario, config.lines[q], opts, config.seed + q));
        } catch (const NumericalError& e) {
            failures += "\n  " + k_label(config.lines[q].k) + ": " + e.what();
        }
    }
    if (!failures.empty())
        throw NumericalError("static lines failed:" + failures);
    art.summary = summarize(art.lines);
    return art;
}

SweepResult synthesize_sweep(const ScenarioConfig& config, const Scenario& scenario, std::span<const LineResult> lines)
{
    const auto& sw = config.sweep;
    SweepResult out;
    out.window = valid_window(scenario.regions, scenario.sources, config.medium.c, sw.source_duration);

    std::vector<double> omegas;
    for (const auto& lr : lines)
        omegas.push_back(lr.line.omega);

    for (std::size_t r = 0; r < scenario.regions.size(); ++r) {
        std::vector<std::vector<cplx>> gen, pre;
        bool prescribed = false;
        for (const auto& lr : lines) {
            const auto& rep = lr.line.report.regions[r];
            gen.push_back(rep.field);
            pre.push_back(rep.prescribed);
            prescribed = prescribed || !lr.line.prescriptions[r].is_zero();
        }
        const TimeScene scene(omegas, std::move(gen), std::move(pre));

        RegionAverage ra;
        ra.name = scenario.regions[r].name;
        ra.role = scenario.regions[r].role;
        ra.prescribed = prescribed;
        ra.points = scenario.regions[r].evaluation;
        ra.real_part = time_average(scene, sw.horizon, sw.samples, AverageConvention::real_part);
        ra.magnitude = time_average(scene, sw.horizon, sw.samples, AverageConvention::magnitude);
        for (double v : ra.magnitude.generated)
            ra.sup_magnitude = std::max(ra.sup_magnitude, v);
        if (prescribed) {
            const auto& rms = ra.magnitude.rms_relative_error;
            const auto& pw = ra.magnitude.relative_error;
            double sum_rms = 0.0, sum_pw = 0.0;
            for (std::size_t i = 0; i < rms.size(); ++i) {
                sum_rms += rms[i];
                sum_pw += pw[i];
                ra.sup_rms_error = std::max(ra.sup_rms_error, rms[i]);
            }
            ra.mean_rms_error = sum_rms / static_cast<double>(rms.size());
            ra.mean_pointwise_error = sum_pw / static_cast<double>(pw.size());
        }
        if (ra.name == sw.region)
            out.target_error = ra.mean_rms_error;
        if (ra.role == RegionRole::null)
            out.null_sup = std::max(out.null_sup, ra.sup_magnitude);
        out.regions.push_back(std::move(ra));
    }

    const bool have_planes = !lines.empty() && !lines.front().planes.empty();
    if (sw.frames > 0 && have_planes) {
        std::vector<std::vector<cplx>> gen, pre;
        for (const auto& lr : lines) {
            gen.push_back(lr.planes.front().values);
            pre.emplace_back(gen.back().size(), cplx{});
        }
        const TimeScene scene(omegas, std::move(gen), std::move(pre));
        for (int f = 0; f < sw.frames; ++f) {
            const double t = sw.horizon * f / sw.frames;
            PlaneGrid g = lines.front().planes.front();
            g.values = scene.generated(t);
            for (std::size_t i = 0; i < g.values.size(); ++i)
                if (g.mask[i])
                    g.values[i] = cplx{};
            out.frame_times.push_back(t);
            out.frames.push_back(std::move(g));
        }
    }
    return out;
}

RunArtifacts run_sweep(const ScenarioConfig& config, const RunOptions& opts)
{
    if (!config.sweep.enabled)
        throw ConfigError("config has no sweep block");
    RunArtifacts art;
    art.config = config;
    art.scenario = build_scenario(config);
    // fail early on an infeasible window, before any solve
    (void)valid_window(art.scenario.regions, art.scenario.sources, config.medium.c, config.sweep.source_duration);

    RunOptions line_opts = opts;
    line_opts.stability = false;
    std::string failures;
    for (std::size_t q = 0; q < config.sweep.k.size(); ++q) {
        const double k = config.sweep.k[q];
        try {
            art.lines.push_back(solve_line(config, art.scenario, sweep_line(config, k), line_opts, config.seed + q));
        } catch (const NumericalError& e) {
            failures += "\n  " + k_label(k) + ": " + e.what();
        }
    }
    if (!failures.empty())
        throw NumericalError("sweep lines failed:" + failures);
    art.summary = summarize(art.lines);
    art.sweep = synthesize_sweep(config, art.scenario, art.lines);
    return art;
}

}  // namespace fieldctl
