#include "fieldctl/cli.hpp"

#include <cstdio>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fieldctl/error.hpp"
#include "fieldctl/export.hpp"
#include "fieldctl/parallel.hpp"
#include "fieldctl/run.hpp"

namespace fieldctl {

namespace {

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Common {
    std::string config;
    std::string preset;
    std::string out;
    unsigned threads = 0;
    std::int64_t seed = -1;
};

ScenarioConfig load(const Common& c)
{
    if (c.config.empty() == c.preset.empty())
        throw ConfigError("give exactly one of --config or --preset");
    auto cfg = load_config(c.config.empty() ? preset_path(c.preset) : std::filesystem::path(c.config));
    if (c.seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(c.seed);
    return cfg;
}

void print_lines(const RunArtifacts& art, std::ostream& out)
{
    for (const auto& lr : art.lines) {
        out << "k=" << fmt("%g", lr.line.k) << "  alpha=" << fmt("%.3g", lr.line.alpha)
            << "  morozov=" << to_string(lr.status) << "  residual/delta=" << fmt("%.3f", lr.residual / lr.delta)
            << "  sup_rel=" << fmt("%.4g", lr.line.report.sup_relative_error)
            << "  null_sup=" << fmt("%.3g", lr.line.report.null_sup_magnitude);
        if (lr.stability)
            out << "  stability_change=" << fmt("%.3g", lr.stability->perturbed_error - lr.stability->base_error);
        out << '\n';
    }
    const auto& s = art.summary;
    out << "target sup relative error " << fmt("%.4g", s.target_sup_relative) << ", null sup "
        << fmt("%.3g", s.null_sup) << ", null median " << fmt("%.3g", s.null_median);
    if (s.warnings)
        out << ", " << s.warnings << " line(s) with a Morozov warning";
    out << '\n';
}

int run_validate(const Common& c, std::ostream& out)
{
    const auto cfg = load(c);
    const auto sc = build_scenario(cfg);
    std::size_t rows = 0, cols = 0;
    for (const auto& r : sc.regions)
        rows += r.collocation.size();
    for (const auto& s : sc.sources)
        cols += s.mesh.vertices.size();
    out << cfg.name << ": " << sc.sources.size() << " sources, " << sc.regions.size() << " regions, matrix " << rows
        << " x " << cols << ", min separation " << fmt("%.4g", sc.separation) << " m\n";
    if (cfg.sweep.enabled) {
        const auto w = valid_window(sc.regions, sc.sources, cfg.medium.c, cfg.sweep.source_duration);
        out << "sweep: " << cfg.sweep.k.size() << " lines, window (" << fmt("%.4g", w.t1) << ", "
            << fmt("%.4g", w.t2) << ") s\n";
    }
    out << "ok\n";
    return kExitOk;
}

int run_solve(const Common& c, bool sweep, std::ostream& out)
{
    if (c.out.empty())
        throw ConfigError("--out is required");
    const auto cfg = load(c);
    const auto art = sweep ? run_sweep(cfg) : run_static(cfg);
    const auto entries = export_artifacts(art, c.out);
    print_lines(art, out);
    if (art.sweep)
        out << "time-averaged target relative error " << fmt("%.4g", art.sweep->target_error)
            << ", time-averaged null sup " << fmt("%.3g", art.sweep->null_sup) << '\n';
    out << "wrote " << entries.size() + 1 << " files to " << c.out << '\n';
    return kExitOk;
}

int run_report(const Common& c, std::ostream& out, std::ostream& err)
{
    if (c.out.empty())
        throw ConfigError("--out is required");
    const std::filesystem::path dir = c.out;
    const auto bad = verify_manifest(dir);
    for (const auto& b : bad)
        err << "digest mismatch or missing: " << b << '\n';
    const auto s = nlohmann::json::parse(read_file(dir / "summary.json"));
    out << s.at("name").get<std::string>() << " (" << s.at("kind").get<std::string>() << ")\n";
    for (const auto& l : s.at("lines"))
        out << "k=" << fmt("%g", l.at("k").get<double>()) << "  morozov=" << l.at("morozov").get<std::string>()
            << "  sup_rel=" << fmt("%.4g", l.at("sup_relative_error").get<double>())
            << "  null_sup=" << fmt("%.3g", l.at("null_sup_magnitude").get<double>()) << '\n';
    const auto& sum = s.at("summary");
    out << "target sup relative error " << fmt("%.4g", sum.at("target_sup_relative_error").get<double>())
        << ", null sup " << fmt("%.3g", sum.at("null_sup_magnitude").get<double>()) << ", null median "
        << fmt("%.3g", sum.at("null_median_magnitude").get<double>()) << '\n';
    if (s.contains("sweep")) {
        const auto& sw = s.at("sweep");
        out << "time-averaged target relative error "
            << fmt("%.4g", sw.at("target_time_averaged_relative_error").get<double>()) << ", time-averaged null sup "
            << fmt("%.3g", sw.at("null_time_averaged_sup").get<double>()) << '\n';
    }
    if (!bad.empty())
        throw IoError(std::to_string(bad.size()) + " file(s) do not match the manifest");
    out << "manifest ok\n";
    return kExitOk;
}

}  // namespace

int exit_code(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const GeometryError*>(&e))
        return kExitValidation;
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const nlohmann::json::exception*>(&e))
        return kExitIo;
    if (dynamic_cast<const NumericalError*>(&e))
        return kExitNumerical;
    return 1;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Active acoustic field control: solve, sweep and report scenarios"};
    app.require_subcommand(1);
    app.fallthrough();
    Common c;
    app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
    app.add_option("--seed", c.seed, "override the config seed");

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("--config", c.config, "scenario config (JSON, schema 1)");
        sub->add_option("--preset", c.preset, "shipped preset name (car_cabin, phone)");
    };
    auto* validate_cmd = app.add_subcommand("validate", "check a config and its geometry");
    add_input(validate_cmd);
    auto* solve_cmd = app.add_subcommand("solve", "static lines, exports and manifest");
    add_input(solve_cmd);
    solve_cmd->add_option("--out", c.out, "output directory");
    auto* sweep_cmd = app.add_subcommand("sweep", "frequency sweep and time-domain synthesis");
    add_input(sweep_cmd);
    sweep_cmd->add_option("--out", c.out, "output directory");
    auto* report_cmd = app.add_subcommand("report", "verify a run directory and print its summary");
    report_cmd->add_option("--out", c.out, "run directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    try {
        set_thread_count(c.threads);
        if (validate_cmd->parsed())
            return run_validate(c, out);
        if (solve_cmd->parsed())
            return run_solve(c, false, out);
        if (sweep_cmd->parsed())
            return run_solve(c, true, out);
        return run_report(c, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e);
    }
}

}  // namespace fieldctl
