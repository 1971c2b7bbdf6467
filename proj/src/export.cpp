#include "fieldctl/export.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "fieldctl/error.hpp"

namespace fieldctl {

using json = nlohmann::ordered_json;

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string field_samples_text(std::span<const Point3> points, std::span<const cplx> values)
{
    if (points.size() != values.size())
        throw Error("field samples: point and value counts differ");
    std::string out = "# x y z re im\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        out += format_double(points[i].x()) + ' ' + format_double(points[i].y()) + ' ' +
               format_double(points[i].z()) + ' ' + format_double(values[i].real()) + ' ' +
               format_double(values[i].imag()) + '\n';
    }
    return out;
}

std::string grid_text(const PlaneGrid& g)
{
    const auto& s = g.spec;
    std::string out;
    out += "plane z " + format_double(s.z) + '\n';
    out += "extent " + format_double(s.x_min) + ' ' + format_double(s.x_max) + ' ' + format_double(s.y_min) + ' ' +
           format_double(s.y_max) + '\n';
    out += "resolution " + std::to_string(s.nx) + ' ' + std::to_string(s.ny) + '\n';
    out += "clip " + format_double(s.clip_lo) + ' ' + format_double(s.clip_hi) + '\n';
    for (int iy = 0; iy < s.ny; ++iy) {
        for (int ix = 0; ix < s.nx; ++ix) {
            const auto i = g.index(ix, iy);
            const auto p = g.point(ix, iy);
            out += format_double(p.x()) + ' ' + format_double(p.y()) + ' ' + format_double(g.values[i].real()) + ' ' +
                   format_double(g.values[i].imag()) + ' ' + format_double(g.clipped_real(i)) + ' ' +
                   (g.mask[i] ? '1' : '0') + '\n';
        }
    }
    return out;
}

namespace {

[[noreturn]] void grid_error(int line, const std::string& what)
{
    throw IoError("grid line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, int line)
{
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0')
        grid_error(line, "bad number \"" + tok + "\"");
    return v;
}

std::vector<std::string> tokens(const std::string& line)
{
    std::istringstream ss(line);
    std::vector<std::string> out;
    std::string t;
    while (ss >> t)
        out.push_back(t);
    return out;
}

std::vector<std::string> header(std::istream& in, int line, const std::string& key, std::size_t count)
{
    std::string text;
    if (!std::getline(in, text))
        grid_error(line, "missing \"" + key + "\" header");
    auto t = tokens(text);
    if (t.size() != count + 1 || t[0] != key)
        grid_error(line, "expected \"" + key + "\" with " + std::to_string(count) + " values");
    t.erase(t.begin());
    return t;
}

}  // namespace

PlaneGrid parse_grid(const std::string& text)
{
    std::istringstream in(text);
    PlaneGrid g;
    auto& s = g.spec;
    auto plane = header(in, 1, "plane", 2);
    if (plane[0] != "z")
        grid_error(1, "only z planes are supported");
    s.z = parse_number(plane[1], 1);
    auto ext = header(in, 2, "extent", 4);
    s.x_min = parse_number(ext[0], 2);
    s.x_max = parse_number(ext[1], 2);
    s.y_min = parse_number(ext[2], 2);
    s.y_max = parse_number(ext[3], 2);
    auto res = header(in, 3, "resolution", 2);
    s.nx = static_cast<int>(parse_number(res[0], 3));
    s.ny = static_cast<int>(parse_number(res[1], 3));
    auto clip = header(in, 4, "clip", 2);
    s.clip_lo = parse_number(clip[0], 4);
    s.clip_hi = parse_number(clip[1], 4);
    try {
        validate(s);
    } catch (const ConfigError& e) {
        grid_error(4, e.what());
    }

    const auto n = static_cast<std::size_t>(s.nx) * s.ny;
    g.values.resize(n);
    g.mask.resize(n);
    std::string row;
    for (std::size_t i = 0; i < n; ++i) {
        const int line = static_cast<int>(i) + 5;
        if (!std::getline(in, row))
            grid_error(line, "grid ends early");
        const auto t = tokens(row);
        if (t.size() != 6)
            grid_error(line, "expected 6 columns");
        g.values[i] = {parse_number(t[2], line), parse_number(t[3], line)};
        if (t[5] != "0" && t[5] != "1")
            grid_error(line, "mask must be 0 or 1");
        g.mask[i] = t[5] == "1";
    }
    while (std::getline(in, row))
        if (!tokens(row).empty())
            grid_error(static_cast<int>(n) + 5, "trailing data after the last sample");
    return g;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

PlaneGrid read_grid(const std::filesystem::path& path)
{
    try {
        return parse_grid(read_file(path));
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

std::string sha256_hex(const std::string& bytes)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

namespace {

std::string line_dir(double k)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "lines/k_%g/", k);
    return buf;
}

json region_json(const RegionReport& r)
{
    return {{"name", r.name},
            {"role", to_string(r.role)},
            {"metric", r.relative ? "relative_error" : "magnitude"},
            {"sup", r.sup},
            {"median", r.median},
            {"mean", r.mean},
            {"flagged", r.flagged}};
}

json line_json(const LineResult& lr)
{
    json j{{"k", lr.line.k},
           {"omega", lr.line.omega},
           {"alpha", lr.line.alpha},
           {"morozov", to_string(lr.status)},
           {"residual", lr.residual},
           {"delta", lr.delta},
           {"iterations", lr.iterations},
           {"sup_relative_error", lr.line.report.sup_relative_error},
           {"null_sup_magnitude", lr.line.report.null_sup_magnitude}};
    json regs = json::array();
    for (const auto& r : lr.line.report.regions)
        regs.push_back(region_json(r));
    j["regions"] = regs;
    if (lr.stability)
        j["stability"] = {{"epsilon", lr.stability->epsilon},
                          {"relative_drift", lr.stability->relative_drift},
                          {"base_error", lr.stability->base_error},
                          {"perturbed_error", lr.stability->perturbed_error}};
    return j;
}

std::string summary_text(const RunArtifacts& art)
{
    json j;
    j["name"] = art.config.name;
    j["kind"] = art.sweep ? "sweep" : "static";
    std::size_t rows = 0, cols = 0;
    for (const auto& r : art.scenario.regions)
        rows += r.collocation.size();
    for (const auto& s : art.scenario.sources)
        cols += s.mesh.vertices.size();
    j["scenario"] = {{"sources", art.scenario.sources.size()},
                     {"regions", art.scenario.regions.size()},
                     {"rows", rows},
                     {"columns", cols},
                     {"min_separation", art.scenario.separation}};
    j["summary"] = {{"target_sup_relative_error", art.summary.target_sup_relative},
                    {"null_sup_magnitude", art.summary.null_sup},
                    {"null_median_magnitude", art.summary.null_median},
                    {"silent_target_sup_magnitude", art.summary.silent_sup},
                    {"morozov_warnings", art.summary.warnings}};
    json lines = json::array();
    for (const auto& lr : art.lines)
        lines.push_back(line_json(lr));
    j["lines"] = lines;
    if (art.sweep) {
        const auto& sw = *art.sweep;
        json regs = json::array();
        for (const auto& r : sw.regions) {
            json rj{{"name", r.name}, {"role", to_string(r.role)}, {"time_averaged_sup_magnitude", r.sup_magnitude}};
            if (r.prescribed) {
                rj["mean_rms_relative_error"] = r.mean_rms_error;
                rj["sup_rms_relative_error"] = r.sup_rms_error;
                rj["mean_pointwise_relative_error"] = r.mean_pointwise_error;
            }
            regs.push_back(rj);
        }
        j["sweep"] = {{"window", {{"t1", sw.window.t1}, {"t2", sw.window.t2}, {"T", sw.window.T}}},
                      {"target_time_averaged_relative_error", sw.target_error},
                      {"null_time_averaged_sup", sw.null_sup},
                      {"frames", sw.frames.size()},
                      {"regions", regs}};
    }
    return j.dump(2) + "\n";
}

std::string average_text(const RegionAverage& r)
{
    std::string out = "# x y z mean_re_u mean_re_f mean_abs_u mean_abs_f rel_err rms_rel_err\n";
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto& p = r.points[i];
        out += format_double(p.x()) + ' ' + format_double(p.y()) + ' ' + format_double(p.z()) + ' ' +
               format_double(r.real_part.generated[i]) + ' ' + format_double(r.real_part.prescribed[i]) + ' ' +
               format_double(r.magnitude.generated[i]) + ' ' + format_double(r.magnitude.prescribed[i]) + ' ' +
               format_double(r.prescribed ? r.magnitude.relative_error[i] : 0.0) + ' ' +
               format_double(r.prescribed ? r.magnitude.rms_relative_error[i] : 0.0) + '\n';
    }
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> render_artifacts(const RunArtifacts& art)
{
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("config.json", config_to_json(art.config));
    files.emplace_back("summary.json", summary_text(art));

    for (const auto& lr : art.lines) {
        const auto dir = line_dir(lr.line.k);
        std::vector<Point3> verts;
        for (const auto& s : art.scenario.sources)
            verts.insert(verts.end(), s.mesh.vertices.begin(), s.mesh.vertices.end());
        std::vector<cplx> dens(lr.line.density.data(), lr.line.density.data() + lr.line.density.size());
        files.emplace_back(dir + "density.txt", field_samples_text(verts, dens));

        if (!lr.normal_velocity.empty()) {
            std::vector<Point3> pts;
            std::vector<cplx> vals;
            for (std::size_t s = 0; s < art.scenario.sources.size(); ++s) {
                const auto& pv = art.scenario.sources[s].physical_mesh.vertices;
                pts.insert(pts.end(), pv.begin(), pv.end());
                vals.insert(vals.end(), lr.normal_velocity[s].begin(), lr.normal_velocity[s].end());
            }
            files.emplace_back(dir + "normal_velocity.txt", field_samples_text(pts, vals));
        }
        for (const auto& r : lr.line.report.regions)
            files.emplace_back(dir + "field_" + r.name + ".txt", field_samples_text(r.points, r.field));
        for (std::size_t p = 0; p < lr.planes.size(); ++p)
            files.emplace_back(dir + "plane_" + std::to_string(p) + ".txt", grid_text(lr.planes[p]));
    }

    if (art.sweep) {
        for (const auto& r : art.sweep->regions)
            files.emplace_back("sweep/average_" + r.name + ".txt", average_text(r));
        for (std::size_t f = 0; f < art.sweep->frames.size(); ++f) {
            char name[64];
            std::snprintf(name, sizeof name, "sweep/frames/frame_%04zu.txt", f);
            files.emplace_back(name, grid_text(art.sweep->frames[f]));
        }
    }
    return files;
}

std::string manifest_text(const ScenarioConfig& config, std::span<const ManifestEntry> entries)
{
    json j;
    j["schema"] = kConfigSchema;
    j["name"] = config.name;
    j["config"] = json::parse(config_to_json(config));
    json files = json::array();
    for (const auto& e : entries)
        files.push_back({{"path", e.path}, {"bytes", e.bytes}, {"sha256", e.sha256}});
    j["files"] = files;
    return j.dump(2) + "\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& contents)
{
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec)
        throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out)
        throw IoError("write failed for " + path.string());
}

}  // namespace

std::vector<ManifestEntry> export_artifacts(const RunArtifacts& art, const std::filesystem::path& dir)
{
    auto files = render_artifacts(art);
    std::vector<ManifestEntry> entries;
    for (const auto& [rel, contents] : files) {
        write_file(dir / rel, contents);
        entries.push_back({rel, contents.size(), sha256_hex(contents)});
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    write_file(dir / "manifest.json", manifest_text(art.config, entries));
    return entries;
}

std::vector<std::string> verify_manifest(const std::filesystem::path& dir)
{
    json j;
    try {
        j = json::parse(read_file(dir / "manifest.json"));
    } catch (const json::exception& e) {
        throw IoError((dir / "manifest.json").string() + ": " + e.what());
    }
    std::vector<std::string> bad;
    for (const auto& f : j.at("files")) {
        const auto rel = f.at("path").get<std::string>();
        const auto path = dir / rel;
        if (!std::filesystem::exists(path)) {
            bad.push_back(rel);
            continue;
        }
        if (sha256_hex(read_file(path)) != f.at("sha256").get<std::string>())
            bad.push_back(rel);
    }
    return bad;
}

}  // namespace fieldctl
