#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fieldctl/run.hpp"

namespace fieldctl {

struct ManifestEntry {
    std::string path;  // relative to the output directory, '/' separated
    std::uintmax_t bytes = 0;
    std::string sha256;
};

/// "%.17g": enough digits for every double to read back unchanged.
std::string format_double(double v);

/// Header line, then `x y z re im` per row.
std::string field_samples_text(std::span<const Point3> points, std::span<const cplx> values);

/// Four header lines (plane, extent, resolution, clip), then one row per
/// sample: `x y re im clipped_re mask`, row-major in y then x.
std::string grid_text(const PlaneGrid& grid);
PlaneGrid parse_grid(const std::string& text);
PlaneGrid read_grid(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

/// Everything except the manifest itself, path -> contents, in a fixed order.
std::vector<std::pair<std::string, std::string>> render_artifacts(const RunArtifacts& art);

/// Writes the rendered files and manifest.json under `dir`; returns the
/// manifest entries. IoError with the offending path on failure.
std::vector<ManifestEntry> export_artifacts(const RunArtifacts& art, const std::filesystem::path& dir);

std::string manifest_text(const ScenarioConfig& config, std::span<const ManifestEntry> entries);

/// Re-hashes every file listed in dir/manifest.json; returns the paths that
/// are missing or differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& path);

}  // namespace fieldctl
