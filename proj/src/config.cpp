#include "fieldctl/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fieldctl/error.hpp"

#ifndef FIELDCTL_PRESET_DIR
#define FIELDCTL_PRESET_DIR "presets"
#endif

namespace fieldctl {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what)
{
    throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// Object view that remembers where it is and refuses unknown keys.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
            fail(path_.empty() ? "<root>" : path_, "expected an object");
    }

    void allow(std::initializer_list<const char*> keys) const
    {
        std::set<std::string> known(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!known.count(it.key()))
                fail(join(path_, it.key()), "unknown field");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& at(const char* key) const
    {
        if (!j_.contains(key))
            fail(join(path_, key), "missing required field");
        return j_.at(key);
    }
    std::string where(const char* key) const { return join(path_, key); }

    double number(const char* key) const { return as_number(at(key), where(key)); }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const char* key) const { return as_int(at(key), where(key)); }
    int integer(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

    bool boolean(const char* key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        if (!j_.at(key).is_boolean())
            fail(where(key), "expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string string(const char* key) const
    {
        const json& v = at(key);
        if (!v.is_string())
            fail(where(key), "expected a string");
        return v.get<std::string>();
    }

    Vec3 vec3(const char* key) const
    {
        const auto v = numbers(at(key), where(key), 3);
        return {v[0], v[1], v[2]};
    }

    std::vector<double> pair(const char* key) const { return numbers(at(key), where(key), 2); }

    const json& array(const char* key) const
    {
        const json& v = at(key);
        if (!v.is_array())
            fail(where(key), "expected an array");
        return v;
    }

    static double as_number(const json& v, const std::string& path)
    {
        if (!v.is_number())
            fail(path, "expected a number");
        const double x = v.get<double>();
        if (!std::isfinite(x))
            fail(path, "must be finite");
        return x;
    }

    static int as_int(const json& v, const std::string& path)
    {
        if (!v.is_number_integer())
            fail(path, "expected an integer");
        return v.get<int>();
    }

    static std::vector<double> numbers(const json& v, const std::string& path, std::size_t n)
    {
        if (!v.is_array() || v.size() != n)
            fail(path, "expected an array of " + std::to_string(n) + " numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < n; ++i)
            out.push_back(as_number(v[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

private:
    const json& j_;
    std::string path_;
};

std::string indexed(const std::string& path, std::size_t i)
{
    return path + "[" + std::to_string(i) + "]";
}

void require(bool ok, const std::string& path, const std::string& what)
{
    if (!ok)
        fail(path, what);
}

void check_direction(const Vec3& d, const std::string& path)
{
    require(std::abs(d.norm() - 1.0) <= 1e-12, path, "direction must be a unit vector");
}

RegionRole parse_role(const Node& n)
{
    const auto s = n.string("role");
    if (s == "target")
        return RegionRole::target;
    if (s == "null")
        return RegionRole::null;
    fail(n.where("role"), "expected \"target\" or \"null\", got \"" + s + "\"");
}

PerimeterStart parse_start(const Node& n)
{
    if (!n.has("start"))
        return PerimeterStart::mid_spacing;
    const auto s = n.string("start");
    if (s == "mid_spacing")
        return PerimeterStart::mid_spacing;
    if (s == "corner")
        return PerimeterStart::corner;
    fail(n.where("start"), "expected \"mid_spacing\" or \"corner\"");
}

std::vector<double> parse_k_list(const json& v, const std::string& path)
{
    std::vector<double> ks;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i)
            ks.push_back(Node::as_number(v[i], indexed(path, i)));
    } else {
        Node r(v, path);
        r.allow({"first", "last", "step"});
        const double first = r.number("first"), last = r.number("last"), step = r.number("step", 1.0);
        require(step > 0.0, r.where("step"), "must be positive");
        require(first <= last, path, "first must not exceed last");
        const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
        for (long i = 0; i <= n; ++i)
            ks.push_back(first + static_cast<double>(i) * step);
    }
    require(!ks.empty(), path, "needs at least one wavenumber");
    for (std::size_t i = 0; i < ks.size(); ++i)
        require(ks[i] > 0.0, indexed(path, i), "wavenumber must be positive");
    return ks;
}

PlaneSpec parse_plane(const Node& n)
{
    n.allow({"z", "x", "y", "n", "clip"});
    PlaneSpec p;
    p.z = n.number("z");
    const auto x = n.pair("x"), y = n.pair("y"), clip = n.pair("clip");
    p.x_min = x[0];
    p.x_max = x[1];
    p.y_min = y[0];
    p.y_max = y[1];
    p.clip_lo = clip[0];
    p.clip_hi = clip[1];
    const json& res = n.array("n");
    require(res.size() == 2, n.where("n"), "expected [nx, ny]");
    p.nx = Node::as_int(res[0], n.where("n") + "[0]");
    p.ny = Node::as_int(res[1], n.where("n") + "[1]");
    return p;
}

ScenarioConfig from_json(const json& root)
{
    Node top(root, "");
    top.allow({"schema", "name", "seed", "medium", "mesh", "sources", "source_array", "regions", "static", "solver",
               "sweep", "outputs"});

    ScenarioConfig cfg;
    cfg.schema = top.integer("schema");
    require(cfg.schema == kConfigSchema, "schema",
            "unsupported version " + std::to_string(cfg.schema) + " (expected " + std::to_string(kConfigSchema) + ")");
    cfg.name = top.string("name");
    if (top.has("seed")) {
        const json& s = top.at("seed");
        require(s.is_number_unsigned(), "seed", "expected a non-negative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    if (top.has("medium")) {
        Node m(top.at("medium"), "medium");
        m.allow({"c", "rho"});
        cfg.medium.c = m.number("c", cfg.medium.c);
        cfg.medium.rho = m.number("rho", cfg.medium.rho);
        require(cfg.medium.c > 0.0, "medium.c", "must be positive");
        require(cfg.medium.rho > 0.0, "medium.rho", "must be positive");
    }

    if (top.has("mesh")) {
        Node m(top.at("mesh"), "mesh");
        m.allow({"rings", "sectors"});
        cfg.mesh.rings = m.integer("rings", cfg.mesh.rings);
        cfg.mesh.sectors = m.integer("sectors", cfg.mesh.sectors);
        require(cfg.mesh.rings >= 1, "mesh.rings", "must be at least 1");
        require(cfg.mesh.sectors >= 3, "mesh.sectors", "must be at least 3");
    }

    if (top.has("sources")) {
        const json& list = top.array("sources");
        for (std::size_t i = 0; i < list.size(); ++i) {
            Node s(list[i], indexed("sources", i));
            s.allow({"center", "radius", "fictitious_ratio"});
            SourceConfig sc;
            sc.center = s.vec3("center");
            sc.radius = s.number("radius");
            sc.fictitious_ratio = s.number("fictitious_ratio", sc.fictitious_ratio);
            require(sc.radius > 0.0, s.where("radius"), "must be positive");
            require(sc.fictitious_ratio > 0.0 && sc.fictitious_ratio < 1.0, s.where("fictitious_ratio"),
                    "must lie in (0, 1)");
            cfg.sources.push_back(sc);
        }
    }

    if (top.has("source_array")) {
        Node a(top.at("source_array"), "source_array");
        a.allow({"layout", "width", "height", "count", "radius", "fictitious_ratio", "start"});
        require(a.string("layout") == "rectangle_perimeter", a.where("layout"), "expected \"rectangle_perimeter\"");
        auto& sa = cfg.source_array;
        sa.enabled = true;
        sa.width = a.number("width");
        sa.height = a.number("height");
        sa.count = a.integer("count");
        sa.radius = a.number("radius");
        sa.fictitious_ratio = a.number("fictitious_ratio", sa.fictitious_ratio);
        sa.start = parse_start(a);
        require(sa.width > 0.0, a.where("width"), "must be positive");
        require(sa.height > 0.0, a.where("height"), "must be positive");
        require(sa.count >= 1, a.where("count"), "must be at least 1");
        require(sa.radius > 0.0, a.where("radius"), "must be positive");
        require(sa.fictitious_ratio > 0.0 && sa.fictitious_ratio < 1.0, a.where("fictitious_ratio"),
                "must lie in (0, 1)");
    }
    require(!cfg.sources.empty() || cfg.source_array.enabled, "sources", "scenario has no sources");

    {
        const json& list = top.array("regions");
        require(!list.empty(), "regions", "scenario has no control regions");
        std::set<std::string> names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            Node r(list[i], indexed("regions", i));
            r.allow({"name", "center", "radius", "role", "points"});
            RegionConfig rc;
            rc.name = r.string("name");
            rc.center = r.vec3("center");
            rc.radius = r.number("radius");
            rc.role = parse_role(r);
            rc.points = r.integer("points");
            require(!rc.name.empty(), r.where("name"), "must not be empty");
            require(names.insert(rc.name).second, r.where("name"), "duplicate region name \"" + rc.name + "\"");
            require(rc.radius > 0.0, r.where("radius"), "must be positive");
            require(rc.points >= 4, r.where("points"), "needs at least 4 collocation points");
            cfg.regions.push_back(rc);
        }
    }

    auto target_region = [&](const std::string& name, const std::string& path) {
        auto it = std::find_if(cfg.regions.begin(), cfg.regions.end(), [&](const auto& r) { return r.name == name; });
        require(it != cfg.regions.end(), path, "unknown region \"" + name + "\"");
        require(it->role == RegionRole::target, path, "region \"" + name + "\" is a null region; it maps to zero rows");
    };

    if (top.has("static")) {
        const json& list = top.array("static");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const auto lp = indexed("static", i);
            Node l(list[i], lp);
            l.allow({"k", "targets"});
            LineConfig line;
            line.k = l.number("k");
            require(line.k > 0.0, l.where("k"), "wavenumber must be positive");
            const json& targets = l.array("targets");
            std::set<std::string> seen;
            for (std::size_t j = 0; j < targets.size(); ++j) {
                Node t(targets[j], indexed(l.where("targets"), j));
                t.allow({"region", "direction"});
                TargetConfig tc;
                tc.region = t.string("region");
                tc.direction = t.vec3("direction");
                target_region(tc.region, t.where("region"));
                require(seen.insert(tc.region).second, t.where("region"), "region prescribed twice in one line");
                check_direction(tc.direction, t.where("direction"));
                line.targets.push_back(tc);
            }
            cfg.lines.push_back(line);
        }
        // every target region gets a field in at least one line
        for (const auto& r : cfg.regions) {
            if (r.role != RegionRole::target)
                continue;
            bool found = false;
            for (const auto& line : cfg.lines)
                for (const auto& t : line.targets)
                    found = found || t.region == r.name;
            require(found || cfg.lines.empty(), "static", "target region \"" + r.name + "\" has no prescribed field");
        }
    }

    if (top.has("solver")) {
        Node s(top.at("solver"), "solver");
        s.allow({"delta_fraction", "log10_alpha_min", "log10_alpha_max", "stability_epsilon"});
        auto& sv = cfg.solver;
        sv.delta_fraction = s.number("delta_fraction", sv.delta_fraction);
        sv.log10_alpha_min = s.number("log10_alpha_min", sv.log10_alpha_min);
        sv.log10_alpha_max = s.number("log10_alpha_max", sv.log10_alpha_max);
        sv.stability_epsilon = s.number("stability_epsilon", sv.stability_epsilon);
        require(sv.delta_fraction > 0.0 && sv.delta_fraction < 1.0, s.where("delta_fraction"), "must lie in (0, 1)");
        require(sv.log10_alpha_min < sv.log10_alpha_max, "solver", "log10_alpha_min must be below log10_alpha_max");
        require(sv.stability_epsilon >= 0.0, s.where("stability_epsilon"), "must be non-negative");
    }

    if (top.has("sweep")) {
        Node s(top.at("sweep"), "sweep");
        s.allow({"region", "direction", "k", "horizon", "source_duration", "samples", "frames"});
        auto& sw = cfg.sweep;
        sw.enabled = true;
        sw.region = s.string("region");
        target_region(sw.region, s.where("region"));
        sw.direction = s.vec3("direction");
        check_direction(sw.direction, s.where("direction"));
        sw.k = parse_k_list(s.at("k"), s.where("k"));
        sw.horizon = s.number("horizon");
        sw.source_duration = s.number("source_duration", sw.horizon);
        sw.samples = s.integer("samples", sw.samples);
        sw.frames = s.integer("frames", sw.frames);
        require(sw.horizon > 0.0, s.where("horizon"), "must be positive");
        require(sw.source_duration > 0.0, s.where("source_duration"), "must be positive");
        require(sw.samples >= 16, s.where("samples"), "needs at least 16 samples");
        require(sw.frames >= 0, s.where("frames"), "must be non-negative");
    }

    if (top.has("outputs")) {
        Node o(top.at("outputs"), "outputs");
        o.allow({"planes", "normal_velocity"});
        if (o.has("planes")) {
            const json& list = o.array("planes");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const auto pp = indexed("outputs.planes", i);
                auto p = parse_plane(Node(list[i], pp));
                try {
                    validate(p);
                } catch (const ConfigError& e) {
                    fail(pp, e.what());
                }
                cfg.outputs.planes.push_back(p);
            }
        }
        cfg.outputs.normal_velocity = o.boolean("normal_velocity", cfg.outputs.normal_velocity);
    }
    require(cfg.sweep.frames == 0 || !cfg.outputs.planes.empty(), "sweep.frames", "frames need an output plane");
    return cfg;
}

std::string line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return std::to_string(line) + ":" + std::to_string(col);
}

json vec_json(const Vec3& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

}  // namespace

std::size_t ScenarioConfig::region_index(const std::string& region) const
{
    for (std::size_t i = 0; i < regions.size(); ++i)
        if (regions[i].name == region)
            return i;
    throw ConfigError("unknown region \"" + region + "\"");
}

ScenarioConfig parse_config(const std::string& text, const std::string& origin)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ":" + line_col(text, e.byte) + ": parse error: " + e.what());
    }
    try {
        return from_json(root);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::string config_to_json(const ScenarioConfig& cfg)
{
    json j;
    j["schema"] = cfg.schema;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["medium"] = {{"c", cfg.medium.c}, {"rho", cfg.medium.rho}};
    j["mesh"] = {{"rings", cfg.mesh.rings}, {"sectors", cfg.mesh.sectors}};
    j["sources"] = json::array();
    for (const auto& s : cfg.sources)
        j["sources"].push_back(
            {{"center", vec_json(s.center)}, {"radius", s.radius}, {"fictitious_ratio", s.fictitious_ratio}});
    if (cfg.source_array.enabled) {
        const auto& a = cfg.source_array;
        j["source_array"] = {{"layout", "rectangle_perimeter"},
                             {"width", a.width},
                             {"height", a.height},
                             {"count", a.count},
                             {"radius", a.radius},
                             {"fictitious_ratio", a.fictitious_ratio},
                             {"start", a.start == PerimeterStart::corner ? "corner" : "mid_spacing"}};
    }
    j["regions"] = json::array();
    for (const auto& r : cfg.regions)
        j["regions"].push_back({{"name", r.name},
                                {"center", vec_json(r.center)},
                                {"radius", r.radius},
                                {"role", to_string(r.role)},
                                {"points", r.points}});
    j["static"] = json::array();
    for (const auto& line : cfg.lines) {
        json targets = json::array();
        for (const auto& t : line.targets)
            targets.push_back({{"region", t.region}, {"direction", vec_json(t.direction)}});
        j["static"].push_back({{"k", line.k}, {"targets", targets}});
    }
    j["solver"] = {{"delta_fraction", cfg.solver.delta_fraction},
                   {"log10_alpha_min", cfg.solver.log10_alpha_min},
                   {"log10_alpha_max", cfg.solver.log10_alpha_max},
                   {"stability_epsilon", cfg.solver.stability_epsilon}};
    if (cfg.sweep.enabled) {
        const auto& s = cfg.sweep;
        j["sweep"] = {{"region", s.region},
                      {"direction", vec_json(s.direction)},
                      {"k", s.k},
                      {"horizon", s.horizon},
                      {"source_duration", s.source_duration},
                      {"samples", s.samples},
                      {"frames", s.frames}};
    }
    json planes = json::array();
    for (const auto& p : cfg.outputs.planes)
        planes.push_back({{"z", p.z},
                          {"x", {p.x_min, p.x_max}},
                          {"y", {p.y_min, p.y_max}},
                          {"n", {p.nx, p.ny}},
                          {"clip", {p.clip_lo, p.clip_hi}}});
    j["outputs"] = {{"planes", planes}, {"normal_velocity", cfg.outputs.normal_velocity}};
    return j.dump(2) + "\n";
}

std::filesystem::path preset_path(const std::string& name)
{
    const char* env = std::getenv("FIELDCTL_PRESET_DIR");
    const std::filesystem::path dir = env && *env ? env : FIELDCTL_PRESET_DIR;
    auto p = dir / (name + ".json");
    if (!std::filesystem::exists(p))
        throw IoError("no preset named \"" + name + "\" in " + dir.string());
    return p;
}

Scenario build_scenario(const ScenarioConfig& cfg)
{
    Scenario sc;
    for (const auto& s : cfg.sources)
        sc.sources.push_back(make_source_pair(s.center, s.radius, s.fictitious_ratio, cfg.mesh));
    if (cfg.source_array.enabled) {
        const auto& a = cfg.source_array;
        for (const auto& c : phone_array_layout(a.width, a.height, a.count, a.start))
            sc.sources.push_back(make_source_pair(c, a.radius, a.fictitious_ratio, cfg.mesh));
    }
    for (const auto& r : cfg.regions)
        sc.regions.push_back(make_control_region(r.name, {r.center, r.radius}, r.role, r.points));
    sc.separation = min_separation(sc.sources, sc.regions);
    return sc;
}

std::vector<Prescription> line_prescriptions(const ScenarioConfig& cfg, const LineConfig& line)
{
    std::vector<Prescription> out(cfg.regions.size());
    for (const auto& t : line.targets) {
        PlaneWaveSpec w{line.k, t.direction};
        validate(w);
        out[cfg.region_index(t.region)].wave = w;
    }
    return out;
}

LineConfig sweep_line(const ScenarioConfig& cfg, double k)
{
    if (!cfg.sweep.enabled)
        throw ConfigError("config has no sweep block");
    return LineConfig{k, {TargetConfig{cfg.sweep.region, cfg.sweep.direction}}};
}

MorozovOptions morozov_options(const SolverConfig& solver)
{
    MorozovOptions o;
    o.log10_alpha_min = solver.log10_alpha_min;
    o.log10_alpha_max = solver.log10_alpha_max;
    return o;
}

}  // namespace fieldctl
