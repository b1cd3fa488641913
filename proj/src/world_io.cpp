#include "sop/world_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "sop/errors.hpp"

namespace sop {

using nlohmann::json;

namespace {

json analysis_doc(const WorldAnalysis& a) {
    json maxima = json::array();
    for (const auto& m : a.local_maxima) maxima.push_back({{"point", m.point}, {"value", m.value}});
    return {{"global_argmax", a.global_argmax},
            {"global_max", a.global_max},
            {"local_maxima", maxima},
            {"separation_ratio", a.separation_ratio},
            {"grid_resolution", a.grid_resolution}};
}

WorldAnalysis analysis_from(const json& doc) {
    WorldAnalysis a;
    a.global_argmax = doc.at("global_argmax").get<Point>();
    a.global_max = doc.at("global_max").get<double>();
    for (const auto& m : doc.at("local_maxima"))
        a.local_maxima.push_back({m.at("point").get<Point>(), m.at("value").get<double>()});
    a.separation_ratio = doc.at("separation_ratio").get<double>();
    a.grid_resolution = doc.at("grid_resolution").get<int>();
    return a;
}

}  // namespace

std::string analysis_to_json(const WorldAnalysis& analysis) { return analysis_doc(analysis).dump(2); }

std::string world_to_json(const GeneratedWorld& g) {
    const WorldSpec& w = g.world;
    json bounds = json::array();
    for (const auto& b : w.bounds) bounds.push_back({b.lo, b.hi});
    json peaks = json::array();
    for (const auto& p : w.peaks)
        peaks.push_back({{"center", p.center}, {"amplitude", p.amplitude}, {"scales", p.scales}});
    const json doc{{"dimension", w.dimension},
                   {"bounds", bounds},
                   {"level", to_string(w.level)},
                   {"seed", w.seed},
                   {"generation_attempt", w.generation_attempt},
                   {"peaks", peaks},
                   {"analysis", analysis_doc(g.analysis)}};
    return doc.dump(2) + "\n";
}

GeneratedWorld world_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        GeneratedWorld g;
        WorldSpec& w = g.world;
        w.dimension = doc.at("dimension").get<int>();
        for (const auto& b : doc.at("bounds")) w.bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        w.level = parse_level(doc.at("level").get<std::string>());
        w.seed = doc.at("seed").get<std::uint64_t>();
        w.generation_attempt = doc.value("generation_attempt", 0);
        for (const auto& p : doc.at("peaks"))
            w.peaks.push_back({p.at("center").get<Point>(), p.at("amplitude").get<double>(),
                               p.at("scales").get<std::vector<double>>()});
        if (w.dimension < 3 || static_cast<int>(w.bounds.size()) != w.inputs())
            throw ConfigError("world", "bounds do not match the dimension");
        for (const auto& p : w.peaks)
            if (static_cast<int>(p.center.size()) != w.inputs() ||
                static_cast<int>(p.scales.size()) != w.inputs())
                throw ConfigError("world", "peak shape does not match the dimension");
        g.analysis = doc.contains("analysis") ? analysis_from(doc.at("analysis")) : analyze_world(w);
        return g;
    } catch (const json::exception& e) {
        throw ConfigError("world", std::string("malformed world document: ") + e.what());
    }
}

void save_world(const std::filesystem::path& path, const GeneratedWorld& world) {
    write_file_atomic(path, world_to_json(world));
}

GeneratedWorld load_world(const std::filesystem::path& path) { return world_from_json(read_file(path)); }

std::string budget_to_json(const BudgetReport& report) {
    json runs = json::array();
    for (const auto& r : report.per_run) {
        json run{{"seed", r.seed}, {"queries", r.queries}};
        run["queries_used_to_success"] =
            r.queries_used_to_success ? json(*r.queries_used_to_success) : json(nullptr);
        runs.push_back(run);
    }
    return json{{"budget", report.budget}, {"reliable", report.reliable}, {"per_run", runs}}.dump(2) + "\n";
}

BudgetReport budget_from_json(std::string_view text) {
    try {
        const json doc = json::parse(text);
        BudgetReport r;
        r.budget = doc.at("budget").get<int>();
        r.reliable = doc.at("reliable").get<bool>();
        for (const auto& run : doc.at("per_run")) {
            RunSummary s;
            s.seed = run.at("seed").get<std::uint64_t>();
            s.queries = run.at("queries").get<int>();
            if (!run.at("queries_used_to_success").is_null())
                s.queries_used_to_success = run.at("queries_used_to_success").get<int>();
            r.per_run.push_back(s);
        }
        return r;
    } catch (const json::exception& e) {
        throw ConfigError("budget", std::string("malformed budget document: ") + e.what());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("path", "cannot read '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("path", "cannot write '" + tmp.string() + "'");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw ConfigError("path", "write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace sop
