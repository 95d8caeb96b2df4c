// edgecache: generate traces, analyse them and run cache simulations.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "edgecache/edgecache.hpp"

namespace fs = std::filesystem;
using namespace edgecache;

namespace {

std::string iso_now()
{
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm {};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw InputError("cannot write " + path.string());
    out << text;
    if (!out)
        throw InputError("cannot write " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

void make_out_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        throw InputError("cannot create output directory " + dir.string());
}

/// Run manifest: written last, so its presence marks a complete output directory.
class Manifest {
  public:
    explicit Manifest(std::string command)
    {
        j_["command"] = std::move(command);
        j_["tool_version"] = std::string(kVersion);
        j_["started_at"] = iso_now();
        j_["inputs"] = json::object();
    }

    void input(const std::string& role, const std::string& path)
    {
        if (!path.empty())
            j_["inputs"][role] = {{"path", path}, {"digest", file_digest(path)}};
    }

    json& operator[](const char* key) { return j_[key]; }

    void finish(const fs::path& dir)
    {
        j_["finished_at"] = iso_now();
        write_json(dir / "manifest.json", j_);
    }

  private:
    json j_;
};

KeyValues read_config(const std::string& path, const std::vector<std::string>& overrides)
{
    KeyValues kv;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw InputError("cannot open config file " + path);
        kv = parse_key_values(in);
    }
    std::stringstream extra;
    for (const auto& o : overrides)
        extra << o << '\n';
    for (auto& [k, v] : parse_key_values(extra))
        kv[k] = v;
    return kv;
}

std::vector<RequestRecord> load_trace(const std::string& path)
{
    auto parsed = parse_trace_file(path);
    if (!parsed.rejected.empty()) {
        const auto& r = parsed.rejected.front();
        throw InputError("trace " + path + ": " + std::to_string(parsed.rejected.size())
            + " malformed line(s), first at line " + std::to_string(r.line) + ": " + r.reason);
    }
    return std::move(parsed.records);
}

std::map<std::string, int> load_categories(const std::string& path)
{
    if (path.empty())
        return {};
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open videos file " + path);
    return parse_video_categories(in);
}

CellPoiMap load_cells(const std::string& path, std::span<const InfrastructureNode> nodes)
{
    if (path.empty())
        return poi_map_from_nodes(nodes);
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open cells file " + path);
    return parse_cells(in);
}

template <class T, class Parse>
std::vector<T> parse_list(const std::string& what, const std::string& text, Parse parse)
{
    std::vector<T> out;
    for (auto f : csv::split(text)) {
        auto v = parse(csv::trim(f));
        if (!v)
            throw UsageError("bad " + what + " '" + std::string(f) + "'");
        out.push_back(*v);
    }
    if (out.empty())
        throw UsageError(what + " list is empty");
    return out;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
    std::string config;
    std::vector<std::string> set;
    std::string out;
};

void cmd_gen(const GenArgs& a)
{
    TraceConfig c;
    apply_config(c, read_config(a.config, a.set));
    make_out_dir(a.out);
    Manifest m("gen");
    m.input("config", a.config);
    const auto trace = generate_trace(c);
    const fs::path dir(a.out);
    {
        std::ofstream out(dir / "trace.csv", std::ios::binary);
        write_trace(out, trace.records);
    }
    {
        std::ofstream out(dir / "infra.csv", std::ios::binary);
        write_infrastructure(out, trace.nodes);
    }
    {
        std::ofstream out(dir / "cells.csv", std::ios::binary);
        write_cells(out, trace.cell_labels);
    }
    {
        std::ofstream out(dir / "videos.csv", std::ios::binary);
        write_video_categories(out, trace.video_categories);
    }
    m["config"] = to_json(c);
    m["seed"] = c.seed;
    m["outputs"] = {"trace.csv", "infra.csv", "cells.csv", "videos.csv"};
    m["summary"] = {{"records", trace.records.size()}, {"nodes", trace.nodes.size()},
        {"evening_scale", trace.evening_scale}};
    m.finish(dir);
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

const std::vector<std::string> kMetrics = {"popularity", "local_rank", "dft", "entropy", "kl", "jaccard", "decay",
    "mobility", "migration", "coverage", "similarity", "fits"};

struct AnalyzeArgs {
    std::string trace, infra, cells, videos, which = "all", out;
    int utc = kDefaultUtcOffsetHours;
    double top_share = 0.003;
};

struct AnalysisInput {
    std::vector<RequestRecord> records;
    std::vector<InfrastructureNode> nodes;
    CellPoiMap cells;
    std::map<std::string, int> categories;
    int utc = kDefaultUtcOffsetHours;
    double top_share = 0.003;
    std::int64_t first_day = 0, days = 0;
};

json metric_popularity(const AnalysisInput& in)
{
    const auto p = popularity_histogram(in.records);
    json ranking = json::array();
    for (std::size_t i = 0; i < p.ranking.size(); ++i)
        ranking.push_back({{"rank", i + 1}, {"video_id", p.ranking[i].video_id}, {"count", p.ranking[i].count}});
    return {{"slope", p.slope ? json(*p.slope) : json("degenerate")}, {"ranking", ranking}};
}

json metric_local_rank(const AnalysisInput& in)
{
    const auto videos = popularity_histogram(in.records).ranking.size();
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(in.top_share * static_cast<double>(videos))));
    const auto r = local_global_rank(in.records, n);
    json per = json::array();
    for (const auto& [v, pct] : r.mean_percentile)
        per.push_back({{"video_id", v}, {"mean_local_percentile", pct}});
    return {{"top_n", n}, {"videos", per}, {"cdf", to_json(std::span<const CdfPoint>(r.cdf))}};
}

json metric_dft(const AnalysisInput& in)
{
    auto series_json = [&](const std::function<bool(const RequestRecord&)>& keep) {
        const auto s = hourly_series(in.records, in.first_day, static_cast<std::size_t>(in.days), in.utc, keep);
        const auto spec = dft_spectrum(s);
        const auto peaks = dominant_periods(spec, 3);
        return json {{"series", s}, {"dominant", to_json(std::span<const DominantPeriod>(peaks))}, {"spectrum", to_json(spec)}};
    };
    json out = {{"first_day", in.first_day}, {"days", in.days}, {"all", series_json({})}};
    json by_poi = json::object();
    for (auto p : kAllPoi) {
        auto keep = [&](const RequestRecord& r) { return in.cells.label(cell_of(r.position)) == p; };
        if (std::any_of(in.records.begin(), in.records.end(), keep))
            by_poi[std::string(to_string(p))] = series_json(keep);
    }
    out["by_poi"] = by_poi;
    return out;
}

json metric_entropy(const AnalysisInput& in)
{
    const RequestCounts counts(in.records);
    json videos = json::array(), cells = json::array(), grades = json::array();
    for (const auto& [v, c] : counts.by_video())
        videos.push_back({{"video_id", v}, {"requests", counts.video_requests(v)}, {"entropy", to_json(counts.video_entropy(v))}});
    for (const auto& [c, v] : counts.by_cell())
        cells.push_back({{"cell", {c.row, c.col}}, {"poi", std::string(to_string(in.cells.label(c)))},
            {"entropy", to_json(counts.location_entropy(c))}});
    for (const auto& g : video_entropy_by_grade(counts))
        grades.push_back({{"grade", g.grade}, {"videos", g.videos}, {"mean_raw", g.mean_raw},
            {"mean_normalized", g.mean_normalized}});
    return {{"video_entropy", videos}, {"location_entropy", cells}, {"video_entropy_by_grade", grades}};
}

// Hour-of-day distribution per day against the whole-trace distribution,
// globally and per PoI label.
json metric_kl(const AnalysisInput& in)
{
    auto build = [&](const std::function<bool(const RequestRecord&)>& keep) -> json {
        std::map<std::int64_t, std::vector<double>> daily;
        std::vector<double> all(24, 0.0);
        for (const auto& r : in.records)
            if (!keep || keep(r)) {
                auto& d = daily[day_index(r.timestamp, in.utc)];
                d.resize(24, 0.0);
                d[static_cast<std::size_t>(hour_of_day(r.timestamp, in.utc))] += 1.0;
                all[static_cast<std::size_t>(hour_of_day(r.timestamp, in.utc))] += 1.0;
            }
        if (daily.empty())
            return nullptr;
        const auto q = to_distribution(all);
        json rows = json::array();
        for (const auto& [d, counts] : daily)
            rows.push_back({{"day", d}, {"kl", kl_divergence(to_distribution(counts), q)}});
        return rows;
    };
    json by_poi = json::object();
    for (auto p : kAllPoi) {
        auto v = build([&](const RequestRecord& r) { return in.cells.label(cell_of(r.position)) == p; });
        if (!v.is_null())
            by_poi[std::string(to_string(p))] = v;
    }
    return {{"unit", "nats"}, {"all", build({})}, {"by_poi", by_poi}};
}

// Video-set similarity of the two cells of every observed movement.
json metric_jaccard(const AnalysisInput& in)
{
    std::map<CellId, std::set<std::string>> videos;
    for (const auto& r : in.records)
        videos[cell_of(r.position)].insert(r.video_id);
    const auto locs = assign_locations(in.records);
    std::set<std::pair<CellId, CellId>> pairs;
    for_each_user_day_movements(in.records, locs, in.utc, [&](std::span<const Movement> moves, std::span<const LocationId>) {
        for (const auto& m : moves)
            pairs.emplace(cell_of(in.records[m.from_record].position), cell_of(in.records[m.to_record].position));
    });
    std::vector<double> samples;
    for (const auto& [a, b] : pairs)
        samples.push_back(jaccard(videos[a], videos[b]));
    json out = {{"pairs", samples.size()}};
    out["cdf"] = samples.empty() ? json::array() : to_json(std::span<const CdfPoint>(empirical_cdf(samples)));
    return out;
}

json metric_decay(const AnalysisInput& in)
{
    if (in.categories.empty())
        throw UsageError("metric 'decay' needs --videos");
    std::set<int> cats;
    for (const auto& [v, c] : in.categories)
        cats.insert(c);
    json out = json::object();
    for (int c : cats) {
        auto in_cat = [&](const std::string& v) {
            auto it = in.categories.find(v);
            return it != in.categories.end() && it->second == c;
        };
        try {
            out[std::to_string(c)] = to_json(category_decay_profile(in.records, in_cat, in.utc));
        } catch (const InputError& e) {
            out[std::to_string(c)] = {{"error", e.what()}};
        }
    }
    return out;
}

json metric_mobility(const AnalysisInput& in)
{
    const SpatialIndex index(in.nodes);
    json out = json::object();
    for (auto kind : {NodeKind::WiFiAP, NodeKind::CellularBS}) {
        const auto locs = assign_locations(in.records, &index, kind);
        const auto classes = classify_users(in.records, locs, in.utc);
        std::size_t multi = 0;
        for (const auto& c : classes)
            multi += c.cls == DayClass::MultiLocation;
        json intensity = json::array();
        for (const auto& [c, v] : mobility_intensity(in.records, locs, in.utc))
            intensity.push_back({{"cell", {c.row, c.col}}, {"intensity", v}});
        out[std::string(to_string(kind))] = {
            {"user_days", classes.size()},
            {"multi_location_fraction", classes.empty() ? 0.0 : static_cast<double>(multi) / static_cast<double>(classes.size())},
            {"active_users", active_users(in.records, 10, in.utc).size()},
            {"stats", to_json(movement_stats(in.records, locs, in.utc))},
            {"intensity", intensity},
        };
    }
    return out;
}

json metric_migration(const AnalysisInput& in) { return to_json(migration_matrix(in.records, in.cells, in.utc)); }

json metric_coverage(const AnalysisInput& in)
{
    const SpatialIndex index(in.nodes);
    std::vector<GeoPoint> pos;
    pos.reserve(in.records.size());
    for (const auto& r : in.records)
        pos.push_back(r.position);
    std::vector<double> breaks;
    for (int d = 0; d <= 2000; d += 50)
        breaks.push_back(d);
    json out = json::object();
    for (auto kind : {NodeKind::WiFiAP, NodeKind::CellularBS})
        if (index.count(kind) > 0)
            out[std::string(to_string(kind))] = to_json(std::span<const CdfPoint>(coverage_cdf(pos, index, kind, breaks)));
    if (index.count(NodeKind::WiFiAP) > 0 && index.count(NodeKind::CellularBS) > 0) {
        const auto gap = distance_gap(pos, index);
        out["distance_gap"] = {{"fraction_positive", gap.fraction_positive},
            {"cdf", to_json(std::span<const CdfPoint>(empirical_cdf(gap.gaps, breaks)))}};
    }
    return out;
}

json metric_similarity(const AnalysisInput& in)
{
    std::map<CellId, std::array<double, 3>> cells; // requests, APs, BSes
    for (const auto& r : in.records)
        cells[cell_of(r.position)][0] += 1.0;
    for (const auto& n : in.nodes)
        cells[cell_of(n.position)][n.kind == NodeKind::WiFiAP ? 1 : 2] += 1.0;
    std::vector<double> req, ap, bs;
    for (const auto& [c, v] : cells) {
        req.push_back(v[0]);
        ap.push_back(v[1]);
        bs.push_back(v[2]);
    }
    auto sim = [&](const std::vector<double>& nodes) -> json {
        try {
            return intensity_similarity(req, nodes);
        } catch (const Error& e) {
            return {{"error", e.what()}};
        }
    };
    return {{"cells", cells.size()}, {"ap", sim(ap)}, {"bs", sim(bs)}};
}

json metric_fits(const AnalysisInput& in)
{
    const RequestCounts counts(in.records);
    std::map<double, std::pair<double, std::size_t>> by_labels;
    std::vector<std::pair<double, double>> mob;
    const auto intensity = mobility_intensity(in.records, assign_locations(in.records), in.utc);
    for (const auto& [c, v] : counts.by_cell()) {
        const double h = counts.location_entropy(c).normalized;
        auto& acc = by_labels[in.cells.label_count(c)];
        acc.first += h;
        ++acc.second;
        if (auto it = intensity.find(c); it != intensity.end() && it->second > 0.0)
            mob.emplace_back(it->second, h);
    }
    std::vector<std::pair<double, double>> poi;
    for (const auto& [x, acc] : by_labels)
        poi.emplace_back(x, acc.first / static_cast<double>(acc.second));
    auto fit = [](auto f, const auto& samples) -> json {
        try {
            return to_json(f(samples));
        } catch (const Error& e) {
            return {{"error", e.what()}};
        }
    };
    return {
        {"entropy_poi", {{"samples", poi}, {"fit", fit(entropy_poi_fit, poi)}}},
        {"entropy_mobility", {{"samples", mob}, {"fit", fit(entropy_mobility_fit, mob)}}},
    };
}

void cmd_analyze(const AnalyzeArgs& a)
{
    std::vector<std::string> which;
    for (auto f : csv::split(a.which)) {
        std::string name(csv::trim(f));
        if (name == "all") {
            which = kMetrics;
            break;
        }
        if (std::find(kMetrics.begin(), kMetrics.end(), name) == kMetrics.end()) {
            std::string valid = "all";
            for (const auto& m : kMetrics)
                valid += ", " + m;
            throw UsageError("unknown metric '" + name + "' (valid: " + valid + ")");
        }
        which.push_back(name);
    }
    AnalysisInput in;
    in.records = load_trace(a.trace);
    if (in.records.empty())
        throw InputError("trace has no records");
    in.nodes = a.infra.empty() ? std::vector<InfrastructureNode> {} : parse_infrastructure_file(a.infra);
    in.cells = load_cells(a.cells, in.nodes);
    in.categories = load_categories(a.videos);
    in.utc = a.utc;
    in.top_share = a.top_share;
    in.first_day = day_index(in.records.front().timestamp, a.utc);
    in.days = day_index(in.records.back().timestamp, a.utc) - in.first_day + 1;

    make_out_dir(a.out);
    Manifest m("analyze");
    m.input("trace", a.trace);
    m.input("infra", a.infra);
    m.input("cells", a.cells);
    m.input("videos", a.videos);
    const std::map<std::string, json (*)(const AnalysisInput&)> table = {{"popularity", metric_popularity},
        {"local_rank", metric_local_rank}, {"dft", metric_dft}, {"entropy", metric_entropy}, {"kl", metric_kl},
        {"jaccard", metric_jaccard}, {"decay", metric_decay}, {"mobility", metric_mobility},
        {"migration", metric_migration}, {"coverage", metric_coverage}, {"similarity", metric_similarity},
        {"fits", metric_fits}};
    json outputs = json::array();
    for (const auto& name : which) {
        write_json(fs::path(a.out) / (name + ".json"), table.at(name)(in));
        outputs.push_back(name + ".json");
    }
    m["config"] = {{"which", which}, {"utc_offset_hours", a.utc}, {"top_share", a.top_share}};
    m["outputs"] = outputs;
    m.finish(a.out);
}

// ---------------------------------------------------------------------------
// sim and sweep
// ---------------------------------------------------------------------------

struct SimArgs {
    std::string trace, infra, videos, config, out;
    std::vector<std::string> set;
    std::string strategy, kind;
    std::optional<std::int64_t> capacity;
    std::optional<double> top_fraction;
    std::optional<std::uint64_t> seed;
    bool immobile = false;
    bool reference = false;
};

SimConfig resolve_sim_config(const SimArgs& a)
{
    SimConfig c;
    auto kv = read_config(a.config, a.set);
    if (!a.strategy.empty())
        kv["strategy"] = a.strategy;
    if (!a.kind.empty())
        kv["kind"] = a.kind;
    if (a.capacity)
        kv["capacity"] = std::to_string(*a.capacity);
    if (a.top_fraction)
        kv["top_fraction"] = csv::format_double(*a.top_fraction);
    if (a.seed)
        kv["seed"] = std::to_string(*a.seed);
    if (a.immobile)
        kv["immobile_counterfactual"] = "true";
    apply_config(c, kv);
    c.validate();
    return c;
}

void cmd_sim(const SimArgs& a)
{
    const auto config = resolve_sim_config(a);
    const auto records = load_trace(a.trace);
    const auto nodes = parse_infrastructure_file(a.infra);
    const auto categories = load_categories(a.videos);
    make_out_dir(a.out);
    Manifest m("sim");
    m.input("trace", a.trace);
    m.input("infra", a.infra);
    m.input("videos", a.videos);
    m.input("config", a.config);
    const auto report = run(records, nodes, config, categories);
    if (a.reference) {
        const auto expected = reference::run(records, nodes, config, categories);
        if (!(expected == report))
            throw Error(Error::Kind::Internal, "simulator and reference simulator disagree");
        m["reference_check"] = "match";
    }
    write_json(fs::path(a.out) / "report.json", to_json(report));
    m["config"] = to_json(config);
    m["seed"] = config.seed;
    m["outputs"] = {"report.json"};
    m.finish(a.out);
}

struct SweepArgs {
    SimArgs sim;
    std::string strategies = "lru,lfu,rr,geocollab";
    std::string capacities = "1,5,10,20,50,100,200";
    std::string kinds = "ap,bs";
    unsigned jobs = 0;
};

void cmd_sweep(const SweepArgs& a)
{
    const auto base = resolve_sim_config(a.sim);
    const auto strategies = parse_list<Strategy>("strategy", a.strategies, parse_strategy);
    const auto kinds = parse_list<NodeKind>("kind", a.kinds, parse_node_kind);
    auto capacities = parse_list<std::int64_t>("capacity", a.capacities, csv::parse_int);
    if (!std::is_sorted(capacities.begin(), capacities.end()))
        throw UsageError("capacities must be ascending");
    const unsigned jobs = a.jobs > 0 ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
    const auto records = load_trace(a.sim.trace);
    const auto nodes = parse_infrastructure_file(a.sim.infra);
    const auto categories = load_categories(a.sim.videos);
    make_out_dir(a.sim.out);
    Manifest m("sweep");
    m.input("trace", a.sim.trace);
    m.input("infra", a.sim.infra);
    m.input("videos", a.sim.videos);
    m.input("config", a.sim.config);
    std::vector<SweepRow> rows;
    for (auto kind : kinds) {
        SimConfig cfg = base;
        cfg.kind = kind;
        const PreparedTrace prepared(records, nodes, cfg, categories);
        auto part = capacity_sweep(prepared, strategies, capacities, cfg, jobs);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& x, const SweepRow& y) {
        if (x.strategy != y.strategy)
            return to_string(x.strategy) < to_string(y.strategy);
        if (x.kind != y.kind)
            return to_string(x.kind) < to_string(y.kind);
        return x.capacity < y.capacity;
    });
    write_file(fs::path(a.sim.out) / "sweep.csv", sweep_csv(rows));
    json cfg = to_json(base);
    cfg.erase("strategy");
    cfg.erase("kind");
    cfg.erase("capacity");
    m["config"] = cfg;
    m["grid"] = {{"strategies", a.strategies}, {"kinds", a.kinds}, {"capacities", capacities}};
    m["seed"] = base.seed;
    m["outputs"] = {"sweep.csv"};
    m.finish(a.sim.out);
}

void add_sim_options(CLI::App* cmd, SimArgs& a, bool single)
{
    cmd->add_option("--trace", a.trace, "trace CSV")->required();
    cmd->add_option("--infra", a.infra, "infrastructure CSV")->required();
    cmd->add_option("--videos", a.videos, "video category CSV (for per-category decay)");
    cmd->add_option("--config", a.config, "key = value config file");
    cmd->add_option("--set", a.set, "extra key=value settings, applied after --config");
    cmd->add_option("--out", a.out, "output directory")->required();
    if (single) {
        cmd->add_option("--strategy", a.strategy, "lru, lfu, rr or geocollab");
        cmd->add_option("--kind", a.kind, "ap or bs");
        cmd->add_option("--capacity", a.capacity, "cache capacity in videos");
    }
    cmd->add_option("--top-fraction", a.top_fraction, "keep only the busiest fraction of nodes");
    cmd->add_option("--seed", a.seed, "random replacement seed");
    cmd->add_flag("--immobile-counterfactual", a.immobile, "pin multi-location users to their first node of the day");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app {"Edge caching laboratory for mobile video traces"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "generate a synthetic trace and infrastructure");
    g->add_option("--config", gen.config, "key = value config file");
    g->add_option("--set", gen.set, "extra key=value settings, applied after --config");
    g->add_option("--out", gen.out, "output directory")->required();

    AnalyzeArgs an;
    auto* an_cmd = app.add_subcommand("analyze", "run trace analyses");
    an_cmd->add_option("--trace", an.trace, "trace CSV")->required();
    an_cmd->add_option("--infra", an.infra, "infrastructure CSV");
    an_cmd->add_option("--cells", an.cells, "cell label CSV (defaults to labels of the infrastructure)");
    an_cmd->add_option("--videos", an.videos, "video category CSV");
    an_cmd->add_option("--which", an.which, "comma-separated metrics or 'all'");
    an_cmd->add_option("--utc-offset", an.utc, "hours from UTC of local time");
    an_cmd->add_option("--top-share", an.top_share, "share of videos counted as globally top for local_rank");
    an_cmd->add_option("--out", an.out, "output directory")->required();

    SimArgs sim;
    auto* s = app.add_subcommand("sim", "simulate one configuration");
    add_sim_options(s, sim, true);
    s->add_flag("--reference", sim.reference, "cross-check against the reference simulator (small inputs)");

    SweepArgs sweep;
    auto* sw = app.add_subcommand("sweep", "simulate a strategy x kind x capacity grid");
    add_sim_options(sw, sweep.sim, false);
    sw->add_option("--strategies", sweep.strategies, "comma-separated strategies");
    sw->add_option("--kinds", sweep.kinds, "comma-separated node kinds");
    sw->add_option("--capacities", sweep.capacities, "comma-separated ascending capacities");
    sw->add_option("--jobs", sweep.jobs, "worker threads (0 = all cores)")->envname("EDGECACHE_JOBS");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: usage: " << e.what() << "\n";
        return 1;
    }

    try {
        if (*g)
            cmd_gen(gen);
        else if (*an_cmd)
            cmd_analyze(an);
        else if (*s)
            cmd_sim(sim);
        else if (*sw)
            cmd_sweep(sweep);
    } catch (const Error& e) {
        const char* kind = e.kind() == Error::Kind::Usage ? "usage" : e.kind() == Error::Kind::Input ? "input" : "internal";
        std::cerr << "error: " << kind << ": " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
