#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "edgecache/analysis.hpp"
#include "edgecache/geocollab.hpp"
#include "edgecache/io.hpp"
#include "edgecache/sim.hpp"

namespace edgecache {

using nlohmann::json;

inline json to_json(const Tally& t)
{
    return {
        {"requests", t.requests},
        {"edge_served", t.edge_served},
        {"cache_hits", t.cache_hits},
        {"cache_misses", t.cache_misses},
        {"out_of_range", t.out_of_range},
        {"capacity_rejected", t.capacity_rejected},
        {"origin_fetches", t.origin_fetches},
        {"hit_rate", t.hit_rate()},
    };
}

inline json to_json(const NodeReport& n)
{
    return {
        {"id", n.id},
        {"kind", std::string(to_string(n.kind))},
        {"cell", {n.cell.row, n.cell.col}},
        {"poi", std::string(to_string(n.poi))},
        {"unique_videos", n.unique_videos},
        {"unique_users", n.unique_users},
        {"tally", to_json(n.tally)},
    };
}

inline json to_json(const BreakdownRow& b)
{
    return {{"group", b.group}, {"nodes", b.nodes}, {"tally", to_json(b.tally)}};
}

/// Full report: aggregate and per-class tallies, service rates in every mode,
/// per-node tallies and the breakdown tables.
inline json to_json(const MetricsReport& r)
{
    json nodes = json::array();
    for (const auto& n : r.nodes)
        nodes.push_back(to_json(n));
    json breakdowns = json::object();
    for (auto [name, dim] : {std::pair {"density", Dimension::Density}, {"video_diversity", Dimension::VideoDiversity},
             {"user_diversity", Dimension::UserDiversity}, {"user_class", Dimension::UserClass}, {"poi", Dimension::Poi}}) {
        json rows = json::array();
        for (const auto& b : breakdown(r, dim))
            rows.push_back(to_json(b));
        breakdowns[name] = std::move(rows);
    }
    return {
        {"strategy", std::string(to_string(r.strategy))},
        {"kind", std::string(to_string(r.kind))},
        {"capacity", r.capacity},
        {"hit_rate", r.total.hit_rate()},
        {"service_rate",
            {
                {"request_level", service_rate(r, ServiceMode::RequestLevel)},
                {"user_level", service_rate(r, ServiceMode::UserLevel)},
                {"cache_request_level", service_rate(r, ServiceMode::CacheRequestLevel)},
                {"cache_user_level", service_rate(r, ServiceMode::CacheUserLevel)},
            }},
        {"total", to_json(r.total)},
        {"single_location", to_json(r.single_location)},
        {"multi_location", to_json(r.multi_location)},
        {"out_of_scope", r.out_of_scope},
        {"users", r.users},
        {"users_edge_served", r.users_edge_served},
        {"users_cache_served", r.users_cache_served},
        {"breakdowns", std::move(breakdowns)},
        {"nodes", std::move(nodes)},
    };
}

inline json to_json(std::span<const CdfPoint> cdf)
{
    json out = json::array();
    for (const auto& p : cdf)
        out.push_back({p.x, p.f});
    return out;
}

inline json to_json(const Spectrum& s)
{
    json out = json::array();
    const auto n = s.size();
    for (std::size_t k = 0; k < n; ++k)
        out.push_back({
            {"k", k},
            {"period_hours", k == 0 ? json(nullptr) : json(static_cast<double>(n) / static_cast<double>(k))},
            {"amplitude", s.amplitude(k)},
            {"phase", s.phase(k)},
        });
    return out;
}

inline json to_json(std::span<const DominantPeriod> peaks)
{
    json out = json::array();
    for (const auto& p : peaks)
        out.push_back({{"k", p.k}, {"period_hours", p.period_hours}, {"amplitude", p.amplitude}});
    return out;
}

inline json to_json(const EntropyReport& e)
{
    return {{"raw", e.raw}, {"normalized", e.normalized}, {"support_size", e.support_size}};
}

inline json to_json(const FitResult& f)
{
    return {{"coefficients", f.coefficients}, {"residual_ss", f.residual_ss}};
}

inline json to_json(const DecayProfile& d)
{
    return {{"first_day", d.first_day}, {"normalized", d.normalized}, {"decay_rate", d.decay_rate}};
}

inline json to_json(const MigrationMatrix& m)
{
    json labels = json::array();
    for (auto p : kAllPoi)
        labels.push_back(std::string(to_string(p)));
    return {{"labels", labels}, {"counts", m.counts}, {"unlabeled_movements", m.unlabeled_movements}};
}

inline json to_json(const MobilityStats& s)
{
    auto keyed = [](const auto& m) {
        json j = json::object();
        for (const auto& [k, v] : m) {
            if constexpr (std::is_same_v<std::decay_t<decltype(k)>, std::string>)
                j[k] = v;
            else
                j[std::to_string(k)] = v;
        }
        return j;
    };
    json by_interval = json::object(), by_speed = json::object();
    const char* interval_names[] = {"0-10min", "10-60min", "60min+"};
    const char* speed_names[] = {"below_5.6kmh", "5.6-40kmh", "40kmh+"};
    for (std::size_t b = 0; b < 3; ++b) {
        by_interval[interval_names[b]] = to_json(std::span<const CdfPoint>(s.distance_cdf_by_interval[b]));
        by_speed[speed_names[b]] = to_json(std::span<const CdfPoint>(s.interval_cdf_by_speed[b]));
    }
    json patterns = json::object();
    for (const auto& [p, f] : s.pattern_fractions)
        patterns[p] = {{"fraction", f}, {"family", describe_pattern(p)}};
    return {
        {"multi_location_user_days", s.multi_location_user_days},
        {"movements", s.movement_count},
        {"movements_per_user", keyed(s.movements_per_user)},
        {"locations_per_user", keyed(s.locations_per_user)},
        {"distance_cdf_by_interval", by_interval},
        {"interval_cdf_by_speed", by_speed},
        {"patterns", patterns},
    };
}

/// Plans as {location id: [video ids]}.
inline json plans_to_json(const std::vector<std::vector<VideoKey>>& plans, std::span<const std::string> location_ids,
    std::span<const std::string> video_ids)
{
    json out = json::object();
    for (std::size_t l = 0; l < plans.size(); ++l) {
        json videos = json::array();
        for (auto v : plans[l])
            videos.push_back(video_ids[v]);
        out[location_ids[l]] = std::move(videos);
    }
    return out;
}

/// Tidy sweep table, one row per run.
inline std::string sweep_csv(std::span<const SweepRow> rows)
{
    std::string out = "strategy,capacity,kind,hit_rate,service_rate_request,service_rate_user,"
                      "cache_service_rate_request,cache_service_rate_user\n";
    for (const auto& r : rows) {
        out += std::string(to_string(r.strategy)) + "," + std::to_string(r.capacity) + ","
            + std::string(to_string(r.kind)) + "," + csv::format_double(r.report.total.hit_rate()) + ","
            + csv::format_double(service_rate(r.report, ServiceMode::RequestLevel)) + ","
            + csv::format_double(service_rate(r.report, ServiceMode::UserLevel)) + ","
            + csv::format_double(service_rate(r.report, ServiceMode::CacheRequestLevel)) + ","
            + csv::format_double(service_rate(r.report, ServiceMode::CacheUserLevel)) + "\n";
    }
    return out;
}

} // namespace edgecache
