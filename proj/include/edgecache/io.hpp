#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "edgecache/geo.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

namespace csv {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',')
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

inline std::optional<double> parse_double(std::string_view s)
{
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline bool is_blank(std::string_view s) { return trim(s).empty(); }

} // namespace csv

struct Rejection {
    std::size_t line = 0; ///< 1-based line number in the input
    std::string reason;
};

struct ParsedTrace {
    std::vector<RequestRecord> records;
    std::vector<Rejection> rejected;
};

inline constexpr std::string_view kTraceHeader = "user_id,timestamp,lat,lon,video_id";
inline constexpr std::string_view kInfraHeader = "id,kind,lat,lon,poi";

namespace detail {

inline void expect_header(std::istream& in, std::string_view header, std::string_view what)
{
    if (!in)
        throw InputError(std::string(what) + ": unreadable stream");
    std::string line;
    if (!std::getline(in, line))
        throw InputError(std::string(what) + ": missing header");
    auto cols = csv::split(line);
    auto want = csv::split(header);
    if (!cols.empty() && cols.front().starts_with("\xEF\xBB\xBF"))
        cols.front().remove_prefix(3);
    if (cols != want)
        throw InputError(std::string(what) + ": missing header (expected '" + std::string(header) + "')");
}

} // namespace detail

/// Reads a trace CSV. Malformed lines are reported, never dropped silently.
/// Records come back stably sorted by timestamp.
inline ParsedTrace parse_trace(std::istream& in)
{
    detail::expect_header(in, kTraceHeader, "trace");
    ParsedTrace out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::is_blank(line))
            continue;
        auto f = csv::split(line);
        auto reject = [&](std::string reason) { out.rejected.push_back({lineno, std::move(reason)}); };
        if (f.size() != 5) {
            reject("expected 5 fields, found " + std::to_string(f.size()));
            continue;
        }
        if (f[0].empty()) {
            reject("empty user_id");
            continue;
        }
        if (f[4].empty()) {
            reject("empty video_id");
            continue;
        }
        auto ts = csv::parse_int(f[1]);
        if (!ts) {
            reject("invalid timestamp");
            continue;
        }
        auto lat = csv::parse_double(f[2]);
        auto lon = csv::parse_double(f[3]);
        if (!lat || !std::isfinite(*lat)) {
            reject("invalid latitude");
            continue;
        }
        if (!lon || !std::isfinite(*lon)) {
            reject("invalid longitude");
            continue;
        }
        if (*lat < -90.0 || *lat > 90.0) {
            reject("latitude out of range");
            continue;
        }
        if (*lon < -180.0 || *lon > 180.0) {
            reject("longitude out of range");
            continue;
        }
        out.records.push_back({std::string(f[0]), *ts, {*lat, *lon}, std::string(f[4])});
    }
    std::stable_sort(out.records.begin(), out.records.end(),
        [](const RequestRecord& a, const RequestRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

inline ParsedTrace parse_trace_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open trace file " + path);
    return parse_trace(in);
}

inline void write_trace(std::ostream& out, std::span<const RequestRecord> records)
{
    out << kTraceHeader << '\n';
    for (const auto& r : records)
        out << r.user_id << ',' << r.timestamp << ',' << csv::format_double(r.position.lat) << ','
            << csv::format_double(r.position.lon) << ',' << r.video_id << '\n';
}

/// Reads an infrastructure CSV. Any malformed line is an error naming the line.
/// Radius, concurrency and bandwidth take their per-kind defaults.
inline std::vector<InfrastructureNode> parse_infrastructure(std::istream& in)
{
    detail::expect_header(in, kInfraHeader, "infrastructure");
    std::vector<InfrastructureNode> nodes;
    std::set<std::string> ids;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::is_blank(line))
            continue;
        auto f = csv::split(line);
        auto fail = [&](const std::string& why) {
            throw InputError("infrastructure line " + std::to_string(lineno) + ": " + why);
        };
        if (f.size() != 5)
            fail("expected 5 fields");
        auto kind = parse_node_kind(f[1]);
        if (!kind)
            fail("unknown kind '" + std::string(f[1]) + "'");
        auto lat = csv::parse_double(f[2]);
        auto lon = csv::parse_double(f[3]);
        if (!lat || !lon || !is_valid({*lat, *lon}))
            fail("invalid coordinates");
        auto poi = parse_poi(f[4]);
        if (!poi)
            fail("unknown poi '" + std::string(f[4]) + "'");
        if (f[0].empty())
            fail("empty id");
        if (!ids.insert(std::string(f[0])).second)
            fail("duplicate id '" + std::string(f[0]) + "'");
        nodes.push_back(make_node(std::string(f[0]), *kind, {*lat, *lon}, *poi));
    }
    return nodes;
}

inline std::vector<InfrastructureNode> parse_infrastructure_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot open infrastructure file " + path);
    return parse_infrastructure(in);
}

inline void write_infrastructure(std::ostream& out, std::span<const InfrastructureNode> nodes)
{
    out << kInfraHeader << '\n';
    for (const auto& n : nodes)
        out << n.id << ',' << to_string(n.kind) << ',' << csv::format_double(n.position.lat) << ','
            << csv::format_double(n.position.lon) << ',' << to_string(n.poi) << '\n';
}

/// Cell label sidecar: `row,col,poi`.
inline void write_cells(std::ostream& out, const std::map<CellId, PoiLabel>& cells)
{
    out << "row,col,poi\n";
    for (const auto& [c, p] : cells)
        out << c.row << ',' << c.col << ',' << to_string(p) << '\n';
}

inline CellPoiMap parse_cells(std::istream& in)
{
    detail::expect_header(in, "row,col,poi", "cells");
    CellPoiMap m;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::is_blank(line))
            continue;
        auto f = csv::split(line);
        auto row = f.size() == 3 ? csv::parse_int(f[0]) : std::nullopt;
        auto col = f.size() == 3 ? csv::parse_int(f[1]) : std::nullopt;
        auto poi = f.size() == 3 ? parse_poi(f[2]) : std::nullopt;
        if (!row || !col || !poi)
            throw InputError("cells line " + std::to_string(lineno) + ": malformed");
        m.set({*row, *col}, *poi);
    }
    return m;
}

/// Video category sidecar: `video_id,category`.
inline void write_video_categories(std::ostream& out, const std::map<std::string, int>& categories)
{
    out << "video_id,category\n";
    for (const auto& [v, c] : categories)
        out << v << ',' << c << '\n';
}

inline std::map<std::string, int> parse_video_categories(std::istream& in)
{
    detail::expect_header(in, "video_id,category", "videos");
    std::map<std::string, int> out;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::is_blank(line))
            continue;
        auto f = csv::split(line);
        auto c = f.size() == 2 ? csv::parse_int(f[1]) : std::nullopt;
        if (!c || f[0].empty() || *c < 0)
            throw InputError("videos line " + std::to_string(lineno) + ": malformed");
        out[std::string(f[0])] = static_cast<int>(*c);
    }
    return out;
}

} // namespace edgecache
