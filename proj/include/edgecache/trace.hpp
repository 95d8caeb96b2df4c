#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edgecache/geo.hpp"

namespace edgecache {

/// One mobile video request.
struct RequestRecord {
    std::string user_id;
    std::int64_t timestamp = 0; ///< epoch seconds
    GeoPoint position;
    std::string video_id;

    friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

inline constexpr int kDefaultUtcOffsetHours = 8;
inline constexpr std::int64_t kSecondsPerDay = 86'400;
inline constexpr std::int64_t kSecondsPerHour = 3'600;

inline std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

/// Local calendar day of a timestamp; days start at local midnight.
inline std::int64_t day_index(std::int64_t ts, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    return floor_div(ts + utc_offset_hours * kSecondsPerHour, kSecondsPerDay);
}

inline int hour_of_day(std::int64_t ts, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    const std::int64_t local = ts + utc_offset_hours * kSecondsPerHour;
    return static_cast<int>((local - floor_div(local, kSecondsPerDay) * kSecondsPerDay) / kSecondsPerHour);
}

/// Serving location of a request: either an infrastructure node (index >= 0)
/// or, when no node is in range, the grid cell of the request (negative).
using LocationId = std::int64_t;

inline LocationId node_location(std::size_t node_index) { return static_cast<LocationId>(node_index); }

inline LocationId cell_location(CellId c)
{
    return -1 - ((c.row + 9'001) * 40'000 + (c.col + 18'001));
}

inline bool is_node_location(LocationId l) { return l >= 0; }

/// Location of every record: nearest in-range node of `kind` when an index is
/// given, otherwise (or when nothing is in range) the record's grid cell.
inline std::vector<LocationId> assign_locations(std::span<const RequestRecord> records,
    const SpatialIndex* index = nullptr, std::optional<NodeKind> kind = std::nullopt)
{
    std::vector<LocationId> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        if (index) {
            if (auto hit = index->nearest_in_range(r.position, kind)) {
                out.push_back(node_location(hit->index));
                continue;
            }
        }
        out.push_back(cell_location(cell_of(r.position)));
    }
    return out;
}

enum class DayClass : std::uint8_t { SingleLocation, MultiLocation };

inline std::string_view to_string(DayClass c)
{
    return c == DayClass::SingleLocation ? "single_location" : "multi_location";
}

struct UserDayClass {
    std::string user_id;
    std::int64_t day = 0;
    DayClass cls = DayClass::SingleLocation;
    std::size_t locations_visited = 1;
};

namespace detail {

// Record indices grouped by user (ascending id) and ordered by time within
// each user; ties keep input order.
inline std::vector<std::size_t> order_by_user_time(std::span<const RequestRecord> records)
{
    std::vector<std::size_t> idx(records.size());
    std::iota(idx.begin(), idx.end(), std::size_t {0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const auto& ra = records[a];
        const auto& rb = records[b];
        if (ra.user_id != rb.user_id)
            return ra.user_id < rb.user_id;
        return ra.timestamp < rb.timestamp;
    });
    return idx;
}

// Calls fn(begin, end) for each run of `order` sharing (user, day).
template <class Fn>
void for_each_user_day(std::span<const RequestRecord> records, const std::vector<std::size_t>& order,
    int utc_offset_hours, Fn&& fn)
{
    std::size_t i = 0;
    while (i < order.size()) {
        const auto& first = records[order[i]];
        const auto day = day_index(first.timestamp, utc_offset_hours);
        std::size_t j = i + 1;
        while (j < order.size() && records[order[j]].user_id == first.user_id
            && day_index(records[order[j]].timestamp, utc_offset_hours) == day)
            ++j;
        fn(i, j, day);
        i = j;
    }
}

inline void check_assignment(std::span<const RequestRecord> records, std::span<const LocationId> assignment)
{
    if (assignment.size() != records.size())
        throw UsageError("location assignment must have one entry per record");
}

} // namespace detail

/// Single- or multi-location class of every (user, day), sorted by user then day.
inline std::vector<UserDayClass> classify_users(std::span<const RequestRecord> records,
    std::span<const LocationId> assignment, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    detail::check_assignment(records, assignment);
    const auto order = detail::order_by_user_time(records);
    std::vector<UserDayClass> out;
    detail::for_each_user_day(records, order, utc_offset_hours, [&](std::size_t b, std::size_t e, std::int64_t day) {
        std::vector<LocationId> locs;
        for (std::size_t k = b; k < e; ++k)
            locs.push_back(assignment[order[k]]);
        std::sort(locs.begin(), locs.end());
        const auto n = static_cast<std::size_t>(std::unique(locs.begin(), locs.end()) - locs.begin());
        out.push_back({records[order[b]].user_id, day, n >= 2 ? DayClass::MultiLocation : DayClass::SingleLocation, n});
    });
    return out;
}

/// Users issuing at least `threshold` requests on every day they appear.
inline std::vector<std::string> active_users(std::span<const RequestRecord> records, std::size_t threshold = 10,
    int utc_offset_hours = kDefaultUtcOffsetHours)
{
    const auto order = detail::order_by_user_time(records);
    std::map<std::string, bool> ok;
    detail::for_each_user_day(records, order, utc_offset_hours, [&](std::size_t b, std::size_t e, std::int64_t) {
        const auto& user = records[order[b]].user_id;
        auto [it, inserted] = ok.try_emplace(user, true);
        if (e - b < threshold)
            it->second = false;
    });
    std::vector<std::string> out;
    for (const auto& [u, good] : ok)
        if (good)
            out.push_back(u);
    return out;
}

/// Visit string with locations lettered by first appearance ("ABA", "ABCA", ...).
inline std::string canonical_pattern(std::span<const LocationId> visits)
{
    std::vector<LocationId> seen;
    std::string out;
    for (auto l : visits) {
        auto it = std::find(seen.begin(), seen.end(), l);
        std::size_t k = static_cast<std::size_t>(it - seen.begin());
        if (it == seen.end())
            seen.push_back(l);
        if (k < 26)
            out.push_back(static_cast<char>('A' + k));
        else
            out += "#" + std::to_string(k + 1);
    }
    return out;
}

/// Human-readable family of a canonical pattern.
inline std::string describe_pattern(std::string_view canon)
{
    std::unordered_set<char> distinct(canon.begin(), canon.end());
    const auto n = distinct.size();
    const bool closed = canon.size() >= 2 && canon.front() == canon.back();
    if (n <= 1)
        return "stationary";
    if (n == 2) {
        if (canon.size() == 2)
            return "2-location one-way";
        if (canon.size() == 3 && closed)
            return "2-location round trip";
        return "2-location alternation";
    }
    return std::to_string(n) + (closed ? "-location tour" : "-location path");
}

struct MobilityStats {
    /// Fraction of multi-location user-days with a given number of movements.
    std::map<std::size_t, double> movements_per_user;
    /// Fraction of multi-location user-days with a given number of distinct locations.
    std::map<std::size_t, double> locations_per_user;
    /// Distance CDFs (meters) of movements whose interval is in [0,10), [10,60), [60,inf) minutes.
    std::array<std::vector<CdfPoint>, 3> distance_cdf_by_interval;
    /// Interval CDFs (minutes) of movements with speed < 5.6, [5.6,40), >= 40 km/h.
    std::array<std::vector<CdfPoint>, 3> interval_cdf_by_speed;
    /// Canonical pattern ("ABA") -> fraction of multi-location user-days.
    std::map<std::string, double> pattern_fractions;
    std::size_t movement_count = 0;
    std::size_t multi_location_user_days = 0;
};

inline constexpr std::array<double, 2> kIntervalBucketMinutes = {10.0, 60.0};
inline constexpr std::array<double, 2> kSpeedBucketKmh = {5.6, 40.0};

inline std::size_t interval_bucket(double minutes)
{
    return minutes < kIntervalBucketMinutes[0] ? 0 : (minutes < kIntervalBucketMinutes[1] ? 1 : 2);
}

inline std::size_t speed_bucket(double kmh) { return kmh < kSpeedBucketKmh[0] ? 0 : (kmh < kSpeedBucketKmh[1] ? 1 : 2); }

/// A movement: two time-consecutive requests of one user, on one day, at
/// distinct locations.
struct Movement {
    std::size_t from_record = 0;
    std::size_t to_record = 0;
};

/// Calls on_day(movements, visit_sequence) for every user-day.
template <class Fn>
void for_each_user_day_movements(std::span<const RequestRecord> records, std::span<const LocationId> assignment,
    int utc_offset_hours, Fn&& on_day)
{
    detail::check_assignment(records, assignment);
    const auto order = detail::order_by_user_time(records);
    detail::for_each_user_day(records, order, utc_offset_hours, [&](std::size_t b, std::size_t e, std::int64_t) {
        std::vector<Movement> moves;
        std::vector<LocationId> visits {assignment[order[b]]};
        for (std::size_t k = b + 1; k < e; ++k) {
            const auto prev = order[k - 1], cur = order[k];
            if (assignment[prev] != assignment[cur]) {
                moves.push_back({prev, cur});
                visits.push_back(assignment[cur]);
            }
        }
        on_day(std::span<const Movement>(moves), std::span<const LocationId>(visits));
    });
}

inline MobilityStats movement_stats(std::span<const RequestRecord> records, std::span<const LocationId> assignment,
    int utc_offset_hours = kDefaultUtcOffsetHours)
{
    MobilityStats s;
    std::map<std::size_t, std::size_t> moves_hist, locs_hist;
    std::map<std::string, std::size_t> patterns;
    std::array<std::vector<double>, 3> dist_samples, interval_samples;
    for_each_user_day_movements(records, assignment, utc_offset_hours,
        [&](std::span<const Movement> moves, std::span<const LocationId> visits) {
            if (moves.empty())
                return;
            ++s.multi_location_user_days;
            s.movement_count += moves.size();
            ++moves_hist[moves.size()];
            std::vector<LocationId> distinct(visits.begin(), visits.end());
            std::sort(distinct.begin(), distinct.end());
            distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
            ++locs_hist[distinct.size()];
            ++patterns[canonical_pattern(visits)];
            for (const auto& m : moves) {
                const auto& a = records[m.from_record];
                const auto& b = records[m.to_record];
                const double d = haversine(a.position, b.position);
                const double minutes = static_cast<double>(b.timestamp - a.timestamp) / 60.0;
                const double kmh = minutes > 0.0 ? (d / 1000.0) / (minutes / 60.0)
                                                 : std::numeric_limits<double>::infinity();
                dist_samples[interval_bucket(minutes)].push_back(d);
                interval_samples[speed_bucket(kmh)].push_back(minutes);
            }
        });
    const auto days = static_cast<double>(s.multi_location_user_days);
    for (const auto& [k, n] : moves_hist)
        s.movements_per_user[k] = static_cast<double>(n) / days;
    for (const auto& [k, n] : locs_hist)
        s.locations_per_user[k] = static_cast<double>(n) / days;
    for (const auto& [p, n] : patterns)
        s.pattern_fractions[p] = static_cast<double>(n) / days;
    for (std::size_t b = 0; b < 3; ++b) {
        if (!dist_samples[b].empty())
            s.distance_cdf_by_interval[b] = empirical_cdf(dist_samples[b]);
        if (!interval_samples[b].empty())
            s.interval_cdf_by_speed[b] = empirical_cdf(interval_samples[b]);
    }
    return s;
}

/// Movement counts between PoI categories. Movements touching an unlabeled
/// cell are kept out of the matrix and counted separately.
struct MigrationMatrix {
    std::array<std::array<std::uint64_t, kPoiCount>, kPoiCount> counts {};
    std::uint64_t unlabeled_movements = 0;

    std::uint64_t labeled_total() const
    {
        std::uint64_t t = 0;
        for (const auto& row : counts)
            for (auto v : row)
                t += v;
        return t;
    }

    std::uint64_t row_total(std::size_t i) const
    {
        std::uint64_t t = 0;
        for (auto v : counts[i])
            t += v;
        return t;
    }

    /// Row-normalised distribution; an empty row yields all zeros.
    std::array<double, kPoiCount> row_distribution(std::size_t i) const
    {
        std::array<double, kPoiCount> out {};
        const auto t = row_total(i);
        if (t == 0)
            return out;
        for (std::size_t j = 0; j < kPoiCount; ++j)
            out[j] = static_cast<double>(counts[i][j]) / static_cast<double>(t);
        return out;
    }
};

/// Migration counts using the given location assignment to detect movements
/// and the cells of the two requests for their labels.
inline MigrationMatrix migration_matrix(std::span<const RequestRecord> records, std::span<const LocationId> assignment,
    const CellPoiMap& cells, int utc_offset_hours = kDefaultUtcOffsetHours)
{
    MigrationMatrix m;
    for_each_user_day_movements(records, assignment, utc_offset_hours,
        [&](std::span<const Movement> moves, std::span<const LocationId>) {
            for (const auto& mv : moves) {
                const auto from = cells.label(cell_of(records[mv.from_record].position));
                const auto to = cells.label(cell_of(records[mv.to_record].position));
                if (from == PoiLabel::Unlabeled || to == PoiLabel::Unlabeled)
                    ++m.unlabeled_movements;
                else
                    ++m.counts[poi_index(from)][poi_index(to)];
            }
        });
    return m;
}

/// Cell-based variant: a movement is a change of grid cell.
inline MigrationMatrix migration_matrix(std::span<const RequestRecord> records, const CellPoiMap& cells,
    int utc_offset_hours = kDefaultUtcOffsetHours)
{
    const auto locs = assign_locations(records);
    return migration_matrix(records, locs, cells, utc_offset_hours);
}

} // namespace edgecache
