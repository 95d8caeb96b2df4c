#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edgecache/error.hpp"

namespace edgecache {

inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// Side length of a grid cell in degrees (about 0.72 km^2 at Beijing's latitude).
inline constexpr double kCellDegrees = 0.01;

struct GeoPoint {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline bool is_valid(GeoPoint p)
{
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0
        && p.lon >= -180.0 && p.lon <= 180.0;
}

struct CellId {
    std::int64_t row = 0;
    std::int64_t col = 0;

    friend auto operator<=>(const CellId&, const CellId&) = default;
};

struct CellIdHash {
    std::size_t operator()(CellId c) const noexcept
    {
        auto h = static_cast<std::uint64_t>(c.row) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(c.col) + 0x7f4a7c159e3779b9ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

namespace detail {

// Grid index along one axis. Values within 1e-9 cell units of an integer are
// snapped first, so decimal literals such as 39.99 land on their own boundary
// instead of one cell below it.
inline std::int64_t grid_index(double degrees)
{
    const double q = degrees / kCellDegrees;
    const double r = std::round(q);
    const double snapped = std::abs(q - r) < 1e-9 ? r : q;
    return static_cast<std::int64_t>(std::floor(snapped));
}

} // namespace detail

/// Floor-based 0.01 degree quantisation. A point on a cell edge belongs to the
/// cell that starts at that edge.
inline CellId cell_of(GeoPoint p) { return {detail::grid_index(p.lat), detail::grid_index(p.lon)}; }

inline GeoPoint cell_center(CellId c)
{
    return {(static_cast<double>(c.row) + 0.5) * kCellDegrees,
        (static_cast<double>(c.col) + 0.5) * kCellDegrees};
}

inline double to_radians(double deg) { return deg * std::numbers::pi / 180.0; }

/// Great-circle distance in meters.
inline double haversine(GeoPoint a, GeoPoint b)
{
    const double dlat = to_radians(b.lat - a.lat);
    const double dlon = to_radians(b.lon - a.lon);
    const double s1 = std::sin(dlat / 2.0);
    const double s2 = std::sin(dlon / 2.0);
    const double h = s1 * s1 + std::cos(to_radians(a.lat)) * std::cos(to_radians(b.lat)) * s2 * s2;
    return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

/// Functional category of a cell. The first seven values are the migration
/// matrix categories; `Unlabeled` marks cells without PoI information.
enum class PoiLabel : std::uint8_t { Business, Hospital, Resident, Campus, Scenery, Shopping, Hotel, Unlabeled };

inline constexpr std::size_t kPoiCount = 7;

inline constexpr std::array<PoiLabel, kPoiCount> kAllPoi = {PoiLabel::Business, PoiLabel::Hospital,
    PoiLabel::Resident, PoiLabel::Campus, PoiLabel::Scenery, PoiLabel::Shopping, PoiLabel::Hotel};

inline std::string_view to_string(PoiLabel p)
{
    switch (p) {
    case PoiLabel::Business: return "business";
    case PoiLabel::Hospital: return "hospital";
    case PoiLabel::Resident: return "resident";
    case PoiLabel::Campus: return "campus";
    case PoiLabel::Scenery: return "scenery";
    case PoiLabel::Shopping: return "shopping";
    case PoiLabel::Hotel: return "hotel";
    case PoiLabel::Unlabeled: return "unlabeled";
    }
    return "unlabeled";
}

inline std::optional<PoiLabel> parse_poi(std::string_view s)
{
    for (auto p : kAllPoi)
        if (to_string(p) == s)
            return p;
    if (s == "unlabeled")
        return PoiLabel::Unlabeled;
    return std::nullopt;
}

inline std::size_t poi_index(PoiLabel p) { return static_cast<std::size_t>(p); }

enum class NodeKind : std::uint8_t { WiFiAP, CellularBS };

inline std::string_view to_string(NodeKind k) { return k == NodeKind::WiFiAP ? "ap" : "bs"; }

inline std::optional<NodeKind> parse_node_kind(std::string_view s)
{
    if (s == "ap")
        return NodeKind::WiFiAP;
    if (s == "bs")
        return NodeKind::CellularBS;
    return std::nullopt;
}

struct InfrastructureNode {
    std::string id;
    NodeKind kind = NodeKind::WiFiAP;
    GeoPoint position;
    double radius_m = 100.0;
    std::int64_t capacity = 20;
    std::int64_t concurrency = 20;
    std::int64_t bandwidth = 20;
    PoiLabel poi = PoiLabel::Unlabeled;

    friend bool operator==(const InfrastructureNode&, const InfrastructureNode&) = default;
};

/// Node with the default radius, concurrency and bandwidth of its kind.
inline InfrastructureNode make_node(std::string id, NodeKind kind, GeoPoint pos, PoiLabel poi = PoiLabel::Unlabeled)
{
    InfrastructureNode n;
    n.id = std::move(id);
    n.kind = kind;
    n.position = pos;
    n.poi = poi;
    const bool ap = kind == NodeKind::WiFiAP;
    n.radius_m = ap ? 100.0 : 500.0;
    n.concurrency = ap ? 20 : 100;
    n.bandwidth = ap ? 20 : 100;
    return n;
}

inline void validate(const InfrastructureNode& n)
{
    if (n.id.empty())
        throw InputError("node id must not be empty");
    if (!is_valid(n.position))
        throw InputError("node " + n.id + ": invalid position");
    if (!(n.radius_m > 0.0))
        throw InputError("node " + n.id + ": radius must be positive");
    if (n.capacity < 0)
        throw InputError("node " + n.id + ": capacity must be non-negative");
    if (n.concurrency < 1 || n.bandwidth < 1)
        throw InputError("node " + n.id + ": concurrency and bandwidth must be at least 1");
}

struct NearestResult {
    std::size_t index = 0;
    double distance_m = 0.0;
};

/// Uniform grid of 0.01 degree buckets over a fixed node set, queried by
/// expanding rings of cells. Built once, read-only afterwards. The grid does
/// not wrap at the antimeridian.
class SpatialIndex {
  public:
    SpatialIndex() = default;

    explicit SpatialIndex(std::span<const InfrastructureNode> nodes)
    {
        entries_.reserve(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const auto& n = nodes[i];
            entries_.push_back({n.position, n.kind, n.radius_m, n.id});
            const CellId c = cell_of(n.position);
            buckets_[c].push_back(static_cast<std::uint32_t>(i));
            auto& kd = kind_data_[static_cast<std::size_t>(n.kind)];
            ++kd.count;
            kd.max_radius = std::max(kd.max_radius, n.radius_m);
        }
    }

    std::size_t size() const { return entries_.size(); }

    std::size_t count(std::optional<NodeKind> kind) const
    {
        if (!kind)
            return entries_.size();
        return kind_data_[static_cast<std::size_t>(*kind)].count;
    }

    /// Minimum-distance node of the requested kind; ties go to the smallest id.
    std::optional<NearestResult> nearest(GeoPoint p, std::optional<NodeKind> kind = std::nullopt) const
    {
        return search(p, kind, std::numeric_limits<double>::infinity(), false);
    }

    /// Nearest node whose own radius covers `p`.
    std::optional<NearestResult> nearest_in_range(GeoPoint p, std::optional<NodeKind> kind = std::nullopt) const
    {
        double max_radius = 0.0;
        for (std::size_t k = 0; k < 2; ++k)
            if (!kind || static_cast<std::size_t>(*kind) == k)
                max_radius = std::max(max_radius, kind_data_[k].max_radius);
        return search(p, kind, max_radius, true);
    }

  private:
    struct Entry {
        GeoPoint pos;
        NodeKind kind;
        double radius;
        std::string id;
    };

    struct KindData {
        std::size_t count = 0;
        double max_radius = 0.0;
    };

    static constexpr std::int64_t kMaxRings = 48;

    // Smallest possible distance from p to any point of a cell in ring k.
    static double ring_lower_bound(GeoPoint p, CellId center, std::int64_t k)
    {
        if (k <= 1)
            return 0.0;
        const double steps = to_radians(static_cast<double>(k - 1) * kCellDegrees);
        const double lat_bound = kEarthRadiusMeters * steps;
        const double lat_lo = std::clamp(static_cast<double>(center.row - k) * kCellDegrees, -90.0, 90.0);
        const double lat_hi = std::clamp(static_cast<double>(center.row + k + 1) * kCellDegrees, -90.0, 90.0);
        const double cmin = std::max(0.0, std::min(std::cos(to_radians(lat_lo)), std::cos(to_radians(lat_hi))));
        const double s = std::sin(std::min(steps, std::numbers::pi) / 2.0);
        const double h = std::cos(to_radians(p.lat)) * cmin * s * s;
        const double lon_bound = 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(std::max(h, 0.0))));
        return std::min(lat_bound, lon_bound);
    }

    bool accept(const Entry& e, std::optional<NodeKind> kind) const { return !kind || e.kind == *kind; }

    void consider(std::uint32_t idx, GeoPoint p, std::optional<NodeKind> kind, bool in_range,
        std::optional<NearestResult>& best) const
    {
        const Entry& e = entries_[idx];
        if (!accept(e, kind))
            return;
        const double d = haversine(p, e.pos);
        if (in_range && d > e.radius)
            return;
        if (!best || d < best->distance_m
            || (d == best->distance_m && e.id < entries_[best->index].id))
            best = NearestResult {idx, d};
    }

    std::optional<NearestResult> search(GeoPoint p, std::optional<NodeKind> kind, double limit, bool in_range) const
    {
        if (count(kind) == 0)
            return std::nullopt;
        std::optional<NearestResult> best;
        const CellId c = cell_of(p);
        for (std::int64_t k = 0;; ++k) {
            const double bound = ring_lower_bound(p, c, k);
            if (bound > limit || (best && bound > best->distance_m))
                return best;
            if (k > kMaxRings) {
                // Sparse neighbourhood: finish with a linear scan.
                for (std::uint32_t i = 0; i < entries_.size(); ++i)
                    consider(i, p, kind, in_range, best);
                return best;
            }
            for (std::int64_t dr = -k; dr <= k; ++dr) {
                const bool edge_row = dr == -k || dr == k;
                for (std::int64_t dc = -k; dc <= k; dc += edge_row ? 1 : 2 * k) {
                    auto it = buckets_.find(CellId {c.row + dr, c.col + dc});
                    if (it != buckets_.end())
                        for (auto idx : it->second)
                            consider(idx, p, kind, in_range, best);
                    if (k == 0)
                        break;
                }
            }
        }
    }

    std::vector<Entry> entries_;
    std::unordered_map<CellId, std::vector<std::uint32_t>, CellIdHash> buckets_;
    std::array<KindData, 2> kind_data_ {};
};

/// (x, F(x)) sample of an empirical CDF.
struct CdfPoint {
    double x = 0.0;
    double f = 0.0;
};

/// Fraction of samples <= x at each breakpoint. Empty samples are an error.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> samples, std::span<const double> breakpoints)
{
    if (samples.empty())
        throw InputError("no samples");
    std::sort(samples.begin(), samples.end());
    std::vector<CdfPoint> out;
    out.reserve(breakpoints.size());
    const auto n = static_cast<double>(samples.size());
    for (double x : breakpoints) {
        auto it = std::upper_bound(samples.begin(), samples.end(), x);
        out.push_back({x, static_cast<double>(it - samples.begin()) / n});
    }
    return out;
}

/// Full step CDF: one point per distinct sample value.
inline std::vector<CdfPoint> empirical_cdf(std::vector<double> samples)
{
    if (samples.empty())
        throw InputError("no samples");
    std::sort(samples.begin(), samples.end());
    std::vector<CdfPoint> out;
    const auto n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (i + 1 == samples.size() || samples[i + 1] != samples[i])
            out.push_back({samples[i], static_cast<double>(i + 1) / n});
    return out;
}

/// Distance from each position to its nearest node of `kind` (ignoring radius).
inline std::vector<double> nearest_distances(
    std::span<const GeoPoint> positions, const SpatialIndex& index, NodeKind kind)
{
    if (index.count(kind) == 0)
        throw InputError(std::string("no nodes of kind ") + std::string(to_string(kind)));
    std::vector<double> out;
    out.reserve(positions.size());
    for (auto p : positions)
        out.push_back(index.nearest(p, kind)->distance_m);
    return out;
}

inline std::vector<CdfPoint> coverage_cdf(std::span<const GeoPoint> positions, const SpatialIndex& index,
    NodeKind kind, std::span<const double> breakpoints)
{
    if (positions.empty())
        throw InputError("no samples");
    return empirical_cdf(nearest_distances(positions, index, kind), breakpoints);
}

struct DistanceGapReport {
    std::vector<double> gaps; ///< nearest-BS distance minus nearest-AP distance, per request
    double fraction_positive = 0.0;
};

inline DistanceGapReport distance_gap(std::span<const GeoPoint> positions, const SpatialIndex& index)
{
    if (index.count(NodeKind::WiFiAP) == 0 || index.count(NodeKind::CellularBS) == 0)
        throw InputError("distance gap needs both AP and BS nodes");
    DistanceGapReport r;
    r.gaps.reserve(positions.size());
    std::size_t positive = 0;
    for (auto p : positions) {
        const double g = index.nearest(p, NodeKind::CellularBS)->distance_m
            - index.nearest(p, NodeKind::WiFiAP)->distance_m;
        positive += g > 0.0;
        r.gaps.push_back(g);
    }
    if (!positions.empty())
        r.fraction_positive = static_cast<double>(positive) / static_cast<double>(positions.size());
    return r;
}

namespace detail {

inline std::vector<double> max_min_normalize(std::span<const double> v)
{
    std::vector<double> out(v.begin(), v.end());
    if (out.empty())
        return out;
    auto [lo, hi] = std::minmax_element(out.begin(), out.end());
    const double mn = *lo, mx = *hi;
    for (auto& x : out) {
        if (mx > mn)
            x = (x - mn) / (mx - mn);
        else
            x = mx > 0.0 ? 1.0 : 0.0;
    }
    return out;
}

} // namespace detail

/// Cosine similarity of the max-min normalised per-cell request and node counts.
inline double intensity_similarity(std::span<const double> request_counts, std::span<const double> node_counts)
{
    if (request_counts.size() != node_counts.size())
        throw UsageError("intensity vectors must have equal length");
    for (std::size_t i = 0; i < request_counts.size(); ++i)
        if (!(request_counts[i] >= 0.0) || !(node_counts[i] >= 0.0))
            throw InputError("intensity counts must be non-negative");
    const auto q = detail::max_min_normalize(request_counts);
    const auto a = detail::max_min_normalize(node_counts);
    double dot = 0.0, nq = 0.0, na = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        dot += q[i] * a[i];
        nq += q[i] * q[i];
        na += a[i] * a[i];
    }
    if (nq == 0.0 || na == 0.0)
        throw InputError("undefined similarity");
    return std::clamp(dot / std::sqrt(nq * na), 0.0, 1.0);
}

/// PoI information per cell. A cell's label is the category with the most PoI
/// entries (ties by enumeration order); the entry count is kept separately.
class CellPoiMap {
  public:
    struct Info {
        std::array<std::uint32_t, kPoiCount> counts {};
        std::optional<PoiLabel> fixed;
    };

    void add(CellId c, PoiLabel p)
    {
        if (p == PoiLabel::Unlabeled)
            return;
        ++cells_[c].counts[poi_index(p)];
    }

    /// Overrides the vote with an explicit label.
    void set(CellId c, PoiLabel p) { cells_[c].fixed = p; }

    PoiLabel label(CellId c) const
    {
        auto it = cells_.find(c);
        if (it == cells_.end())
            return PoiLabel::Unlabeled;
        if (it->second.fixed)
            return *it->second.fixed;
        std::uint32_t best = 0;
        PoiLabel out = PoiLabel::Unlabeled;
        for (std::size_t i = 0; i < kPoiCount; ++i)
            if (it->second.counts[i] > best) {
                best = it->second.counts[i];
                out = kAllPoi[i];
            }
        return out;
    }

    std::uint32_t label_count(CellId c) const
    {
        auto it = cells_.find(c);
        if (it == cells_.end())
            return 0;
        std::uint32_t n = 0;
        for (auto v : it->second.counts)
            n += v;
        if (n == 0 && it->second.fixed && *it->second.fixed != PoiLabel::Unlabeled)
            n = 1;
        return n;
    }

    std::vector<CellId> cells() const
    {
        std::vector<CellId> out;
        out.reserve(cells_.size());
        for (const auto& [c, info] : cells_)
            out.push_back(c);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool empty() const { return cells_.empty(); }

  private:
    std::unordered_map<CellId, Info, CellIdHash> cells_;
};

inline CellPoiMap poi_map_from_nodes(std::span<const InfrastructureNode> nodes)
{
    CellPoiMap m;
    for (const auto& n : nodes)
        m.add(cell_of(n.position), n.poi);
    return m;
}

} // namespace edgecache
