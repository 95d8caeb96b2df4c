#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_set>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/geo.hpp"
#include "edgecache/geocollab.hpp"
#include "edgecache/rng.hpp"
#include "edgecache/trace.hpp"

namespace edgecache {

/// Simulation parameters. Defaults:
/// capacity 20, 20 (AP) / 100 (BS) transmissions and items per slot,
/// radius 100 m (AP) / 500 m (BS), one-hour resource slots, daily replanning.
struct SimConfig {
    Strategy strategy = Strategy::LRU;
    NodeKind kind = NodeKind::WiFiAP;
    std::int64_t capacity = 20;
    std::int64_t ap_concurrency = 20;
    std::int64_t bs_concurrency = 100;
    std::int64_t ap_bandwidth = 20;
    std::int64_t bs_bandwidth = 100;
    double ap_radius = 100.0;
    double bs_radius = 500.0;
    std::int64_t video_size = 1; ///< bandwidth units per delivered video
    std::int64_t slot_seconds = 3600;
    std::int64_t replan_days = 1;
    int utc_offset_hours = kDefaultUtcOffsetHours;
    std::uint64_t seed = 1;
    bool online_fill = false;
    bool lfu_keep_counts = false;
    double default_decay = kDefaultDecay;
    std::vector<double> category_decay; ///< mu per video category
    std::int64_t warmup_days = 0;       ///< leading days simulated but left out of the metrics
    double top_fraction = 1.0;
    bool immobile_counterfactual = false;

    std::int64_t concurrency() const { return kind == NodeKind::WiFiAP ? ap_concurrency : bs_concurrency; }
    std::int64_t bandwidth() const { return kind == NodeKind::WiFiAP ? ap_bandwidth : bs_bandwidth; }
    double radius() const { return kind == NodeKind::WiFiAP ? ap_radius : bs_radius; }

    void validate() const
    {
        if (capacity < 0)
            throw UsageError("capacity must be non-negative");
        if (ap_concurrency < 1 || bs_concurrency < 1 || ap_bandwidth < 1 || bs_bandwidth < 1)
            throw UsageError("concurrency and bandwidth must be at least 1");
        if (!(ap_radius > 0.0) || !(bs_radius > 0.0))
            throw UsageError("radius must be positive");
        if (video_size < 1 || slot_seconds < 1 || replan_days < 1)
            throw UsageError("video_size, slot_seconds and replan_days must be positive");
        if (warmup_days < 0)
            throw UsageError("warmup_days must be non-negative");
        if (!(top_fraction > 0.0 && top_fraction <= 1.0))
            throw UsageError("top_fraction must be in (0, 1]");
        if (!(default_decay >= 0.0))
            throw UsageError("default_decay must be non-negative");
        for (double mu : category_decay)
            if (!(mu >= 0.0))
                throw UsageError("category decay must be non-negative");
    }
};

struct Tally {
    std::uint64_t requests = 0;
    std::uint64_t edge_served = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t cache_misses = 0;
    std::uint64_t out_of_range = 0;
    std::uint64_t capacity_rejected = 0;
    std::uint64_t origin_fetches = 0;

    /// Hits over edge-served requests.
    double hit_rate() const
    {
        return edge_served == 0 ? 0.0 : static_cast<double>(cache_hits) / static_cast<double>(edge_served);
    }

    Tally& operator+=(const Tally& o)
    {
        requests += o.requests;
        edge_served += o.edge_served;
        cache_hits += o.cache_hits;
        cache_misses += o.cache_misses;
        out_of_range += o.out_of_range;
        capacity_rejected += o.capacity_rejected;
        origin_fetches += o.origin_fetches;
        return *this;
    }

    friend bool operator==(const Tally&, const Tally&) = default;
};

struct NodeReport {
    std::string id;
    NodeKind kind = NodeKind::WiFiAP;
    CellId cell;
    PoiLabel poi = PoiLabel::Unlabeled;
    Tally tally;
    std::uint64_t unique_videos = 0;
    std::uint64_t unique_users = 0;

    friend bool operator==(const NodeReport&, const NodeReport&) = default;
};

struct MetricsReport {
    Strategy strategy = Strategy::LRU;
    NodeKind kind = NodeKind::WiFiAP;
    std::int64_t capacity = 0;
    Tally total;
    Tally single_location; ///< requests of single-location user-days
    Tally multi_location;
    std::vector<NodeReport> nodes; ///< nodes in scope, input order
    std::uint64_t out_of_scope = 0; ///< requests dropped by the node filter
    std::uint64_t users = 0;
    std::uint64_t users_edge_served = 0;
    std::uint64_t users_cache_served = 0;

    friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

enum class ServiceMode : std::uint8_t { RequestLevel, UserLevel, CacheRequestLevel, CacheUserLevel };

/// RequestLevel: edge-served share of requests. UserLevel: share of users with
/// at least one edge-served request. The Cache modes count cache hits instead
/// of edge service, so they depend on the strategy.
inline double service_rate(const MetricsReport& r, ServiceMode mode)
{
    auto frac = [](std::uint64_t a, std::uint64_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    switch (mode) {
    case ServiceMode::RequestLevel: return frac(r.total.edge_served, r.total.requests);
    case ServiceMode::UserLevel: return frac(r.users_edge_served, r.users);
    case ServiceMode::CacheRequestLevel: return frac(r.total.cache_hits, r.total.requests);
    case ServiceMode::CacheUserLevel: return frac(r.users_cache_served, r.users);
    }
    return 0.0;
}

/// Node with the simulation's per-kind radius, capacity and limits.
inline InfrastructureNode configured_node(InfrastructureNode n, const SimConfig& c)
{
    const bool ap = n.kind == NodeKind::WiFiAP;
    n.radius_m = ap ? c.ap_radius : c.bs_radius;
    n.concurrency = ap ? c.ap_concurrency : c.bs_concurrency;
    n.bandwidth = ap ? c.ap_bandwidth : c.bs_bandwidth;
    n.capacity = c.capacity;
    return n;
}

inline constexpr std::int32_t kOutOfRange = -1;
inline constexpr std::int32_t kOutOfScope = -2;

/// Indices of the top `fraction` of nodes by load (at least one node);
/// ties by id. Returned in input order.
inline std::vector<std::size_t> top_nodes(
    std::span<const std::uint64_t> load, std::span<const InfrastructureNode> nodes, double fraction)
{
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw UsageError("top fraction must be in (0, 1]");
    std::vector<std::size_t> idx(nodes.size());
    std::iota(idx.begin(), idx.end(), std::size_t {0});
    if (fraction >= 1.0)
        return idx;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return load[a] != load[b] ? load[a] > load[b] : nodes[a].id < nodes[b].id;
    });
    const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(nodes.size()) - 1e-9)));
    idx.resize(std::min(keep, idx.size()));
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// A trace routed onto one kind of node: interned ids, routing, user-day
/// classes and scope. Shared by every run of a sweep.
class PreparedTrace {
  public:
    struct Request {
        std::int64_t timestamp = 0;
        std::int64_t day = 0;
        std::uint32_t user = 0;
        std::uint32_t video = 0;
        std::int32_t node = kOutOfRange; ///< index into nodes(), or kOutOfRange / kOutOfScope
        bool multi_location = false;
    };

    PreparedTrace(std::span<const RequestRecord> records, std::span<const InfrastructureNode> all_nodes,
        const SimConfig& config, const std::map<std::string, int>& categories = {})
        : kind_(config.kind)
        , utc_offset_(config.utc_offset_hours)
    {
        config.validate();
        for (const auto& n : all_nodes)
            if (n.kind == config.kind)
                nodes_.push_back(configured_node(n, config));
        intern(records);
        video_category_.assign(videos_.size(), -1);
        for (std::size_t v = 0; v < videos_.size(); ++v)
            if (auto it = categories.find(videos_[v]); it != categories.end())
                video_category_[v] = it->second;

        const SpatialIndex index(nodes_);
        std::vector<std::size_t> order(records.size());
        std::iota(order.begin(), order.end(), std::size_t {0});
        std::stable_sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].timestamp < records[b].timestamp; });
        requests_.resize(records.size());
        std::vector<LocationId> location(records.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto& r = records[order[k]];
            auto& q = requests_[k];
            q.timestamp = r.timestamp;
            q.day = day_index(r.timestamp, utc_offset_);
            q.user = user_key(r.user_id);
            q.video = video_key(r.video_id);
            if (auto hit = index.nearest_in_range(r.position, kind_)) {
                q.node = static_cast<std::int32_t>(hit->index);
                location[k] = node_location(hit->index);
            } else {
                location[k] = cell_location(cell_of(r.position));
            }
        }
        classify(location, config.immobile_counterfactual);
        apply_scope(config.top_fraction);
    }

    NodeKind kind() const { return kind_; }
    int utc_offset_hours() const { return utc_offset_; }
    const std::vector<InfrastructureNode>& nodes() const { return nodes_; }
    const std::vector<Request>& requests() const { return requests_; }
    const std::vector<std::string>& videos() const { return videos_; }
    const std::vector<std::string>& users() const { return users_; }
    const std::vector<std::size_t>& scope() const { return scope_; }
    int video_category(std::uint32_t v) const { return video_category_[v]; }

  private:
    void intern(std::span<const RequestRecord> records)
    {
        std::vector<std::string_view> u, v;
        u.reserve(records.size());
        v.reserve(records.size());
        for (const auto& r : records) {
            u.push_back(r.user_id);
            v.push_back(r.video_id);
        }
        auto uniq = [](std::vector<std::string_view>& s) {
            std::sort(s.begin(), s.end());
            s.erase(std::unique(s.begin(), s.end()), s.end());
        };
        uniq(u);
        uniq(v);
        users_.assign(u.begin(), u.end());
        videos_.assign(v.begin(), v.end());
    }

    std::uint32_t user_key(const std::string& s) const
    {
        return static_cast<std::uint32_t>(std::lower_bound(users_.begin(), users_.end(), s) - users_.begin());
    }

    std::uint32_t video_key(const std::string& s) const
    {
        return static_cast<std::uint32_t>(std::lower_bound(videos_.begin(), videos_.end(), s) - videos_.begin());
    }

    // Classes come from the original routing (node, or cell when out of range).
    // The counterfactual then pins a multi-location user-day to its first
    // in-range node.
    void classify(const std::vector<LocationId>& location, bool immobile)
    {
        std::vector<std::size_t> idx(requests_.size());
        std::iota(idx.begin(), idx.end(), std::size_t {0});
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = requests_[a];
            const auto& y = requests_[b];
            return x.user != y.user ? x.user < y.user : x.day < y.day;
        });
        std::size_t i = 0;
        while (i < idx.size()) {
            std::size_t j = i + 1;
            while (j < idx.size() && requests_[idx[j]].user == requests_[idx[i]].user
                && requests_[idx[j]].day == requests_[idx[i]].day)
                ++j;
            bool multi = false;
            for (std::size_t k = i + 1; k < j && !multi; ++k)
                multi = location[idx[k]] != location[idx[i]];
            std::int32_t first_node = kOutOfRange;
            for (std::size_t k = i; k < j && first_node == kOutOfRange; ++k)
                first_node = requests_[idx[k]].node;
            for (std::size_t k = i; k < j; ++k) {
                auto& q = requests_[idx[k]];
                q.multi_location = multi;
                if (immobile && multi && first_node != kOutOfRange)
                    q.node = first_node;
            }
            i = j;
        }
    }

    // With a fraction below one, only requests routed to the busiest nodes
    // stay in the experiment; everything else, out-of-range requests
    // included, leaves both numerator and denominator.
    void apply_scope(double fraction)
    {
        std::vector<std::uint64_t> load(nodes_.size(), 0);
        for (const auto& q : requests_)
            if (q.node >= 0)
                ++load[static_cast<std::size_t>(q.node)];
        scope_ = top_nodes(load, nodes_, fraction);
        if (fraction >= 1.0)
            return;
        std::vector<bool> keep(nodes_.size(), false);
        for (auto n : scope_)
            keep[n] = true;
        for (auto& q : requests_)
            if (q.node < 0 || !keep[static_cast<std::size_t>(q.node)])
                q.node = kOutOfScope;
    }

    NodeKind kind_;
    int utc_offset_;
    std::vector<InfrastructureNode> nodes_;
    std::vector<std::string> users_;
    std::vector<std::string> videos_;
    std::vector<int> video_category_;
    std::vector<Request> requests_;
    std::vector<std::size_t> scope_;
};

/// Runs one strategy at one capacity over a prepared trace. Only the
/// strategy, capacity, seed, cache and planner fields of `config` matter here;
/// routing fields were fixed when the trace was prepared.
inline MetricsReport simulate(const PreparedTrace& trace, const SimConfig& config)
{
    config.validate();
    const auto& nodes = trace.nodes();
    const auto& scope = trace.scope();
    const auto cap = static_cast<std::size_t>(config.capacity);
    const bool geo = config.strategy == Strategy::GeoCollab;

    std::vector<std::int32_t> loc_of(nodes.size(), -1);
    for (std::size_t k = 0; k < scope.size(); ++k)
        loc_of[scope[k]] = static_cast<std::int32_t>(k);

    std::vector<CacheState<VideoKey>> caches;
    caches.reserve(scope.size());
    for (std::size_t k = 0; k < scope.size(); ++k) {
        CacheOptions opt;
        opt.lfu_keep_counts = config.lfu_keep_counts;
        opt.online_fill = config.online_fill;
        opt.seed = derive_seed(config.seed, scope[k]);
        caches.emplace_back(config.strategy, cap, opt);
    }

    std::optional<GeoCollabState> planner;
    std::optional<WindowBuilder> window;
    if (geo) {
        std::vector<double> decay(trace.videos().size(), -1.0);
        for (std::uint32_t v = 0; v < decay.size(); ++v) {
            const int c = trace.video_category(v);
            if (c >= 0 && static_cast<std::size_t>(c) < config.category_decay.size())
                decay[v] = config.category_decay[static_cast<std::size_t>(c)];
        }
        GeoCollabOptions opt;
        opt.default_decay = config.default_decay;
        planner.emplace(std::vector<std::size_t>(scope.size(), cap), std::move(decay), opt);
        window.emplace(scope.size());
    }

    struct Slot {
        std::int64_t id = std::numeric_limits<std::int64_t>::min();
        std::int64_t transmissions = 0;
        std::int64_t bandwidth = 0;
    };
    std::vector<Slot> slots(scope.size());
    std::vector<Tally> node_tally(scope.size());
    std::vector<std::unordered_set<std::uint32_t>> node_videos(scope.size()), node_users(scope.size());
    std::vector<std::uint8_t> user_flags(trace.users().size(), 0); // 1 seen, 2 edge served, 4 cache hit

    MetricsReport rep;
    rep.strategy = config.strategy;
    rep.kind = trace.kind();
    rep.capacity = config.capacity;

    const auto& reqs = trace.requests();
    const std::int64_t first_day = reqs.empty() ? 0 : reqs.front().day;
    std::int64_t period = 0;
    const std::int64_t concurrency = config.concurrency();
    const std::int64_t bandwidth = config.bandwidth();

    for (const auto& q : reqs) {
        if (q.node == kOutOfScope) {
            ++rep.out_of_scope;
            continue;
        }
        if (geo) {
            const auto p = floor_div(q.day - first_day, config.replan_days);
            for (; period < p; ++period) {
                const auto& plans = planner->step(window->take());
                for (std::size_t k = 0; k < caches.size(); ++k)
                    caches[k].install_plan(plans[k]);
            }
        }
        const bool counted = q.day >= first_day + config.warmup_days;
        Tally* cls = q.multi_location ? &rep.multi_location : &rep.single_location;
        if (counted) {
            user_flags[q.user] |= 1;
            ++rep.total.requests;
            ++cls->requests;
        }
        if (q.node == kOutOfRange) {
            if (counted) {
                ++rep.total.out_of_range;
                ++cls->out_of_range;
            }
            continue;
        }
        const auto k = static_cast<std::size_t>(loc_of[static_cast<std::size_t>(q.node)]);
        Tally& nt = node_tally[k];
        if (counted) {
            ++nt.requests;
            node_videos[k].insert(q.video);
            node_users[k].insert(q.user);
        }
        if (geo)
            window->add(k, q.user, q.video, q.multi_location);
        auto& s = slots[k];
        const auto slot = floor_div(q.timestamp, config.slot_seconds);
        if (s.id != slot)
            s = {slot, 0, 0};
        if (s.transmissions >= concurrency || s.bandwidth + config.video_size > bandwidth) {
            if (counted) {
                ++rep.total.capacity_rejected;
                ++cls->capacity_rejected;
                ++nt.capacity_rejected;
            }
            continue;
        }
        ++s.transmissions;
        s.bandwidth += config.video_size;
        const bool hit = caches[k].access(q.video).hit;
        if (!counted)
            continue;
        user_flags[q.user] |= 2;
        for (Tally* t : {&rep.total, cls, &nt}) {
            ++t->edge_served;
            if (hit) {
                ++t->cache_hits;
            } else {
                ++t->cache_misses;
                ++t->origin_fetches;
            }
        }
        if (hit)
            user_flags[q.user] |= 4;
    }

    for (std::size_t k = 0; k < scope.size(); ++k) {
        const auto& n = nodes[scope[k]];
        rep.nodes.push_back({n.id, n.kind, cell_of(n.position), n.poi, node_tally[k], node_videos[k].size(),
            node_users[k].size()});
    }
    for (auto f : user_flags) {
        rep.users += (f & 1) != 0;
        rep.users_edge_served += (f & 2) != 0;
        rep.users_cache_served += (f & 4) != 0;
    }
    return rep;
}

/// Routes and simulates in one call.
inline MetricsReport run(std::span<const RequestRecord> records, std::span<const InfrastructureNode> nodes,
    const SimConfig& config, const std::map<std::string, int>& categories = {})
{
    return simulate(PreparedTrace(records, nodes, config, categories), config);
}

/// Same as run() after pinning every multi-location user-day to its first
/// in-range node.
inline MetricsReport immobile_counterfactual(std::span<const RequestRecord> records,
    std::span<const InfrastructureNode> nodes, SimConfig config, const std::map<std::string, int>& categories = {})
{
    config.immobile_counterfactual = true;
    return run(records, nodes, config, categories);
}

struct TopNodesResult {
    std::vector<InfrastructureNode> nodes;
    std::vector<RequestRecord> records;
};

/// Busiest `fraction` of the nodes of `kind` and the requests routed to them.
inline TopNodesResult top_nodes_filter(std::span<const RequestRecord> records,
    std::span<const InfrastructureNode> nodes, NodeKind kind, double fraction)
{
    std::vector<InfrastructureNode> of_kind;
    for (const auto& n : nodes)
        if (n.kind == kind)
            of_kind.push_back(n);
    const SpatialIndex index(of_kind);
    std::vector<std::int64_t> routed(records.size(), -1);
    std::vector<std::uint64_t> load(of_kind.size(), 0);
    for (std::size_t i = 0; i < records.size(); ++i)
        if (auto hit = index.nearest_in_range(records[i].position, kind)) {
            routed[i] = static_cast<std::int64_t>(hit->index);
            ++load[hit->index];
        }
    const auto keep = top_nodes(load, of_kind, fraction);
    std::vector<bool> kept(of_kind.size(), false);
    TopNodesResult out;
    for (auto k : keep) {
        kept[k] = true;
        out.nodes.push_back(of_kind[k]);
    }
    for (std::size_t i = 0; i < records.size(); ++i)
        if (fraction >= 1.0 || (routed[i] >= 0 && kept[static_cast<std::size_t>(routed[i])]))
            out.records.push_back(records[i]);
    return out;
}

enum class Dimension : std::uint8_t { Density, VideoDiversity, UserDiversity, UserClass, Poi };

inline std::optional<Dimension> parse_dimension(std::string_view s)
{
    if (s == "density")
        return Dimension::Density;
    if (s == "video_diversity")
        return Dimension::VideoDiversity;
    if (s == "user_diversity")
        return Dimension::UserDiversity;
    if (s == "user_class")
        return Dimension::UserClass;
    if (s == "poi")
        return Dimension::Poi;
    return std::nullopt;
}

struct BreakdownRow {
    std::string group;
    std::size_t nodes = 0;
    Tally tally;
};

/// Hit rates grouped by node decile of a max-min normalised measure (request
/// count, distinct videos, distinct users), by user class or by PoI label.
/// Nodes without requests are left out of the decile groupings.
inline std::vector<BreakdownRow> breakdown(const MetricsReport& r, Dimension dim)
{
    std::vector<BreakdownRow> out;
    if (dim == Dimension::UserClass) {
        out.push_back({"single_location", 0, r.single_location});
        out.push_back({"multi_location", 0, r.multi_location});
        return out;
    }
    if (dim == Dimension::Poi) {
        std::map<std::string, BreakdownRow> groups;
        for (const auto& n : r.nodes) {
            auto& g = groups[std::string(to_string(n.poi))];
            g.group = to_string(n.poi);
            ++g.nodes;
            g.tally += n.tally;
        }
        for (auto& [k, g] : groups)
            out.push_back(std::move(g));
        return out;
    }
    std::vector<const NodeReport*> active;
    std::vector<double> measure;
    for (const auto& n : r.nodes) {
        if (n.tally.requests == 0)
            continue;
        active.push_back(&n);
        measure.push_back(static_cast<double>(dim == Dimension::Density ? n.tally.requests
                : dim == Dimension::VideoDiversity                      ? n.unique_videos
                                                                        : n.unique_users));
    }
    const auto norm = detail::max_min_normalize(measure);
    out.resize(10);
    for (std::size_t d = 0; d < 10; ++d)
        out[d].group = "decile_" + std::to_string(d + 1);
    for (std::size_t i = 0; i < active.size(); ++i) {
        const auto d = std::min<std::size_t>(9, static_cast<std::size_t>(std::floor(norm[i] * 10.0)));
        ++out[d].nodes;
        out[d].tally += active[i]->tally;
    }
    return out;
}

struct SweepRow {
    Strategy strategy = Strategy::LRU;
    std::int64_t capacity = 0;
    NodeKind kind = NodeKind::WiFiAP;
    MetricsReport report;
};

namespace detail {

// Runs fn(i) for i in [0, n) on `jobs` threads. The first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn)
{
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    std::atomic<std::size_t> next {0};
    std::exception_ptr error;
    std::mutex m;
    auto worker = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(m);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < jobs; ++t)
            pool.emplace_back(worker);
    }
    if (error)
        std::rethrow_exception(error);
}

} // namespace detail

/// One simulation per (strategy, capacity), sorted by strategy then capacity.
inline std::vector<SweepRow> capacity_sweep(const PreparedTrace& trace, std::span<const Strategy> strategies,
    std::span<const std::int64_t> capacities, const SimConfig& base, unsigned jobs = 1)
{
    if (!std::is_sorted(capacities.begin(), capacities.end()))
        throw UsageError("capacities must be ascending");
    std::vector<SweepRow> rows;
    for (auto s : strategies)
        for (auto c : capacities)
            rows.push_back({s, c, trace.kind(), {}});
    detail::parallel_for(rows.size(), jobs, [&](std::size_t i) {
        SimConfig cfg = base;
        cfg.strategy = rows[i].strategy;
        cfg.capacity = rows[i].capacity;
        rows[i].report = simulate(trace, cfg);
    });
    std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
        if (a.strategy != b.strategy)
            return to_string(a.strategy) < to_string(b.strategy);
        if (a.kind != b.kind)
            return to_string(a.kind) < to_string(b.kind);
        return a.capacity < b.capacity;
    });
    return rows;
}

} // namespace edgecache
