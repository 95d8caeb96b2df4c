#pragma once

// Deliberately naive re-implementation of the simulator: linear scans, flat
// vectors, string keys. Slow, but small enough to check by eye. Used to
// cross-check the fast path on small inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "edgecache/cache.hpp"
#include "edgecache/geo.hpp"
#include "edgecache/rng.hpp"
#include "edgecache/sim.hpp"
#include "edgecache/trace.hpp"

namespace edgecache::reference {

/// Flat-vector cache with the same observable behaviour as CacheState.
class NaiveCache {
  public:
    NaiveCache(Strategy s, std::size_t capacity, const CacheOptions& opt)
        : strategy_(s)
        , capacity_(capacity)
        , keep_counts_(opt.lfu_keep_counts)
        , online_fill_(opt.online_fill)
        , rng_(opt.seed)
    {
    }

    AccessResult<std::string> access(const std::string& v)
    {
        ++tick_;
        if (capacity_ == 0)
            return {};
        if (strategy_ == Strategy::GeoCollab) {
            if (std::find(plan_.begin(), plan_.end(), v) != plan_.end())
                return {true, std::nullopt};
            if (!online_fill_)
                return {};
            return lru_access(v, capacity_ - plan_.size());
        }
        if (strategy_ == Strategy::LRU)
            return lru_access(v, capacity_);
        for (auto& e : items_)
            if (e.key == v) {
                ++e.count;
                e.last = tick_;
                return {true, std::nullopt};
            }
        AccessResult<std::string> r;
        std::size_t slot = items_.size();
        if (items_.size() == capacity_) {
            if (strategy_ == Strategy::RR) {
                slot = static_cast<std::size_t>(rng_.next() % items_.size());
            } else {
                slot = 0;
                for (std::size_t i = 1; i < items_.size(); ++i)
                    if (items_[i].count < items_[slot].count
                        || (items_[i].count == items_[slot].count && items_[i].last < items_[slot].last))
                        slot = i;
                if (keep_counts_)
                    ghost_[items_[slot].key] = items_[slot].count;
            }
            r.evicted = items_[slot].key;
        }
        std::uint64_t count = 1;
        if (keep_counts_ && ghost_.count(v)) {
            count = ghost_[v] + 1;
            ghost_.erase(v);
        }
        Item e {v, count, tick_};
        if (slot == items_.size())
            items_.push_back(e);
        else
            items_[slot] = e;
        return r;
    }

    void install(std::vector<std::string> plan)
    {
        plan_ = std::move(plan);
        items_.clear();
    }

  private:
    struct Item {
        std::string key;
        std::uint64_t count = 0;
        std::uint64_t last = 0;
    };

    AccessResult<std::string> lru_access(const std::string& v, std::size_t cap)
    {
        if (cap == 0)
            return {};
        for (auto& e : items_)
            if (e.key == v) {
                e.last = tick_;
                return {true, std::nullopt};
            }
        AccessResult<std::string> r;
        if (items_.size() == cap) {
            std::size_t oldest = 0;
            for (std::size_t i = 1; i < items_.size(); ++i)
                if (items_[i].last < items_[oldest].last)
                    oldest = i;
            r.evicted = items_[oldest].key;
            items_.erase(items_.begin() + static_cast<std::ptrdiff_t>(oldest));
        }
        items_.push_back({v, 1, tick_});
        return r;
    }

    Strategy strategy_;
    std::size_t capacity_;
    bool keep_counts_;
    bool online_fill_;
    Rng rng_;
    std::uint64_t tick_ = 0;
    std::vector<Item> items_;
    std::vector<std::string> plan_;
    std::map<std::string, std::uint64_t> ghost_;
};

namespace detail {

struct WindowEntry {
    std::size_t loc;
    std::string user;
    std::string video;
    bool multi;
};

struct Planner {
    std::size_t n = 0;
    std::size_t capacity = 0;
    double default_decay = kDefaultDecay;
    std::map<std::string, double> decay;
    std::vector<double> r;
    std::vector<std::map<std::string, double>> rho;
    std::vector<std::vector<std::string>> plans;

    std::vector<std::vector<std::string>> step(const std::vector<WindowEntry>& w)
    {
        // Migration ratios and rank.
        std::map<std::string, std::vector<std::size_t>> seq;
        for (const auto& e : w)
            if (e.multi) {
                auto& s = seq[e.user];
                if (s.empty() || s.back() != e.loc)
                    s.push_back(e.loc);
            }
        std::vector<std::vector<double>> o(n, std::vector<double>(n, 0.0));
        std::vector<double> users_at(n, 0.0);
        for (const auto& [u, s] : seq) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto visits = static_cast<double>(std::count(s.begin(), s.end(), i));
                if (visits == 0)
                    continue;
                users_at[i] += 1;
                for (std::size_t k = 0; k < s.size(); ++k)
                    if (s[k] == i)
                        o[i][k + 1 < s.size() ? s[k + 1] : i] += 1.0 / visits;
            }
        }
        bool any = false;
        for (std::size_t i = 0; i < n; ++i)
            if (users_at[i] > 0)
                for (std::size_t l = 0; l < n; ++l) {
                    o[i][l] /= users_at[i];
                    any = any || o[i][l] != 0.0;
                }
        if (any) {
            std::vector<double> next(n, 0.0);
            for (std::size_t l = 0; l < n; ++l)
                for (std::size_t i = 0; i < n; ++i)
                    next[l] += o[i][l] * r[i];
            double total = 0;
            for (auto& x : next) {
                if (x <= 0)
                    x = kRankFloor;
                total += x;
            }
            for (auto& x : next)
                x /= total;
            r = next;
        }

        // rho update from single-location requests.
        std::vector<std::map<std::string, std::uint64_t>> single(n);
        std::vector<std::set<std::string>> requested(n), singles(n), multis(n);
        std::map<std::string, std::map<std::size_t, double>> multi_counts;
        for (const auto& e : w) {
            requested[e.loc].insert(e.video);
            if (e.multi) {
                multis[e.loc].insert(e.user);
                multi_counts[e.user][e.loc] += 1;
            } else {
                singles[e.loc].insert(e.user);
                ++single[e.loc][e.video];
            }
        }
        for (std::size_t l = 0; l < n; ++l) {
            for (auto& [v, x] : rho[l]) {
                auto it = decay.find(v);
                x *= std::exp(-(it == decay.end() ? default_decay : it->second));
            }
            for (const auto& [v, c] : single[l])
                rho[l][v] += static_cast<double>(c);
        }

        std::vector<std::vector<std::string>> next_plans(n);
        for (std::size_t l = 0; l < n; ++l) {
            // Multi-location score by direct triple sum.
            std::set<std::string> candidates;
            for (const auto& p : plans)
                candidates.insert(p.begin(), p.end());
            double at_l = 0;
            for (const auto& [u, m] : multi_counts)
                if (m.count(l))
                    at_l += m.at(l);
            std::vector<std::pair<std::string, double>> z;
            for (const auto& v : candidates) {
                double score = 0;
                for (const auto& [u, m] : multi_counts) {
                    if (!m.count(l))
                        continue;
                    double total = 0;
                    for (const auto& [j, c] : m)
                        total += c;
                    for (std::size_t j = 0; j < n; ++j) {
                        const bool in_plan = std::find(plans[j].begin(), plans[j].end(), v) != plans[j].end();
                        const double f = m.count(j) ? m.at(j) / total : 0.0;
                        if (in_plan)
                            score += r[j] * (m.at(l) / at_l) * f;
                    }
                }
                if (score > 0)
                    z.emplace_back(v, score);
            }
            std::vector<std::pair<std::string, double>> y;
            for (const auto& v : requested[l])
                if (rho[l].count(v) && rho[l][v] > 0)
                    y.emplace_back(v, rho[l][v]);
            auto by_value = [](const auto& a, const auto& b) {
                return a.second != b.second ? a.second > b.second : a.first < b.first;
            };
            std::sort(y.begin(), y.end(), by_value);
            std::sort(z.begin(), z.end(), by_value);
            const auto users = singles[l].size() + multis[l].size();
            const double split = users == 0 ? 1.0 : static_cast<double>(singles[l].size()) / static_cast<double>(users);
            const auto ny = std::min(capacity, static_cast<std::size_t>(std::ceil(split * static_cast<double>(capacity) - 1e-9)));
            auto& plan = next_plans[l];
            auto add = [&](const std::string& v) {
                if (plan.size() < capacity && std::find(plan.begin(), plan.end(), v) == plan.end())
                    plan.push_back(v);
            };
            std::size_t yi = 0;
            while (yi < y.size() && plan.size() < ny)
                add(y[yi++].first);
            for (const auto& [v, s] : z)
                add(v);
            while (yi < y.size())
                add(y[yi++].first);
        }
        plans = next_plans;
        return plans;
    }
};

} // namespace detail

/// Naive simulator; must agree exactly with edgecache::run.
inline MetricsReport run(std::span<const RequestRecord> records, std::span<const InfrastructureNode> all_nodes,
    const SimConfig& config, const std::map<std::string, int>& categories = {})
{
    config.validate();
    std::vector<InfrastructureNode> nodes;
    for (const auto& n : all_nodes)
        if (n.kind == config.kind)
            nodes.push_back(configured_node(n, config));

    std::vector<RequestRecord> recs(records.begin(), records.end());
    std::stable_sort(recs.begin(), recs.end(), [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
    const int off = config.utc_offset_hours;

    // Route by linear scan.
    std::vector<long> node_of(recs.size(), -1);
    for (std::size_t i = 0; i < recs.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double d = haversine(recs[i].position, nodes[k].position);
            if (d > nodes[k].radius_m)
                continue;
            if (d < best || (d == best && nodes[k].id < nodes[static_cast<std::size_t>(node_of[i])].id)) {
                best = d;
                node_of[i] = static_cast<long>(k);
            }
        }
    }

    // User-day classes from node identity, or cell when out of range.
    std::map<std::pair<std::string, std::int64_t>, std::set<std::string>> places;
    auto place = [&](std::size_t i) {
        if (node_of[i] >= 0)
            return "node:" + nodes[static_cast<std::size_t>(node_of[i])].id;
        const auto c = cell_of(recs[i].position);
        return "cell:" + std::to_string(c.row) + "," + std::to_string(c.col);
    };
    for (std::size_t i = 0; i < recs.size(); ++i)
        places[{recs[i].user_id, day_index(recs[i].timestamp, off)}].insert(place(i));
    std::vector<bool> multi(recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i)
        multi[i] = places[{recs[i].user_id, day_index(recs[i].timestamp, off)}].size() >= 2;

    if (config.immobile_counterfactual) {
        std::map<std::pair<std::string, std::int64_t>, long> first;
        for (std::size_t i = 0; i < recs.size(); ++i) {
            const std::pair<std::string, std::int64_t> key {recs[i].user_id, day_index(recs[i].timestamp, off)};
            if (multi[i] && node_of[i] >= 0 && !first.count(key))
                first[key] = node_of[i];
        }
        for (std::size_t i = 0; i < recs.size(); ++i) {
            auto it = first.find({recs[i].user_id, day_index(recs[i].timestamp, off)});
            if (multi[i] && it != first.end())
                node_of[i] = it->second;
        }
    }

    // Node filter.
    std::vector<bool> in_scope(nodes.size(), true);
    bool filtered = config.top_fraction < 1.0;
    if (filtered) {
        std::vector<std::pair<long, std::string>> load;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            load.emplace_back(-static_cast<long>(std::count(node_of.begin(), node_of.end(), static_cast<long>(k))), nodes[k].id);
        auto sorted = load;
        std::sort(sorted.begin(), sorted.end());
        const auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(config.top_fraction * static_cast<double>(nodes.size()) - 1e-9)));
        std::set<std::string> kept;
        for (std::size_t k = 0; k < std::min(keep, sorted.size()); ++k)
            kept.insert(sorted[k].second);
        for (std::size_t k = 0; k < nodes.size(); ++k)
            in_scope[k] = kept.count(nodes[k].id) != 0;
    }
    std::vector<std::size_t> scope;
    std::vector<long> loc(nodes.size(), -1);
    for (std::size_t k = 0; k < nodes.size(); ++k)
        if (in_scope[k]) {
            loc[k] = static_cast<long>(scope.size());
            scope.push_back(k);
        }

    std::vector<NaiveCache> caches;
    for (auto k : scope) {
        CacheOptions opt;
        opt.lfu_keep_counts = config.lfu_keep_counts;
        opt.online_fill = config.online_fill;
        opt.seed = derive_seed(config.seed, k);
        caches.emplace_back(config.strategy, static_cast<std::size_t>(config.capacity), opt);
    }
    detail::Planner planner;
    planner.n = scope.size();
    planner.capacity = static_cast<std::size_t>(config.capacity);
    planner.default_decay = config.default_decay;
    for (const auto& [v, c] : categories)
        if (c >= 0 && static_cast<std::size_t>(c) < config.category_decay.size())
            planner.decay[v] = config.category_decay[static_cast<std::size_t>(c)];
    planner.r.assign(scope.size(), scope.empty() ? 0.0 : 1.0 / static_cast<double>(scope.size()));
    planner.rho.resize(scope.size());
    planner.plans.resize(scope.size());
    std::vector<detail::WindowEntry> window;

    MetricsReport rep;
    rep.strategy = config.strategy;
    rep.kind = config.kind;
    rep.capacity = config.capacity;
    std::vector<Tally> tally(scope.size());
    std::vector<std::set<std::string>> videos(scope.size()), users(scope.size());
    std::set<std::string> seen, served, hit_users;
    std::map<long, std::pair<std::int64_t, std::int64_t>> slot_use; // node -> (slot, used)
    std::map<long, std::int64_t> slot_of;
    const std::int64_t first_day = recs.empty() ? 0 : day_index(recs.front().timestamp, off);
    std::int64_t period = 0;

    for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto& q = recs[i];
        const auto day = day_index(q.timestamp, off);
        const bool out_of_range = node_of[i] < 0;
        if ((filtered && out_of_range) || (!out_of_range && !in_scope[static_cast<std::size_t>(node_of[i])])) {
            ++rep.out_of_scope;
            continue;
        }
        if (config.strategy == Strategy::GeoCollab) {
            while (period < floor_div(day - first_day, config.replan_days)) {
                auto plans = planner.step(window);
                window.clear();
                for (std::size_t k = 0; k < caches.size(); ++k)
                    caches[k].install(plans[k]);
                ++period;
            }
        }
        const bool counted = day >= first_day + config.warmup_days;
        Tally& cls = multi[i] ? rep.multi_location : rep.single_location;
        if (counted) {
            seen.insert(q.user_id);
            ++rep.total.requests;
            ++cls.requests;
        }
        if (out_of_range) {
            if (counted) {
                ++rep.total.out_of_range;
                ++cls.out_of_range;
            }
            continue;
        }
        const auto k = static_cast<std::size_t>(loc[static_cast<std::size_t>(node_of[i])]);
        if (counted) {
            ++tally[k].requests;
            videos[k].insert(q.video_id);
            users[k].insert(q.user_id);
        }
        window.push_back({k, q.user_id, q.video_id, multi[i]});
        const auto slot = floor_div(q.timestamp, config.slot_seconds);
        auto& use = slot_use[static_cast<long>(k)];
        if (!slot_of.count(static_cast<long>(k)) || slot_of[static_cast<long>(k)] != slot) {
            slot_of[static_cast<long>(k)] = slot;
            use = {0, 0};
        }
        if (use.first + 1 > config.concurrency() || use.second + config.video_size > config.bandwidth()) {
            if (counted) {
                ++rep.total.capacity_rejected;
                ++cls.capacity_rejected;
                ++tally[k].capacity_rejected;
            }
            continue;
        }
        use.first += 1;
        use.second += config.video_size;
        const bool hit = caches[k].access(q.video_id).hit;
        if (!counted)
            continue;
        served.insert(q.user_id);
        if (hit)
            hit_users.insert(q.user_id);
        for (Tally* t : {&rep.total, &cls, &tally[k]}) {
            ++t->edge_served;
            ++(hit ? t->cache_hits : t->cache_misses);
            t->origin_fetches += hit ? 0 : 1;
        }
    }
    for (std::size_t k = 0; k < scope.size(); ++k) {
        const auto& n = nodes[scope[k]];
        rep.nodes.push_back({n.id, n.kind, cell_of(n.position), n.poi, tally[k], videos[k].size(), users[k].size()});
    }
    rep.users = seen.size();
    rep.users_edge_served = served.size();
    rep.users_cache_served = hit_users.size();
    return rep;
}

} // namespace edgecache::reference
