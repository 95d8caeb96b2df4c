#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "edgecache/error.hpp"

namespace edgecache {

using VideoKey = std::uint32_t;
using UserKey = std::uint32_t;

inline constexpr double kRankFloor = 1e-6;
inline constexpr double kDefaultDecay = 0.3;

/// Square matrix of migration ratios, o[i][l].
using RatioMatrix = std::vector<std::vector<double>>;

/// A multi-location user's window: the ordered locations they were seen at
/// (consecutive repeats collapsed) and their request count per location.
struct Traveller {
    std::vector<std::size_t> visits;
    std::map<std::size_t, std::uint64_t> requests;
};

/// o[i][l]: share of the multi-location users seen at i whose next location
/// after i is l. A user seen at i several times splits their unit weight
/// evenly over those visits; a visit that ends the window counts as staying.
inline RatioMatrix migration_ratios(std::span<const Traveller> travellers, std::size_t locations)
{
    RatioMatrix o(locations, std::vector<double>(locations, 0.0));
    std::vector<double> users(locations, 0.0);
    for (const auto& t : travellers) {
        std::map<std::size_t, std::size_t> visits_at;
        for (auto v : t.visits)
            ++visits_at[v];
        for (std::size_t k = 0; k < t.visits.size(); ++k) {
            const auto i = t.visits[k];
            const auto next = k + 1 < t.visits.size() ? t.visits[k + 1] : i;
            o[i][next] += 1.0 / static_cast<double>(visits_at[i]);
        }
        for (const auto& [i, n] : visits_at)
            users[i] += 1.0;
    }
    for (std::size_t i = 0; i < locations; ++i)
        if (users[i] > 0.0)
            for (auto& v : o[i])
                v /= users[i];
    return o;
}

/// One step of r_l = M * sum_i o_il r_i followed by normalisation. Locations
/// left at zero get `floor` first. M cancels in the normalisation, so it is
/// only validated; applying it before the floor would make r depend on M.
/// An all-zero o leaves r unchanged.
inline std::vector<double> update_rank(
    std::span<const double> r, const RatioMatrix& o, double control = 1.0, double floor = kRankFloor)
{
    const std::size_t n = r.size();
    if (o.size() != n)
        throw UsageError("rank and ratio matrix sizes differ");
    if (!(control > 0.0))
        throw UsageError("control parameter must be positive");
    std::vector<double> next(n, 0.0);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l)
            if (o[i][l] != 0.0) {
                any = true;
                next[l] += o[i][l] * r[i];
            }
    if (!any)
        return {r.begin(), r.end()};
    double total = 0.0;
    for (auto& v : next) {
        if (v <= 0.0)
            v = floor;
        total += v;
    }
    for (auto& v : next)
        v /= total;
    return next;
}

/// z_l(v) = sum over users i seen at l, over locations j, of
/// r_j * d_li * f_ij * [v in previous plan of j].
/// d_li is i's share of the travellers' requests at l, f_ij the share of i's
/// requests made at j. Only videos with a positive score are returned.
inline std::unordered_map<VideoKey, double> multi_location_scores(std::size_t l, std::span<const double> r,
    std::span<const Traveller> travellers, std::span<const std::vector<VideoKey>> previous_plans)
{
    std::uint64_t at_l = 0;
    for (const auto& t : travellers)
        if (auto it = t.requests.find(l); it != t.requests.end())
            at_l += it->second;
    std::unordered_map<VideoKey, double> z;
    if (at_l == 0)
        return z;
    std::vector<double> weight(r.size(), 0.0);
    for (const auto& t : travellers) {
        auto it = t.requests.find(l);
        if (it == t.requests.end() || it->second == 0)
            continue;
        const double d = static_cast<double>(it->second) / static_cast<double>(at_l);
        std::uint64_t total = 0;
        for (const auto& [j, n] : t.requests)
            total += n;
        for (const auto& [j, n] : t.requests)
            weight[j] += d * static_cast<double>(n) / static_cast<double>(total);
    }
    for (std::size_t j = 0; j < weight.size(); ++j) {
        const double w = weight[j] * r[j];
        if (w <= 0.0)
            continue;
        for (auto v : previous_plans[j])
            z[v] += w;
    }
    return z;
}

/// rho <- window count + exp(-mu) * rho, for every video with history or new requests.
template <class Key, class MuFn>
void local_popularity_update(std::unordered_map<Key, double>& rho, const std::unordered_map<Key, std::uint64_t>& counts,
    MuFn&& mu_of)
{
    for (auto& [v, value] : rho)
        value *= std::exp(-mu_of(v));
    for (const auto& [v, c] : counts)
        rho[v] += static_cast<double>(c);
}

namespace detail {

template <class Key>
std::vector<std::pair<Key, double>> ranked_positive(std::vector<std::pair<Key, double>> items)
{
    std::erase_if(items, [](const auto& p) { return !(p.second > 0.0); });
    std::sort(items.begin(), items.end(),
        [](const auto& a, const auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    return items;
}

} // namespace detail

/// x = y u z. y takes the ceil(split * C) best videos by decayed popularity,
/// z the remaining slots by cross-location score without repeating y. Slots
/// one part cannot fill go to the other part's next candidates. Ties by key.
template <class Key>
std::vector<Key> plan_cache(std::size_t capacity, double split, std::vector<std::pair<Key, double>> popularity,
    std::vector<std::pair<Key, double>> scores)
{
    if (!(split >= 0.0 && split <= 1.0))
        throw UsageError("split must be in [0, 1]");
    const auto y_slots = std::min(capacity,
        static_cast<std::size_t>(std::ceil(split * static_cast<double>(capacity) - 1e-9)));
    const auto pop = detail::ranked_positive(std::move(popularity));
    const auto sc = detail::ranked_positive(std::move(scores));
    std::vector<Key> plan;
    std::unordered_set<Key> chosen;
    auto take = [&](const Key& k) {
        if (plan.size() < capacity && chosen.insert(k).second)
            plan.push_back(k);
    };
    std::size_t pi = 0, si = 0;
    for (; pi < pop.size() && plan.size() < y_slots; ++pi)
        take(pop[pi].first);
    for (; si < sc.size() && plan.size() < capacity; ++si)
        take(sc[si].first);
    for (; pi < pop.size() && plan.size() < capacity; ++pi)
        take(pop[pi].first);
    return plan;
}

/// What one window (a day) of requests tells the planner.
struct WindowObservation {
    /// Per location: requests by single-location users, per video.
    std::vector<std::unordered_map<VideoKey, std::uint64_t>> single_counts;
    /// Per location: every video requested there.
    std::vector<std::unordered_set<VideoKey>> requested;
    /// Per location: distinct single- and multi-location users.
    std::vector<std::size_t> single_users;
    std::vector<std::size_t> multi_users;
    std::vector<Traveller> travellers;

    explicit WindowObservation(std::size_t locations = 0)
        : single_counts(locations)
        , requested(locations)
        , single_users(locations, 0)
        , multi_users(locations, 0)
    {
    }

    std::size_t locations() const { return requested.size(); }
};

/// Accumulates a window from requests fed in time order.
class WindowBuilder {
  public:
    explicit WindowBuilder(std::size_t locations)
        : obs_(locations)
        , seen_(locations)
    {
    }

    void add(std::size_t location, UserKey user, VideoKey video, bool multi_location)
    {
        obs_.requested[location].insert(video);
        if (seen_[location].insert(user).second)
            ++(multi_location ? obs_.multi_users : obs_.single_users)[location];
        if (!multi_location) {
            ++obs_.single_counts[location][video];
            return;
        }
        auto [it, fresh] = traveller_of_.try_emplace(user, obs_.travellers.size());
        if (fresh)
            obs_.travellers.emplace_back();
        auto& t = obs_.travellers[it->second];
        if (t.visits.empty() || t.visits.back() != location)
            t.visits.push_back(location);
        ++t.requests[location];
    }

    WindowObservation take()
    {
        WindowObservation out = std::move(obs_);
        const auto n = out.locations();
        obs_ = WindowObservation(n);
        seen_.assign(n, {});
        traveller_of_.clear();
        return out;
    }

  private:
    WindowObservation obs_;
    std::vector<std::unordered_set<UserKey>> seen_;
    std::map<UserKey, std::size_t> traveller_of_;
};

struct GeoCollabOptions {
    double control = 1.0;
    double rank_floor = kRankFloor;
    double default_decay = kDefaultDecay;
};

/// Cross-location planner state for a fixed set of locations.
class GeoCollabState {
  public:
    GeoCollabState(std::vector<std::size_t> capacities, std::vector<double> video_decay, GeoCollabOptions opt = {})
        : capacities_(std::move(capacities))
        , decay_(std::move(video_decay))
        , opt_(opt)
        , r_(capacities_.size(), capacities_.empty() ? 0.0 : 1.0 / static_cast<double>(capacities_.size()))
        , rho_(capacities_.size())
        , plans_(capacities_.size())
    {
    }

    std::size_t locations() const { return capacities_.size(); }
    const std::vector<double>& rank() const { return r_; }
    const std::vector<std::vector<VideoKey>>& plans() const { return plans_; }
    const std::unordered_map<VideoKey, double>& popularity(std::size_t l) const { return rho_[l]; }

    double decay_of(VideoKey v) const
    {
        if (v < decay_.size() && decay_[v] >= 0.0)
            return decay_[v];
        return opt_.default_decay;
    }

    /// Consumes one window and returns the plans for the next slot.
    const std::vector<std::vector<VideoKey>>& step(const WindowObservation& w)
    {
        const auto n = locations();
        if (w.locations() != n)
            throw UsageError("window has the wrong number of locations");
        r_ = update_rank(r_, migration_ratios(w.travellers, n), opt_.control, opt_.rank_floor);
        for (std::size_t l = 0; l < n; ++l)
            local_popularity_update(rho_[l], w.single_counts[l], [this](VideoKey v) { return decay_of(v); });
        std::vector<std::vector<VideoKey>> next(n);
        for (std::size_t l = 0; l < n; ++l) {
            std::vector<std::pair<VideoKey, double>> pop;
            for (auto v : w.requested[l])
                if (auto it = rho_[l].find(v); it != rho_[l].end())
                    pop.emplace_back(v, it->second);
            auto z = multi_location_scores(l, r_, w.travellers, plans_);
            std::vector<std::pair<VideoKey, double>> sc(z.begin(), z.end());
            const auto users = w.single_users[l] + w.multi_users[l];
            const double split
                = users == 0 ? 1.0 : static_cast<double>(w.single_users[l]) / static_cast<double>(users);
            next[l] = plan_cache(capacities_[l], split, std::move(pop), std::move(sc));
        }
        plans_ = std::move(next);
        return plans_;
    }

  private:
    std::vector<std::size_t> capacities_;
    std::vector<double> decay_; // per video; negative = unknown category
    GeoCollabOptions opt_;
    std::vector<double> r_;
    std::vector<std::unordered_map<VideoKey, double>> rho_;
    std::vector<std::vector<VideoKey>> plans_;
};

} // namespace edgecache
