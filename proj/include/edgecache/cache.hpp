#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <variant>
#include <vector>

#include "edgecache/error.hpp"
#include "edgecache/rng.hpp"

namespace edgecache {

enum class Strategy : std::uint8_t { LRU, LFU, RR, GeoCollab };

inline constexpr std::array<Strategy, 4> kAllStrategies = {Strategy::LRU, Strategy::LFU, Strategy::RR, Strategy::GeoCollab};

inline std::string_view to_string(Strategy s)
{
    switch (s) {
    case Strategy::LRU: return "lru";
    case Strategy::LFU: return "lfu";
    case Strategy::RR: return "rr";
    case Strategy::GeoCollab: return "geocollab";
    }
    return "lru";
}

inline std::optional<Strategy> parse_strategy(std::string_view s)
{
    for (auto st : kAllStrategies)
        if (to_string(st) == s)
            return st;
    return std::nullopt;
}

template <class Key>
struct AccessResult {
    bool hit = false;
    std::optional<Key> evicted;

    friend bool operator==(const AccessResult&, const AccessResult&) = default;
};

/// Least recently used.
template <class Key, class Hash = std::hash<Key>>
class LruCache {
  public:
    explicit LruCache(std::size_t capacity)
        : capacity_(capacity)
    {
    }

    AccessResult<Key> access(const Key& k)
    {
        if (capacity_ == 0)
            return {};
        if (auto it = pos_.find(k); it != pos_.end()) {
            order_.splice(order_.begin(), order_, it->second);
            return {true, std::nullopt};
        }
        AccessResult<Key> r;
        if (order_.size() == capacity_) {
            r.evicted = order_.back();
            pos_.erase(order_.back());
            order_.pop_back();
        }
        order_.push_front(k);
        pos_[k] = order_.begin();
        return r;
    }

    bool contains(const Key& k) const { return pos_.count(k) != 0; }
    std::size_t size() const { return order_.size(); }
    std::size_t capacity() const { return capacity_; }

    /// Most recent first.
    std::vector<Key> contents() const { return {order_.begin(), order_.end()}; }

  private:
    std::size_t capacity_;
    std::list<Key> order_;
    std::unordered_map<Key, typename std::list<Key>::iterator, Hash> pos_;
};

/// Least frequently used; ties go to the least recently used item among the
/// minimum-count ones. Counts cover cached items only unless `keep_counts`
/// is set, in which case an evicted item's count survives for its return.
template <class Key, class Hash = std::hash<Key>>
class LfuCache {
  public:
    explicit LfuCache(std::size_t capacity, bool keep_counts = false)
        : capacity_(capacity)
        , keep_counts_(keep_counts)
    {
    }

    AccessResult<Key> access(const Key& k)
    {
        if (capacity_ == 0)
            return {};
        if (auto it = entries_.find(k); it != entries_.end()) {
            bump(it->second, k);
            return {true, std::nullopt};
        }
        AccessResult<Key> r;
        if (entries_.size() == capacity_) {
            auto low = buckets_.begin();
            const Key victim = low->second.back();
            low->second.pop_back();
            if (keep_counts_)
                ghosts_[victim] = low->first;
            if (low->second.empty())
                buckets_.erase(low);
            entries_.erase(victim);
            r.evicted = victim;
        }
        std::uint64_t count = 1;
        if (keep_counts_) {
            if (auto g = ghosts_.find(k); g != ghosts_.end()) {
                count = g->second + 1;
                ghosts_.erase(g);
            }
        }
        auto& bucket = buckets_[count];
        bucket.push_front(k);
        entries_[k] = {count, bucket.begin()};
        return r;
    }

    bool contains(const Key& k) const { return entries_.count(k) != 0; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }

    std::uint64_t count(const Key& k) const
    {
        auto it = entries_.find(k);
        return it == entries_.end() ? 0 : it->second.count;
    }

    std::vector<Key> contents() const
    {
        std::vector<Key> out;
        for (const auto& [c, items] : buckets_)
            out.insert(out.end(), items.begin(), items.end());
        return out;
    }

  private:
    struct Entry {
        std::uint64_t count = 0;
        typename std::list<Key>::iterator pos;
    };

    void bump(Entry& e, const Key& k)
    {
        auto old = buckets_.find(e.count);
        old->second.erase(e.pos);
        if (old->second.empty())
            buckets_.erase(old);
        ++e.count;
        auto& bucket = buckets_[e.count];
        bucket.push_front(k);
        e.pos = bucket.begin();
    }

    std::size_t capacity_;
    bool keep_counts_;
    std::map<std::uint64_t, std::list<Key>> buckets_; // front = most recent
    std::unordered_map<Key, Entry, Hash> entries_;
    std::unordered_map<Key, std::uint64_t, Hash> ghosts_;
};

/// Random replacement. Items occupy slots in insertion order; the victim is
/// slot `rng.next() % size`, and the newcomer takes the victim's slot.
template <class Key, class Hash = std::hash<Key>>
class RandomCache {
  public:
    RandomCache(std::size_t capacity, std::uint64_t seed)
        : capacity_(capacity)
        , rng_(seed)
    {
    }

    AccessResult<Key> access(const Key& k)
    {
        if (capacity_ == 0)
            return {};
        if (pos_.count(k))
            return {true, std::nullopt};
        AccessResult<Key> r;
        if (slots_.size() == capacity_) {
            const auto idx = static_cast<std::size_t>(rng_.below(slots_.size()));
            r.evicted = slots_[idx];
            pos_.erase(slots_[idx]);
            slots_[idx] = k;
            pos_[k] = idx;
        } else {
            pos_[k] = slots_.size();
            slots_.push_back(k);
        }
        return r;
    }

    bool contains(const Key& k) const { return pos_.count(k) != 0; }
    std::size_t size() const { return slots_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::vector<Key> contents() const { return slots_; }

  private:
    std::size_t capacity_;
    Rng rng_;
    std::vector<Key> slots_;
    std::unordered_map<Key, std::size_t, Hash> pos_;
};

/// Plan-driven cache for the geo-collaborative strategy. Contents change only
/// when a new plan is installed. With `online_fill`, slots the plan leaves
/// free are run as a small LRU filled on misses.
template <class Key, class Hash = std::hash<Key>>
class PlanCache {
  public:
    PlanCache(std::size_t capacity, bool online_fill)
        : capacity_(capacity)
        , online_fill_(online_fill)
        , fill_(capacity)
    {
    }

    void install(const std::vector<Key>& plan)
    {
        if (plan.size() > capacity_)
            throw Error(Error::Kind::Internal, "plan larger than cache capacity");
        plan_ = std::unordered_set<Key, Hash>(plan.begin(), plan.end());
        plan_order_ = plan;
        fill_ = LruCache<Key, Hash>(capacity_ - plan_.size());
    }

    AccessResult<Key> access(const Key& k)
    {
        if (capacity_ == 0)
            return {};
        if (plan_.count(k))
            return {true, std::nullopt};
        if (online_fill_)
            return fill_.access(k);
        return {};
    }

    bool contains(const Key& k) const { return plan_.count(k) != 0 || fill_.contains(k); }
    std::size_t size() const { return plan_.size() + fill_.size(); }
    std::size_t capacity() const { return capacity_; }

    std::vector<Key> contents() const
    {
        auto out = plan_order_;
        auto extra = fill_.contents();
        out.insert(out.end(), extra.begin(), extra.end());
        return out;
    }

  private:
    std::size_t capacity_;
    bool online_fill_;
    std::unordered_set<Key, Hash> plan_;
    std::vector<Key> plan_order_;
    LruCache<Key, Hash> fill_;
};

struct CacheOptions {
    bool lfu_keep_counts = false;
    bool online_fill = false;
    std::uint64_t seed = 1;
};

/// One node's cache under any of the four strategies.
template <class Key, class Hash = std::hash<Key>>
class CacheState {
  public:
    CacheState(Strategy s, std::size_t capacity, const CacheOptions& opt = {})
        : strategy_(s)
        , impl_(make(s, capacity, opt))
    {
    }

    Strategy strategy() const { return strategy_; }

    AccessResult<Key> access(const Key& k)
    {
        return std::visit([&](auto& c) { return c.access(k); }, impl_);
    }

    bool contains(const Key& k) const
    {
        return std::visit([&](const auto& c) { return c.contains(k); }, impl_);
    }

    std::size_t size() const
    {
        return std::visit([](const auto& c) { return c.size(); }, impl_);
    }

    std::size_t capacity() const
    {
        return std::visit([](const auto& c) { return c.capacity(); }, impl_);
    }

    std::vector<Key> contents() const
    {
        return std::visit([](const auto& c) { return c.contents(); }, impl_);
    }

    /// Replaces the contents of a geo-collaborative cache.
    void install_plan(const std::vector<Key>& plan)
    {
        auto* p = std::get_if<PlanCache<Key, Hash>>(&impl_);
        if (!p)
            throw UsageError("plans apply to geocollab caches only");
        p->install(plan);
    }

  private:
    using Impl = std::variant<LruCache<Key, Hash>, LfuCache<Key, Hash>, RandomCache<Key, Hash>, PlanCache<Key, Hash>>;

    static Impl make(Strategy s, std::size_t capacity, const CacheOptions& opt)
    {
        switch (s) {
        case Strategy::LRU: return LruCache<Key, Hash>(capacity);
        case Strategy::LFU: return LfuCache<Key, Hash>(capacity, opt.lfu_keep_counts);
        case Strategy::RR: return RandomCache<Key, Hash>(capacity, opt.seed);
        case Strategy::GeoCollab: return PlanCache<Key, Hash>(capacity, opt.online_fill);
        }
        throw UsageError("unknown strategy");
    }

    Strategy strategy_;
    Impl impl_;
};

} // namespace edgecache
