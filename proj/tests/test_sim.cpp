#include <random>
#include <set>

#include <gtest/gtest.h>

#include "edgecache/generator.hpp"
#include "edgecache/reference.hpp"
#include "edgecache/report.hpp"
#include "edgecache/sim.hpp"

using namespace edgecache;

namespace {

constexpr std::int64_t kDay0 = 1'704'038'400; // local midnight, UTC+8
const GeoPoint kHere {39.905, 116.305};

RequestRecord at(std::string user, std::int64_t t, GeoPoint p, std::string video)
{
    return {std::move(user), t, p, std::move(video)};
}

void expect_conserved(const Tally& t)
{
    EXPECT_EQ(t.requests, t.edge_served + t.out_of_range + t.capacity_rejected);
    EXPECT_EQ(t.edge_served, t.cache_hits + t.cache_misses);
    EXPECT_EQ(t.origin_fetches, t.cache_misses);
}

void expect_conserved(const MetricsReport& r)
{
    expect_conserved(r.total);
    expect_conserved(r.single_location);
    expect_conserved(r.multi_location);
    Tally nodes;
    for (const auto& n : r.nodes) {
        expect_conserved(n.tally);
        nodes += n.tally;
    }
    EXPECT_EQ(nodes.edge_served, r.total.edge_served);
    EXPECT_EQ(nodes.capacity_rejected, r.total.capacity_rejected);
    EXPECT_EQ(r.single_location.requests + r.multi_location.requests, r.total.requests);
}

// A small random city: nodes of both kinds and users wandering between a few
// hot spots, some of them out of every node's range.
struct RandomCase {
    std::vector<RequestRecord> records;
    std::vector<InfrastructureNode> nodes;
};

RandomCase random_case(std::uint64_t seed, std::size_t n_requests = 1000)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jitter(-0.004, 0.004);
    std::uniform_int_distribution<int> spot(0, 5), user(0, 29), video(0, 59), node_count(2, 12);
    std::uniform_int_distribution<std::int64_t> t(0, 3 * kSecondsPerDay - 1);
    RandomCase c;
    const int n_nodes = node_count(rng);
    for (int i = 0; i < n_nodes; ++i) {
        const auto kind = i % 3 == 2 ? NodeKind::CellularBS : NodeKind::WiFiAP;
        const int s = spot(rng);
        c.nodes.push_back(make_node("n" + std::to_string(i), kind,
            {39.9 + 0.01 * s + jitter(rng) / 4, 116.3 + jitter(rng) / 4}, kAllPoi[static_cast<std::size_t>(s) % 7]));
    }
    for (std::size_t i = 0; i < n_requests; ++i) {
        const int s = spot(rng);
        c.records.push_back(at("u" + std::to_string(user(rng)), kDay0 + t(rng),
            {39.9 + 0.01 * s + jitter(rng) / 8, 116.3 + jitter(rng) / 8}, "v" + std::to_string(video(rng))));
    }
    return c;
}

SimConfig tight(SimConfig c)
{
    c.ap_concurrency = 3;
    c.bs_concurrency = 4;
    c.ap_bandwidth = 5;
    c.bs_bandwidth = 6;
    return c;
}

} // namespace

TEST(Simulator, CompulsoryMissesOnly)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r;
    std::set<std::string> distinct;
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> v(0, 9);
    for (int i = 0; i < 200; ++i) {
        const auto id = "v" + std::to_string(v(rng));
        distinct.insert(id);
        r.push_back(at("u", kDay0 + i * 600, kHere, id));
    }
    SimConfig c;
    c.capacity = 10;
    for (auto s : {Strategy::LRU, Strategy::LFU, Strategy::RR}) {
        c.strategy = s;
        const auto rep = run(r, nodes, c);
        EXPECT_DOUBLE_EQ(rep.total.hit_rate(), 1.0 - static_cast<double>(distinct.size()) / 200.0);
    }
}

TEST(Simulator, ConcurrencyLimitRejects)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r {at("u1", kDay0 + 10, kHere, "x"), at("u2", kDay0 + 20, kHere, "y"),
        at("u3", kDay0 + 3600, kHere, "z")};
    SimConfig c;
    c.ap_concurrency = 1;
    const auto rep = run(r, nodes, c);
    EXPECT_EQ(rep.total.capacity_rejected, 1u);
    EXPECT_EQ(rep.total.edge_served, 2u);

    SimConfig b;
    b.ap_bandwidth = 3;
    b.video_size = 2;
    EXPECT_EQ(run(r, nodes, b).total.capacity_rejected, 1u);
}

TEST(Simulator, NoNodesOfKindMeansOutOfRange)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r {at("u1", kDay0, kHere, "x"), at("u2", kDay0 + 5, kHere, "x")};
    SimConfig c;
    c.kind = NodeKind::CellularBS;
    const auto rep = run(r, nodes, c);
    EXPECT_EQ(rep.total.out_of_range, 2u);
    EXPECT_EQ(service_rate(rep, ServiceMode::RequestLevel), 0.0);
    EXPECT_EQ(service_rate(rep, ServiceMode::UserLevel), 0.0);
}

TEST(Simulator, ServiceRateAllServed)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r {at("u1", kDay0, kHere, "x"), at("u2", kDay0 + 5, kHere, "y"),
        at("u3", kDay0 + 9, kHere, "x")};
    const auto rep = run(r, nodes, SimConfig {});
    EXPECT_EQ(service_rate(rep, ServiceMode::RequestLevel), 1.0);
    EXPECT_EQ(service_rate(rep, ServiceMode::UserLevel), 1.0);
    EXPECT_DOUBLE_EQ(service_rate(rep, ServiceMode::CacheRequestLevel), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(service_rate(rep, ServiceMode::CacheUserLevel), 1.0 / 3.0);
}

TEST(Simulator, ServiceRateMatchesRecount)
{
    const auto c = random_case(3);
    const auto rep = run(c.records, c.nodes, tight(SimConfig {}));
    const SpatialIndex idx(c.nodes);
    std::set<std::string> users, served;
    std::uint64_t in_range = 0;
    for (const auto& r : c.records) {
        users.insert(r.user_id);
        if (idx.nearest_in_range(r.position, NodeKind::WiFiAP))
            ++in_range;
    }
    EXPECT_EQ(rep.users, users.size());
    EXPECT_EQ(rep.total.edge_served + rep.total.capacity_rejected, in_range);
    EXPECT_LE(service_rate(rep, ServiceMode::UserLevel), 1.0);
    EXPECT_GE(service_rate(rep, ServiceMode::UserLevel), service_rate(rep, ServiceMode::CacheUserLevel));
}

TEST(Simulator, CapacityZeroHasNoHits)
{
    const auto c = random_case(4);
    SimConfig cfg;
    cfg.capacity = 0;
    for (auto s : kAllStrategies) {
        cfg.strategy = s;
        EXPECT_EQ(run(c.records, c.nodes, cfg).total.cache_hits, 0u);
    }
}

TEST(Simulator, ConservationAndAgreementWithReference)
{
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        const auto c = random_case(seed);
        std::map<std::string, int> categories;
        for (int v = 0; v < 60; v += 2)
            categories["v" + std::to_string(v)] = v % 5;
        for (auto kind : {NodeKind::WiFiAP, NodeKind::CellularBS})
            for (auto s : kAllStrategies)
                for (double top : {1.0, 0.5}) {
                    SimConfig cfg = tight(SimConfig {});
                    cfg.kind = kind;
                    cfg.strategy = s;
                    cfg.capacity = static_cast<std::int64_t>(1 + seed % 6);
                    cfg.seed = seed;
                    cfg.top_fraction = top;
                    cfg.immobile_counterfactual = seed % 2 == 0;
                    cfg.online_fill = seed % 3 == 0;
                    cfg.lfu_keep_counts = seed % 4 == 0;
                    cfg.warmup_days = static_cast<std::int64_t>(seed % 2);
                    cfg.category_decay = {0.0, 0.2, 0.5};
                    const auto fast = run(c.records, c.nodes, cfg, categories);
                    expect_conserved(fast);
                    const auto slow = reference::run(c.records, c.nodes, cfg, categories);
                    ASSERT_EQ(fast, slow) << "seed " << seed << " " << to_string(s) << " " << to_string(kind);
                }
    }
}

TEST(Simulator, DeterministicReportBytes)
{
    const auto c = random_case(5, 3000);
    for (auto s : kAllStrategies) {
        SimConfig cfg;
        cfg.strategy = s;
        cfg.capacity = 5;
        const auto first = to_json(run(c.records, c.nodes, cfg)).dump();
        for (int i = 0; i < 4; ++i)
            EXPECT_EQ(to_json(run(c.records, c.nodes, cfg)).dump(), first);
    }
}

TEST(Simulator, LruHitsNeverDropWithCapacity)
{
    // LRU has the inclusion property, so this holds request by request.
    const auto c = random_case(6, 4000);
    SimConfig cfg;
    const PreparedTrace p(c.records, c.nodes, cfg);
    std::uint64_t last = 0;
    for (std::int64_t cap = 0; cap <= 60; cap += 3) {
        cfg.capacity = cap;
        const auto hits = simulate(p, cfg).total.cache_hits;
        EXPECT_GE(hits, last);
        last = hits;
    }
}

TEST(Simulator, LargerRadiusNeverLosesCoverage)
{
    const auto c = random_case(7, 2000);
    std::uint64_t last_out = std::numeric_limits<std::uint64_t>::max();
    for (double radius : {10.0, 50.0, 100.0, 300.0, 1000.0, 5000.0}) {
        SimConfig cfg;
        cfg.ap_radius = radius;
        const auto out = run(c.records, c.nodes, cfg).total.out_of_range;
        EXPECT_LE(out, last_out);
        last_out = out;
    }
    EXPECT_EQ(last_out, 0u);
}

TEST(Simulator, ImmobileCounterfactualPinsMovers)
{
    const GeoPoint other {39.915, 116.305};
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere),
        make_node("b", NodeKind::WiFiAP, other)};
    // The mover requests x at a and then x again at b; a stayer asks for x at b.
    std::vector<RequestRecord> r {at("mover", kDay0 + 10, kHere, "x"), at("mover", kDay0 + 20, other, "x"),
        at("stayer", kDay0 + 30, other, "y")};
    const auto normal = run(r, nodes, SimConfig {});
    EXPECT_EQ(normal.multi_location.cache_hits, 0u);
    const auto pinned = immobile_counterfactual(r, nodes, SimConfig {});
    EXPECT_EQ(pinned.multi_location.cache_hits, 1u);
    EXPECT_EQ(pinned.nodes[0].tally.requests, 2u);
    EXPECT_EQ(pinned.nodes[1].tally.requests, 1u);

    std::vector<RequestRecord> still {at("s", kDay0, kHere, "x"), at("s", kDay0 + 5, kHere, "x"),
        at("t", kDay0 + 9, other, "x")};
    EXPECT_EQ(run(still, nodes, SimConfig {}), immobile_counterfactual(still, nodes, SimConfig {}));
}

TEST(Simulator, WarmupDaysAreNotCounted)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r {at("u", kDay0, kHere, "x"), at("u", kDay0 + kSecondsPerDay, kHere, "x")};
    SimConfig cfg;
    cfg.warmup_days = 1;
    const auto rep = run(r, nodes, cfg);
    EXPECT_EQ(rep.total.requests, 1u);
    EXPECT_EQ(rep.total.cache_hits, 1u);
}

TEST(Simulator, GeoCollabServesYesterdaysPopularVideos)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere)};
    std::vector<RequestRecord> r;
    for (int i = 0; i < 5; ++i)
        r.push_back(at("u" + std::to_string(i), kDay0 + i, kHere, "hot"));
    r.push_back(at("u9", kDay0 + 100, kHere, "cold"));
    r.push_back(at("u1", kDay0 + kSecondsPerDay + 7200, kHere, "hot"));
    r.push_back(at("u2", kDay0 + kSecondsPerDay + 7300, kHere, "cold"));
    SimConfig cfg;
    cfg.strategy = Strategy::GeoCollab;
    cfg.capacity = 1;
    const auto rep = run(r, nodes, cfg);
    EXPECT_EQ(rep.total.cache_hits, 1u); // only day 1's "hot"
}

TEST(TopNodes, FilterCases)
{
    std::vector<InfrastructureNode> nodes;
    std::vector<RequestRecord> r;
    for (int i = 0; i < 10; ++i) {
        const GeoPoint p {39.9 + 0.01 * i, 116.3};
        nodes.push_back(make_node("n" + std::to_string(i), NodeKind::WiFiAP, p));
        for (int k = 0; k <= (i * 7) % 10; ++k)
            r.push_back(at("u", kDay0 + k, p, "v"));
    }
    const auto all = top_nodes_filter(r, nodes, NodeKind::WiFiAP, 1.0);
    EXPECT_EQ(all.nodes.size(), 10u);
    EXPECT_EQ(all.records.size(), r.size());
    const auto top = top_nodes_filter(r, nodes, NodeKind::WiFiAP, 0.1);
    ASSERT_EQ(top.nodes.size(), 1u);
    EXPECT_EQ(top.nodes[0].id, "n7"); // load 10
    EXPECT_EQ(top.records.size(), 10u);
}

TEST(TopNodes, MatchesBruteForceSort)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto c = random_case(seed, 800);
        std::vector<InfrastructureNode> ap;
        for (const auto& n : c.nodes)
            if (n.kind == NodeKind::WiFiAP)
                ap.push_back(n);
        std::map<std::string, std::size_t> load;
        for (const auto& n : ap)
            load[n.id] = 0;
        for (const auto& r : c.records) {
            std::optional<std::size_t> best;
            double bd = 0;
            for (std::size_t i = 0; i < ap.size(); ++i) {
                const double d = haversine(r.position, ap[i].position);
                if (d <= ap[i].radius_m && (!best || d < bd || (d == bd && ap[i].id < ap[*best].id))) {
                    best = i;
                    bd = d;
                }
            }
            if (best)
                ++load[ap[*best].id];
        }
        std::vector<std::pair<std::size_t, std::string>> ranked;
        for (const auto& [id, n] : load)
            ranked.emplace_back(n, id);
        std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
        const auto keep = std::max<std::size_t>(1, (ap.size() + 2) / 3);
        std::set<std::string> want;
        for (std::size_t i = 0; i < keep; ++i)
            want.insert(ranked[i].second);
        std::set<std::string> got;
        for (const auto& n : top_nodes_filter(c.records, c.nodes, NodeKind::WiFiAP, 1.0 / 3.0).nodes)
            got.insert(n.id);
        EXPECT_EQ(got, want) << "seed " << seed;
    }
}

TEST(Breakdown, GroupsByHand)
{
    const GeoPoint other {39.915, 116.305};
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, kHere, PoiLabel::Campus),
        make_node("b", NodeKind::WiFiAP, other, PoiLabel::Hotel)};
    std::vector<RequestRecord> r {at("u1", kDay0, kHere, "x"), at("u1", kDay0 + 1, kHere, "x"),
        at("u1", kDay0 + 2, kHere, "x"), at("u1", kDay0 + 3, kHere, "y"), at("u2", kDay0, other, "z"),
        at("u2", kDay0 + 1, other, "w")};
    const auto rep = run(r, nodes, SimConfig {});
    const auto poi = breakdown(rep, Dimension::Poi);
    ASSERT_EQ(poi.size(), 2u);
    EXPECT_EQ(poi[0].group, "campus");
    EXPECT_DOUBLE_EQ(poi[0].tally.hit_rate(), 0.5);
    EXPECT_EQ(poi[1].group, "hotel");
    EXPECT_DOUBLE_EQ(poi[1].tally.hit_rate(), 0.0);
    const auto density = breakdown(rep, Dimension::Density);
    ASSERT_EQ(density.size(), 10u);
    EXPECT_EQ(density[0].nodes, 1u);  // b, 2 requests
    EXPECT_EQ(density[9].nodes, 1u);  // a, 4 requests
    const auto cls = breakdown(rep, Dimension::UserClass);
    EXPECT_EQ(cls[0].tally, rep.single_location);
    EXPECT_FALSE(parse_dimension("height"));
}

TEST(Sweep, MatchesIndividualRunsInAnyThreadCount)
{
    const auto c = random_case(9, 2000);
    SimConfig base = tight(SimConfig {});
    const PreparedTrace p(c.records, c.nodes, base);
    const std::vector<Strategy> strategies {Strategy::RR, Strategy::LRU, Strategy::GeoCollab};
    const std::vector<std::int64_t> caps {0, 1, 5, 20};
    const auto one = capacity_sweep(p, strategies, caps, base, 1);
    const auto three = capacity_sweep(p, strategies, caps, base, 3);
    ASSERT_EQ(one.size(), 12u);
    EXPECT_EQ(one[0].strategy, Strategy::GeoCollab);
    EXPECT_EQ(one[4].strategy, Strategy::LRU);
    for (std::size_t i = 0; i < one.size(); ++i) {
        EXPECT_EQ(one[i].report, three[i].report);
        SimConfig cfg = base;
        cfg.strategy = one[i].strategy;
        cfg.capacity = one[i].capacity;
        EXPECT_EQ(one[i].report, simulate(p, cfg));
    }
    const std::vector<std::int64_t> unsorted {5, 1};
    EXPECT_THROW(capacity_sweep(p, strategies, unsorted, base), UsageError);
    EXPECT_EQ(sweep_csv(one).substr(0, 17), "strategy,capacity");
}

TEST(SimConfig, Validation)
{
    SimConfig c;
    c.capacity = -1;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.top_fraction = 0;
    EXPECT_THROW(c.validate(), UsageError);
    c = {};
    c.slot_seconds = 0;
    EXPECT_THROW(c.validate(), UsageError);
}
