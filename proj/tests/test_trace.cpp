#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "edgecache/io.hpp"
#include "edgecache/trace.hpp"

using namespace edgecache;

namespace {

// 2024-01-01 00:00 in UTC+8.
constexpr std::int64_t kDay0 = 1'704'038'400;

RequestRecord rec(std::string user, std::int64_t t, GeoPoint p, std::string video = "v")
{
    return {std::move(user), t, p, std::move(video)};
}

std::vector<RequestRecord> random_records(std::mt19937_64& rng, std::size_t n, int users, int days, int spots)
{
    std::uniform_int_distribution<int> u(0, users - 1), spot(0, spots - 1), vid(0, 20);
    std::uniform_int_distribution<std::int64_t> t(0, days * kSecondsPerDay - 1);
    std::vector<RequestRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        const int s = spot(rng);
        out.push_back(rec("u" + std::to_string(u(rng)), kDay0 + t(rng), {39.9 + 0.013 * s, 116.3 + 0.007 * s},
            "v" + std::to_string(vid(rng))));
    }
    return out;
}

} // namespace

TEST(Time, DayAndHourUseLocalOffset)
{
    EXPECT_EQ(hour_of_day(kDay0), 0);
    EXPECT_EQ(hour_of_day(kDay0 - 1), 23);
    EXPECT_EQ(day_index(kDay0) + 1, day_index(kDay0 + kSecondsPerDay));
    EXPECT_EQ(day_index(kDay0 - 1) + 1, day_index(kDay0));
    EXPECT_EQ(hour_of_day(kDay0, 0), 16);
    EXPECT_EQ(day_index(-1, 0), -1);
}

TEST(ParseTrace, Examples)
{
    std::istringstream empty("user_id,timestamp,lat,lon,video_id\n");
    auto e = parse_trace(empty);
    EXPECT_TRUE(e.records.empty());
    EXPECT_TRUE(e.rejected.empty());

    std::istringstream one("user_id,timestamp,lat,lon,video_id\nu1,100,39.9,116.3,v9\n");
    auto o = parse_trace(one);
    ASSERT_EQ(o.records.size(), 1u);
    EXPECT_EQ(o.records[0], rec("u1", 100, {39.9, 116.3}, "v9"));

    std::istringstream bad("user_id,timestamp,lat,lon,video_id\nu1,100,200,116.3,v9\nu2,1,2\n,5,1,1,v\n");
    auto b = parse_trace(bad);
    EXPECT_TRUE(b.records.empty());
    ASSERT_EQ(b.rejected.size(), 3u);
    EXPECT_EQ(b.rejected[0].reason, "latitude out of range");
    EXPECT_EQ(b.rejected[0].line, 2u);
    EXPECT_EQ(b.rejected[1].line, 3u);

    std::istringstream noheader("u1,100,39.9,116.3,v9\n");
    EXPECT_THROW(parse_trace(noheader), InputError);
}

TEST(ParseTrace, RoundTripsAndSortsByTime)
{
    std::mt19937_64 rng(1);
    auto records = random_records(rng, 500, 20, 3, 10);
    std::ostringstream out;
    write_trace(out, records);
    std::istringstream in(out.str());
    auto parsed = parse_trace(in);
    EXPECT_TRUE(parsed.rejected.empty());
    std::stable_sort(records.begin(), records.end(),
        [](const RequestRecord& a, const RequestRecord& b) { return a.timestamp < b.timestamp; });
    EXPECT_EQ(parsed.records, records);
}

TEST(ClassifyUsers, Examples)
{
    std::vector<InfrastructureNode> nodes {make_node("a", NodeKind::WiFiAP, {39.9, 116.3}),
        make_node("b", NodeKind::WiFiAP, {39.95, 116.3})};
    const SpatialIndex idx(nodes);
    std::vector<RequestRecord> r {
        rec("s", kDay0 + 10, {39.9, 116.3}),
        rec("s", kDay0 + 20, {39.9001, 116.3}),
        rec("m", kDay0 + 10, {39.9, 116.3}),
        rec("m", kDay0 + 5000, {39.95, 116.3}),
        rec("m", kDay0 + kSecondsPerDay + 5, {39.95, 116.3}),
    };
    const auto assign = assign_locations(r, &idx);
    EXPECT_EQ(assign[0], 0);
    EXPECT_EQ(assign[3], 1);
    const auto cls = classify_users(r, assign);
    ASSERT_EQ(cls.size(), 3u);
    EXPECT_EQ(cls[0].user_id, "m");
    EXPECT_EQ(cls[0].cls, DayClass::MultiLocation);
    EXPECT_EQ(cls[0].locations_visited, 2u);
    EXPECT_EQ(cls[1].cls, DayClass::SingleLocation);
    EXPECT_EQ(cls[2].user_id, "s");
    EXPECT_EQ(cls[2].cls, DayClass::SingleLocation);

    EXPECT_THROW(classify_users(r, std::vector<LocationId> {1}), UsageError);
}

TEST(ClassifyUsers, MatchesBruteForceRecount)
{
    std::mt19937_64 rng(2);
    const auto r = random_records(rng, 1000, 30, 4, 6);
    const auto assign = assign_locations(r);
    std::map<std::pair<std::string, std::int64_t>, std::set<LocationId>> want;
    for (std::size_t i = 0; i < r.size(); ++i)
        want[{r[i].user_id, (r[i].timestamp + 8 * 3600) / 86400}].insert(assign[i]);
    const auto got = classify_users(r, assign);
    ASSERT_EQ(got.size(), want.size());
    auto it = want.begin();
    for (const auto& g : got) {
        EXPECT_EQ(g.user_id, it->first.first);
        EXPECT_EQ(g.day, it->first.second);
        EXPECT_EQ(g.locations_visited, it->second.size());
        EXPECT_EQ(g.cls == DayClass::MultiLocation, it->second.size() >= 2);
        ++it;
    }
}

TEST(ActiveUsers, ThresholdAndBruteForce)
{
    std::vector<RequestRecord> r;
    for (int d = 0; d < 2; ++d)
        for (int i = 0; i < 10; ++i) {
            r.push_back(rec("ten", kDay0 + d * kSecondsPerDay + i, {0, 0}));
            if (!(d == 1 && i == 9))
                r.push_back(rec("nine", kDay0 + d * kSecondsPerDay + i, {0, 0}));
        }
    EXPECT_EQ(active_users(r), std::vector<std::string> {"ten"});

    std::mt19937_64 rng(3);
    const auto m = random_records(rng, 2000, 40, 3, 2);
    std::map<std::string, std::map<std::int64_t, std::size_t>> per;
    for (const auto& x : m)
        ++per[x.user_id][(x.timestamp + 8 * 3600) / 86400];
    for (std::size_t threshold : {1u, 10u, 16u, 20u}) {
        std::vector<std::string> want;
        for (const auto& [u, days] : per) {
            bool ok = true;
            for (const auto& [d, n] : days)
                ok = ok && n >= threshold;
            if (ok)
                want.push_back(u);
        }
        EXPECT_EQ(active_users(m, threshold), want);
    }
}

TEST(Patterns, Canonicalisation)
{
    const std::vector<LocationId> aba {7, 3, 7};
    EXPECT_EQ(canonical_pattern(aba), "ABA");
    EXPECT_EQ(describe_pattern("ABA"), "2-location round trip");
    EXPECT_EQ(describe_pattern("ABAB"), "2-location alternation");
    EXPECT_EQ(describe_pattern("AB"), "2-location one-way");
    EXPECT_EQ(describe_pattern("ABCA"), "3-location tour");
    EXPECT_EQ(describe_pattern("ABC"), "3-location path");
    EXPECT_EQ(describe_pattern("A"), "stationary");
}

TEST(MovementStats, SingleAndRoundTrip)
{
    std::vector<RequestRecord> single {rec("s", kDay0, {39.9, 116.3}), rec("s", kDay0 + 60, {39.9, 116.3})};
    const auto s = movement_stats(single, assign_locations(single));
    EXPECT_EQ(s.movement_count, 0u);
    EXPECT_EQ(s.multi_location_user_days, 0u);

    std::vector<RequestRecord> trip {rec("u", kDay0, {39.905, 116.305}), rec("u", kDay0 + 600, {39.915, 116.305}),
        rec("u", kDay0 + 1200, {39.905, 116.305})};
    const auto t = movement_stats(trip, assign_locations(trip));
    EXPECT_EQ(t.movement_count, 2u);
    EXPECT_EQ(t.pattern_fractions.at("ABA"), 1.0);
    EXPECT_EQ(describe_pattern(t.pattern_fractions.begin()->first), "2-location round trip");
    EXPECT_EQ(t.locations_per_user.at(2), 1.0);
    // 10-minute gaps fall in the middle interval bucket.
    EXPECT_TRUE(t.distance_cdf_by_interval[0].empty());
    EXPECT_FALSE(t.distance_cdf_by_interval[1].empty());
}

TEST(MovementStats, MatchesBruteForce)
{
    std::mt19937_64 rng(4);
    const auto r = random_records(rng, 1500, 25, 3, 5);
    const auto assign = assign_locations(r);
    const auto got = movement_stats(r, assign);

    std::map<std::pair<std::string, std::int64_t>, std::vector<std::size_t>> groups;
    std::vector<std::size_t> idx(r.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return r[a].timestamp < r[b].timestamp; });
    for (auto i : idx)
        groups[{r[i].user_id, (r[i].timestamp + 8 * 3600) / 86400}].push_back(i);
    std::map<std::size_t, std::size_t> moves_hist, locs_hist;
    std::size_t days = 0, total = 0;
    for (const auto& [key, g] : groups) {
        std::size_t moves = 0;
        std::set<LocationId> locs;
        for (std::size_t k = 0; k < g.size(); ++k) {
            locs.insert(assign[g[k]]);
            if (k > 0 && assign[g[k]] != assign[g[k - 1]])
                ++moves;
        }
        if (moves == 0)
            continue;
        ++days;
        total += moves;
        ++moves_hist[moves];
        ++locs_hist[locs.size()];
    }
    EXPECT_EQ(got.multi_location_user_days, days);
    EXPECT_EQ(got.movement_count, total);
    for (const auto& [k, n] : moves_hist)
        EXPECT_DOUBLE_EQ(got.movements_per_user.at(k), static_cast<double>(n) / static_cast<double>(days));
    for (const auto& [k, n] : locs_hist)
        EXPECT_DOUBLE_EQ(got.locations_per_user.at(k), static_cast<double>(n) / static_cast<double>(days));
    double sum = 0;
    for (const auto& [p, f] : got.pattern_fractions)
        sum += f;
    EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(MigrationMatrix, Examples)
{
    CellPoiMap cells;
    const GeoPoint hospital {39.905, 116.305}, business {39.915, 116.305};
    cells.set(cell_of(hospital), PoiLabel::Hospital);
    cells.set(cell_of(business), PoiLabel::Business);

    std::vector<RequestRecord> still {rec("u", kDay0, hospital), rec("u", kDay0 + 1, hospital)};
    EXPECT_EQ(migration_matrix(still, cells).labeled_total(), 0u);

    std::vector<RequestRecord> one {rec("u", kDay0, hospital), rec("u", kDay0 + 60, business)};
    const auto m = migration_matrix(one, cells);
    EXPECT_EQ(m.counts[poi_index(PoiLabel::Hospital)][poi_index(PoiLabel::Business)], 1u);
    EXPECT_EQ(m.labeled_total(), 1u);
    EXPECT_EQ(m.row_distribution(poi_index(PoiLabel::Hospital))[poi_index(PoiLabel::Business)], 1.0);

    std::vector<RequestRecord> off {rec("u", kDay0, hospital), rec("u", kDay0 + 60, {39.925, 116.305})};
    const auto u = migration_matrix(off, cells);
    EXPECT_EQ(u.labeled_total(), 0u);
    EXPECT_EQ(u.unlabeled_movements, 1u);

    // Movements never span days.
    std::vector<RequestRecord> overnight {rec("u", kDay0 - 60, hospital), rec("u", kDay0 + 60, business)};
    EXPECT_EQ(migration_matrix(overnight, cells).labeled_total(), 0u);
}
