#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "edgecache/analysis.hpp"
#include "edgecache/generator.hpp"
#include "edgecache/io.hpp"

using namespace edgecache;

namespace {

TraceConfig small()
{
    TraceConfig c;
    c.n_users = 300;
    c.n_videos = 400;
    c.days = 3;
    return c;
}

} // namespace

TEST(Generator, EmptyPopulation)
{
    auto c = small();
    c.n_users = 0;
    EXPECT_TRUE(generate_trace(c).records.empty());
}

TEST(Generator, RejectsInfeasibleConfigs)
{
    auto c = small();
    c.n_videos = 0;
    EXPECT_THROW(generate_trace(c), UsageError);
    c = small();
    c.location_count_probs = {0.5, 0.5, 0.5, 0, 0};
    EXPECT_THROW(generate_trace(c), UsageError);
    c = small();
    c.category_decay = {0.1};
    EXPECT_THROW(generate_trace(c), UsageError);
}

TEST(Generator, DeterministicPerSeed)
{
    auto c = small();
    const auto a = generate_trace(c), b = generate_trace(c);
    EXPECT_EQ(a.records, b.records);
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
        EXPECT_EQ(a.nodes[i], b.nodes[i]);
    c.seed = 2;
    EXPECT_NE(generate_trace(c).records, a.records);
}

TEST(Generator, SerialisationRoundTrips)
{
    const auto t = generate_trace(small());
    std::ostringstream out;
    write_trace(out, t.records);
    std::istringstream in(out.str());
    const auto parsed = parse_trace(in);
    EXPECT_TRUE(parsed.rejected.empty());
    EXPECT_EQ(parsed.records, t.records);

    std::ostringstream infra;
    write_infrastructure(infra, t.nodes);
    std::istringstream infra_in(infra.str());
    const auto nodes = parse_infrastructure(infra_in);
    ASSERT_EQ(nodes.size(), t.nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
        EXPECT_EQ(nodes[i], t.nodes[i]);
}

TEST(Generator, StructuralInvariants)
{
    const auto c = small();
    const auto t = generate_trace(c);
    ASSERT_FALSE(t.records.empty());
    for (std::size_t i = 1; i < t.records.size(); ++i)
        EXPECT_LE(t.records[i - 1].timestamp, t.records[i].timestamp);
    std::set<std::string> users;
    for (const auto& r : t.records) {
        users.insert(r.user_id);
        EXPECT_GE(r.timestamp, c.start_epoch);
        EXPECT_LT(r.timestamp, c.start_epoch + c.days * kSecondsPerDay);
        EXPECT_TRUE(t.video_categories.count(r.video_id));
    }
    EXPECT_EQ(users.size(), static_cast<std::size_t>(c.n_users));
    // Every user meets the daily floor, so everyone is active.
    EXPECT_EQ(active_users(t.records, static_cast<std::size_t>(c.min_daily_requests), c.utc_offset_hours).size(),
        users.size());
    std::size_t bs = 0;
    for (const auto& n : t.nodes)
        bs += n.kind == NodeKind::CellularBS;
    EXPECT_EQ(bs, static_cast<std::size_t>(c.n_bs));
    EXPECT_EQ(t.nodes.size() - bs, static_cast<std::size_t>(c.n_sites));
}

TEST(Generator, NoMobilityMeansSingleLocationDays)
{
    auto c = small();
    c.multi_location_fraction = 0.0;
    const auto t = generate_trace(c);
    const auto cls = classify_users(t.records, assign_locations(t.records), c.utc_offset_hours);
    for (const auto& u : cls)
        EXPECT_EQ(u.cls, DayClass::SingleLocation);
}

TEST(Generator, InjectedDecayIsRecovered)
{
    // Daily volume is set by the users, so decay shows up as a shift of share
    // between categories. A minor decaying category next to stable ones keeps
    // that renormalisation small.
    auto c = small();
    c.n_users = 2000;
    c.days = 7;
    c.release_spread = 0.0;
    c.category_weights = {0.05, 1, 1, 1, 1};
    c.category_decay = {0.3, 0, 0, 0, 0};
    const auto t = generate_trace(c);
    const auto p = category_decay_profile(
        t.records, [&](const std::string& v) { return t.video_categories.at(v) == 0; }, c.utc_offset_hours);
    EXPECT_NEAR(p.decay_rate, 0.3, 0.05);
}

TEST(Generator, ZipfSlopeTracksExponent)
{
    for (double a : {0.6, 0.8, 1.0}) {
        auto c = small();
        c.n_users = 3000;
        c.n_videos = 2000;
        c.zipf_exponent = a;
        c.release_spread = 0.0;
        c.category_decay = {0, 0, 0, 0, 0};
        const auto p = popularity_histogram(generate_trace(c).records);
        ASSERT_TRUE(p.slope);
        EXPECT_NEAR(*p.slope, -a, 0.1) << "exponent " << a;
    }
}
