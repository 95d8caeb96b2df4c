#include <sstream>

#include <gtest/gtest.h>

#include "edgecache/config.hpp"

using namespace edgecache;

namespace {

// A config value as it would be written in a file.
std::string as_text(const nlohmann::json& j)
{
    if (j.is_string())
        return j.get<std::string>();
    if (j.is_array()) {
        std::string s;
        for (const auto& e : j)
            s += (s.empty() ? "" : ",") + (e.is_array() ? as_text(e) : e.dump());
        return s;
    }
    return j.dump();
}

template <class Config>
void expect_round_trip(const Config& c)
{
    const auto j = to_json(c);
    KeyValues kv;
    for (const auto& [k, v] : j.items())
        kv[k] = as_text(v);
    Config back;
    apply_config(back, kv);
    EXPECT_EQ(to_json(back), to_json(c));
}

} // namespace

TEST(KeyValues, ParsesCommentsAndWhitespace)
{
    std::istringstream in("# comment\n\n  seed = 7  \nkind=bs # trailing\n");
    const auto kv = parse_key_values(in);
    EXPECT_EQ(kv.at("seed"), "7");
    EXPECT_EQ(kv.at("kind"), "bs");
    EXPECT_EQ(kv.size(), 2u);

    std::istringstream bad("seed 7\n");
    try {
        parse_key_values(bad);
        FAIL();
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("config line 1"), std::string::npos);
    }
}

TEST(Config, AppliesTypedValues)
{
    SimConfig s;
    apply_config(s, {{"strategy", "geocollab"}, {"kind", "bs"}, {"capacity", "50"}, {"online_fill", "true"},
                        {"category_decay", "0.1, 0.2,0.3"}});
    EXPECT_EQ(s.strategy, Strategy::GeoCollab);
    EXPECT_EQ(s.kind, NodeKind::CellularBS);
    EXPECT_EQ(s.capacity, 50);
    EXPECT_TRUE(s.online_fill);
    EXPECT_EQ(s.category_decay, (std::vector<double> {0.1, 0.2, 0.3}));

    TraceConfig t;
    apply_config(t, {{"n_users", "12"}, {"zipf_exponent", "1.1"}, {"location_count_probs", "1,0,0,0,0"}});
    EXPECT_EQ(t.n_users, 12);
    EXPECT_EQ(t.zipf_exponent, 1.1);
    EXPECT_EQ(t.location_count_probs[0], 1.0);
}

TEST(Config, RejectsBadInput)
{
    SimConfig s;
    EXPECT_THROW(apply_config(s, {{"capacity", "many"}}), UsageError);
    EXPECT_THROW(apply_config(s, {{"capacity", "2.5"}}), UsageError);
    EXPECT_THROW(apply_config(s, {{"strategy", "fifo"}}), UsageError);
    EXPECT_THROW(apply_config(s, {{"online_fill", "yes"}}), UsageError);
    try {
        apply_config(s, {{"capacty", "3"}});
        FAIL();
    } catch (const UsageError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("unknown config key 'capacty'"), std::string::npos);
        EXPECT_NE(msg.find("capacity"), std::string::npos);
    }
    TraceConfig t;
    EXPECT_THROW(apply_config(t, {{"migration_matrix", "1,2,3"}}), UsageError);
    EXPECT_THROW(apply_config(t, {{"diurnal_weights", "1"}}), UsageError);
}

TEST(Config, EveryKeyRoundTrips)
{
    expect_round_trip(TraceConfig {});
    expect_round_trip(SimConfig {});

    TraceConfig t;
    t.seed = 99;
    t.zipf_exponent = 0.123456789;
    t.category_decay = {0.5, 0.25};
    t.category_weights = {2, 3};
    t.n_categories = 2;
    expect_round_trip(t);

    SimConfig s;
    s.strategy = Strategy::RR;
    s.kind = NodeKind::CellularBS;
    s.top_fraction = 0.1;
    s.immobile_counterfactual = true;
    s.category_decay = {0.3};
    expect_round_trip(s);
}

TEST(Config, SplitRoutesKeysToEachConfig)
{
    const auto [trace, sim] = split_config({{"n_users", "5"}, {"capacity", "3"}, {"seed", "4"}});
    EXPECT_TRUE(trace.count("n_users"));
    EXPECT_FALSE(sim.count("n_users"));
    EXPECT_TRUE(sim.count("capacity"));
    EXPECT_TRUE(trace.count("seed"));
    EXPECT_TRUE(sim.count("seed"));
    EXPECT_THROW(split_config({{"nonsense", "1"}}), UsageError);
}
