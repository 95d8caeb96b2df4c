#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string err;
};

// Runs the CLI with stdout discarded and stderr captured.
Run cli(const std::string& args)
{
    const std::string cmd = std::string(EDGECACHE_CLI) + " " + args + " 2>&1 >/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p)
        return {-1, "popen failed"};
    std::string err;
    std::array<char, 512> buf {};
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), p))
        err += buf.data();
    const int status = pclose(p);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, err};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

class Cli : public ::testing::Test {
  protected:
    static void SetUpTestSuite()
    {
        root_ = fs::temp_directory_path() / ("edgecache_cli_" + std::to_string(::getpid()));
        fs::remove_all(root_);
        fs::create_directories(root_);
        std::ofstream(root_ / "gen.conf") << "n_users = 40\nn_videos = 120\ndays = 2\nseed = 11\n";
        const auto r = cli("gen --config " + (root_ / "gen.conf").string() + " --out " + (root_ / "data").string());
        ASSERT_EQ(r.code, 0) << r.err;
    }
    static void TearDownTestSuite() { fs::remove_all(root_); }

    static fs::path data(const char* f) { return root_ / "data" / f; }
    static std::string inputs()
    {
        return "--trace " + data("trace.csv").string() + " --infra " + data("infra.csv").string();
    }
    static fs::path out(const std::string& name) { return root_ / name; }

    static fs::path root_;
};

fs::path Cli::root_;

} // namespace

TEST_F(Cli, GenWritesFilesAndManifest)
{
    for (const char* f : {"trace.csv", "infra.csv", "cells.csv", "videos.csv", "manifest.json"})
        EXPECT_TRUE(fs::exists(data(f))) << f;
    const auto m = read_json(data("manifest.json"));
    EXPECT_EQ(m.at("command"), "gen");
    EXPECT_EQ(m.at("seed"), 11);
    EXPECT_TRUE(m.contains("tool_version"));
    EXPECT_TRUE(m.contains("started_at"));
    EXPECT_TRUE(m.contains("finished_at"));
    EXPECT_EQ(m.at("config").at("n_users"), 40);
    EXPECT_EQ(m.at("outputs").size(), 4u);
}

TEST_F(Cli, GenRerunIsByteIdentical)
{
    const auto again = out("gen_again");
    ASSERT_EQ(cli("gen --config " + (root_ / "gen.conf").string() + " --out " + again.string()).code, 0);
    for (const char* f : {"trace.csv", "infra.csv", "cells.csv", "videos.csv"})
        EXPECT_EQ(slurp(again / f), slurp(data(f))) << f;
}

TEST_F(Cli, EmptyConfigUsesDefaults)
{
    std::ofstream(root_ / "empty.conf") << "";
    const auto dir = out("gen_default");
    ASSERT_EQ(cli("gen --config " + (root_ / "empty.conf").string() + " --set n_users=5 --out " + dir.string()).code,
        0);
    const auto m = read_json(dir / "manifest.json");
    EXPECT_EQ(m.at("config").at("n_users"), 5);
    EXPECT_EQ(m.at("config").at("n_videos"), 3000);
}

TEST_F(Cli, AnalyzeWritesOneReportPerMetric)
{
    const auto dir = out("an");
    const auto r = cli("analyze " + inputs() + " --cells " + data("cells.csv").string() + " --videos "
        + data("videos.csv").string() + " --which entropy,jaccard,dft --out " + dir.string());
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"entropy.json", "jaccard.json", "dft.json", "manifest.json"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_FALSE(fs::exists(dir / "kl.json"));
    const auto m = read_json(dir / "manifest.json");
    EXPECT_EQ(m.at("command"), "analyze");
    const std::string digest = m.at("inputs").at("trace").at("digest");
    EXPECT_EQ(digest.rfind("fnv1a64:", 0), 0u);
}

TEST_F(Cli, AnalyzeAllRunsEveryMetric)
{
    const auto dir = out("an_all");
    ASSERT_EQ(cli("analyze " + inputs() + " --videos " + data("videos.csv").string() + " --which all --out "
                  + dir.string())
                  .code,
        0);
    std::size_t reports = 0;
    for (const auto& e : fs::directory_iterator(dir))
        reports += e.path().extension() == ".json" && e.path().filename() != "manifest.json";
    EXPECT_EQ(reports, 12u);
}

TEST_F(Cli, SimReferenceMatchesAndReruns)
{
    const auto a = out("sim_a"), b = out("sim_b");
    const std::string args = "sim " + inputs() + " --strategy lfu --kind ap --capacity 5 --reference --out ";
    ASSERT_EQ(cli(args + a.string()).code, 0);
    ASSERT_EQ(cli(args + b.string()).code, 0);
    EXPECT_EQ(slurp(a / "report.json"), slurp(b / "report.json"));
    const auto m = read_json(a / "manifest.json");
    EXPECT_EQ(m.at("command"), "sim");
    EXPECT_EQ(m.at("reference_check"), "match");
    EXPECT_EQ(m.at("config").at("capacity"), 5);
    EXPECT_EQ(m.at("inputs").at("trace").at("digest"), read_json(b / "manifest.json").at("inputs").at("trace").at("digest"));

    const auto rep = read_json(a / "report.json");
    const auto& t = rep.at("total");
    EXPECT_EQ(t.at("requests").get<long>(),
        t.at("edge_served").get<long>() + t.at("out_of_range").get<long>() + t.at("capacity_rejected").get<long>());
}

TEST_F(Cli, SimCapacityZeroHasNoHits)
{
    const auto dir = out("sim_zero");
    ASSERT_EQ(cli("sim " + inputs() + " --capacity 0 --out " + dir.string()).code, 0);
    EXPECT_EQ(read_json(dir / "report.json").at("total").at("cache_hits"), 0);
}

TEST_F(Cli, SweepMatchesSimAndIsSorted)
{
    const auto dir = out("sweep");
    ASSERT_EQ(cli("sweep " + inputs() + " --strategies rr,lru --kinds bs,ap --capacities 2,8 --jobs 2 --out "
                  + dir.string())
                  .code,
        0);
    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string header, line;
    std::getline(csv, header);
    EXPECT_EQ(header.rfind("strategy,capacity,kind,hit_rate,service_rate_request,service_rate_user", 0), 0u) << header;
    std::vector<std::string> rows;
    while (std::getline(csv, line))
        rows.push_back(line);
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows.front().rfind("lru,2,ap,", 0), 0u);
    EXPECT_EQ(rows.back().rfind("rr,8,bs,", 0), 0u);

    // One cell of the grid equals a single sim run.
    const auto one = out("sweep_one_sim");
    ASSERT_EQ(cli("sim " + inputs() + " --strategy lru --kind ap --capacity 2 --out " + one.string()).code, 0);
    const auto t = read_json(one / "report.json").at("total");
    const double hits = t.at("cache_hits").get<double>(), served = t.at("edge_served").get<double>();
    std::istringstream first(rows.front());
    std::string field;
    for (int i = 0; i < 4; ++i)
        std::getline(first, field, ',');
    EXPECT_NEAR(std::stod(field), served > 0 ? hits / served : 0.0, 1e-9);
}

TEST_F(Cli, UsageErrorsExitOne)
{
    const std::vector<std::string> cases = {"", "frobnicate",
        "sim " + inputs() + " --strategy fifo --out " + out("u1").string(),
        "analyze " + inputs() + " --which nonsense --out " + out("u2").string(),
        "gen --set capacty=3 --out " + out("u3").string()};
    for (const auto& args : cases) {
        const auto r = cli(args);
        EXPECT_EQ(r.code, 1) << args << "\n" << r.err;
        EXPECT_EQ(r.err.rfind("error: ", 0), 0u) << r.err;
    }
    const auto r = cli("analyze " + inputs() + " --which nonsense --out " + out("u4").string());
    EXPECT_NE(r.err.find("valid: all"), std::string::npos) << r.err;
}

TEST_F(Cli, InputErrorsExitTwo)
{
    const auto missing = cli("sim --trace " + (root_ / "nope.csv").string() + " --infra " + data("infra.csv").string()
        + " --out " + out("i1").string());
    EXPECT_EQ(missing.code, 2) << missing.err;

    const auto bad = root_ / "bad.csv";
    {
        std::ifstream in(data("trace.csv"));
        std::string header, first;
        std::getline(in, header);
        std::getline(in, first);
        std::ofstream(bad) << header << "\n" << "u1,1420042892,200.0,116.3,v1\n" << first << "\n";
    }
    const auto malformed = cli("sim --trace " + bad.string() + " --infra " + data("infra.csv").string() + " --out "
        + out("i2").string());
    EXPECT_EQ(malformed.code, 2);
    EXPECT_NE(malformed.err.find("line 2"), std::string::npos) << malformed.err;
    EXPECT_NE(malformed.err.find("latitude out of range"), std::string::npos) << malformed.err;
    // Single-line, machine-parseable message.
    EXPECT_EQ(std::count(malformed.err.begin(), malformed.err.end(), '\n'), 1);
    EXPECT_FALSE(fs::exists(out("i2") / "manifest.json"));
}
