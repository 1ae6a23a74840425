#include "spaceops/errors.hpp"
#include "spaceops/harness.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

using namespace spaceops;
using spaceops::testing::TempDir;

namespace
{

    int run_cli(std::vector<std::string> args, std::string *out = nullptr, std::string *err = nullptr)
    {
        args.insert(args.begin(), "spaceops");
        std::vector<const char *> argv;
        for (const auto &a : args)
        {
            argv.push_back(a.c_str());
        }
        ::testing::internal::CaptureStdout();
        ::testing::internal::CaptureStderr();
        const int rc = cli(static_cast<int>(argv.size()), argv.data());
        const std::string o = ::testing::internal::GetCapturedStdout();
        const std::string e = ::testing::internal::GetCapturedStderr();
        if (out)
        {
            *out = o;
        }
        if (err)
        {
            *err = e;
        }
        return rc;
    }

    std::string slurp(const std::filesystem::path &p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

} // namespace

TEST(Cli, RunIsDeterministicAcrossJobs)
{
    TempDir tmp;
    const auto a = tmp.path() / "a.json";
    const auto b = tmp.path() / "b.json";
    const std::vector<std::string> common{"run", "--scenario", "lbg1-lg0-i2", "--agent", "pursuit", "--episodes", "2",
                                          "--seed", "7", "--max-time", "120"};
    auto args_a = common;
    args_a.insert(args_a.end(), {"--out", a.string(), "--jobs", "1"});
    auto args_b = common;
    args_b.insert(args_b.end(), {"--out", b.string(), "--jobs", "2"});
    ASSERT_EQ(run_cli(args_a), 0);
    ASSERT_EQ(run_cli(args_b), 0);
    EXPECT_EQ(slurp(a), slurp(b));
    const auto results = load_results(a);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].seed, 7u);
    EXPECT_EQ(results[1].seed, 8u);
}

TEST(Cli, ReportPrintsBothTables)
{
    TempDir tmp;
    const auto f = tmp.path() / "r.json";
    ASSERT_EQ(run_cli({"run", "--scenario", "lbg1-lg0-i2", "--agent", "naive", "--max-time", "60", "--out",
                       f.string()}),
              0);
    std::string out;
    ASSERT_EQ(run_cli({"report", f.string()}, &out), 0);
    EXPECT_NE(out.find("Best Dist. (m)"), std::string::npos);
    EXPECT_NE(out.find("Avg. Score"), std::string::npos);
    EXPECT_NE(out.find("Average Latency (ms)"), std::string::npos);
    EXPECT_NE(out.find("naive"), std::string::npos);

    const auto jf = tmp.path() / "report.json";
    ASSERT_EQ(run_cli({"report", f.string(), "--json", jf.string()}, &out), 0);
    std::ifstream in(jf);
    const auto j = nlohmann::json::parse(in);
    ASSERT_TRUE(j.is_array());
    EXPECT_EQ(j[0]["label"], "naive lbg1-lg0-i2");
}

TEST(Cli, UnsupportedScenarioExitsTwo)
{
    std::string err;
    EXPECT_EQ(run_cli({"run", "--scenario", "lbg1-lg3-i2", "--agent", "naive", "--out", "-"}, nullptr, &err), 2);
    EXPECT_NE(err.find("unsupported scenario"), std::string::npos) << err;
    EXPECT_EQ(run_cli({"run", "--scenario", "lbg1-lg0-i2", "--agent", "oracle", "--out", "-"}, nullptr, &err), 2);
    EXPECT_EQ(run_cli({}, nullptr, &err), 2);
    EXPECT_EQ(run_cli({"run", "--scenario", "e1", "--agent", "naive", "--out", "-", "--dt", "-1"}, nullptr, &err),
              2);
}

TEST(Cli, HelpExitsZero)
{
    std::string out;
    EXPECT_EQ(run_cli({"--help"}, &out), 0);
    EXPECT_NE(out.find("run"), std::string::npos);
}

TEST(Cli, RenderFixturesMatchGolden)
{
    TempDir tmp;
    ASSERT_EQ(run_cli({"render-fixtures", "--out", tmp.path().string()}), 0);
    std::ifstream g(std::string(SPACEOPS_GOLDEN_DIR) + "/dashboard_digests.json");
    const auto golden = nlohmann::json::parse(g);
    std::ifstream d(tmp.path() / "digests.json");
    const auto written = nlohmann::json::parse(d);
    EXPECT_EQ(written, golden);
    for (const auto &f : dashboard_fixtures())
    {
        EXPECT_TRUE(std::filesystem::exists(tmp.path() / (f.name + ".png"))) << f.name;
    }
}

TEST(Batch, ResultsInEpisodeOrder)
{
    RunConfig cfg;
    cfg.scenario = "lbg1-lg0-i1";
    cfg.agent = "mock:cycle";
    cfg.episodes = 3;
    cfg.seed = 100;
    cfg.jobs = 3;
    cfg.max_time = 20.0;
    const auto results = run_batch(cfg);
    ASSERT_EQ(results.size(), 3u);
    for (std::size_t i = 0; i < results.size(); ++i)
    {
        EXPECT_EQ(results[i].seed, 100u + i);
        EXPECT_NEAR(results[i].final_clock, 20.0, 1e-9);
    }
    cfg.jobs = 1;
    EXPECT_EQ(results_to_json(run_batch(cfg)), results_to_json(results));
    EXPECT_EQ(results_to_json(results_from_json(results_to_json(results))), results_to_json(results));

    const RunReport r = report_results(results);
    EXPECT_EQ(r.episodes, 3);
    EXPECT_EQ(r.label, "mock:cycle lbg1-lg0-i1");
}

TEST(Batch, ConfigValidation)
{
    RunConfig cfg;
    cfg.scenario = "e1";
    cfg.agent = "naive";
    cfg.thrust = 0.0;
    EXPECT_THROW(cfg.scenario_spec(0), InvalidArgument);
    cfg.thrust.reset();
    cfg.agent = "nobody";
    EXPECT_THROW(run_batch(cfg), InvalidArgument);
    cfg.agent = "naive";
    cfg.scenario = "lbg9";
    EXPECT_THROW(run_batch(cfg), UnsupportedScenario);
}

TEST(Digest, Fnv1aOracle)
{
    // FNV-1a 64 of three zero bytes, computed independently.
    EXPECT_EQ(pixel_digest(RgbImage(1, 1)), "d94d12186c0f2fb7");
}
