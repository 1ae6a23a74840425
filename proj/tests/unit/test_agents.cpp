#include "spaceops/agents.hpp"
#include "spaceops/errors.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace spaceops;
using spaceops::testing::StubServer;

namespace
{

    const std::string kFig2 = "perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)";

    RemoteConfig stub_config(const StubServer &stub, double timeout_s = 5.0, int max_retries = 2)
    {
        RemoteConfig c;
        c.endpoint = stub.endpoint();
        c.model = "stub-model";
        c.api_key_env = "SPACEOPS_TEST_API_KEY";
        c.timeout_s = timeout_s;
        c.max_retries = max_retries;
        c.mode = PromptMode::ZeroShot;
        return c;
    }

    Observation obs_at(Vec3 rel_pos, Vec3 rel_vel = Vec3::Zero())
    {
        Observation o;
        o.rel_position = rel_pos;
        o.rel_velocity = rel_vel;
        o.distance = rel_pos.norm();
        o.speed = rel_vel.norm();
        if (o.speed > 0.0)
        {
            o.prograde = (-rel_vel).normalized();
        }
        o.scenario_id = "lbg1-lg0-i2";
        return o;
    }

    ScenarioSpec short_spec(double max_time)
    {
        ScenarioSpec s = parse_scenario_id("lbg1-lg0-i2");
        s.max_time = max_time;
        return s;
    }

} // namespace

TEST(Agents, PursuitBurnsTowardTarget)
{
    PursuitAgent agent;
    const Observation o = obs_at(Vec3(0, -2600, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.action.forward, Throttle::Negative);
    EXPECT_EQ(d.action.right, Throttle::Off);
    EXPECT_EQ(d.action.up, Throttle::Off);
    EXPECT_EQ(d.latency_ms, 0.0);
}

TEST(Agents, PursuitDeadband)
{
    PursuitAgent agent;
    // kp * 10 m = 0.02 < 0.025 deadband; 0.002 * 20 = 0.04 fires.
    const Observation o = obs_at(Vec3(10, 0, -20));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.action, make_action(0, 0, -1));
}

TEST(Agents, PursuitSingleAxisKeepsDominantAxis)
{
    ActionLimits limits;
    limits.single_axis_only = true;
    PursuitAgent agent({}, limits);
    const Observation o = obs_at(Vec3(300, -2600, 100));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.action, make_action(-1, 0, 0));
}

TEST(Agents, NaiveIgnoresObservation)
{
    NaiveAgent agent;
    const Observation a = obs_at(Vec3(0, 2600, 0));
    const Observation b = obs_at(Vec3(-50, -10, 300), Vec3(3, 2, 1));
    EXPECT_EQ(agent.decide(a, render_dashboard(a)).action, agent.decide(b, render_dashboard(b)).action);
    EXPECT_EQ(agent.decide(a, render_dashboard(a)).action, make_action(1, 0, 0));
}

TEST(Agents, MockReplaysFigureTwo)
{
    MockAgent agent({kFig2});
    const Observation o = obs_at(Vec3(0, 2600, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.action, make_action(1, 1, 1));
    EXPECT_EQ(d.raw_response, kFig2);
    EXPECT_EQ(d.parse_retries, 0);
}

TEST(Agents, MockRetriesThenExhausts)
{
    const Observation o = obs_at(Vec3(0, 2600, 0));
    MockAgent ok({"garbage", "more garbage", kFig2});
    const auto d = ok.decide(o, render_dashboard(o));
    EXPECT_EQ(d.parse_retries, 2);
    EXPECT_EQ(d.action, make_action(1, 1, 1));
    EXPECT_FALSE(d.failure.has_value());

    MockAgent bad({"garbage"}, "mock", {}, 1);
    const auto f = bad.decide(o, render_dashboard(o));
    EXPECT_EQ(f.action, make_action(0, 0, 0));
    EXPECT_EQ(f.failure, "ExhaustedRetries");
}

TEST(Agents, MakeAgentSpecs)
{
    const ScenarioSpec spec = parse_scenario_id("e1");
    EXPECT_EQ(make_agent("naive", spec)->name(), "naive");
    EXPECT_EQ(make_agent("pursuit", spec)->name(), "pursuit");
    EXPECT_EQ(make_agent("mock:fig2", spec)->name(), "mock:fig2");
    EXPECT_THROW(make_agent("oracle", spec), InvalidArgument);
    EXPECT_THROW(make_agent("mock:no_such_fixture.json", spec), IoError);
    EXPECT_THROW(builtin_mock_script("nope"), InvalidArgument);
}

TEST(Remote, ConfigValidation)
{
    RemoteConfig c;
    c.timeout_s = 0.0;
    EXPECT_THROW(c.validate(), InvalidArgument);
    const auto parsed = RemoteConfig::from_json({{"model", "m"}, {"timeout_s", 2.5}, {"mode", "cot"}});
    EXPECT_EQ(parsed.model, "m");
    EXPECT_DOUBLE_EQ(parsed.timeout_s, 2.5);
    EXPECT_EQ(parsed.mode, PromptMode::ChainOfThought);
    EXPECT_EQ(RemoteConfig::from_json(parsed.to_json()).to_json(), parsed.to_json());
}

TEST(Remote, RequestCarriesToolSchemaAndKey)
{
    StubServer stub({{kFig2}});
    ::setenv("SPACEOPS_TEST_API_KEY", "sk-test", 1);
    RemoteAgent agent(stub_config(stub));
    const Observation o = obs_at(Vec3(0, 2600, 0), Vec3(0, -5, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    ::unsetenv("SPACEOPS_TEST_API_KEY");
    EXPECT_EQ(d.action, make_action(1, 1, 1));
    ASSERT_EQ(stub.request_count(), 1u);
    EXPECT_EQ(stub.auth_headers()[0], "Bearer sk-test");
    const auto body = nlohmann::json::parse(stub.bodies()[0]);
    EXPECT_EQ(body["model"], "stub-model");
    EXPECT_EQ(body["tools"][0]["function"]["name"], "perform_action");
    EXPECT_EQ(body["messages"].back()["content"][0]["type"], "image");
}

TEST(Remote, GarbageTwiceThenValid)
{
    StubServer stub({{"I am thinking about it."}, {"perform_action(Forward Throttle: Sideways)"}, {kFig2}});
    RemoteAgent agent(stub_config(stub));
    const Observation o = obs_at(Vec3(0, 2600, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.parse_retries, 2);
    EXPECT_EQ(d.action, make_action(1, 1, 1));
    EXPECT_FALSE(d.failure.has_value());
    ASSERT_EQ(stub.request_count(), 3u);
    // The retry carries the bad reply and a corrective user turn.
    const auto third = nlohmann::json::parse(stub.bodies()[2]);
    const auto &msgs = third["messages"];
    EXPECT_EQ(msgs[msgs.size() - 2]["role"], "assistant");
    EXPECT_EQ(msgs.back()["role"], "user");
}

TEST(Remote, LatencyIncludesServerDelay)
{
    StubServer stub({{kFig2, 50}});
    RemoteAgent agent(stub_config(stub));
    const Observation o = obs_at(Vec3(0, 2600, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_GE(d.latency_ms, 50.0);
    EXPECT_LE(d.latency_ms, 250.0);
}

TEST(Remote, TimeoutIsFlaggedNotFatal)
{
    StubServer stub({{kFig2, 1200}});
    const auto cfg = stub_config(stub, 0.3, 0);
    EXPECT_THROW(remote_invoke(cfg, {}), Timeout);

    RemoteAgent agent(cfg);
    const Observation o = obs_at(Vec3(0, 2600, 0));
    const auto d = agent.decide(o, render_dashboard(o));
    EXPECT_EQ(d.failure, "Timeout");
    EXPECT_EQ(d.action, make_action(0, 0, 0));
    EXPECT_GE(d.latency_ms, 250.0);
}

TEST(Remote, TransportErrorAfterRetries)
{
    RemoteConfig c;
    c.endpoint = "http://127.0.0.1:" + std::to_string(spaceops::testing::closed_port()) + "/v1/chat/completions";
    c.timeout_s = 2.0;
    c.max_retries = 1;
    EXPECT_THROW(remote_invoke(c, {}), TransportError);
}

TEST(Remote, HttpStatusCarriesCode)
{
    StubServer stub({{"oops", 0, 503}});
    try
    {
        remote_invoke(stub_config(stub), {});
        FAIL() << "no exception";
    }
    catch (const HttpStatus &e)
    {
        EXPECT_EQ(e.code(), 503);
    }
}

TEST(Remote, ExtractsToolCallsAndContent)
{
    const std::string with_tool = R"({"choices":[{"message":{"content":null,"tool_calls":[{"id":"a","type":"function",
        "function":{"name":"perform_action","arguments":"{\"forward_throttle\":\"Backward\"}"}}]}}]})";
    EXPECT_EQ(parse_response(extract_reply_text(with_tool)), make_action(-1, 0, 0));
    EXPECT_EQ(extract_reply_text(R"({"choices":[{"message":{"content":"hi"}}]})"), "hi");
    EXPECT_EQ(extract_reply_text("plain"), "plain");
}

TEST(Episode, MockRunsAreByteIdentical)
{
    ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i2");
    spec.rng_seed = 7;
    auto run = [&] {
        auto agent = make_agent("mock:cycle", spec);
        return run_episode(spec, *agent).to_json().dump();
    };
    EXPECT_EQ(run(), run());
}

TEST(Episode, StrictAlternationAndClockAccounting)
{
    const ScenarioSpec spec = short_spec(30.0);
    std::vector<double> decide_clocks;
    std::vector<double> step_clocks;
    EpisodeConfig cfg;
    cfg.hooks.before_decide = [&](const GameState &g, const Observation &o) {
        EXPECT_DOUBLE_EQ(o.time, g.clock);
        decide_clocks.push_back(g.clock);
    };
    cfg.hooks.after_step = [&](const GameState &g, const AgentDecision &) { step_clocks.push_back(g.clock); };

    MockAgent agent(builtin_mock_script("cycle"));
    const EpisodeResult r = run_episode(spec, agent, cfg);
    ASSERT_EQ(decide_clocks.size(), step_clocks.size());
    ASSERT_EQ(decide_clocks.size(), r.decisions.size());
    double total = 0.0;
    for (std::size_t i = 0; i < decide_clocks.size(); ++i)
    {
        EXPECT_DOUBLE_EQ(decide_clocks[i], i == 0 ? 0.0 : step_clocks[i - 1]);
        total += r.decisions[i].action.duration;
    }
    // The final window may be cut at max_time.
    EXPECT_LE(r.final_clock, total + 1e-9);
    EXPECT_GT(r.final_clock, total - r.decisions.back().action.duration);
    EXPECT_NEAR(r.final_clock, 30.0, 1e-9);
    EXPECT_EQ(r.status, EpisodeStatus::Completed);
    EXPECT_TRUE(r.score.has_value());
}

TEST(Episode, RemoteFailuresAreFlagged)
{
    StubServer stub({{"no idea"}});
    RemoteAgent agent(stub_config(stub, 5.0, 0));
    const EpisodeResult r = run_episode(short_spec(3.0), agent);
    EXPECT_EQ(r.status, EpisodeStatus::Completed);
    ASSERT_EQ(r.decisions.size(), 3u);
    EXPECT_EQ(r.flagged_failures(), 3);
    for (const auto &d : r.decisions)
    {
        EXPECT_EQ(d.failure, "ExhaustedRetries");
        EXPECT_EQ(d.action, make_action(0, 0, 0));
    }
}

TEST(Episode, ResultJsonRoundTrip)
{
    MockAgent agent(builtin_mock_script("cycle"));
    const EpisodeResult r = run_episode(short_spec(12.0), agent);
    const auto j = r.to_json();
    EXPECT_EQ(j["schema_version"], EpisodeResult::kSchemaVersion);
    EXPECT_EQ(EpisodeResult::from_json(j).to_json(), j);
    nlohmann::json bad = j;
    bad["schema_version"] = 99;
    EXPECT_THROW(EpisodeResult::from_json(bad), InvalidArgument);
}

TEST(Episode, BaselineOrdering)
{
    const ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i2");
    NaiveAgent naive;
    PursuitAgent pursuit;
    const double d_naive = run_episode(spec, naive).ledger.dm_lb;
    const double d_pursuit = run_episode(spec, pursuit).ledger.dm_lb;
    EXPECT_LT(d_pursuit, d_naive);
    EXPECT_LT(d_pursuit, 260.0);
}
