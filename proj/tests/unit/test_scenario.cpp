#include "spaceops/errors.hpp"
#include "spaceops/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace spaceops;

namespace
{

    double chord(double arc, double r)
    {
        return 2.0 * r * std::sin(arc / (2.0 * r));
    }

    double dist(const GameState &g, Role a, Role b)
    {
        return (g.vessel(a).state.position - g.vessel(b).state.position).norm();
    }

    const DiscreteAction kCoast = make_action(0, 0, 0);

} // namespace

TEST(ScenarioIds, ParsesKnownForms)
{
    EXPECT_EQ(parse_scenario_id("lbg1-lg0-i2").id(), "lbg1-lg0-i2");
    EXPECT_EQ(parse_scenario_id("LBG1_LG2_I1").id(), "lbg1-lg2-i1");
    EXPECT_EQ(parse_scenario_id("lg1-i2").id(), "lbg1-lg1-i2");
    EXPECT_EQ(parse_scenario_id("E3").id(), "e3");
    const ScenarioSpec pe = parse_scenario_id("e4");
    EXPECT_EQ(pe.family, Family::PursuitEvasion);
    EXPECT_EQ(pe.policy, Policy::E4);
}

TEST(ScenarioIds, RejectsLg3AndGarbage)
{
    try
    {
        parse_scenario_id("lbg1-lg3-i1");
        FAIL() << "lg3 accepted";
    }
    catch (const UnsupportedScenario &e)
    {
        EXPECT_NE(std::string(e.what()).find("unsupported scenario"), std::string::npos);
    }
    EXPECT_THROW(parse_scenario_id("e5"), UnsupportedScenario);
    EXPECT_THROW(parse_scenario_id("lbg1-lg0-i3"), UnsupportedScenario);
    EXPECT_THROW(parse_scenario_id(""), UnsupportedScenario);
}

TEST(ScenarioGeometry, I2Separations)
{
    const ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i2");
    const GameState g = init_scenario(spec);
    const double r = spec.orbit_radius;
    EXPECT_NEAR(dist(g, Role::Bandit, Role::Lady), 2600.0, 1.0);
    EXPECT_NEAR(dist(g, Role::Bandit, Role::Lady), chord(2600.0, r), 1e-6);
    EXPECT_NEAR(dist(g, Role::Guard, Role::Lady), chord(600.0, r), 1e-6);
    EXPECT_NEAR(dist(g, Role::Bandit, Role::Guard), chord(2000.0, r), 1e-6);
    // Guard and Bandit trail the Lady.
    const Vec3 v_lady = g.vessel(Role::Lady).state.velocity;
    EXPECT_LT((g.vessel(Role::Guard).state.position - g.vessel(Role::Lady).state.position).dot(v_lady), 0.0);
    EXPECT_LT((g.vessel(Role::Bandit).state.position - g.vessel(Role::Guard).state.position).dot(v_lady), 0.0);
}

TEST(ScenarioGeometry, I1GuardLeadsLady)
{
    const ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i1");
    const GameState g = init_scenario(spec);
    EXPECT_NEAR(dist(g, Role::Guard, Role::Lady), chord(600.0, spec.orbit_radius), 1e-6);
    const Vec3 v_lady = g.vessel(Role::Lady).state.velocity;
    EXPECT_GT((g.vessel(Role::Guard).state.position - g.vessel(Role::Lady).state.position).dot(v_lady), 0.0);
}

TEST(ScenarioGeometry, I1BanditReachesLadyRadiusAtConjunction)
{
    const ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i1");
    const GameState g = init_scenario(spec);
    const StateVector b0 = g.vessel(Role::Bandit).state;
    const double rp = spec.orbit_radius - spec.i1_periapsis_drop;
    const double ra = spec.orbit_radius;
    const double a = 0.5 * (rp + ra);
    const double r0 = b0.position.norm();
    EXPECT_NEAR(b0.velocity.squaredNorm(), spec.body.mu * (2.0 / r0 - 1.0 / a), 1e-6 * b0.velocity.squaredNorm());

    const StateVector b1 = propagate(b0, spec.i1_conjunction_time, Vec3::Zero(), Rotation{}, spec.body, spec.dt);
    EXPECT_NEAR(b1.position.norm(), spec.orbit_radius, 1.0);
    // Tangential: velocity perpendicular to the radius at apoapsis.
    EXPECT_NEAR(b1.position.normalized().dot(b1.velocity.normalized()), 0.0, 1e-6);
    // Conjunction point coincides with the Lady at that time.
    const StateVector l1 =
        propagate(g.vessel(Role::Lady).state, spec.i1_conjunction_time, Vec3::Zero(), Rotation{}, spec.body, spec.dt);
    EXPECT_LT((b1.position - l1.position).norm(), 5.0);
}

TEST(ScenarioGeometry, PursuerTrailsEvader)
{
    const ScenarioSpec spec = parse_scenario_id("e1");
    const GameState g = init_scenario(spec);
    EXPECT_NEAR(dist(g, Role::Pursuer, Role::Evader), chord(2000.0, spec.orbit_radius), 1e-6);
    EXPECT_FALSE(g.guard_role().has_value());
    EXPECT_EQ(g.agent_role(), Role::Pursuer);
    EXPECT_EQ(observe(g).target_name, "Evader");
}

TEST(ScenarioGeometry, InitIsDeterministic)
{
    ScenarioSpec spec = parse_scenario_id("e2");
    spec.rng_seed = 99;
    EXPECT_TRUE(init_scenario(spec) == init_scenario(spec));
}

TEST(ScenarioStep, ZeroThrottleCoastKeepsSeparation)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg0-i2"));
    while (!g.done)
    {
        step(g, kCoast);
        const double d = dist(g, Role::Bandit, Role::Lady);
        ASSERT_NEAR(d, 2600.0, 26.0);
    }
    EXPECT_NEAR(g.ledger.dm_lb, 2600.0, 26.0);
    EXPECT_NEAR(g.clock, 300.0, 1e-9);
    EXPECT_EQ(g.status, EpisodeStatus::Completed);
}

TEST(ScenarioStep, PassiveCoastConservesEnergy)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg0-i2"));
    std::array<double, 5> e0{};
    for (Role r : {Role::Bandit, Role::Lady, Role::Guard})
    {
        e0[static_cast<int>(r)] = specific_energy(g.vessel(r).state, g.spec.body);
    }
    while (!g.done)
    {
        step(g, kCoast);
    }
    for (Role r : {Role::Bandit, Role::Lady, Role::Guard})
    {
        const double e1 = specific_energy(g.vessel(r).state, g.spec.body);
        EXPECT_LT(std::abs((e1 - e0[static_cast<int>(r)]) / e0[static_cast<int>(r)]), 1e-8);
    }
}

TEST(ScenarioStep, ClockIsSumOfDurations)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg1-i2"));
    const std::vector<double> durations{1.0, 2.5, 0.3, 4.0, 0.7};
    double total = 0.0;
    for (double d : durations)
    {
        step(g, make_action(1, 0, -1, d));
        total += d;
        EXPECT_NEAR(g.clock, total, 1e-9);
    }
}

TEST(ScenarioStep, TruncatesAtMaxTimeThenFinishes)
{
    ScenarioSpec spec = parse_scenario_id("e1");
    spec.max_time = 2.5;
    GameState g = init_scenario(spec);
    step(g, kCoast);
    step(g, kCoast);
    const StepOutcome last = step(g, kCoast);
    EXPECT_TRUE(last.done);
    EXPECT_NEAR(g.clock, 2.5, 1e-12);
    EXPECT_THROW(step(g, kCoast), EpisodeFinished);
}

TEST(ScenarioStep, SingleAxisAblationRejectsMultiAxis)
{
    ScenarioSpec spec = parse_scenario_id("e1");
    spec.action_limits.single_axis_only = true;
    GameState g = init_scenario(spec);
    EXPECT_THROW(step(g, make_action(1, 1, 0)), InvalidArgument);
    EXPECT_NO_THROW(step(g, make_action(0, 1, 0)));
}

TEST(ScenarioStep, RejectsDurationOutsideLimits)
{
    GameState g = init_scenario(parse_scenario_id("e1"));
    EXPECT_THROW(step(g, make_action(1, 0, 0, 0.0)), InvalidArgument);
    EXPECT_THROW(step(g, make_action(1, 0, 0, 11.0)), InvalidArgument);
}

TEST(ScenarioStep, EmptyTankMeansNoThrust)
{
    ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i2");
    spec.fuel = 0.0;
    GameState burn = init_scenario(spec);
    GameState coast = init_scenario(spec);
    step(burn, make_action(1, 1, 1));
    step(coast, kCoast);
    EXPECT_EQ(burn.vessel(Role::Bandit).state, coast.vessel(Role::Bandit).state);
    EXPECT_EQ(burn.vessel(Role::Bandit).fuel, 0.0);
}

TEST(ScenarioStep, FuelDrainsPerFiringAxis)
{
    const ScenarioSpec spec = parse_scenario_id("lbg1-lg0-i2");
    GameState g = init_scenario(spec);
    step(g, make_action(1, -1, 0, 2.0));
    EXPECT_NEAR(g.vessel(Role::Bandit).fuel, spec.fuel - spec.fuel_rate * 2.0 * 2.0, 1e-9);
}

TEST(ScenarioStep, SameSeedSameObservations)
{
    ScenarioSpec spec = parse_scenario_id("e2");
    spec.pe_offset = 300.0;
    spec.rng_seed = 5;
    GameState a = init_scenario(spec);
    GameState b = init_scenario(spec);
    for (int i = 0; i < 40; ++i)
    {
        const auto action = make_action(i % 3 - 1, (i / 3) % 3 - 1, 0);
        ASSERT_EQ(step(a, action).observation, step(b, action).observation);
    }
    EXPECT_TRUE(a == b);
}

TEST(ScenarioStep, LedgerIsNonIncreasing)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg1-i2"));
    double prev_lb = g.ledger.dm_lb;
    double prev_bg = *g.ledger.dm_bg;
    for (int i = 0; i < 60; ++i)
    {
        step(g, make_action(1, 0, 0));
        EXPECT_LE(g.ledger.dm_lb, prev_lb);
        EXPECT_LE(*g.ledger.dm_bg, prev_bg);
        prev_lb = g.ledger.dm_lb;
        prev_bg = *g.ledger.dm_bg;
    }
    // One sample at init plus one per dt.
    EXPECT_EQ(g.ledger.samples, 1 + 60 * 10);
}

TEST(ScenarioObservation, Invariants)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg2-i2"));
    for (int i = 0; i < 20; ++i)
    {
        const Observation o = step(g, make_action(1, i % 2, -(i % 2))).observation;
        EXPECT_NEAR(o.distance, o.rel_position.norm(), 1e-9);
        EXPECT_NEAR(o.speed, o.rel_velocity.norm(), 1e-9);
        ASSERT_TRUE(o.prograde.has_value());
        EXPECT_NEAR(o.prograde->norm(), 1.0, 1e-12);
        ASSERT_TRUE(o.guard_distance.has_value());
        EXPECT_NEAR(*o.guard_distance, o.guard_rel_position->norm(), 1e-9);
    }
}

TEST(NpcPolicy, E1IsPassive)
{
    GameState g = init_scenario(parse_scenario_id("e1"));
    EXPECT_EQ(npc_policy(g, Role::Evader), Vec3::Zero());
}

TEST(NpcPolicy, E4ThrustsAlongOwnVelocity)
{
    GameState g = init_scenario(parse_scenario_id("e4"));
    const Vec3 a_body = npc_policy(g, Role::Evader);
    const VesselState &ev = g.vessel(Role::Evader);
    const Vec3 a_inertial = ev.attitude.apply(a_body);
    EXPECT_NEAR(a_inertial.norm(), g.spec.npc_max_accel, 1e-12);
    EXPECT_LT(a_inertial.normalized().cross(ev.state.velocity.normalized()).norm(), 1e-12);
    EXPECT_GT(a_inertial.dot(ev.state.velocity), 0.0);
}

TEST(NpcPolicy, GuardZeroVelOpposesRelativeVelocity)
{
    GameState g = init_scenario(parse_scenario_id("lbg1-lg1-i2"));
    VesselState &guard = g.vessel(Role::Guard);
    guard.state.velocity = g.vessel(Role::Bandit).state.velocity + guard.attitude.apply(Vec3(1, 0, 0));
    g.npc_memory[static_cast<int>(Role::Guard)].guard_phase = NpcMemory::GuardPhase::ZeroVel;
    const Vec3 a = npc_policy(g, Role::Guard);
    EXPECT_LT((a.normalized() - Vec3(-1, 0, 0)).norm(), 1e-9);
    EXPECT_NEAR(a.norm(), g.spec.npc_max_accel, 1e-12);
}

TEST(NpcPolicy, E2ScheduleFollowsSeed)
{
    auto schedule = [](std::uint64_t seed) {
        ScenarioSpec spec = parse_scenario_id("e2");
        spec.pe_offset = 300.0;
        spec.rng_seed = seed;
        GameState g = init_scenario(spec);
        std::vector<Vec3> out;
        for (int i = 0; i < 30; ++i)
        {
            step(g, kCoast);
            out.push_back(g.npc_memory[static_cast<int>(Role::Evader)].burn_accel);
        }
        return out;
    };
    EXPECT_EQ(schedule(3), schedule(3));
}

TEST(ScenarioConfig, JsonRoundTrip)
{
    ScenarioSpec spec = parse_scenario_id("lbg1-lg2-i1");
    spec.max_time = 120.0;
    spec.npc.lady_burst = 3.0;
    spec.action_limits.single_axis_only = true;
    spec.rng_seed = 17;
    const ScenarioSpec back = scenario_from_json(scenario_to_json(spec));
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(spec));
    EXPECT_EQ(back.id(), "lbg1-lg2-i1");
    EXPECT_DOUBLE_EQ(back.npc.lady_burst, 3.0);

    EXPECT_THROW(scenario_from_json({{"id", "e1"}, {"warp", 3}}), InvalidArgument);
    EXPECT_THROW(scenario_from_json({{"id", "lbg1-lg3-i2"}}), UnsupportedScenario);
}
