#pragma once

#include "spaceops/actions.hpp"
#include "spaceops/dynamics.hpp"
#include "spaceops/rng.hpp"
#include "spaceops/telemetry.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace spaceops
{

    enum class Family
    {
        PursuitEvasion,
        LadyBanditGuard,
    };

    enum class Policy
    {
        E1,
        E2,
        E3,
        E4,
        LG0,
        LG1,
        LG2,
    };

    enum class InitialOrbit
    {
        None, ///< PE scenarios
        I1,
        I2,
    };

    enum class Role : std::uint8_t
    {
        Pursuer,
        Evader,
        Bandit,
        Lady,
        Guard,
    };

    std::string_view role_name(Role role);

    /// Tuning of the scripted NPC behaviours. None of these are given by the
    /// original environment description; defaults keep the qualitative behaviour.
    struct NpcParams
    {
        double e2_trigger_range{500.0}; ///< m
        double e2_burn_probability{0.3};
        double e2_burn_min{0.5}; ///< s
        double e2_burn_max{1.5}; ///< s
        double e3_trigger_range{400.0}; ///< m
        double e3_escape_time{5.0};     ///< s
        double e3_cooldown{10.0};       ///< s
        double guard_closing_cap{10.0}; ///< m/s
        double guard_target_time{10.0}; ///< s
        double guard_zero_vel_tol{0.5}; ///< m/s
        double lady_trigger_range{500.0}; ///< m
        double lady_burst{2.0};           ///< s
    };

    struct ScenarioSpec
    {
        Family family{Family::LadyBanditGuard};
        Policy policy{Policy::LG0};
        InitialOrbit init{InitialOrbit::I2};

        double max_time{300.0};      ///< s
        double agent_max_accel{0.5}; ///< m/s^2
        double npc_max_accel{0.5};   ///< m/s^2
        double fuel{100.0};          ///< kg, agent vessel
        double fuel_rate{0.05};      ///< kg/s per unit |throttle| per axis
        double dt{0.1};              ///< s, propagator step
        std::uint64_t rng_seed{0};

        BodyParams body{};
        double orbit_radius{1.35e6};       ///< m
        double guard_offset{600.0};        ///< m along-track from Lady (i1: prograde, i2: retrograde)
        double bandit_offset{2000.0};      ///< m retrograde of Guard (i2)
        double pe_offset{2000.0};          ///< m pursuer trails evader
        double i1_periapsis_drop{20e3};    ///< m below Lady radius
        double i1_conjunction_time{60.0};  ///< s until Bandit reaches apoapsis
        double i1_conjunction_offset{0.0}; ///< m along-track miss of the apoapsis point vs Lady

        ActionLimits action_limits{};
        NpcParams npc{};

        /// "e1".."e4" or "lbg1-lg0-i2" style.
        std::string id() const;
    };

    /// Parses "e1".."e4", "lbg1-lgN-iM" (also "lgN-iM"). Case-insensitive.
    /// Throws UnsupportedScenario for lg3 and anything unrecognised.
    ScenarioSpec parse_scenario_id(std::string_view id);

    /// Config document: {"id": ..., plus any numeric field of ScenarioSpec,
    /// "npc": {...}, "action_limits": {...}}.
    nlohmann::json scenario_to_json(const ScenarioSpec &spec);
    /// Starts from parse_scenario_id(j["id"]) and applies the other keys.
    /// Throws UnsupportedScenario, InvalidArgument (unknown key or bad value).
    ScenarioSpec scenario_from_json(const nlohmann::json &j);

    enum class EpisodeStatus
    {
        Running,
        Completed,
        SurfaceImpact,
        Aborted,
    };

    std::string_view status_name(EpisodeStatus status);

    /// Per-NPC scripted-behaviour memory, advanced once per agent action window.
    struct NpcMemory
    {
        double burn_remaining{0.0};
        Vec3 burn_accel{Vec3::Zero()};
        double cooldown_remaining{0.0};
        enum class GuardPhase
        {
            Target,
            ZeroVel,
        } guard_phase{GuardPhase::Target};
        double phase_elapsed{0.0};
        int burst_sign{1};

        bool operator==(const NpcMemory &) const = default;
    };

    struct Observation
    {
        double time{0.0};
        double fuel{0.0};
        Vec3 rel_position{Vec3::Zero()}; ///< target - self, vessel frame
        Vec3 rel_velocity{Vec3::Zero()}; ///< target - self, vessel frame
        std::optional<Vec3> guard_rel_position;
        std::optional<Vec3> prograde; ///< absent when relative speed is ~0
        double distance{0.0};
        double speed{0.0};
        std::optional<double> guard_distance;
        std::string target_name{"Lady"};
        std::string scenario_id;

        bool operator==(const Observation &) const = default;
    };

    struct GameState
    {
        ScenarioSpec spec;
        double clock{0.0};
        std::array<std::optional<VesselState>, 5> vessels; ///< indexed by Role
        std::array<NpcMemory, 5> npc_memory;
        Rng rng;
        ScoreLedger ledger;
        bool done{false};
        EpisodeStatus status{EpisodeStatus::Running};
        double agent_burn_time{0.0}; ///< s of nonzero commanded thrust

        VesselState &vessel(Role role);
        const VesselState &vessel(Role role) const;
        bool has(Role role) const { return vessels[static_cast<std::size_t>(role)].has_value(); }

        Role agent_role() const;
        Role target_role() const;
        std::optional<Role> guard_role() const;

        bool operator==(const GameState &rhs) const;
    };

    /// Throws UnsupportedScenario, InvalidOrbit.
    GameState init_scenario(const ScenarioSpec &spec);

    Observation observe(const GameState &game);

    struct StepOutcome
    {
        Observation observation;
        bool done{false};
    };

    /// Advances the game by the action's duration (truncated at max_time).
    /// Throws EpisodeFinished if the game is already done. Surface impact ends
    /// the episode with EpisodeStatus::SurfaceImpact rather than throwing.
    StepOutcome step(GameState &game, const DiscreteAction &action);

    /// Body-frame acceleration of an NPC for the coming action window. Updates
    /// the NPC's memory and may draw from the game RNG (E2).
    Vec3 npc_policy(GameState &game, Role role);

    /// Advances NPC timers after a window of `elapsed` seconds.
    void advance_npc_memory(GameState &game, Role role, double elapsed);

} // namespace spaceops
