#include "spaceops/scenario.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <utility>
#include <vector>

namespace spaceops
{

    namespace
    {

        std::size_t idx(Role role) { return static_cast<std::size_t>(role); }

        std::string lower(std::string_view s)
        {
            std::string out(s);
            std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
            return out;
        }

        VesselState make_vessel(const StateVector &s, double fuel, Role role)
        {
            VesselState v;
            v.state = s;
            v.attitude = orbit_frame(s);
            v.fuel = fuel;
            v.name = std::string(role_name(role));
            return v;
        }

        Vec3 unit_or_zero(const Vec3 &v)
        {
            const double n = v.norm();
            return n > 0.0 ? Vec3(v / n) : Vec3(Vec3::Zero());
        }

        bool is_npc(const GameState &game, Role role) { return game.has(role) && role != game.agent_role(); }

        void sample_ledger(GameState &game)
        {
            const auto &self = game.vessel(game.agent_role()).state.position;
            const double d_lb = (game.vessel(game.target_role()).state.position - self).norm();
            std::optional<double> d_bg;
            if (auto g = game.guard_role())
            {
                d_bg = (game.vessel(*g).state.position - self).norm();
            }
            game.ledger = update_ledger(game.ledger, d_lb, d_bg);
        }

    } // namespace

    std::string_view role_name(Role role)
    {
        switch (role)
        {
        case Role::Pursuer:
            return "pursuer";
        case Role::Evader:
            return "evader";
        case Role::Bandit:
            return "bandit";
        case Role::Lady:
            return "lady";
        case Role::Guard:
            return "guard";
        }
        return "unknown";
    }

    std::string_view status_name(EpisodeStatus status)
    {
        switch (status)
        {
        case EpisodeStatus::Running:
            return "running";
        case EpisodeStatus::Completed:
            return "completed";
        case EpisodeStatus::SurfaceImpact:
            return "surface_impact";
        case EpisodeStatus::Aborted:
            return "aborted";
        }
        return "unknown";
    }

    std::string ScenarioSpec::id() const
    {
        if (family == Family::PursuitEvasion)
        {
            return fmt::format("e{}", static_cast<int>(policy) - static_cast<int>(Policy::E1) + 1);
        }
        return fmt::format("lbg1-lg{}-i{}", static_cast<int>(policy) - static_cast<int>(Policy::LG0),
                           init == InitialOrbit::I1 ? 1 : 2);
    }

    ScenarioSpec parse_scenario_id(std::string_view id)
    {
        const std::string s = lower(id);
        ScenarioSpec spec;
        if (s.size() == 2 && s[0] == 'e' && s[1] >= '1' && s[1] <= '4')
        {
            spec.family = Family::PursuitEvasion;
            spec.policy = static_cast<Policy>(static_cast<int>(Policy::E1) + (s[1] - '1'));
            spec.init = InitialOrbit::None;
            return spec;
        }

        std::string_view rest = s;
        for (std::string_view prefix : {"lbg1-", "lbg1_", "lbg-", "lbg_"})
        {
            if (rest.starts_with(prefix))
            {
                rest.remove_prefix(prefix.size());
                break;
            }
        }
        // rest should now be "lgN-iM" or "lgN_iM"
        if (rest.size() == 6 && rest.starts_with("lg") && (rest[3] == '-' || rest[3] == '_') && rest[4] == 'i')
        {
            const char lg = rest[2];
            const char init = rest[5];
            if (lg == '3')
            {
                throw UnsupportedScenario(fmt::format("unsupported scenario '{}': lg3 is not available", id));
            }
            if (lg >= '0' && lg <= '2' && (init == '1' || init == '2'))
            {
                spec.family = Family::LadyBanditGuard;
                spec.policy = static_cast<Policy>(static_cast<int>(Policy::LG0) + (lg - '0'));
                spec.init = init == '1' ? InitialOrbit::I1 : InitialOrbit::I2;
                return spec;
            }
        }
        throw UnsupportedScenario(fmt::format("unsupported scenario '{}'", id));
    }

    VesselState &GameState::vessel(Role role)
    {
        auto &v = vessels[idx(role)];
        if (!v)
        {
            throw InvalidArgument(fmt::format("role {} is not part of this scenario", role_name(role)));
        }
        return *v;
    }

    const VesselState &GameState::vessel(Role role) const
    {
        const auto &v = vessels[idx(role)];
        if (!v)
        {
            throw InvalidArgument(fmt::format("role {} is not part of this scenario", role_name(role)));
        }
        return *v;
    }

    Role GameState::agent_role() const
    {
        return spec.family == Family::PursuitEvasion ? Role::Pursuer : Role::Bandit;
    }

    Role GameState::target_role() const
    {
        return spec.family == Family::PursuitEvasion ? Role::Evader : Role::Lady;
    }

    std::optional<Role> GameState::guard_role() const
    {
        if (spec.family == Family::LadyBanditGuard)
        {
            return Role::Guard;
        }
        return std::nullopt;
    }

    bool GameState::operator==(const GameState &rhs) const
    {
        if (clock != rhs.clock || done != rhs.done || status != rhs.status || rng != rhs.rng ||
            npc_memory != rhs.npc_memory || agent_burn_time != rhs.agent_burn_time)
        {
            return false;
        }
        if (ledger.dm_lb != rhs.ledger.dm_lb || ledger.dm_bg != rhs.ledger.dm_bg || ledger.samples != rhs.ledger.samples)
        {
            return false;
        }
        for (std::size_t i = 0; i < vessels.size(); ++i)
        {
            if (vessels[i].has_value() != rhs.vessels[i].has_value())
            {
                return false;
            }
            if (vessels[i])
            {
                const auto &a = *vessels[i];
                const auto &b = *rhs.vessels[i];
                if (!(a.state == b.state) || !(a.attitude == b.attitude) || a.fuel != b.fuel || a.name != b.name)
                {
                    return false;
                }
            }
        }
        return true;
    }

    GameState init_scenario(const ScenarioSpec &spec)
    {
        if (spec.family == Family::LadyBanditGuard &&
            !(spec.policy == Policy::LG0 || spec.policy == Policy::LG1 || spec.policy == Policy::LG2))
        {
            throw UnsupportedScenario("LBG scenarios take policies lg0..lg2");
        }
        if (spec.family == Family::PursuitEvasion &&
            !(spec.policy == Policy::E1 || spec.policy == Policy::E2 || spec.policy == Policy::E3 || spec.policy == Policy::E4))
        {
            throw UnsupportedScenario("PE scenarios take policies e1..e4");
        }
        if (spec.family == Family::LadyBanditGuard && spec.init == InitialOrbit::None)
        {
            throw UnsupportedScenario("LBG scenarios need an initial-orbit identifier i1 or i2");
        }
        if (!(spec.dt > 0.0) || !(spec.max_time > 0.0) || !(spec.agent_max_accel >= 0.0) || !(spec.npc_max_accel >= 0.0) ||
            !(spec.fuel >= 0.0) || !(spec.fuel_rate >= 0.0))
        {
            throw InvalidArgument("scenario dt, max_time must be > 0 and accel, fuel, fuel_rate >= 0");
        }

        GameState game;
        game.spec = spec;
        game.rng.seed(spec.rng_seed);

        const double r = spec.orbit_radius;
        const auto circular = OrbitShape::circular(r);
        auto put = [&](Role role, const StateVector &s, double fuel) {
            game.vessels[idx(role)] = make_vessel(s, fuel, role);
        };

        if (spec.family == Family::PursuitEvasion)
        {
            put(Role::Evader, make_orbit(circular, 0.0, spec.body), spec.fuel);
            put(Role::Pursuer, make_orbit(circular, -spec.pe_offset / r, spec.body), spec.fuel);
            game.ledger = ScoreLedger::for_pursuit();
        }
        else if (spec.init == InitialOrbit::I2)
        {
            put(Role::Lady, make_orbit(circular, 0.0, spec.body), spec.fuel);
            put(Role::Guard, make_orbit(circular, -spec.guard_offset / r, spec.body), spec.fuel);
            put(Role::Bandit, make_orbit(circular, -(spec.guard_offset + spec.bandit_offset) / r, spec.body), spec.fuel);
            game.ledger = ScoreLedger::for_guarding();
        }
        else
        {
            put(Role::Lady, make_orbit(circular, 0.0, spec.body), spec.fuel);
            put(Role::Guard, make_orbit(circular, spec.guard_offset / r, spec.body), spec.fuel);

            // Bandit apoapsis touches the Lady's circle at the point the Lady
            // occupies after i1_conjunction_time (plus the configured miss).
            const double rp = r - spec.i1_periapsis_drop;
            const double lady_rate = circular_speed(r, spec.body) / r;
            const double conj_angle = lady_rate * spec.i1_conjunction_time + spec.i1_conjunction_offset / r;
            const double arg_periapsis = conj_angle - std::numbers::pi;
            const double nu0 = true_anomaly_before_apoapsis(rp, r, spec.i1_conjunction_time, spec.body);
            put(Role::Bandit, make_orbit(OrbitShape::elliptical(rp, r, arg_periapsis), nu0, spec.body), spec.fuel);
            game.ledger = ScoreLedger::for_guarding();
        }

        sample_ledger(game);
        return game;
    }

    Observation observe(const GameState &game)
    {
        const VesselState &self = game.vessel(game.agent_role());
        const VesselState &target = game.vessel(game.target_role());
        const Rotation &att = self.attitude;

        Observation obs;
        obs.time = game.clock;
        obs.fuel = self.fuel;
        obs.rel_position = att.apply_inverse(target.state.position - self.state.position);
        obs.rel_velocity = att.apply_inverse(target.state.velocity - self.state.velocity);
        obs.distance = obs.rel_position.norm();
        obs.speed = obs.rel_velocity.norm();
        try
        {
            obs.prograde = prograde(self.state.velocity, target.state.velocity, att);
        }
        catch (const ZeroRelativeVelocity &)
        {
            obs.prograde.reset();
        }
        if (auto g = game.guard_role())
        {
            obs.guard_rel_position = att.apply_inverse(game.vessel(*g).state.position - self.state.position);
            obs.guard_distance = obs.guard_rel_position->norm();
        }
        obs.target_name = game.spec.family == Family::PursuitEvasion ? "Evader" : "Lady";
        obs.scenario_id = game.spec.id();
        return obs;
    }

    Vec3 npc_policy(GameState &game, Role role)
    {
        if (!is_npc(game, role))
        {
            throw InvalidArgument(fmt::format("{} is not an NPC in {}", role_name(role), game.spec.id()));
        }
        const ScenarioSpec &spec = game.spec;
        const NpcParams &np = spec.npc;
        const double amax = spec.npc_max_accel;
        NpcMemory &mem = game.npc_memory[idx(role)];
        const VesselState &me = game.vessel(role);
        const VesselState &agent = game.vessel(game.agent_role());

        const Vec3 to_agent_inertial = agent.state.position - me.state.position;
        const double agent_range = to_agent_inertial.norm();
        const Vec3 to_agent = me.attitude.apply_inverse(to_agent_inertial);

        switch (spec.policy)
        {
        case Policy::E1:
        case Policy::LG0:
            return Vec3::Zero();

        case Policy::E4:
            return amax * unit_or_zero(me.attitude.apply_inverse(me.state.velocity));

        case Policy::E2:
            if (mem.burn_remaining > 0.0)
            {
                return mem.burn_accel;
            }
            if (agent_range <= np.e2_trigger_range && uniform01(game.rng) < np.e2_burn_probability)
            {
                const auto axis = static_cast<int>(uniform_below(game.rng, 6));
                Vec3 dir = Vec3::Zero();
                dir[axis / 2] = (axis % 2 == 0) ? 1.0 : -1.0;
                mem.burn_accel = amax * dir;
                mem.burn_remaining = uniform(game.rng, np.e2_burn_min, np.e2_burn_max);
                return mem.burn_accel;
            }
            return Vec3::Zero();

        case Policy::E3:
            if (mem.burn_remaining > 0.0)
            {
                return -amax * unit_or_zero(to_agent);
            }
            if (mem.cooldown_remaining <= 0.0 && agent_range <= np.e3_trigger_range)
            {
                mem.burn_remaining = np.e3_escape_time;
                return -amax * unit_or_zero(to_agent);
            }
            return Vec3::Zero();

        case Policy::LG1:
        case Policy::LG2:
            break;
        }

        if (role == Role::Guard)
        {
            const Vec3 v_rel = me.attitude.apply_inverse(me.state.velocity - agent.state.velocity);
            const Vec3 los = unit_or_zero(to_agent);
            if (mem.guard_phase == NpcMemory::GuardPhase::Target)
            {
                const double closing = v_rel.dot(los);
                if (closing >= np.guard_closing_cap || mem.phase_elapsed >= np.guard_target_time)
                {
                    mem.guard_phase = NpcMemory::GuardPhase::ZeroVel;
                    mem.phase_elapsed = 0.0;
                }
            }
            else if (v_rel.norm() < np.guard_zero_vel_tol)
            {
                mem.guard_phase = NpcMemory::GuardPhase::Target;
                mem.phase_elapsed = 0.0;
            }
            if (mem.guard_phase == NpcMemory::GuardPhase::Target)
            {
                return amax * los;
            }
            return -amax * unit_or_zero(v_rel);
        }

        // Lady under lg2: out-of-plane bursts, alternating sign. The orbit
        // normal r x v is -X in the orbit-local frame.
        if (spec.policy == Policy::LG2 && role == Role::Lady)
        {
            if (mem.burn_remaining > 0.0)
            {
                return mem.burn_accel;
            }
            if (agent_range <= np.lady_trigger_range)
            {
                mem.burn_accel = Vec3{-amax * mem.burst_sign, 0.0, 0.0};
                mem.burn_remaining = np.lady_burst;
                mem.burst_sign = -mem.burst_sign;
                return mem.burn_accel;
            }
        }
        return Vec3::Zero();
    }

    void advance_npc_memory(GameState &game, Role role, double elapsed)
    {
        NpcMemory &mem = game.npc_memory[idx(role)];
        mem.phase_elapsed += elapsed;
        if (mem.burn_remaining > 0.0)
        {
            mem.burn_remaining -= elapsed;
            if (mem.burn_remaining <= 0.0)
            {
                mem.burn_remaining = 0.0;
                if (game.spec.policy == Policy::E3)
                {
                    mem.cooldown_remaining = game.spec.npc.e3_cooldown;
                }
            }
        }
        else if (mem.cooldown_remaining > 0.0)
        {
            mem.cooldown_remaining = std::max(0.0, mem.cooldown_remaining - elapsed);
        }
    }

    StepOutcome step(GameState &game, const DiscreteAction &action)
    {
        if (game.done)
        {
            throw EpisodeFinished(fmt::format("episode already finished at t={} s", game.clock));
        }
        const ScenarioSpec &spec = game.spec;
        const ActionLimits &lim = spec.action_limits;
        if (!(action.duration >= lim.duration_min && action.duration <= lim.duration_max))
        {
            throw InvalidArgument(fmt::format("action duration {} s outside [{}, {}]", action.duration,
                                              lim.duration_min, lim.duration_max));
        }
        if (lim.single_axis_only && !is_single_axis(action))
        {
            throw InvalidArgument("single-axis mode rejects combined-axis actions");
        }

        const Role agent = game.agent_role();
        const auto [agent_accel, duration] = to_accel(action, spec.agent_max_accel);
        const double throttle_sum = std::abs(to_int(action.forward)) + std::abs(to_int(action.right)) + std::abs(to_int(action.up));

        // NPC commands are held for the whole window.
        std::array<Vec3, 5> npc_accel;
        npc_accel.fill(Vec3::Zero());
        for (std::size_t i = 0; i < game.vessels.size(); ++i)
        {
            const auto role = static_cast<Role>(i);
            if (is_npc(game, role))
            {
                npc_accel[i] = npc_policy(game, role);
            }
        }

        const double window = std::min(duration, spec.max_time - game.clock);
        const double clock_start = game.clock;
        double elapsed = 0.0;
        try
        {
            while (window - elapsed > 1e-9 * spec.dt)
            {
                const double h = std::min(spec.dt, window - elapsed);
                for (std::size_t i = 0; i < game.vessels.size(); ++i)
                {
                    if (!game.vessels[i])
                    {
                        continue;
                    }
                    VesselState &v = *game.vessels[i];
                    Vec3 accel = npc_accel[i];
                    if (static_cast<Role>(i) == agent)
                    {
                        accel = v.fuel > 0.0 ? agent_accel : Vec3(Vec3::Zero());
                        if (v.fuel > 0.0 && throttle_sum > 0.0)
                        {
                            game.agent_burn_time += h;
                            v.fuel = std::max(0.0, v.fuel - spec.fuel_rate * throttle_sum * h);
                        }
                    }
                    v.state = propagate(v.state, h, accel, v.attitude, spec.body, h);
                    v.attitude = orbit_frame(v.state);
                }
                elapsed += h;
                game.clock = clock_start + elapsed;
                sample_ledger(game);
            }
        }
        catch (const SurfaceImpact &)
        {
            game.clock = clock_start + elapsed;
            game.done = true;
            game.status = EpisodeStatus::SurfaceImpact;
            return {observe(game), true};
        }

        game.clock = clock_start + window;
        for (std::size_t i = 0; i < game.vessels.size(); ++i)
        {
            const auto role = static_cast<Role>(i);
            if (is_npc(game, role))
            {
                advance_npc_memory(game, role, window);
            }
        }
        if (game.clock >= spec.max_time - 1e-9)
        {
            game.done = true;
            game.status = EpisodeStatus::Completed;
        }
        return {observe(game), game.done};
    }

    namespace
    {

        template <class T>
        using Fields = std::vector<std::pair<const char *, double T::*>>;

        const Fields<ScenarioSpec> &spec_fields()
        {
            static const Fields<ScenarioSpec> f{
                {"max_time", &ScenarioSpec::max_time},
                {"agent_max_accel", &ScenarioSpec::agent_max_accel},
                {"npc_max_accel", &ScenarioSpec::npc_max_accel},
                {"fuel", &ScenarioSpec::fuel},
                {"fuel_rate", &ScenarioSpec::fuel_rate},
                {"dt", &ScenarioSpec::dt},
                {"orbit_radius", &ScenarioSpec::orbit_radius},
                {"guard_offset", &ScenarioSpec::guard_offset},
                {"bandit_offset", &ScenarioSpec::bandit_offset},
                {"pe_offset", &ScenarioSpec::pe_offset},
                {"i1_periapsis_drop", &ScenarioSpec::i1_periapsis_drop},
                {"i1_conjunction_time", &ScenarioSpec::i1_conjunction_time},
                {"i1_conjunction_offset", &ScenarioSpec::i1_conjunction_offset},
            };
            return f;
        }

        const Fields<NpcParams> &npc_fields()
        {
            static const Fields<NpcParams> f{
                {"e2_trigger_range", &NpcParams::e2_trigger_range},
                {"e2_burn_probability", &NpcParams::e2_burn_probability},
                {"e2_burn_min", &NpcParams::e2_burn_min},
                {"e2_burn_max", &NpcParams::e2_burn_max},
                {"e3_trigger_range", &NpcParams::e3_trigger_range},
                {"e3_escape_time", &NpcParams::e3_escape_time},
                {"e3_cooldown", &NpcParams::e3_cooldown},
                {"guard_closing_cap", &NpcParams::guard_closing_cap},
                {"guard_target_time", &NpcParams::guard_target_time},
                {"guard_zero_vel_tol", &NpcParams::guard_zero_vel_tol},
                {"lady_trigger_range", &NpcParams::lady_trigger_range},
                {"lady_burst", &NpcParams::lady_burst},
            };
            return f;
        }

        const Fields<ActionLimits> &limit_fields()
        {
            static const Fields<ActionLimits> f{
                {"duration_default", &ActionLimits::duration_default},
                {"duration_min", &ActionLimits::duration_min},
                {"duration_max", &ActionLimits::duration_max},
            };
            return f;
        }

        template <class T>
        nlohmann::json dump_fields(const T &obj, const Fields<T> &fields)
        {
            nlohmann::json j = nlohmann::json::object();
            for (const auto &[name, member] : fields)
            {
                j[name] = obj.*member;
            }
            return j;
        }

        template <class T>
        void load_fields(T &obj, const Fields<T> &fields, const nlohmann::json &j, std::string_view where,
                         std::initializer_list<std::string_view> extra_keys)
        {
            if (!j.is_object())
            {
                throw InvalidArgument(fmt::format("{} must be an object", where));
            }
            for (const auto &[key, value] : j.items())
            {
                if (std::find(extra_keys.begin(), extra_keys.end(), key) != extra_keys.end())
                {
                    continue;
                }
                const auto it = std::find_if(fields.begin(), fields.end(), [&](const auto &f) { return key == f.first; });
                if (it == fields.end())
                {
                    throw InvalidArgument(fmt::format("unknown {} key '{}'", where, key));
                }
                if (!value.is_number() || !std::isfinite(value.template get<double>()))
                {
                    throw InvalidArgument(fmt::format("{} key '{}' must be a finite number", where, key));
                }
                obj.*(it->second) = value.template get<double>();
            }
        }

    } // namespace

    nlohmann::json scenario_to_json(const ScenarioSpec &spec)
    {
        nlohmann::json j = dump_fields(spec, spec_fields());
        j["id"] = spec.id();
        j["rng_seed"] = spec.rng_seed;
        j["body"] = {{"mu", spec.body.mu}, {"radius", spec.body.radius}};
        j["npc"] = dump_fields(spec.npc, npc_fields());
        j["action_limits"] = dump_fields(spec.action_limits, limit_fields());
        j["action_limits"]["single_axis_only"] = spec.action_limits.single_axis_only;
        return j;
    }

    ScenarioSpec scenario_from_json(const nlohmann::json &j)
    {
        if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
        {
            throw InvalidArgument("scenario config needs a string 'id'");
        }
        ScenarioSpec spec = parse_scenario_id(j["id"].get<std::string>());
        load_fields(spec, spec_fields(), j, "scenario", {"id", "rng_seed", "body", "npc", "action_limits"});
        if (j.contains("rng_seed"))
        {
            if (!j["rng_seed"].is_number_unsigned())
            {
                throw InvalidArgument("rng_seed must be a non-negative integer");
            }
            spec.rng_seed = j["rng_seed"].get<std::uint64_t>();
        }
        if (j.contains("body"))
        {
            const Fields<BodyParams> body{{"mu", &BodyParams::mu}, {"radius", &BodyParams::radius}};
            load_fields(spec.body, body, j["body"], "body", {});
        }
        if (j.contains("npc"))
        {
            load_fields(spec.npc, npc_fields(), j["npc"], "npc", {});
        }
        if (j.contains("action_limits"))
        {
            const auto &al = j["action_limits"];
            load_fields(spec.action_limits, limit_fields(), al, "action_limits", {"single_axis_only"});
            if (al.contains("single_axis_only"))
            {
                spec.action_limits.single_axis_only = al["single_axis_only"].get<bool>();
            }
        }
        if (!(spec.dt > 0.0) || !(spec.max_time > 0.0) || spec.fuel < 0.0 || spec.fuel_rate < 0.0)
        {
            throw InvalidArgument("scenario config has a non-positive dt/max_time or negative fuel");
        }
        return spec;
    }

} // namespace spaceops
