#include "spaceops/agents.hpp"

#include "spaceops/errors.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spaceops
{

    namespace
    {

        using Clock = std::chrono::steady_clock;

        double ms_since(Clock::time_point start)
        {
            return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
        }

        Throttle quantize(double desired, double deadband)
        {
            if (desired > deadband)
            {
                return Throttle::Positive;
            }
            if (desired < -deadband)
            {
                return Throttle::Negative;
            }
            return Throttle::Off;
        }

        DiscreteAction zero_action(const ActionLimits &limits)
        {
            return {Throttle::Off, Throttle::Off, Throttle::Off, limits.duration_default};
        }

        struct Endpoint
        {
            std::string scheme_host_port;
            std::string path;
        };

        Endpoint split_url(const std::string &url)
        {
            const auto scheme_end = url.find("://");
            if (scheme_end == std::string::npos)
            {
                throw InvalidArgument(fmt::format("endpoint '{}' has no scheme", url));
            }
            const auto path_start = url.find('/', scheme_end + 3);
            if (path_start == std::string::npos)
            {
                return {url, "/"};
            }
            return {url.substr(0, path_start), url.substr(path_start)};
        }

        std::vector<std::string> load_script_file(const std::string &path)
        {
            std::ifstream in(path);
            if (!in)
            {
                throw IoError(fmt::format("cannot open mock fixture '{}'", path));
            }
            std::stringstream ss;
            ss << in.rdbuf();
            const auto doc = nlohmann::json::parse(ss.str(), nullptr, false);
            if (doc.is_discarded() || !doc.is_array() || doc.empty())
            {
                throw InvalidArgument(fmt::format("mock fixture '{}' must be a non-empty JSON array of strings", path));
            }
            std::vector<std::string> out;
            for (const auto &item : doc)
            {
                out.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
            return out;
        }

        nlohmann::json action_to_json(const DiscreteAction &a)
        {
            return nlohmann::json::array({to_int(a.forward), to_int(a.right), to_int(a.up), a.duration});
        }

        DiscreteAction action_from_json(const nlohmann::json &j)
        {
            return make_action(j.at(0).get<int>(), j.at(1).get<int>(), j.at(2).get<int>(), j.at(3).get<double>());
        }

    } // namespace

    AgentDecision NaiveAgent::decide(const Observation &, const DashboardImage &)
    {
        AgentDecision d;
        d.action = {Throttle::Positive, Throttle::Off, Throttle::Off, limits_.duration_default};
        return d;
    }

    AgentDecision PursuitAgent::decide(const Observation &obs, const DashboardImage &)
    {
        const Vec3 desired = gains_.kp * obs.rel_position + gains_.kd * obs.rel_velocity;
        const double deadband = gains_.deadband_fraction * gains_.max_accel;
        AgentDecision d;
        d.action.right = quantize(desired.x(), deadband);
        d.action.forward = quantize(desired.y(), deadband);
        d.action.up = quantize(desired.z(), deadband);
        d.action.duration = limits_.duration_default;
        if (limits_.single_axis_only && !is_single_axis(d.action))
        {
            // keep the dominant axis
            Eigen::Index axis = 0;
            desired.cwiseAbs().maxCoeff(&axis);
            const DiscreteAction full = d.action;
            d.action.right = axis == 0 ? full.right : Throttle::Off;
            d.action.forward = axis == 1 ? full.forward : Throttle::Off;
            d.action.up = axis == 2 ? full.up : Throttle::Off;
        }
        return d;
    }

    MockAgent::MockAgent(std::vector<std::string> script, std::string label, ActionLimits limits, int max_retries)
        : script_(std::move(script)), label_(std::move(label)), limits_(limits), max_retries_(max_retries)
    {
        if (script_.empty())
        {
            throw InvalidArgument("mock agent needs at least one scripted reply");
        }
    }

    std::string MockAgent::next()
    {
        std::string s = script_[cursor_ % script_.size()];
        ++cursor_;
        return s;
    }

    AgentDecision MockAgent::decide(const Observation &, const DashboardImage &)
    {
        AgentDecision d;
        for (int attempt = 0;; ++attempt)
        {
            d.raw_response = next();
            try
            {
                d.action = parse_response(d.raw_response, limits_);
                d.parse_retries = attempt;
                return d;
            }
            catch (const ParseError &)
            {
                if (attempt >= max_retries_)
                {
                    d.action = zero_action(limits_);
                    d.parse_retries = attempt;
                    d.failure = "ExhaustedRetries";
                    return d;
                }
            }
        }
    }

    void RemoteConfig::validate() const
    {
        if (!(timeout_s > 0.0) || !std::isfinite(timeout_s))
        {
            throw InvalidArgument("remote timeout must be > 0");
        }
        if (max_retries < 0)
        {
            throw InvalidArgument("remote max_retries must be >= 0");
        }
    }

    RemoteConfig RemoteConfig::from_json(const nlohmann::json &j)
    {
        RemoteConfig c;
        c.endpoint = j.value("endpoint", c.endpoint);
        c.model = j.value("model", c.model);
        c.api_key_env = j.value("api_key_env", c.api_key_env);
        c.timeout_s = j.value("timeout_s", c.timeout_s);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.temperature = j.value("temperature", c.temperature);
        if (j.contains("mode"))
        {
            c.mode = parse_prompt_mode(j["mode"].get<std::string>());
        }
        c.validate();
        return c;
    }

    nlohmann::json RemoteConfig::to_json() const
    {
        return {{"endpoint", endpoint},   {"model", model},         {"api_key_env", api_key_env},
                {"timeout_s", timeout_s}, {"max_retries", max_retries}, {"temperature", temperature},
                {"mode", prompt_mode_name(mode)}};
    }

    nlohmann::json remote_request_body(const RemoteConfig &config, const std::vector<Message> &messages,
                                       const ActionLimits &limits)
    {
        return {{"model", config.model},
                {"temperature", config.temperature},
                {"messages", messages_to_json(messages)},
                {"tools", nlohmann::json::array({{{"type", "function"}, {"function", tool_schema(limits)}}})}};
    }

    std::string extract_reply_text(std::string_view body)
    {
        const auto doc = nlohmann::json::parse(body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
            doc["choices"].empty())
        {
            return std::string(body);
        }
        const auto &msg = doc["choices"][0].value("message", nlohmann::json::object());
        if (msg.contains("tool_calls") && msg["tool_calls"].is_array() && !msg["tool_calls"].empty())
        {
            return msg["tool_calls"].back().dump();
        }
        if (msg.contains("content") && msg["content"].is_string())
        {
            return msg["content"].get<std::string>();
        }
        return std::string(body);
    }

    RemoteReply remote_invoke(const RemoteConfig &config, const std::vector<Message> &messages,
                              const ActionLimits &limits)
    {
        config.validate();
        const Endpoint ep = split_url(config.endpoint);
        const std::string payload = remote_request_body(config, messages, limits).dump();

        httplib::Headers headers;
        if (const char *key = std::getenv(config.api_key_env.c_str()); key && *key)
        {
            headers.emplace("Authorization", fmt::format("Bearer {}", key));
        }

        const auto timeout = std::chrono::duration<double>(config.timeout_s);
        const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
        const auto start = Clock::now();
        for (int attempt = 0;; ++attempt)
        {
            httplib::Client cli(ep.scheme_host_port);
            cli.set_connection_timeout(timeout_us);
            cli.set_read_timeout(timeout_us);
            cli.set_write_timeout(timeout_us);

            const auto attempt_start = Clock::now();
            auto res = cli.Post(ep.path, headers, payload, "application/json");
            if (res)
            {
                if (res->status < 200 || res->status >= 300)
                {
                    throw HttpStatus(res->status, res->body.substr(0, 200));
                }
                RemoteReply reply;
                reply.body = res->body;
                reply.text = extract_reply_text(reply.body);
                reply.latency_ms = ms_since(start);
                return reply;
            }
            const auto err = res.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && Clock::now() - attempt_start >= 0.9 * timeout);
            if (timed_out)
            {
                throw Timeout(fmt::format("no reply from {} within {} s", config.endpoint, config.timeout_s));
            }
            if (attempt >= config.max_retries)
            {
                throw TransportError(fmt::format("{} after {} attempt(s): {}", config.endpoint, attempt + 1,
                                                 httplib::to_string(err)));
            }
        }
    }

    RemoteAgent::RemoteAgent(RemoteConfig config, std::string system_prompt, std::vector<FewShotExample> examples,
                             ActionLimits limits)
        : config_(std::move(config)), system_prompt_(std::move(system_prompt)), examples_(std::move(examples)),
          limits_(limits)
    {
        config_.validate();
    }

    AgentDecision RemoteAgent::decide(const Observation &obs, const DashboardImage &image)
    {
        AgentDecision d;
        const auto start = Clock::now();
        std::vector<Message> messages = build_messages(system_prompt_, examples_, obs, image, config_.mode);
        try
        {
            for (int attempt = 0;; ++attempt)
            {
                const RemoteReply reply = remote_invoke(config_, messages, limits_);
                d.raw_response = reply.text;
                try
                {
                    d.action = parse_response(reply.text, limits_);
                    d.parse_retries = attempt;
                    break;
                }
                catch (const ParseError &e)
                {
                    if (attempt >= config_.max_retries)
                    {
                        d.parse_retries = attempt;
                        throw ExhaustedRetries(fmt::format("{} parse retries exhausted: {}", attempt, e.what()));
                    }
                    messages.push_back({MessageRole::Assistant, {TextPart{reply.text}}});
                    messages.push_back(corrective_message(e.what(), limits_));
                }
            }
        }
        catch (const Error &e)
        {
            if (dynamic_cast<const ParseError *>(&e) != nullptr)
            {
                throw;
            }
            d.action = zero_action(limits_);
            d.failure = e.kind();
        }
        d.latency_ms = ms_since(start);
        return d;
    }

    std::vector<std::string> builtin_mock_script(std::string_view name)
    {
        if (name == "fig2")
        {
            return {"perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)"};
        }
        if (name == "hold")
        {
            return {"perform_action(Forward Throttle: None, Right Throttle: None, Down Throttle: None)"};
        }
        if (name == "cycle")
        {
            return {
                "Reasoning: the Lady is far ahead.\nOutput:\nperform_action(Forward Throttle: Forward, Right Throttle: None, Down Throttle: None)",
                "perform_action(forward throttle: forward, right throttle: right, down throttle: up)",
                R"({"function": "perform_action", "parameters": {"forward_throttle": "Forward", "down_throttle": "Down"}})",
                "I am not sure what to do.",
                "Reasoning: drifting; coast.\nAction: perform_action(Forward Throttle: None, Right Throttle: Left, Down Throttle: None)",
                "perform_action(Forward Throttle: Backward, Right Throttle: None, Down Throttle: None, Duration: 2)",
            };
        }
        throw InvalidArgument(fmt::format("unknown built-in mock fixture '{}'", name));
    }

    std::unique_ptr<Agent> make_agent(std::string_view spec, const ScenarioSpec &scenario)
    {
        const ActionLimits &limits = scenario.action_limits;
        if (spec == "naive")
        {
            return std::make_unique<NaiveAgent>(limits);
        }
        if (spec == "pursuit")
        {
            PursuitGains g;
            g.max_accel = scenario.agent_max_accel;
            return std::make_unique<PursuitAgent>(g, limits);
        }
        if (spec.starts_with("mock:"))
        {
            const std::string fixture(spec.substr(5));
            std::vector<std::string> script;
            if (fixture == "fig2" || fixture == "hold" || fixture == "cycle")
            {
                script = builtin_mock_script(fixture);
            }
            else
            {
                script = load_script_file(fixture);
            }
            return std::make_unique<MockAgent>(std::move(script), std::string(spec), limits);
        }
        if (spec.starts_with("remote:"))
        {
            const std::string path(spec.substr(7));
            std::ifstream in(path);
            if (!in)
            {
                throw IoError(fmt::format("cannot open remote profile '{}'", path));
            }
            const auto doc = nlohmann::json::parse(in, nullptr, false);
            if (doc.is_discarded() || !doc.is_object())
            {
                throw InvalidArgument(fmt::format("remote profile '{}' is not a JSON object", path));
            }
            return std::make_unique<RemoteAgent>(RemoteConfig::from_json(doc), default_system_prompt(),
                                                 default_few_shots(), limits);
        }
        throw InvalidArgument(fmt::format("unknown agent spec '{}'", spec));
    }

    long long EpisodeResult::flagged_failures() const
    {
        long long n = 0;
        for (const auto &d : decisions)
        {
            n += d.failure.has_value();
        }
        return n;
    }

    EpisodeMetrics EpisodeResult::metrics() const
    {
        EpisodeMetrics m;
        m.dm_lb = ledger.dm_lb;
        m.dm_bg = ledger.tracks_guard ? ledger.dm_bg : std::nullopt;
        m.score = score;
        for (const auto &d : decisions)
        {
            m.latencies_ms.push_back(d.latency_ms);
        }
        return m;
    }

    nlohmann::json EpisodeResult::to_json() const
    {
        nlohmann::json decisions_json = nlohmann::json::array();
        for (const auto &d : decisions)
        {
            nlohmann::json dj{{"clock", d.clock},
                              {"action", action_to_json(d.action)},
                              {"latency_ms", d.latency_ms},
                              {"parse_retries", d.parse_retries}};
            dj["failure"] = d.failure ? nlohmann::json(*d.failure) : nlohmann::json(nullptr);
            decisions_json.push_back(std::move(dj));
        }
        nlohmann::json j{{"schema_version", kSchemaVersion},
                         {"scenario", scenario_id},
                         {"agent", agent},
                         {"seed", seed},
                         {"status", status_name(status)},
                         {"final_clock", final_clock},
                         {"dm_lb", ledger.dm_lb},
                         {"ledger_samples", ledger.samples},
                         {"fuel_remaining", fuel_remaining},
                         {"flagged_failures", flagged_failures()},
                         {"decisions", std::move(decisions_json)}};
        j["dm_bg"] = (ledger.tracks_guard && ledger.dm_bg) ? nlohmann::json(*ledger.dm_bg) : nlohmann::json(nullptr);
        j["score"] = score ? nlohmann::json(*score) : nlohmann::json(nullptr);
        return j;
    }

    EpisodeResult EpisodeResult::from_json(const nlohmann::json &j)
    {
        if (j.value("schema_version", 0) != kSchemaVersion)
        {
            throw InvalidArgument(fmt::format("unsupported result schema_version {}", j.value("schema_version", 0)));
        }
        EpisodeResult r;
        r.scenario_id = j.at("scenario").get<std::string>();
        r.agent = j.at("agent").get<std::string>();
        r.seed = j.at("seed").get<std::uint64_t>();
        const std::string status = j.at("status").get<std::string>();
        r.status = status == "completed"        ? EpisodeStatus::Completed
                   : status == "surface_impact" ? EpisodeStatus::SurfaceImpact
                   : status == "aborted"        ? EpisodeStatus::Aborted
                                                : EpisodeStatus::Running;
        r.final_clock = j.at("final_clock").get<double>();
        r.ledger.dm_lb = j.at("dm_lb").get<double>();
        r.ledger.samples = j.value("ledger_samples", 0LL);
        if (!j.at("dm_bg").is_null())
        {
            r.ledger.tracks_guard = true;
            r.ledger.dm_bg = j["dm_bg"].get<double>();
        }
        if (!j.at("score").is_null())
        {
            r.score = j["score"].get<double>();
        }
        r.fuel_remaining = j.value("fuel_remaining", 0.0);
        for (const auto &dj : j.at("decisions"))
        {
            DecisionRecord d;
            d.clock = dj.at("clock").get<double>();
            d.action = action_from_json(dj.at("action"));
            d.latency_ms = dj.at("latency_ms").get<double>();
            d.parse_retries = dj.at("parse_retries").get<int>();
            if (!dj.at("failure").is_null())
            {
                d.failure = dj["failure"].get<std::string>();
            }
            r.decisions.push_back(std::move(d));
        }
        return r;
    }

    EpisodeResult run_episode(const ScenarioSpec &spec, Agent &agent, const EpisodeConfig &config)
    {
        EpisodeResult result;
        result.scenario_id = spec.id();
        result.agent = agent.name();
        result.seed = spec.rng_seed;

        GameState game = init_scenario(spec);
        agent.reset();
        Observation obs = observe(game);
        try
        {
            while (!game.done)
            {
                if (config.hooks.before_decide)
                {
                    config.hooks.before_decide(game, obs);
                }
                const DashboardImage image = render_dashboard(obs, config.dashboard);
                const AgentDecision decision = agent.decide(obs, image);
                result.decisions.push_back(
                    {game.clock, decision.action, decision.latency_ms, decision.parse_retries, decision.failure});
                obs = step(game, decision.action).observation;
                if (config.hooks.after_step)
                {
                    config.hooks.after_step(game, decision);
                }
            }
            result.status = game.status;
        }
        catch (const Error &)
        {
            result.status = EpisodeStatus::Aborted;
        }

        result.final_clock = game.clock;
        result.ledger = game.ledger;
        result.fuel_remaining = game.vessel(game.agent_role()).fuel;
        if (spec.family == Family::LadyBanditGuard)
        {
            result.score = score(game.ledger, config.score);
        }
        return result;
    }

} // namespace spaceops
