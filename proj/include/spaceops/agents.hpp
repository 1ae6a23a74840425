#pragma once

#include "spaceops/actions.hpp"
#include "spaceops/navball.hpp"
#include "spaceops/prompt.hpp"
#include "spaceops/scenario.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spaceops
{

    struct AgentDecision
    {
        DiscreteAction action;
        double latency_ms{0.0};   ///< request start -> parsed action; 0 for scripted agents
        std::string raw_response; ///< empty for scripted agents
        int parse_retries{0};
        /// Error kind when a zero action was substituted (Timeout, TransportError,
        /// HttpStatus, ExhaustedRetries).
        std::optional<std::string> failure;
    };

    class Agent
    {
    public:
        virtual ~Agent() = default;
        virtual AgentDecision decide(const Observation &obs, const DashboardImage &image) = 0;
        virtual std::string name() const = 0;
        /// Called at the start of every episode.
        virtual void reset() {}
    };

    /// Constant full forward burn.
    class NaiveAgent final : public Agent
    {
    public:
        explicit NaiveAgent(ActionLimits limits = {}) : limits_(limits) {}
        AgentDecision decide(const Observation &obs, const DashboardImage &image) override;
        std::string name() const override { return "naive"; }

    private:
        ActionLimits limits_;
    };

    struct PursuitGains
    {
        double kp{0.002};           ///< 1/s^2
        double kd{0.1};             ///< 1/s
        double max_accel{0.5};      ///< m/s^2, sets the deadband scale
        double deadband_fraction{0.05};
    };

    /// PD law on relative position/velocity, each axis quantised to {-1, 0, +1}.
    class PursuitAgent final : public Agent
    {
    public:
        explicit PursuitAgent(PursuitGains gains = {}, ActionLimits limits = {}) : gains_(gains), limits_(limits) {}
        AgentDecision decide(const Observation &obs, const DashboardImage &image) override;
        std::string name() const override { return "pursuit"; }

    private:
        PursuitGains gains_;
        ActionLimits limits_;
    };

    /// Replays scripted model replies through the response parser. A reply
    /// that fails to parse consumes the next one as a corrective retry.
    class MockAgent final : public Agent
    {
    public:
        MockAgent(std::vector<std::string> script, std::string label = "mock", ActionLimits limits = {},
                  int max_retries = 2);
        AgentDecision decide(const Observation &obs, const DashboardImage &image) override;
        std::string name() const override { return label_; }
        void reset() override { cursor_ = 0; }

    private:
        std::string next();

        std::vector<std::string> script_;
        std::string label_;
        ActionLimits limits_;
        int max_retries_;
        std::size_t cursor_{0};
    };

    struct RemoteConfig
    {
        std::string endpoint{"https://api.openai.com/v1/chat/completions"};
        std::string model{"gpt-4o"};
        std::string api_key_env{"OPENAI_API_KEY"};
        double timeout_s{30.0};
        int max_retries{2};
        double temperature{0.0};
        PromptMode mode{PromptMode::FewShot};

        /// Throws InvalidArgument on timeout <= 0 or max_retries < 0.
        void validate() const;
        static RemoteConfig from_json(const nlohmann::json &j);
        nlohmann::json to_json() const;
    };

    struct RemoteReply
    {
        std::string body; ///< raw HTTP body
        std::string text; ///< assistant content extracted from the body
        double latency_ms{0.0};
    };

    /// Request document POSTed by remote_invoke.
    nlohmann::json remote_request_body(const RemoteConfig &config, const std::vector<Message> &messages,
                                       const ActionLimits &limits = {});

    /// Assistant text from a chat-completions body (content, or tool call
    /// rendered as a tool-call document); the raw body otherwise.
    std::string extract_reply_text(std::string_view body);

    /// POSTs the message document. Retries transport failures up to
    /// config.max_retries. Throws Timeout, TransportError, HttpStatus.
    RemoteReply remote_invoke(const RemoteConfig &config, const std::vector<Message> &messages,
                              const ActionLimits &limits = {});

    class RemoteAgent final : public Agent
    {
    public:
        RemoteAgent(RemoteConfig config, std::string system_prompt = default_system_prompt(),
                    std::vector<FewShotExample> examples = default_few_shots(), ActionLimits limits = {});
        AgentDecision decide(const Observation &obs, const DashboardImage &image) override;
        std::string name() const override { return "remote:" + config_.model; }

    private:
        RemoteConfig config_;
        std::string system_prompt_;
        std::vector<FewShotExample> examples_;
        ActionLimits limits_;
    };

    /// Agent spec strings: naive | pursuit | mock:<fixture> | remote:<profile.json>.
    /// Built-in mock fixtures: "fig2", "hold", "cycle". Other fixtures are file
    /// paths holding a JSON array of reply strings.
    std::unique_ptr<Agent> make_agent(std::string_view spec, const ScenarioSpec &scenario);

    std::vector<std::string> builtin_mock_script(std::string_view name);

    struct DecisionRecord
    {
        double clock{0.0}; ///< episode clock when the decision was requested
        DiscreteAction action;
        double latency_ms{0.0};
        int parse_retries{0};
        std::optional<std::string> failure;
    };

    struct EpisodeResult
    {
        static constexpr int kSchemaVersion = 1;

        std::string scenario_id;
        std::string agent;
        std::uint64_t seed{0};
        EpisodeStatus status{EpisodeStatus::Running};
        double final_clock{0.0};
        ScoreLedger ledger;
        std::optional<double> score;
        double fuel_remaining{0.0};
        std::vector<DecisionRecord> decisions;

        long long flagged_failures() const;
        EpisodeMetrics metrics() const;
        nlohmann::json to_json() const;
        static EpisodeResult from_json(const nlohmann::json &j);
    };

    struct EpisodeHooks
    {
        std::function<void(const GameState &, const Observation &)> before_decide;
        std::function<void(const GameState &, const AgentDecision &)> after_step;
    };

    struct EpisodeConfig
    {
        DashboardConfig dashboard{};
        ScoreParams score{};
        EpisodeHooks hooks{};
    };

    /// observe -> render -> decide -> step, strictly in sequence, until the
    /// game ends. Scenario errors end the episode with status Aborted.
    EpisodeResult run_episode(const ScenarioSpec &spec, Agent &agent, const EpisodeConfig &config = {});

} // namespace spaceops
