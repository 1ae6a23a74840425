#pragma once

#include "spaceops/actions.hpp"
#include "spaceops/navball.hpp"
#include "spaceops/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spaceops
{

    enum class MessageRole
    {
        System,
        User,
        Assistant,
        Tool,
    };

    std::string_view message_role_name(MessageRole role);

    struct TextPart
    {
        std::string text;
        bool operator==(const TextPart &) const = default;
    };

    struct ImagePart
    {
        std::vector<std::uint8_t> bytes;
        std::string media_type{"image/png"};
        bool operator==(const ImagePart &) const = default;
    };

    using MessagePart = std::variant<TextPart, ImagePart>;

    struct Message
    {
        MessageRole role{MessageRole::User};
        std::vector<MessagePart> parts;

        bool operator==(const Message &) const = default;
    };

    struct FewShotExample
    {
        std::optional<std::vector<std::uint8_t>> image_png;
        std::string input_text;
        std::string reasoning_text;
        std::string output_call_text;
    };

    enum class PromptMode
    {
        ZeroShot,
        FewShot,
        ChainOfThought,
        ReAct,
    };

    PromptMode parse_prompt_mode(std::string_view name);
    std::string_view prompt_mode_name(PromptMode mode);

    inline constexpr const char *kToolName = "perform_action";
    inline constexpr const char *kChainOfThoughtCue = "Let's think step by step.";

    /// JSON-schema-like description of the perform_action tool.
    nlohmann::json tool_schema(const ActionLimits &limits = {});

    /// "Current distance to Lady: 2.6 kilometers; <phrase>; Current speed: 8.7 m/s."
    /// Guarding scenarios add "; Current distance to Guard: <g> kilometers" before the final period.
    std::string telemetry_line(const Observation &obs, std::string_view phrase);

    /// Throws NoExamples for FewShot with an empty example list.
    std::vector<Message> build_messages(std::string_view system_prompt, const std::vector<FewShotExample> &examples,
                                        const Observation &obs, const DashboardImage &image, PromptMode mode);

    /// Canonical document: [{role, content:[{type:"text",text}|{type:"image",base64,media_type}]}].
    nlohmann::json messages_to_json(const std::vector<Message> &messages);

    /// {"function":"perform_action","parameters":{...}}; duration only when non-default.
    nlohmann::json format_tool_call(const DiscreteAction &action, const ActionLimits &limits = {});

    /**
     * Recovers an action from model output. Accepts a tool-call document
     * (`{"function": ..., "parameters": ...}`, `{"name": ..., "arguments": ...}`
     * or an OpenAI `tool_calls` element) or the textual call form. In free text
     * the last call wins. Missing parameters default to None / the default
     * duration. Throws ParseError (Unparseable or UnknownEnumValue).
     */
    DiscreteAction parse_response(std::string_view raw, const ActionLimits &limits = {});

    /// User message sent after a parse failure.
    Message corrective_message(const std::string &parser_error, const ActionLimits &limits = {});

    /// Built-in mission prompt covering the interface, goal and scoring.
    const std::string &default_system_prompt();

    /// Observations behind the demonstrations; the first is the far, bottom-left case.
    std::vector<Observation> few_shot_observations();

    /// Authored demonstrations, the first being the canonical forward/right/up example.
    std::vector<FewShotExample> default_few_shots(bool with_images = true);

} // namespace spaceops
