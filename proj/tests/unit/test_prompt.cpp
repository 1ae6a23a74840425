#include "spaceops/errors.hpp"
#include "spaceops/prompt.hpp"

#include <gtest/gtest.h>

using namespace spaceops;

namespace
{

    ParseError::Kind parse_kind_of(std::string_view raw)
    {
        try
        {
            parse_response(raw);
        }
        catch (const ParseError &e)
        {
            return e.parse_kind();
        }
        ADD_FAILURE() << "parsed: " << raw;
        return ParseError::Kind::Unparseable;
    }

    Observation sample_obs()
    {
        Observation o = few_shot_observations().front();
        o.time = 12.0;
        return o;
    }

    std::string text_of(const MessagePart &p)
    {
        return std::get<TextPart>(p).text;
    }

} // namespace

TEST(Codec, FigureTwoString)
{
    const auto a =
        parse_response("perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)");
    EXPECT_EQ(a, make_action(1, 1, 1));
}

TEST(Codec, RoundTripAllActionsAllEncodings)
{
    for (const auto &a : enumerate_actions())
    {
        const std::string plain = format_action(a);
        const std::string cot = "Reasoning:\nThe Lady is ahead, so I keep closing while steering.\nOutput:\n" + plain;
        const std::string tool = format_tool_call(a).dump();
        EXPECT_EQ(parse_response(plain), a) << plain;
        EXPECT_EQ(parse_response(cot), a) << cot;
        EXPECT_EQ(parse_response(tool), a) << tool;
    }
}

TEST(Codec, RoundTripWithDurations)
{
    for (double d : {0.1, 0.5, 2.0, 7.25, 10.0})
    {
        const auto a = make_action(-1, 0, 1, d);
        EXPECT_EQ(parse_response(format_action(a)), a);
        EXPECT_EQ(parse_response(format_tool_call(a).dump()), a);
    }
}

TEST(Codec, CaseAndMissingParameters)
{
    EXPECT_EQ(parse_response("PERFORM_ACTION(forward throttle: backward)"), make_action(-1, 0, 0));
    EXPECT_EQ(parse_response("perform_action(Right Throttle: \"Left\", Down Throttle: None)"), make_action(0, -1, 0));
    EXPECT_EQ(parse_response("perform_action()"), make_action(0, 0, 0));
}

TEST(Codec, LastCallWinsInFreeText)
{
    const std::string text = "First I considered perform_action(Forward Throttle: Backward) but decided against it.\n"
                             "Action: perform_action(Forward Throttle: Forward, Down Throttle: Down)";
    EXPECT_EQ(parse_response(text), make_action(1, 0, -1));
}

TEST(Codec, JsonVariants)
{
    EXPECT_EQ(parse_response(R"({"name":"perform_action","arguments":{"forward_throttle":"Forward"}})"),
              make_action(1, 0, 0));
    EXPECT_EQ(parse_response(R"({"name":"perform_action","arguments":"{\"right_throttle\":\"Left\"}"})"),
              make_action(0, -1, 0));
    EXPECT_EQ(
        parse_response(
            R"({"id":"c1","type":"function","function":{"name":"perform_action","arguments":"{\"down_throttle\":\"Up\"}"}})"),
        make_action(0, 0, 1));
    EXPECT_EQ(parse_response(R"([{"function":"perform_action","parameters":{"forward_throttle":"Backward"}},
                                {"function":"perform_action","parameters":{"forward_throttle":"Forward"}}])"),
              make_action(1, 0, 0));
}

TEST(Codec, Errors)
{
    EXPECT_EQ(parse_kind_of(""), ParseError::Kind::Unparseable);
    EXPECT_EQ(parse_kind_of("I will wait and see."), ParseError::Kind::Unparseable);
    EXPECT_EQ(parse_kind_of("perform_action(Forward Throttle: Forward"), ParseError::Kind::Unparseable);
    EXPECT_EQ(parse_kind_of("perform_action(Forward Throttle: Sideways)"), ParseError::Kind::UnknownEnumValue);
    EXPECT_EQ(parse_kind_of("perform_action(Forward Throttle: Up)"), ParseError::Kind::UnknownEnumValue);
    EXPECT_EQ(parse_kind_of("perform_action(Warp Drive: Engage)"), ParseError::Kind::UnknownEnumValue);
    EXPECT_EQ(parse_kind_of("perform_action(Forward Throttle: Forward, Duration: 99)"),
              ParseError::Kind::UnknownEnumValue);
}

TEST(Prompt, TelemetryLineWithGuard)
{
    Observation o = sample_obs();
    o.guard_distance = 600.0;
    EXPECT_EQ(telemetry_line(o, "Prograde far in the bottom left side of the navball"),
              "Current distance to Lady: 2.6 kilometers; Prograde far in the bottom left side of the navball; "
              "Current speed: 8.7 m/s; Current distance to Guard: 0.6 kilometers.");
}

TEST(Prompt, FewShotMessageOrder)
{
    const Observation o = sample_obs();
    const DashboardImage img = render_dashboard(o);
    const auto examples = default_few_shots();
    const auto msgs = build_messages("SYS", examples, o, img, PromptMode::FewShot);
    ASSERT_EQ(msgs.size(), 1 + 2 * examples.size() + 1);
    EXPECT_EQ(msgs[0].role, MessageRole::System);
    EXPECT_EQ(text_of(msgs[0].parts[0]), "SYS");
    for (std::size_t i = 0; i < examples.size(); ++i)
    {
        const auto &u = msgs[1 + 2 * i];
        const auto &a = msgs[2 + 2 * i];
        EXPECT_EQ(u.role, MessageRole::User);
        EXPECT_TRUE(std::holds_alternative<ImagePart>(u.parts.front()));
        EXPECT_EQ(text_of(u.parts.back()), examples[i].input_text);
        EXPECT_EQ(a.role, MessageRole::Assistant);
        const std::string reply = text_of(a.parts[0]);
        EXPECT_NE(reply.find("Reasoning:"), std::string::npos);
        EXPECT_EQ(parse_response(reply), parse_response(examples[i].output_call_text));
    }
    const auto &last = msgs.back();
    EXPECT_EQ(last.role, MessageRole::User);
    EXPECT_EQ(std::get<ImagePart>(last.parts[0]).bytes, img.png());
    EXPECT_EQ(text_of(last.parts[1]), telemetry_line(o, img.phrase));
}

TEST(Prompt, FirstExampleIsFigureTwo)
{
    const auto ex = default_few_shots(false).front();
    EXPECT_FALSE(ex.image_png.has_value());
    EXPECT_EQ(ex.input_text, "Current distance to Lady: 2.6 kilometers; Prograde far in the bottom left side of the "
                             "navball; Current speed: 8.7 m/s.");
    EXPECT_EQ(ex.output_call_text,
              "perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)");
}

TEST(Prompt, Modes)
{
    const Observation o = sample_obs();
    const DashboardImage img = render_dashboard(o);
    const auto examples = default_few_shots(false);

    const auto zero = build_messages("S", examples, o, img, PromptMode::ZeroShot);
    EXPECT_EQ(zero.size(), 2u);

    const auto cot = build_messages("S", {}, o, img, PromptMode::ChainOfThought);
    const std::string cot_text = text_of(cot.back().parts.back());
    EXPECT_EQ(cot_text.substr(cot_text.size() - std::string(kChainOfThoughtCue).size()), kChainOfThoughtCue);

    const auto react = build_messages("S", {}, o, img, PromptMode::ReAct);
    EXPECT_NE(text_of(react.back().parts.back()).find("Action:"), std::string::npos);

    EXPECT_THROW(build_messages("S", {}, o, img, PromptMode::FewShot), NoExamples);
}

TEST(Prompt, ModeNames)
{
    for (auto m : {PromptMode::ZeroShot, PromptMode::FewShot, PromptMode::ChainOfThought, PromptMode::ReAct})
    {
        EXPECT_EQ(parse_prompt_mode(prompt_mode_name(m)), m);
    }
    EXPECT_THROW(parse_prompt_mode("telepathy"), InvalidArgument);
}

TEST(Prompt, MessageDocumentShape)
{
    const Observation o = sample_obs();
    const DashboardImage img = render_dashboard(o);
    const auto doc = messages_to_json(build_messages("S", {}, o, img, PromptMode::ZeroShot));
    ASSERT_EQ(doc.size(), 2u);
    EXPECT_EQ(doc[0]["role"], "system");
    EXPECT_EQ(doc[1]["role"], "user");
    EXPECT_EQ(doc[1]["content"][0]["type"], "image");
    EXPECT_EQ(doc[1]["content"][0]["media_type"], "image/png");
    EXPECT_EQ(base64_decode(doc[1]["content"][0]["base64"].get<std::string>()), img.png());
    EXPECT_EQ(doc[1]["content"][1]["type"], "text");
}

TEST(Prompt, ToolSchemaVocabulary)
{
    const auto schema = tool_schema();
    EXPECT_EQ(schema["name"], "perform_action");
    const auto &props = schema["parameters"]["properties"];
    EXPECT_EQ(props["forward_throttle"]["enum"], nlohmann::json({"Forward", "Backward", "None"}));
    EXPECT_EQ(props["right_throttle"]["enum"], nlohmann::json({"Right", "Left", "None"}));
    EXPECT_EQ(props["down_throttle"]["enum"], nlohmann::json({"Down", "Up", "None"}));
}

TEST(Prompt, CorrectiveMessageMentionsErrorAndSchema)
{
    const Message m = corrective_message("unknown value 'Sideways'");
    EXPECT_EQ(m.role, MessageRole::User);
    const std::string t = text_of(m.parts[0]);
    EXPECT_NE(t.find("Sideways"), std::string::npos);
    EXPECT_NE(t.find("forward_throttle"), std::string::npos);
    EXPECT_NE(t.find(format_action(make_action(1, 0, 0))), std::string::npos);
}

TEST(Base64, RoundTrip)
{
    for (std::size_t n = 0; n < 20; ++n)
    {
        std::vector<std::uint8_t> data(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            data[i] = static_cast<std::uint8_t>(i * 37 + 11);
        }
        EXPECT_EQ(base64_decode(base64_encode(data)), data);
    }
    const std::string man = "Man";
    EXPECT_EQ(base64_encode(std::vector<std::uint8_t>(man.begin(), man.end())), "TWFu");
}
