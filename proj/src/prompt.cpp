#include "spaceops/prompt.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace spaceops
{

    namespace
    {

        std::string lower(std::string_view s)
        {
            std::string out(s);
            std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
            return out;
        }

        std::string_view trim(std::string_view s)
        {
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
            {
                s.remove_prefix(1);
            }
            while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
            {
                s.remove_suffix(1);
            }
            return s;
        }

        std::string strip_quotes(std::string_view s)
        {
            s = trim(s);
            while (s.size() >= 1 && (s.front() == '"' || s.front() == '\'' || s.front() == '`'))
            {
                s.remove_prefix(1);
            }
            while (s.size() >= 1 && (s.back() == '"' || s.back() == '\'' || s.back() == '`'))
            {
                s.remove_suffix(1);
            }
            return std::string(trim(s));
        }

        /// Lower-case, alphanumerics only: "Forward Throttle" -> "forwardthrottle".
        std::string normalize_key(std::string_view key)
        {
            std::string out;
            for (char c : key)
            {
                if (std::isalnum(static_cast<unsigned char>(c)))
                {
                    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
                }
            }
            return out;
        }

        enum class Param
        {
            Forward,
            Right,
            Down,
            Duration,
        };

        Param param_for_key(std::string_view raw_key)
        {
            const std::string k = normalize_key(raw_key);
            if (k == "forwardthrottle" || k == "forward")
            {
                return Param::Forward;
            }
            if (k == "rightthrottle" || k == "right")
            {
                return Param::Right;
            }
            if (k == "downthrottle" || k == "down" || k == "upthrottle")
            {
                return Param::Down;
            }
            if (k == "duration" || k == "burnduration" || k == "durations")
            {
                return Param::Duration;
            }
            throw ParseError(ParseError::Kind::UnknownEnumValue, fmt::format("unknown parameter '{}'", raw_key));
        }

        Throttle parse_axis_value(Param p, std::string_view raw)
        {
            const std::string v = normalize_key(strip_quotes(raw));
            if (v == "none" || v == "null" || v.empty())
            {
                return Throttle::Off;
            }
            switch (p)
            {
            case Param::Forward:
                if (v == "forward")
                    return Throttle::Positive;
                if (v == "backward")
                    return Throttle::Negative;
                break;
            case Param::Right:
                if (v == "right")
                    return Throttle::Positive;
                if (v == "left")
                    return Throttle::Negative;
                break;
            case Param::Down:
                if (v == "up")
                    return Throttle::Positive;
                if (v == "down")
                    return Throttle::Negative;
                break;
            case Param::Duration:
                break;
            }
            throw ParseError(ParseError::Kind::UnknownEnumValue, fmt::format("value '{}' is outside the vocabulary", raw));
        }

        double parse_duration(std::string_view raw, const ActionLimits &limits)
        {
            std::string v = strip_quotes(raw);
            while (!v.empty() && (std::isalpha(static_cast<unsigned char>(v.back())) || std::isspace(static_cast<unsigned char>(v.back()))))
            {
                v.pop_back(); // unit suffix, e.g. "2 s"
            }
            double d = 0.0;
            const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
            if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(d))
            {
                throw ParseError(ParseError::Kind::UnknownEnumValue, fmt::format("duration '{}' is not a number", raw));
            }
            if (d < limits.duration_min || d > limits.duration_max)
            {
                throw ParseError(ParseError::Kind::UnknownEnumValue,
                                 fmt::format("duration {} s outside [{}, {}]", d, limits.duration_min, limits.duration_max));
            }
            return d;
        }

        void apply_param(DiscreteAction &a, std::string_view key, std::string_view value, const ActionLimits &limits)
        {
            const Param p = param_for_key(key);
            switch (p)
            {
            case Param::Forward:
                a.forward = parse_axis_value(p, value);
                break;
            case Param::Right:
                a.right = parse_axis_value(p, value);
                break;
            case Param::Down:
                a.up = parse_axis_value(p, value);
                break;
            case Param::Duration:
                if (!normalize_key(strip_quotes(value)).empty() && normalize_key(strip_quotes(value)) != "none")
                {
                    a.duration = parse_duration(value, limits);
                }
                break;
            }
        }

        DiscreteAction from_json_params(const nlohmann::json &params, const ActionLimits &limits)
        {
            DiscreteAction a{Throttle::Off, Throttle::Off, Throttle::Off, limits.duration_default};
            if (params.is_null())
            {
                return a;
            }
            if (!params.is_object())
            {
                throw ParseError(ParseError::Kind::Unparseable, "tool-call parameters must be an object");
            }
            for (const auto &[key, value] : params.items())
            {
                if (value.is_string())
                {
                    apply_param(a, key, value.get<std::string>(), limits);
                }
                else if (value.is_null())
                {
                    apply_param(a, key, "None", limits);
                }
                else if (value.is_number())
                {
                    if (param_for_key(key) != Param::Duration)
                    {
                        throw ParseError(ParseError::Kind::UnknownEnumValue,
                                         fmt::format("parameter '{}' must be a string", key));
                    }
                    apply_param(a, key, fmt::format("{}", value.get<double>()), limits);
                }
                else
                {
                    throw ParseError(ParseError::Kind::UnknownEnumValue, fmt::format("parameter '{}' has bad type", key));
                }
            }
            return a;
        }

        /// Returns the parsed action, or nullopt if `doc` is not a tool call at all.
        std::optional<DiscreteAction> from_tool_document(const nlohmann::json &doc, const ActionLimits &limits)
        {
            if (doc.is_array())
            {
                for (auto it = doc.rbegin(); it != doc.rend(); ++it)
                {
                    if (auto a = from_tool_document(*it, limits))
                    {
                        return a;
                    }
                }
                return std::nullopt;
            }
            if (!doc.is_object())
            {
                return std::nullopt;
            }
            // OpenAI tool_calls element: {"type":"function","function":{"name":...,"arguments":"{...}"}}
            if (doc.contains("function") && doc["function"].is_object())
            {
                return from_tool_document(doc["function"], limits);
            }
            std::string name;
            if (doc.contains("function") && doc["function"].is_string())
            {
                name = doc["function"].get<std::string>();
            }
            else if (doc.contains("name") && doc["name"].is_string())
            {
                name = doc["name"].get<std::string>();
            }
            else
            {
                return std::nullopt;
            }
            if (normalize_key(name) != "performaction")
            {
                throw ParseError(ParseError::Kind::Unparseable, fmt::format("unknown function '{}'", name));
            }
            nlohmann::json params;
            if (doc.contains("parameters"))
            {
                params = doc["parameters"];
            }
            else if (doc.contains("arguments"))
            {
                params = doc["arguments"];
                if (params.is_string())
                {
                    params = nlohmann::json::parse(params.get<std::string>(), nullptr, false);
                    if (params.is_discarded())
                    {
                        throw ParseError(ParseError::Kind::Unparseable, "tool-call arguments are not valid JSON");
                    }
                }
            }
            return from_json_params(params, limits);
        }

        /// End (exclusive) of the balanced JSON object starting at `open`, or npos.
        std::size_t balanced_object_end(std::string_view s, std::size_t open)
        {
            int depth = 0;
            bool in_string = false;
            for (std::size_t i = open; i < s.size(); ++i)
            {
                const char c = s[i];
                if (in_string)
                {
                    if (c == '\\')
                    {
                        ++i;
                    }
                    else if (c == '"')
                    {
                        in_string = false;
                    }
                    continue;
                }
                if (c == '"')
                {
                    in_string = true;
                }
                else if (c == '{')
                {
                    ++depth;
                }
                else if (c == '}')
                {
                    if (--depth == 0)
                    {
                        return i + 1;
                    }
                }
            }
            return std::string_view::npos;
        }

        std::optional<DiscreteAction> embedded_json_call(std::string_view raw, std::size_t name_pos,
                                                         const ActionLimits &limits)
        {
            for (std::size_t open = raw.rfind('{', name_pos); open != std::string_view::npos;
                 open = open == 0 ? std::string_view::npos : raw.rfind('{', open - 1))
            {
                const std::size_t end = balanced_object_end(raw, open);
                if (end == std::string_view::npos || end <= name_pos)
                {
                    continue;
                }
                const auto doc = nlohmann::json::parse(raw.substr(open, end - open), nullptr, false);
                if (doc.is_discarded())
                {
                    continue;
                }
                if (auto a = from_tool_document(doc, limits))
                {
                    return a;
                }
            }
            return std::nullopt;
        }

        DiscreteAction parse_call_arguments(std::string_view args, const ActionLimits &limits)
        {
            DiscreteAction a{Throttle::Off, Throttle::Off, Throttle::Off, limits.duration_default};
            std::size_t start = 0;
            while (start <= args.size())
            {
                std::size_t comma = args.find(',', start);
                if (comma == std::string_view::npos)
                {
                    comma = args.size();
                }
                const std::string_view item = trim(args.substr(start, comma - start));
                if (!item.empty())
                {
                    std::size_t sep = item.find(':');
                    if (sep == std::string_view::npos)
                    {
                        sep = item.find('=');
                    }
                    if (sep == std::string_view::npos)
                    {
                        throw ParseError(ParseError::Kind::Unparseable,
                                         fmt::format("argument '{}' is not of the form 'Key: Value'", item));
                    }
                    apply_param(a, strip_quotes(item.substr(0, sep)), item.substr(sep + 1), limits);
                }
                start = comma + 1;
            }
            return a;
        }

    } // namespace

    std::string_view message_role_name(MessageRole role)
    {
        switch (role)
        {
        case MessageRole::System:
            return "system";
        case MessageRole::User:
            return "user";
        case MessageRole::Assistant:
            return "assistant";
        case MessageRole::Tool:
            return "tool";
        }
        return "user";
    }

    PromptMode parse_prompt_mode(std::string_view name)
    {
        const std::string k = normalize_key(name);
        if (k == "zeroshot")
            return PromptMode::ZeroShot;
        if (k == "fewshot")
            return PromptMode::FewShot;
        if (k == "cot" || k == "chainofthought")
            return PromptMode::ChainOfThought;
        if (k == "react")
            return PromptMode::ReAct;
        throw InvalidArgument(fmt::format("unknown prompt mode '{}'", name));
    }

    std::string_view prompt_mode_name(PromptMode mode)
    {
        switch (mode)
        {
        case PromptMode::ZeroShot:
            return "zero_shot";
        case PromptMode::FewShot:
            return "few_shot";
        case PromptMode::ChainOfThought:
            return "cot";
        case PromptMode::ReAct:
            return "react";
        }
        return "zero_shot";
    }

    nlohmann::json tool_schema(const ActionLimits &limits)
    {
        using nlohmann::json;
        json props;
        props["forward_throttle"] = {{"type", "string"},
                                     {"enum", {"Forward", "Backward", "None"}},
                                     {"description", "Thrust along vessel +Y (Forward) or -Y (Backward)."}};
        props["right_throttle"] = {{"type", "string"},
                                   {"enum", {"Right", "Left", "None"}},
                                   {"description", "Thrust along vessel +X (Right) or -X (Left)."}};
        props["down_throttle"] = {{"type", "string"},
                                  {"enum", {"Down", "Up", "None"}},
                                  {"description", "Thrust along vessel +Z (Up) or -Z (Down)."}};
        props["duration"] = {{"type", "number"},
                             {"minimum", limits.duration_min},
                             {"maximum", limits.duration_max},
                             {"description", fmt::format("Burn duration in seconds (default {}).", limits.duration_default)}};
        return json{{"name", kToolName},
                    {"description", "Fire the vessel thrusters for one decision step."},
                    {"parameters", {{"type", "object"}, {"properties", props}, {"required", json::array()}}}};
    }

    std::string telemetry_line(const Observation &obs, std::string_view phrase)
    {
        std::string line = fmt::format("Current distance to {}: {:.1f} kilometers; {}; Current speed: {:.1f} m/s",
                                       obs.target_name, obs.distance / 1000.0, phrase, obs.speed);
        if (obs.guard_distance)
        {
            line += fmt::format("; Current distance to Guard: {:.1f} kilometers", *obs.guard_distance / 1000.0);
        }
        line += ".";
        return line;
    }

    std::vector<Message> build_messages(std::string_view system_prompt, const std::vector<FewShotExample> &examples,
                                        const Observation &obs, const DashboardImage &image, PromptMode mode)
    {
        if (mode == PromptMode::FewShot && examples.empty())
        {
            throw NoExamples("few-shot prompting needs at least one example");
        }
        std::vector<Message> out;
        out.push_back({MessageRole::System, {TextPart{std::string(system_prompt)}}});

        if (mode != PromptMode::ZeroShot)
        {
            for (const auto &ex : examples)
            {
                Message user{MessageRole::User, {}};
                if (ex.image_png)
                {
                    user.parts.push_back(ImagePart{*ex.image_png, "image/png"});
                }
                user.parts.push_back(TextPart{ex.input_text});
                out.push_back(std::move(user));
                out.push_back({MessageRole::Assistant,
                               {TextPart{fmt::format("Reasoning:\n{}\nOutput:\n{}", ex.reasoning_text, ex.output_call_text)}}});
            }
        }

        std::string text = telemetry_line(obs, image.phrase.empty() ? std::string_view(kNoProgradePhrase) : image.phrase);
        if (mode == PromptMode::ChainOfThought)
        {
            text += "\n";
            text += kChainOfThoughtCue;
        }
        else if (mode == PromptMode::ReAct)
        {
            text += "\nAnswer with a 'Reasoning:' section, then an 'Action:' section holding exactly one perform_action call.";
        }
        out.push_back({MessageRole::User, {ImagePart{image.png(), "image/png"}, TextPart{std::move(text)}}});
        return out;
    }

    nlohmann::json messages_to_json(const std::vector<Message> &messages)
    {
        nlohmann::json doc = nlohmann::json::array();
        for (const auto &m : messages)
        {
            nlohmann::json content = nlohmann::json::array();
            for (const auto &part : m.parts)
            {
                if (const auto *t = std::get_if<TextPart>(&part))
                {
                    content.push_back({{"type", "text"}, {"text", t->text}});
                }
                else
                {
                    const auto &img = std::get<ImagePart>(part);
                    content.push_back({{"type", "image"}, {"base64", base64_encode(img.bytes)}, {"media_type", img.media_type}});
                }
            }
            doc.push_back({{"role", message_role_name(m.role)}, {"content", std::move(content)}});
        }
        return doc;
    }

    nlohmann::json format_tool_call(const DiscreteAction &action, const ActionLimits &limits)
    {
        nlohmann::json params{{"forward_throttle", forward_name(action.forward)},
                              {"right_throttle", right_name(action.right)},
                              {"down_throttle", down_name(action.up)}};
        if (action.duration != limits.duration_default)
        {
            params["duration"] = action.duration;
        }
        return {{"function", kToolName}, {"parameters", std::move(params)}};
    }

    DiscreteAction parse_response(std::string_view raw, const ActionLimits &limits)
    {
        const std::string_view body = trim(raw);
        if (body.empty())
        {
            throw ParseError(ParseError::Kind::Unparseable, "empty response");
        }
        if (body.front() == '{' || body.front() == '[')
        {
            const auto doc = nlohmann::json::parse(body, nullptr, false);
            if (!doc.is_discarded())
            {
                if (auto a = from_tool_document(doc, limits))
                {
                    return *a;
                }
            }
        }

        // Free text: walk occurrences of the function name from the end and
        // take the last one that is used as a call.
        const std::string hay = lower(raw);
        const std::string needle = kToolName;
        for (std::size_t pos = hay.rfind(needle); pos != std::string::npos;
             pos = pos == 0 ? std::string::npos : hay.rfind(needle, pos - 1))
        {
            std::size_t after = pos + needle.size();
            while (after < hay.size() && std::isspace(static_cast<unsigned char>(hay[after])))
            {
                ++after;
            }
            if (after < hay.size() && hay[after] == '(')
            {
                const std::size_t close = raw.find(')', after + 1);
                if (close == std::string_view::npos)
                {
                    throw ParseError(ParseError::Kind::Unparseable, "perform_action call is missing ')'");
                }
                return parse_call_arguments(raw.substr(after + 1, close - after - 1), limits);
            }
            if (pos > 0 && hay[pos - 1] == '"')
            {
                if (auto a = embedded_json_call(raw, pos, limits))
                {
                    return *a;
                }
            }
        }
        throw ParseError(ParseError::Kind::Unparseable, "no perform_action call found");
    }

    Message corrective_message(const std::string &parser_error, const ActionLimits &limits)
    {
        return {MessageRole::User,
                {TextPart{fmt::format("Your previous reply could not be executed ({}). Reply with exactly one call and "
                                      "nothing else, for example:\n{}\nTool schema:\n{}",
                                      parser_error, format_action(DiscreteAction{Throttle::Positive, Throttle::Off, Throttle::Off, limits.duration_default}, limits),
                                      tool_schema(limits).dump())}}};
    }

    const std::string &default_system_prompt()
    {
        static const std::string kPrompt = R"(You are the autonomous pilot of the Bandit spacecraft in an orbital target-guarding game.

MISSION
Get as close as possible to the Lady spacecraft while staying well clear of the Guard spacecraft, which will try to intercept you.
Your result is dm_lb^2 + 1e6 / (dm_bg + 0.1), where dm_lb is your closest distance to the Lady and dm_bg your closest distance to the Guard over the episode. Lower is better: roughly, 100 m gained on the Lady is worth 100 m lost to the Guard.

WHAT YOU SEE
Each turn you receive a dashboard image and one telemetry line.
- The navball is the large disc. Its centre is where the vessel nose (Forward axis) points; the rim is 90 degrees off the nose.
- The yellow ring with a dot is the prograde marker: the direction you are moving relative to the Lady. A yellow ring with a cross is the retrograde marker and means you are moving away from where the nose points.
- Thin dark lines split the navball into a 3x3 grid: top/middle/bottom and left/center/right.
- Readouts under the navball give the distance to the Lady in kilometers, relative speed in m/s, fuel in kg and, when present, the distance to the Guard.

CONTROLS
You command three independent thrusters with one function call per turn:
perform_action(Forward Throttle: <Forward|Backward|None>, Right Throttle: <Right|Left|None>, Down Throttle: <Up|Down|None>)
Forward pushes along the nose, Right pushes to the right side of the navball, Up pushes toward the top of the navball. Each burn lasts one second unless you add "Duration: <seconds>".
Thrusting toward a side of the navball drags the prograde marker toward that side.

HOW TO FLY
Point your relative motion at the Lady: keep prograde near the centre while the distance is large, and brake with Backward as the distance shrinks so you do not overshoot. Steer around the Guard rather than through it.
Keep replies short and always finish with exactly one perform_action call.)";
        return kPrompt;
    }

    namespace
    {

        struct FewShotSpec
        {
            double distance;
            double speed;
            Vec3 prograde;
            const char *reasoning;
            DiscreteAction action;
        };

        const std::vector<FewShotSpec> &few_shot_specs()
        {
            static const std::vector<FewShotSpec> specs = [] {
                const double h = std::sqrt(0.5);
                return std::vector<FewShotSpec>{
                    {2600.0, 8.7, Vec3{-h, 0.05, -h}.normalized(),
                     "Far from the Lady with prograde low and left: burn Forward to close, and Right plus Up to pull prograde back to centre.",
                     make_action(1, 1, 1)},
                    {300.0, 12.4, Vec3{0.0, 1.0, 0.0},
                     "Prograde is centred and we are closing quickly at short range, so brake with Backward throttle only.",
                     make_action(-1, 0, 0)},
                    {1400.0, 5.2, Vec3{0.5, 0.6, 0.5}.normalized(),
                     "Prograde sits high and to the right; keep Forward throttle and pull it back with Left and Down throttles.",
                     make_action(1, -1, -1)},
                };
            }();
            return specs;
        }

    } // namespace

    std::vector<Observation> few_shot_observations()
    {
        std::vector<Observation> out;
        for (const auto &s : few_shot_specs())
        {
            Observation obs;
            obs.distance = s.distance;
            obs.speed = s.speed;
            obs.prograde = s.prograde;
            obs.rel_position = Vec3{0.0, s.distance, 0.0};
            obs.fuel = 100.0;
            obs.scenario_id = "lbg1-lg0-i2";
            obs.target_name = "Lady";
            out.push_back(std::move(obs));
        }
        return out;
    }

    std::vector<FewShotExample> default_few_shots(bool with_images)
    {
        const auto observations = few_shot_observations();
        std::vector<FewShotExample> out;
        for (std::size_t i = 0; i < observations.size(); ++i)
        {
            const auto &spec = few_shot_specs()[i];
            const DashboardImage img = render_dashboard(observations[i]);

            FewShotExample ex;
            if (with_images)
            {
                ex.image_png = img.png();
            }
            ex.input_text = telemetry_line(observations[i], img.phrase);
            ex.reasoning_text = spec.reasoning;
            ex.output_call_text = format_action(spec.action);
            out.push_back(std::move(ex));
        }
        return out;
    }

} // namespace spaceops
