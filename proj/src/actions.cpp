#include "spaceops/actions.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

namespace spaceops
{

    Throttle throttle_from_int(int v)
    {
        switch (v)
        {
        case -1:
            return Throttle::Negative;
        case 0:
            return Throttle::Off;
        case 1:
            return Throttle::Positive;
        default:
            throw InvalidArgument(fmt::format("throttle must be -1, 0 or +1, got {}", v));
        }
    }

    DiscreteAction make_action(int forward, int right, int up, double duration)
    {
        return {throttle_from_int(forward), throttle_from_int(right), throttle_from_int(up), duration};
    }

    std::vector<DiscreteAction> enumerate_actions(const ActionLimits &limits)
    {
        std::vector<DiscreteAction> out;
        out.reserve(27);
        for (int f = -1; f <= 1; ++f)
        {
            for (int r = -1; r <= 1; ++r)
            {
                for (int u = -1; u <= 1; ++u)
                {
                    out.push_back(make_action(f, r, u, limits.duration_default));
                }
            }
        }
        return out;
    }

    bool is_single_axis(const DiscreteAction &action)
    {
        const int firing = (action.forward != Throttle::Off) + (action.right != Throttle::Off) + (action.up != Throttle::Off);
        return firing <= 1;
    }

    std::vector<DiscreteAction> enumerate_single_axis_actions(const ActionLimits &limits)
    {
        std::vector<DiscreteAction> out;
        for (const auto &a : enumerate_actions(limits))
        {
            if (is_single_axis(a))
            {
                out.push_back(a);
            }
        }
        return out;
    }

    std::pair<Vec3, double> to_accel(const DiscreteAction &action, double max_accel)
    {
        const Vec3 accel{max_accel * to_int(action.right), max_accel * to_int(action.forward),
                         max_accel * to_int(action.up)};
        return {accel, action.duration};
    }

    std::string forward_name(Throttle t)
    {
        switch (t)
        {
        case Throttle::Positive:
            return "Forward";
        case Throttle::Negative:
            return "Backward";
        default:
            return "None";
        }
    }

    std::string right_name(Throttle t)
    {
        switch (t)
        {
        case Throttle::Positive:
            return "Right";
        case Throttle::Negative:
            return "Left";
        default:
            return "None";
        }
    }

    // The third axis keeps the "Down Throttle" label; its positive value is Up (+Z).
    std::string down_name(Throttle t)
    {
        switch (t)
        {
        case Throttle::Positive:
            return "Up";
        case Throttle::Negative:
            return "Down";
        default:
            return "None";
        }
    }

    std::string format_action(const DiscreteAction &action, const ActionLimits &limits)
    {
        std::string out = fmt::format("perform_action(Forward Throttle: {}, Right Throttle: {}, Down Throttle: {}",
                                      forward_name(action.forward), right_name(action.right), down_name(action.up));
        if (action.duration != limits.duration_default)
        {
            // {} is the shortest round-trip representation.
            out += fmt::format(", Duration: {}", action.duration);
        }
        out += ")";
        return out;
    }

} // namespace spaceops
