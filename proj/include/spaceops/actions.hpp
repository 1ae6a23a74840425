#pragma once

#include "spaceops/dynamics.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spaceops
{

    /// Trinary per-axis throttle.
    enum class Throttle : std::int8_t
    {
        Negative = -1,
        Off = 0,
        Positive = 1,
    };

    inline int to_int(Throttle t) { return static_cast<int>(t); }
    Throttle throttle_from_int(int v);

    struct ActionLimits
    {
        double duration_default{1.0}; ///< s
        double duration_min{0.1};
        double duration_max{10.0};
        bool single_axis_only{false}; ///< ablation: at most one nonzero axis
    };

    /// Thrust command in the vessel frame: forward is +Y, right is +X, up is +Z.
    struct DiscreteAction
    {
        Throttle forward{Throttle::Off};
        Throttle right{Throttle::Off};
        Throttle up{Throttle::Off};
        double duration{1.0};

        bool same_throttles(const DiscreteAction &o) const
        {
            return forward == o.forward && right == o.right && up == o.up;
        }
        bool operator==(const DiscreteAction &o) const = default;
    };

    DiscreteAction make_action(int forward, int right, int up, double duration = 1.0);

    /// All 27 throttle triples in lexicographic (forward, right, up) order over {-1, 0, +1}.
    std::vector<DiscreteAction> enumerate_actions(const ActionLimits &limits = {});

    /// Subset of `enumerate_actions` with at most one axis firing (7 entries).
    std::vector<DiscreteAction> enumerate_single_axis_actions(const ActionLimits &limits = {});

    bool is_single_axis(const DiscreteAction &action);

    /// Body-frame acceleration for the burn. Axes are independent, so a
    /// three-axis burn has magnitude max_accel * sqrt(3).
    std::pair<Vec3, double> to_accel(const DiscreteAction &action, double max_accel);

    /// Display names of each axis value, e.g. Forward/Backward/None.
    std::string forward_name(Throttle t);
    std::string right_name(Throttle t);
    std::string down_name(Throttle t);

    /// Canonical call text, e.g.
    /// `perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)`.
    /// A `Duration: <s>` argument is appended only when it differs from the default.
    std::string format_action(const DiscreteAction &action, const ActionLimits &limits = {});

} // namespace spaceops
