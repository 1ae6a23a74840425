#include "spaceops/actions.hpp"
#include "spaceops/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <tuple>

using namespace spaceops;

TEST(Actions, TwentySevenDistinctActionsInOrder)
{
    const auto all = enumerate_actions();
    ASSERT_EQ(all.size(), 27u);
    std::set<std::tuple<int, int, int>> seen;
    for (const auto &a : all)
    {
        seen.insert({to_int(a.forward), to_int(a.right), to_int(a.up)});
        EXPECT_DOUBLE_EQ(a.duration, 1.0);
    }
    EXPECT_EQ(seen.size(), 27u);
    EXPECT_EQ(all.front(), make_action(-1, -1, -1));
    EXPECT_EQ(all[13], make_action(0, 0, 0));
    EXPECT_EQ(all.back(), make_action(1, 1, 1));
}

TEST(Actions, SingleAxisSubset)
{
    const auto single = enumerate_single_axis_actions();
    EXPECT_EQ(single.size(), 7u);
    for (const auto &a : single)
    {
        EXPECT_TRUE(is_single_axis(a));
    }
    EXPECT_FALSE(is_single_axis(make_action(1, 1, 0)));
}

TEST(Actions, AccelerationMapping)
{
    const auto [accel, duration] = to_accel(make_action(1, -1, 1, 2.5), 0.5);
    EXPECT_EQ(accel, Vec3(-0.5, 0.5, 0.5));
    EXPECT_DOUBLE_EQ(duration, 2.5);
    EXPECT_NEAR(to_accel(make_action(1, 1, 1), 0.5).first.norm(), 0.5 * std::sqrt(3.0), 1e-15);
    EXPECT_EQ(to_accel(make_action(0, 0, 0), 0.5).first, Vec3::Zero());
}

TEST(Actions, CanonicalText)
{
    EXPECT_EQ(format_action(make_action(1, 1, 1)),
              "perform_action(Forward Throttle: Forward, Right Throttle: Right, Down Throttle: Up)");
    EXPECT_EQ(format_action(make_action(-1, -1, -1)),
              "perform_action(Forward Throttle: Backward, Right Throttle: Left, Down Throttle: Down)");
    EXPECT_EQ(format_action(make_action(0, 0, 0, 2.0)),
              "perform_action(Forward Throttle: None, Right Throttle: None, Down Throttle: None, Duration: 2)");
}

TEST(Actions, ThrottleFromIntRejectsOutOfRange)
{
    EXPECT_EQ(throttle_from_int(-1), Throttle::Negative);
    EXPECT_THROW(throttle_from_int(2), InvalidArgument);
}
