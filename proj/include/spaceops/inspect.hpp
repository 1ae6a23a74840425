#pragma once

#include "spaceops/dynamics.hpp"
#include "spaceops/raster.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spaceops
{

    /// Camera axes: +X right, +Y down, +Z optical axis. `orientation` maps
    /// camera coordinates into the workspace frame.
    struct EffectorState
    {
        Vec3 position{Vec3::Zero()}; ///< m, workspace frame
        Rotation orientation;
        std::array<double, 7> joint_angles{}; ///< rad, informational
        std::array<double, 7> efforts{};      ///< always zero in simulation

        Vec3 optical_axis() const { return orientation.matrix().col(2); }

        /// position(3), row-major orientation(9), joint_angles(7), efforts(7).
        std::vector<double> to_flat() const;
        static EffectorState from_flat(const std::vector<double> &flat);
        static const std::vector<std::string> &flat_schema();

        bool operator==(const EffectorState &) const = default;
    };

    struct InspectAction
    {
        Vec3 dx{Vec3::Zero()};     ///< m
        Vec3 dtheta{Vec3::Zero()}; ///< rad, axis-angle in the camera frame
        bool snap{false};

        /// dx(3), dtheta(3), snap(1).
        std::vector<double> to_flat() const;
        static InspectAction from_flat(const std::vector<double> &flat);
        static const std::vector<std::string> &flat_schema();

        bool operator==(const InspectAction &) const = default;
    };

    struct InspectLimits
    {
        double dx_max{0.05};       ///< m per step
        double dtheta_max{0.0873}; ///< rad per step
        Vec3 workspace_min{-1.2, -1.2, -1.2};
        Vec3 workspace_max{1.2, 1.2, 1.2};
    };

    struct CameraModel
    {
        int width{320};
        int height{240};
        double hfov_rad{1.0471975511965976}; ///< 60 deg

        double focal_px() const;
    };

    struct Box
    {
        std::string label;
        Vec3 center{Vec3::Zero()};
        Vec3 half_extent{0.5, 0.5, 0.5}; ///< axis aligned
        Rgb color{180, 180, 190};
    };

    struct Sphere
    {
        std::string label;
        Vec3 center{Vec3::Zero()};
        double radius{0.5};
        Rgb color{200, 170, 60};
    };

    struct InspectionPoint
    {
        Vec3 point{Vec3::Zero()};
        double max_distance{0.5};  ///< m
        double max_view_angle{0.5}; ///< rad, off the optical axis
    };

    struct InspectScene
    {
        std::vector<Box> boxes;
        std::vector<Sphere> spheres;
        std::vector<InspectionPoint> points;

        /// True when `p` lies on some primitive surface within `tol`.
        bool on_surface(const Vec3 &p, double tol = 1e-6) const;
        /// Throws InvalidArgument when an inspection point is off every surface.
        void validate() const;

        /// Satellite mock: bus, two panels, antenna dish, four inspection points.
        static InspectScene satellite_mock();
    };

    /// Depth in metres along the optical axis; 0 where nothing was hit.
    struct DepthImage
    {
        int width{0};
        int height{0};
        std::vector<double> meters;

        double at(int x, int y) const { return meters[static_cast<std::size_t>(y) * width + x]; }
        bool operator==(const DepthImage &) const = default;
    };

    struct InspectFrame
    {
        RgbImage rgb;
        DepthImage depth;
        EffectorState pose;
        std::int64_t timestep{0};
        std::optional<std::string> annotation;

        std::vector<std::uint8_t> png() const;
        /// 16-bit grayscale, millimetres, saturating at 65535; background 0.
        std::vector<std::uint8_t> depth_png() const;
    };

    struct InspectStepResult
    {
        EffectorState state;
        std::optional<InspectFrame> frame;
        bool cap_clamped{false};
        bool workspace_escape_attempt{false};
    };

    /// Initial pose: 1 m in front of the mock along -Y, looking along +Y.
    EffectorState default_effector_state();

    /// Cosmetic closed-form joint angles for a 7-DOF arm at `pose`.
    std::array<double, 7> ik_stub(const Vec3 &position, const Rotation &orientation);

    bool within_caps(const InspectAction &action, const InspectLimits &limits, double tol = 1e-12);

    /// Clamps to caps and workspace, composes the rotation, then captures when
    /// `action.snap` is set. `timestep` labels the captured frame.
    InspectStepResult apply_inspect_action(const InspectScene &scene, const EffectorState &state,
                                           const InspectAction &action, const InspectLimits &limits = {},
                                           std::int64_t timestep = 0, const CameraModel &camera = {});

    InspectFrame render_rgbd(const InspectScene &scene, const EffectorState &state, const CameraModel &camera = {});

    std::string pose_annotation(const EffectorState &state, std::int64_t timestep);

    /// Fraction of inspection points seen by at least one snapshot within the
    /// point's distance and view-angle limits. Occlusion is not considered.
    double coverage(const InspectScene &scene, const std::vector<InspectFrame> &snapshots);

    nlohmann::json pose_to_json(const EffectorState &state);

} // namespace spaceops
