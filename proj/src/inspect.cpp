#include "spaceops/inspect.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace spaceops
{

    namespace
    {

        constexpr Rgb kBackdrop{8, 8, 16};
        constexpr Rgb kAnnotation{255, 255, 255};

        struct Hit
        {
            double t{std::numeric_limits<double>::infinity()};
            Vec3 normal{Vec3::Zero()};
            Rgb color{};
        };

        void intersect_box(const Box &box, const Vec3 &origin, const Vec3 &dir, Hit &best)
        {
            const Vec3 lo = box.center - box.half_extent;
            const Vec3 hi = box.center + box.half_extent;
            double t_near = -std::numeric_limits<double>::infinity();
            double t_far = std::numeric_limits<double>::infinity();
            int axis_near = -1;
            double sign_near = 0.0;
            for (int i = 0; i < 3; ++i)
            {
                if (dir[i] == 0.0)
                {
                    if (origin[i] < lo[i] || origin[i] > hi[i])
                    {
                        return;
                    }
                    continue;
                }
                double t0 = (lo[i] - origin[i]) / dir[i];
                double t1 = (hi[i] - origin[i]) / dir[i];
                double s = -1.0;
                if (t0 > t1)
                {
                    std::swap(t0, t1);
                    s = 1.0;
                }
                if (t0 > t_near)
                {
                    t_near = t0;
                    axis_near = i;
                    sign_near = s;
                }
                t_far = std::min(t_far, t1);
            }
            if (axis_near < 0 || t_near > t_far || t_near <= 1e-9 || t_near >= best.t)
            {
                return;
            }
            best.t = t_near;
            best.normal = Vec3::Zero();
            best.normal[axis_near] = sign_near;
            best.color = box.color;
        }

        void intersect_sphere(const Sphere &s, const Vec3 &origin, const Vec3 &dir, Hit &best)
        {
            const Vec3 oc = origin - s.center;
            const double b = oc.dot(dir);
            const double c = oc.squaredNorm() - s.radius * s.radius;
            const double disc = b * b - c;
            if (disc < 0.0)
            {
                return;
            }
            const double t = -b - std::sqrt(disc);
            if (t <= 1e-9 || t >= best.t)
            {
                return;
            }
            best.t = t;
            best.normal = (origin + t * dir - s.center).normalized();
            best.color = s.color;
        }

        Rgb shade(const Rgb &base, const Vec3 &normal)
        {
            static const Vec3 kLight = Vec3(-0.4, -0.7, 0.6).normalized();
            const double k = 0.35 + 0.65 * std::max(0.0, normal.dot(kLight));
            const auto ch = [k](std::uint8_t v) {
                return static_cast<std::uint8_t>(std::clamp(std::lround(v * k), 0L, 255L));
            };
            return {ch(base.r), ch(base.g), ch(base.b)};
        }

        Vec3 clamp_norm(const Vec3 &v, double cap, bool &clamped)
        {
            const double n = v.norm();
            if (n > cap)
            {
                clamped = true;
                return v * (cap / n);
            }
            return v;
        }

    } // namespace

    std::vector<double> EffectorState::to_flat() const
    {
        std::vector<double> out(position.data(), position.data() + 3);
        for (int r = 0; r < 3; ++r)
        {
            for (int c = 0; c < 3; ++c)
            {
                out.push_back(orientation.matrix()(r, c));
            }
        }
        out.insert(out.end(), joint_angles.begin(), joint_angles.end());
        out.insert(out.end(), efforts.begin(), efforts.end());
        return out;
    }

    EffectorState EffectorState::from_flat(const std::vector<double> &flat)
    {
        if (flat.size() != flat_schema().size())
        {
            throw SchemaMismatch(fmt::format("effector state needs {} values, got {}", flat_schema().size(), flat.size()));
        }
        EffectorState s;
        s.position = Vec3(flat[0], flat[1], flat[2]);
        Mat3 m;
        for (int r = 0; r < 3; ++r)
        {
            for (int c = 0; c < 3; ++c)
            {
                m(r, c) = flat[3 + r * 3 + c];
            }
        }
        s.orientation = Rotation(m);
        std::copy_n(flat.begin() + 12, 7, s.joint_angles.begin());
        std::copy_n(flat.begin() + 19, 7, s.efforts.begin());
        return s;
    }

    const std::vector<std::string> &EffectorState::flat_schema()
    {
        static const std::vector<std::string> schema = [] {
            std::vector<std::string> s{"x", "y", "z"};
            for (int r = 0; r < 3; ++r)
            {
                for (int c = 0; c < 3; ++c)
                {
                    s.push_back(fmt::format("r{}{}", r, c));
                }
            }
            for (int j = 0; j < 7; ++j)
            {
                s.push_back(fmt::format("q{}", j));
            }
            for (int j = 0; j < 7; ++j)
            {
                s.push_back(fmt::format("effort{}", j));
            }
            return s;
        }();
        return schema;
    }

    std::vector<double> InspectAction::to_flat() const
    {
        return {dx.x(), dx.y(), dx.z(), dtheta.x(), dtheta.y(), dtheta.z(), snap ? 1.0 : 0.0};
    }

    InspectAction InspectAction::from_flat(const std::vector<double> &flat)
    {
        if (flat.size() != 7)
        {
            throw SchemaMismatch(fmt::format("inspect action needs 7 values, got {}", flat.size()));
        }
        return {Vec3(flat[0], flat[1], flat[2]), Vec3(flat[3], flat[4], flat[5]), flat[6] != 0.0};
    }

    const std::vector<std::string> &InspectAction::flat_schema()
    {
        static const std::vector<std::string> schema{"dx", "dy", "dz", "dthx", "dthy", "dthz", "snap"};
        return schema;
    }

    double CameraModel::focal_px() const
    {
        return 0.5 * width / std::tan(0.5 * hfov_rad);
    }

    bool InspectScene::on_surface(const Vec3 &p, double tol) const
    {
        for (const auto &b : boxes)
        {
            const Vec3 d = (p - b.center).cwiseAbs() - b.half_extent;
            if (d.maxCoeff() <= tol && d.maxCoeff() >= -tol)
            {
                return true;
            }
        }
        for (const auto &s : spheres)
        {
            if (std::abs((p - s.center).norm() - s.radius) <= tol)
            {
                return true;
            }
        }
        return false;
    }

    void InspectScene::validate() const
    {
        for (std::size_t i = 0; i < points.size(); ++i)
        {
            if (!on_surface(points[i].point))
            {
                throw InvalidArgument(fmt::format("inspection point {} is not on any target surface", i));
            }
        }
    }

    InspectScene InspectScene::satellite_mock()
    {
        InspectScene s;
        s.boxes.push_back({"bus", Vec3(0, 0, 0), Vec3(0.2, 0.15, 0.15), {190, 190, 200}});
        s.boxes.push_back({"panel_left", Vec3(-0.55, 0, 0), Vec3(0.3, 0.01, 0.12), {40, 60, 150}});
        s.boxes.push_back({"panel_right", Vec3(0.55, 0, 0), Vec3(0.3, 0.01, 0.12), {40, 60, 150}});
        s.spheres.push_back({"antenna", Vec3(0, 0, 0.25), 0.08, {220, 200, 80}});
        s.points.push_back({Vec3(0, -0.15, 0), 0.6, 0.35});
        s.points.push_back({Vec3(0.55, -0.01, 0), 0.6, 0.35});
        s.points.push_back({Vec3(-0.55, -0.01, 0), 0.6, 0.35});
        s.points.push_back({Vec3(0, 0, 0.33), 0.5, 0.35});
        return s;
    }

    std::vector<std::uint8_t> InspectFrame::png() const
    {
        return encode_png(rgb);
    }

    std::vector<std::uint8_t> InspectFrame::depth_png() const
    {
        Gray16Image g{depth.width, depth.height, {}};
        g.pixels.reserve(depth.meters.size());
        for (double m : depth.meters)
        {
            g.pixels.push_back(static_cast<std::uint16_t>(std::clamp(std::llround(m * 1000.0), 0LL, 65535LL)));
        }
        return encode_png(g);
    }

    EffectorState default_effector_state()
    {
        EffectorState s;
        s.position = Vec3(0.0, -1.0, 0.0);
        Mat3 m;
        m.col(0) = Vec3(1, 0, 0);
        m.col(1) = Vec3(0, 0, -1);
        m.col(2) = Vec3(0, 1, 0);
        s.orientation = Rotation(m);
        s.joint_angles = ik_stub(s.position, s.orientation);
        return s;
    }

    std::array<double, 7> ik_stub(const Vec3 &position, const Rotation &orientation)
    {
        // Shoulder yaw/pitch toward the tool point, elbow from reach, wrist
        // from the ZYX Euler angles of the tool frame.
        const double reach = position.norm();
        const Vec3 euler = orientation.matrix().eulerAngles(2, 1, 0);
        return {std::atan2(position.y(), position.x()),
                std::atan2(position.z(), std::hypot(position.x(), position.y())),
                0.0,
                std::acos(std::clamp(1.0 - reach * reach / 2.0, -1.0, 1.0)),
                euler[0],
                euler[1],
                euler[2]};
    }

    bool within_caps(const InspectAction &action, const InspectLimits &limits, double tol)
    {
        return action.dx.norm() <= limits.dx_max + tol && action.dtheta.norm() <= limits.dtheta_max + tol &&
               action.dx.allFinite() && action.dtheta.allFinite();
    }

    InspectStepResult apply_inspect_action(const InspectScene &scene, const EffectorState &state,
                                           const InspectAction &action, const InspectLimits &limits,
                                           std::int64_t timestep, const CameraModel &camera)
    {
        InspectStepResult out;
        out.state = state;
        const Vec3 dx = clamp_norm(action.dx, limits.dx_max, out.cap_clamped);
        const Vec3 dtheta = clamp_norm(action.dtheta, limits.dtheta_max, out.cap_clamped);

        const Vec3 target = state.position + dx;
        out.state.position = target.cwiseMax(limits.workspace_min).cwiseMin(limits.workspace_max);
        out.workspace_escape_attempt = out.state.position != target;

        const double angle = dtheta.norm();
        if (angle > 0.0)
        {
            const Mat3 composed = (state.orientation * Rotation::about_axis(dtheta / angle, angle)).matrix();
            out.state.orientation = Rotation(Eigen::Quaterniond(composed).normalized().toRotationMatrix());
        }
        if (dx != Vec3::Zero() || angle > 0.0)
        {
            out.state.joint_angles = ik_stub(out.state.position, out.state.orientation);
        }

        if (action.snap)
        {
            InspectFrame frame = render_rgbd(scene, out.state, camera);
            frame.timestep = timestep;
            frame.annotation = pose_annotation(out.state, timestep);
            font::draw_text(frame.rgb, 4, 4, *frame.annotation, kAnnotation, 1);
            out.frame = std::move(frame);
        }
        return out;
    }

    InspectFrame render_rgbd(const InspectScene &scene, const EffectorState &state, const CameraModel &camera)
    {
        InspectFrame frame;
        frame.pose = state;
        frame.rgb = RgbImage(camera.width, camera.height, kBackdrop);
        frame.depth = DepthImage{camera.width, camera.height,
                                 std::vector<double>(static_cast<std::size_t>(camera.width) * camera.height, 0.0)};
        const double f = camera.focal_px();
        const Mat3 &rot = state.orientation.matrix();
        for (int v = 0; v < camera.height; ++v)
        {
            for (int u = 0; u < camera.width; ++u)
            {
                const Vec3 ray_cam((u + 0.5 - 0.5 * camera.width) / f, (v + 0.5 - 0.5 * camera.height) / f, 1.0);
                const Vec3 dir = (rot * ray_cam).normalized();
                Hit hit;
                for (const auto &b : scene.boxes)
                {
                    intersect_box(b, state.position, dir, hit);
                }
                for (const auto &s : scene.spheres)
                {
                    intersect_sphere(s, state.position, dir, hit);
                }
                if (std::isfinite(hit.t))
                {
                    frame.rgb.set(u, v, shade(hit.color, hit.normal));
                    frame.depth.meters[static_cast<std::size_t>(v) * camera.width + u] =
                        hit.t * dir.dot(rot.col(2));
                }
            }
        }
        return frame;
    }

    std::string pose_annotation(const EffectorState &state, std::int64_t timestep)
    {
        return fmt::format("T {} X {:.3f} Y {:.3f} Z {:.3f}", timestep, state.position.x(), state.position.y(),
                           state.position.z());
    }

    double coverage(const InspectScene &scene, const std::vector<InspectFrame> &snapshots)
    {
        if (scene.points.empty())
        {
            return 0.0;
        }
        std::size_t covered = 0;
        for (const auto &pt : scene.points)
        {
            const bool seen = std::any_of(snapshots.begin(), snapshots.end(), [&](const InspectFrame &f) {
                const Vec3 to_point = pt.point - f.pose.position;
                const double dist = to_point.norm();
                if (dist > pt.max_distance)
                {
                    return false;
                }
                if (dist == 0.0)
                {
                    return true;
                }
                const double c = std::clamp(to_point.dot(f.pose.optical_axis()) / dist, -1.0, 1.0);
                return std::acos(c) <= pt.max_view_angle;
            });
            covered += seen;
        }
        return static_cast<double>(covered) / static_cast<double>(scene.points.size());
    }

    nlohmann::json pose_to_json(const EffectorState &state)
    {
        nlohmann::json orientation = nlohmann::json::array();
        for (int r = 0; r < 3; ++r)
        {
            orientation.push_back({state.orientation.matrix()(r, 0), state.orientation.matrix()(r, 1),
                                   state.orientation.matrix()(r, 2)});
        }
        return {{"position", {state.position.x(), state.position.y(), state.position.z()}},
                {"orientation", orientation},
                {"joint_angles", state.joint_angles},
                {"efforts", state.efforts}};
    }

} // namespace spaceops
