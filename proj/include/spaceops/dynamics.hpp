#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>

namespace spaceops
{

    using Vec3 = Eigen::Vector3d;
    using Mat3 = Eigen::Matrix3d;

    /// Proper rotation taking vessel-frame coordinates into the inertial frame.
    /// Columns are the vessel axes (right, forward, up) expressed inertially.
    class Rotation
    {
    public:
        Rotation() : m_(Mat3::Identity()) {}
        explicit Rotation(const Mat3 &m) : m_(m) {}

        static Rotation identity() { return Rotation{}; }
        static Rotation about_axis(const Vec3 &axis, double angle_rad);

        const Mat3 &matrix() const { return m_; }

        /// vessel -> inertial
        Vec3 apply(const Vec3 &v) const { return m_ * v; }
        /// inertial -> vessel (R^-1 = R^T for proper rotations)
        Vec3 apply_inverse(const Vec3 &v) const { return m_.transpose() * v; }

        Rotation inverse() const { return Rotation{m_.transpose()}; }
        Rotation operator*(const Rotation &rhs) const { return Rotation{m_ * rhs.m_}; }

        bool is_orthonormal(double tol = 1e-9) const;

        bool operator==(const Rotation &rhs) const { return m_ == rhs.m_; }

    private:
        Mat3 m_;
    };

    struct BodyParams
    {
        double mu{3.5316e12};   ///< m^3/s^2
        double radius{600e3};   ///< m, collision floor
    };

    struct StateVector
    {
        Vec3 position{Vec3::Zero()}; ///< m, body-centred inertial
        Vec3 velocity{Vec3::Zero()}; ///< m/s

        bool operator==(const StateVector &rhs) const
        {
            return position == rhs.position && velocity == rhs.velocity;
        }
    };

    struct VesselState
    {
        StateVector state;
        Rotation attitude;
        double fuel{0.0}; ///< kg
        std::string name;
    };

    /**
     * Fixed-step RK4 integration of r'' = -mu r/|r|^3 + R * body_accel.
     *
     * The attitude is held constant over the call. Whole steps of `dt` are
     * taken, then one partial step covers the remainder so the result lands
     * exactly at `duration`. Throws NonFinite or SurfaceImpact.
     */
    StateVector propagate(const StateVector &state, double duration, const Vec3 &body_accel,
                          const Rotation &attitude, const BodyParams &params, double dt);

    /// Orbit-local frame: forward (+Y) along-track, up (+Z) radial-out,
    /// right (+X) completing the right-handed triad. Throws DegenerateOrbit.
    Rotation orbit_frame(const StateVector &state);

    enum class OrbitKind
    {
        Circular,
        Elliptical,
    };

    struct OrbitShape
    {
        OrbitKind kind{OrbitKind::Circular};
        double periapsis{0.0}; ///< m; for circular orbits this is the radius
        double apoapsis{0.0};  ///< m; ignored for circular orbits
        double arg_periapsis{0.0}; ///< rad, in-plane angle of periapsis from +x

        static OrbitShape circular(double radius) { return {OrbitKind::Circular, radius, radius, 0.0}; }
        static OrbitShape elliptical(double periapsis, double apoapsis, double arg_periapsis = 0.0)
        {
            return {OrbitKind::Elliptical, periapsis, apoapsis, arg_periapsis};
        }
    };

    /**
     * Equatorial orbit state. `phase` is the in-plane angle from +x for a
     * circular orbit and the true anomaly for an elliptical one.
     * Throws InvalidOrbit.
     */
    StateVector make_orbit(const OrbitShape &shape, double phase, const BodyParams &params);

    double circular_speed(double radius, const BodyParams &params);
    double orbital_period(double semi_major_axis, const BodyParams &params);
    double specific_energy(const StateVector &state, const BodyParams &params);
    Vec3 specific_angular_momentum(const StateVector &state);

    /// True anomaly reached `time_before_apoapsis` seconds before apoapsis.
    double true_anomaly_before_apoapsis(double periapsis, double apoapsis, double time_before_apoapsis,
                                        const BodyParams &params);

} // namespace spaceops
