#include "spaceops/dynamics.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace spaceops
{

    namespace
    {

        bool finite(const Vec3 &v) { return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z()); }

        struct Derivative
        {
            Vec3 dr;
            Vec3 dv;
        };

        Derivative deriv(const Vec3 &r, const Vec3 &v, const Vec3 &thrust, double mu)
        {
            const double rn = r.norm();
            return {v, -mu / (rn * rn * rn) * r + thrust};
        }

        StateVector rk4_step(const StateVector &s, const Vec3 &thrust, double mu, double h)
        {
            const Derivative k1 = deriv(s.position, s.velocity, thrust, mu);
            const Derivative k2 = deriv(s.position + 0.5 * h * k1.dr, s.velocity + 0.5 * h * k1.dv, thrust, mu);
            const Derivative k3 = deriv(s.position + 0.5 * h * k2.dr, s.velocity + 0.5 * h * k2.dv, thrust, mu);
            const Derivative k4 = deriv(s.position + h * k3.dr, s.velocity + h * k3.dv, thrust, mu);
            StateVector out;
            out.position = s.position + h / 6.0 * (k1.dr + 2.0 * k2.dr + 2.0 * k3.dr + k4.dr);
            out.velocity = s.velocity + h / 6.0 * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
            return out;
        }

        void check_step(const StateVector &s, const BodyParams &params)
        {
            if (!finite(s.position) || !finite(s.velocity))
            {
                throw NonFinite("propagated state is not finite");
            }
            if (s.position.norm() <= params.radius)
            {
                throw SurfaceImpact(fmt::format("radius {:.3f} m is at or below surface radius {:.3f} m",
                                                s.position.norm(), params.radius));
            }
        }

    } // namespace

    Rotation Rotation::about_axis(const Vec3 &axis, double angle_rad)
    {
        return Rotation{Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix()};
    }

    bool Rotation::is_orthonormal(double tol) const
    {
        const double det = m_.determinant();
        return std::abs(det - 1.0) <= tol && (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol;
    }

    StateVector propagate(const StateVector &state, double duration, const Vec3 &body_accel,
                          const Rotation &attitude, const BodyParams &params, double dt)
    {
        if (!(duration >= 0.0) || !std::isfinite(duration))
        {
            throw InvalidArgument(fmt::format("duration must be finite and >= 0, got {}", duration));
        }
        if (!(dt > 0.0) || !std::isfinite(dt))
        {
            throw InvalidArgument(fmt::format("dt must be finite and > 0, got {}", dt));
        }
        if (!finite(state.position) || !finite(state.velocity) || !finite(body_accel))
        {
            throw NonFinite("input state or acceleration is not finite");
        }
        if (duration == 0.0)
        {
            return state;
        }

        const Vec3 thrust = attitude.apply(body_accel);

        // Tolerate representation error so that e.g. 10 s at 0.1 s is 100 whole steps.
        const double ratio = duration / dt;
        auto whole = static_cast<long long>(std::floor(ratio + 1e-9));
        double remainder = duration - static_cast<double>(whole) * dt;
        if (remainder < 1e-9 * dt)
        {
            remainder = 0.0;
        }

        StateVector s = state;
        for (long long i = 0; i < whole; ++i)
        {
            s = rk4_step(s, thrust, params.mu, dt);
            check_step(s, params);
        }
        if (remainder > 0.0)
        {
            s = rk4_step(s, thrust, params.mu, remainder);
            check_step(s, params);
        }
        return s;
    }

    Rotation orbit_frame(const StateVector &state)
    {
        const double rn = state.position.norm();
        const double vn = state.velocity.norm();
        if (rn <= 0.0 || vn <= 0.0)
        {
            throw DegenerateOrbit("position and velocity must be nonzero");
        }
        const Vec3 up = state.position / rn;
        const Vec3 along = state.velocity - state.velocity.dot(up) * up;
        const double an = along.norm();
        if (an <= 1e-12 * vn)
        {
            throw DegenerateOrbit("velocity is parallel to position (radial trajectory)");
        }
        const Vec3 forward = along / an;
        const Vec3 right = forward.cross(up);

        Mat3 m;
        m.col(0) = right;
        m.col(1) = forward;
        m.col(2) = up;
        return Rotation{m};
    }

    double circular_speed(double radius, const BodyParams &params) { return std::sqrt(params.mu / radius); }

    double orbital_period(double semi_major_axis, const BodyParams &params)
    {
        return 2.0 * std::numbers::pi * std::sqrt(semi_major_axis * semi_major_axis * semi_major_axis / params.mu);
    }

    double specific_energy(const StateVector &state, const BodyParams &params)
    {
        return 0.5 * state.velocity.squaredNorm() - params.mu / state.position.norm();
    }

    Vec3 specific_angular_momentum(const StateVector &state) { return state.position.cross(state.velocity); }

    StateVector make_orbit(const OrbitShape &shape, double phase, const BodyParams &params)
    {
        if (!(params.mu > 0.0) || !(params.radius > 0.0))
        {
            throw InvalidOrbit("body mu and radius must be positive");
        }
        if (shape.kind == OrbitKind::Circular)
        {
            const double r = shape.periapsis;
            if (!(r > params.radius))
            {
                throw InvalidOrbit(fmt::format("radius {} m must exceed body radius {} m", r, params.radius));
            }
            const double v = circular_speed(r, params);
            StateVector s;
            s.position = Vec3{r * std::cos(phase), r * std::sin(phase), 0.0};
            s.velocity = Vec3{-v * std::sin(phase), v * std::cos(phase), 0.0};
            return s;
        }

        const double rp = shape.periapsis;
        const double ra = shape.apoapsis;
        if (!(rp > params.radius) || !(ra >= rp))
        {
            throw InvalidOrbit(fmt::format("apsides ({}, {}) m invalid for body radius {} m", rp, ra, params.radius));
        }
        const double e = (ra - rp) / (ra + rp);
        const double a = 0.5 * (ra + rp);
        const double p = a * (1.0 - e * e);
        const double nu = phase;
        const double r = p / (1.0 + e * std::cos(nu));
        const double h = std::sqrt(params.mu / p);
        const double v_radial = h * e * std::sin(nu);
        const double v_tangential = h * (1.0 + e * std::cos(nu));
        const double theta = shape.arg_periapsis + nu;

        const Vec3 radial{std::cos(theta), std::sin(theta), 0.0};
        const Vec3 tangential{-std::sin(theta), std::cos(theta), 0.0};
        StateVector s;
        s.position = r * radial;
        s.velocity = v_radial * radial + v_tangential * tangential;
        return s;
    }

    double true_anomaly_before_apoapsis(double periapsis, double apoapsis, double time_before_apoapsis,
                                        const BodyParams &params)
    {
        const double e = (apoapsis - periapsis) / (apoapsis + periapsis);
        const double a = 0.5 * (apoapsis + periapsis);
        const double n = std::sqrt(params.mu / (a * a * a));
        const double mean = std::numbers::pi - n * time_before_apoapsis;

        // Kepler's equation M = E - e sin E by Newton iteration.
        double ecc_anom = mean;
        for (int i = 0; i < 50; ++i)
        {
            const double f = ecc_anom - e * std::sin(ecc_anom) - mean;
            const double step = f / (1.0 - e * std::cos(ecc_anom));
            ecc_anom -= step;
            if (std::abs(step) < 1e-15)
            {
                break;
            }
        }
        return 2.0 * std::atan2(std::sqrt(1.0 + e) * std::sin(0.5 * ecc_anom),
                                std::sqrt(1.0 - e) * std::cos(0.5 * ecc_anom));
    }

} // namespace spaceops
