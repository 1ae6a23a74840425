#pragma once

#include "spaceops/dynamics.hpp"
#include "spaceops/raster.hpp"
#include "spaceops/scenario.hpp"

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace spaceops
{

    struct MarkerProjection
    {
        double azimuth{0.0};         ///< rad in (-pi, pi], positive to the right
        double elevation{0.0};       ///< rad in [-pi/2, pi/2], positive up
        double boresight_angle{0.0}; ///< rad between the marker and vessel +Y
        bool visible{true};          ///< boresight_angle <= pi/2
    };

    struct MarkerThresholds
    {
        double horizontal{15.0 * std::numbers::pi / 180.0};
        double vertical{15.0 * std::numbers::pi / 180.0};
        double near{30.0 * std::numbers::pi / 180.0};

        bool operator==(const MarkerThresholds &) const = default;
    };

    /// Throws NotUnit when | |p| - 1 | > 1e-9.
    MarkerProjection project_marker(const Vec3 &p);

    /// "Prograde {near|far} in the {top|middle|bottom} {left|center|right} side of the navball",
    /// or the behind-the-navball phrase for an invisible marker.
    std::string describe_marker(const MarkerProjection &proj, const MarkerThresholds &thresholds = {});

    inline constexpr const char *kNoProgradePhrase = "No prograde (relative velocity is zero)";

    struct DashboardConfig
    {
        int width{512};
        int height{512};
        int navball_cx{256};
        int navball_cy{216};
        int navball_radius{170};
        int text_scale{2};
        MarkerThresholds thresholds{};

        bool operator==(const DashboardConfig &) const = default;
    };

    struct DashboardImage
    {
        RgbImage pixels;
        std::string scenario_id;
        double clock{0.0};
        std::string phrase; ///< describe_marker output for the frame

        int width() const { return pixels.width(); }
        int height() const { return pixels.height(); }
        std::vector<std::uint8_t> png() const { return encode_png(pixels); }
    };

    /// Text lines drawn below the navball, e.g. "DIST 2.6 KM".
    std::vector<std::string> dashboard_readouts(const Observation &obs);

    /// Azimuthal-equidistant pixel position of a unit vector on the navball.
    /// Boresight maps to the disc centre and the 90-degree rim to the disc edge.
    std::pair<double, double> navball_pixel(const Vec3 &p, const DashboardConfig &config = {});

    /// Colour reserved for the prograde/retrograde marker.
    inline constexpr Rgb kMarkerColor{255, 214, 0};

    DashboardImage render_dashboard(const Observation &obs, const DashboardConfig &config = {});

} // namespace spaceops
