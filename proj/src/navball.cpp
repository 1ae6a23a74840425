#include "spaceops/navball.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

namespace spaceops
{

    namespace
    {

        constexpr Rgb kBackground{18, 20, 28};
        constexpr Rgb kSky{58, 112, 186};
        constexpr Rgb kGround{150, 98, 52};
        constexpr Rgb kGrid{20, 24, 32};
        constexpr Rgb kRim{200, 200, 210};
        constexpr Rgb kText{235, 235, 235};
        constexpr Rgb kBoresight{240, 120, 20};

        int horizontal_region(double az, const MarkerThresholds &t)
        {
            return az < -t.horizontal ? 0 : (az > t.horizontal ? 2 : 1);
        }

        int vertical_region(double el, const MarkerThresholds &t)
        {
            return el > t.vertical ? 0 : (el < -t.vertical ? 2 : 1);
        }

        void draw_marker(RgbImage &img, const Vec3 &p, bool retrograde, const DashboardConfig &cfg)
        {
            const auto [fx, fy] = navball_pixel(p, cfg);
            const int mx = static_cast<int>(std::lround(fx));
            const int my = static_cast<int>(std::lround(fy));
            img.fill_annulus(mx, my, 8.0, 11.0, kMarkerColor);
            if (retrograde)
            {
                img.draw_line(mx - 6, my - 6, mx + 6, my + 6, kMarkerColor);
                img.draw_line(mx - 6, my + 6, mx + 6, my - 6, kMarkerColor);
            }
            else
            {
                img.fill_disc(mx, my, 2.0, kMarkerColor);
            }
        }

    } // namespace

    MarkerProjection project_marker(const Vec3 &p)
    {
        const double n = p.norm();
        if (!(std::abs(n - 1.0) <= 1e-9))
        {
            throw NotUnit(fmt::format("marker vector norm is {}", n));
        }
        MarkerProjection m;
        m.azimuth = std::atan2(p.x(), p.y());
        m.elevation = std::asin(std::clamp(p.z(), -1.0, 1.0));
        m.boresight_angle = std::acos(std::clamp(p.y(), -1.0, 1.0));
        m.visible = m.boresight_angle <= std::numbers::pi / 2.0;
        return m;
    }

    std::string describe_marker(const MarkerProjection &proj, const MarkerThresholds &t)
    {
        if (!proj.visible)
        {
            return "Prograde behind the navball (retrograde view)";
        }
        static constexpr const char *kHorizontal[] = {"left", "center", "right"};
        static constexpr const char *kVertical[] = {"top", "middle", "bottom"};
        return fmt::format("Prograde {} in the {} {} side of the navball", proj.boresight_angle < t.near ? "near" : "far",
                           kVertical[vertical_region(proj.elevation, t)],
                           kHorizontal[horizontal_region(proj.azimuth, t)]);
    }

    std::vector<std::string> dashboard_readouts(const Observation &obs)
    {
        std::vector<std::string> lines;
        lines.push_back(fmt::format("DIST {:.1f} KM", obs.distance / 1000.0));
        lines.push_back(fmt::format("SPD {:.1f} M/S", obs.speed));
        lines.push_back(fmt::format("FUEL {:.1f} KG", obs.fuel));
        if (obs.guard_distance)
        {
            lines.push_back(fmt::format("GUARD {:.1f} KM", *obs.guard_distance / 1000.0));
        }
        return lines;
    }

    std::pair<double, double> navball_pixel(const Vec3 &p, const DashboardConfig &cfg)
    {
        const double boresight = std::acos(std::clamp(p.y(), -1.0, 1.0));
        const double rho = cfg.navball_radius * boresight / (std::numbers::pi / 2.0);
        const double s = std::hypot(p.x(), p.z());
        if (s == 0.0)
        {
            return {static_cast<double>(cfg.navball_cx), static_cast<double>(cfg.navball_cy)};
        }
        return {cfg.navball_cx + rho * p.x() / s, cfg.navball_cy - rho * p.z() / s};
    }

    namespace
    {

        /// Sky/ground disc with region borders, rim and reticle; depends on cfg only.
        RgbImage navball_layer(const DashboardConfig &cfg)
        {
            RgbImage img(cfg.width, cfg.height, kBackground);
            const MarkerThresholds &t = cfg.thresholds;
            const int radius = cfg.navball_radius;

            // Classify every disc pixel by inverse azimuthal-equidistant
            // projection, colour by horizon, and outline the 3x3 region borders.
            std::vector<int> region(static_cast<std::size_t>(cfg.width) * cfg.height, -1);
            for (int y = cfg.navball_cy - radius; y <= cfg.navball_cy + radius; ++y)
            {
                for (int x = cfg.navball_cx - radius; x <= cfg.navball_cx + radius; ++x)
                {
                    if (!img.contains(x, y))
                    {
                        continue;
                    }
                    const double dx = x - cfg.navball_cx;
                    const double dy = cfg.navball_cy - y;
                    const double r = std::hypot(dx, dy);
                    if (r > radius)
                    {
                        continue;
                    }
                    const double ang = r / radius * (std::numbers::pi / 2.0);
                    const double sx = r > 0.0 ? dx / r : 0.0;
                    const double sz = r > 0.0 ? dy / r : 0.0;
                    const Vec3 p{std::sin(ang) * sx, std::cos(ang), std::sin(ang) * sz};
                    const double az = std::atan2(p.x(), p.y());
                    const double el = std::asin(std::clamp(p.z(), -1.0, 1.0));
                    region[static_cast<std::size_t>(y) * cfg.width + x] =
                        vertical_region(el, t) * 3 + horizontal_region(az, t);
                    img.set(x, y, el >= 0.0 ? kSky : kGround);
                }
            }
            for (int y = 0; y + 1 < cfg.height; ++y)
            {
                for (int x = 0; x + 1 < cfg.width; ++x)
                {
                    const int here = region[static_cast<std::size_t>(y) * cfg.width + x];
                    if (here < 0)
                    {
                        continue;
                    }
                    const int right = region[static_cast<std::size_t>(y) * cfg.width + x + 1];
                    const int below = region[static_cast<std::size_t>(y + 1) * cfg.width + x];
                    if ((right >= 0 && right != here) || (below >= 0 && below != here))
                    {
                        img.set(x, y, kGrid);
                    }
                }
            }
            img.fill_annulus(cfg.navball_cx, cfg.navball_cy, radius + 1.0, radius + 3.0, kRim);

            // Fixed boresight reticle.
            img.fill_rect(cfg.navball_cx - 24, cfg.navball_cy - 1, 14, 3, kBoresight);
            img.fill_rect(cfg.navball_cx + 11, cfg.navball_cy - 1, 14, 3, kBoresight);
            return img;
        }

        const RgbImage &cached_navball_layer(const DashboardConfig &cfg)
        {
            thread_local std::optional<std::pair<DashboardConfig, RgbImage>> cache;
            if (!cache || !(cache->first == cfg))
            {
                cache.emplace(cfg, navball_layer(cfg));
            }
            return cache->second;
        }

    } // namespace

    DashboardImage render_dashboard(const Observation &obs, const DashboardConfig &cfg)
    {
        DashboardImage out;
        out.pixels = cached_navball_layer(cfg);
        out.scenario_id = obs.scenario_id;
        out.clock = obs.time;
        RgbImage &img = out.pixels;
        const MarkerThresholds &t = cfg.thresholds;
        const int radius = cfg.navball_radius;

        if (obs.prograde)
        {
            const MarkerProjection proj = project_marker(*obs.prograde);
            out.phrase = describe_marker(proj, t);
            if (proj.visible)
            {
                draw_marker(img, *obs.prograde, false, cfg);
            }
            else
            {
                draw_marker(img, -*obs.prograde, true, cfg);
            }
        }
        else
        {
            out.phrase = kNoProgradePhrase;
        }

        const int scale = cfg.text_scale;
        const int line_h = (font::kGlyphHeight + 3) * scale;
        font::draw_text(img, 8, 8, fmt::format("{}  T {:.1f} S", obs.scenario_id, obs.time), kText, scale);
        int y = cfg.navball_cy + radius + 3 + line_h / 2;
        for (const auto &line : dashboard_readouts(obs))
        {
            font::draw_text(img, 16, y, line, kText, scale);
            y += line_h;
        }
        return out;
    }

} // namespace spaceops
