#include "spaceops/telemetry.hpp"

#include "spaceops/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spaceops
{

    Vec3 prograde(const Vec3 &v_pursuer, const Vec3 &v_evader, const Rotation &attitude, double eps)
    {
        const Vec3 rel = v_pursuer - v_evader;
        const double n = rel.norm();
        if (!(n > eps))
        {
            throw ZeroRelativeVelocity(fmt::format("|v_p - v_e| = {} m/s", n));
        }
        Vec3 p = attitude.apply_inverse(rel / n);
        // Remove the last few ulps of norm error left by the rotation.
        return p / p.norm();
    }

    ScoreLedger update_ledger(ScoreLedger ledger, double dist_lb, std::optional<double> dist_bg)
    {
        if (!(dist_lb >= 0.0) || (dist_bg && !(*dist_bg >= 0.0)))
        {
            throw InvalidArgument("ledger distances must be >= 0");
        }
        ledger.dm_lb = std::min(ledger.dm_lb, dist_lb);
        if (ledger.tracks_guard && dist_bg)
        {
            ledger.dm_bg = std::min(ledger.dm_bg.value_or(std::numeric_limits<double>::infinity()), *dist_bg);
        }
        ++ledger.samples;
        return ledger;
    }

    double score(const ScoreLedger &ledger, const ScoreParams &params)
    {
        if (!ledger.tracks_guard || !ledger.dm_bg || !std::isfinite(*ledger.dm_bg))
        {
            throw MissingGuardDistance("score is only defined for ledgers with a recorded guard distance");
        }
        return ledger.dm_lb * ledger.dm_lb + params.a / (*ledger.dm_bg + params.b);
    }

    LatencyStats latency_stats(std::span<const double> latencies_ms)
    {
        LatencyStats s;
        if (latencies_ms.empty())
        {
            return s;
        }
        const auto [lo, hi] = std::minmax_element(latencies_ms.begin(), latencies_ms.end());
        s.best_ms = *lo;
        s.worst_ms = *hi;
        s.avg_ms = std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(latencies_ms.size());
        s.count = static_cast<long long>(latencies_ms.size());
        return s;
    }

    RunReport aggregate_runs(std::span<const EpisodeMetrics> episodes, std::string label)
    {
        if (episodes.empty())
        {
            throw EmptyRunSet("at least one episode is required");
        }
        RunReport r;
        r.label = std::move(label);
        r.episodes = static_cast<long long>(episodes.size());
        r.best_dist = std::numeric_limits<double>::infinity();

        double dist_sum = 0.0;
        double guard_sum = 0.0;
        double score_sum = 0.0;
        long long guard_n = 0;
        long long score_n = 0;
        std::vector<double> latencies;
        for (const auto &e : episodes)
        {
            r.best_dist = std::min(r.best_dist, e.dm_lb);
            dist_sum += e.dm_lb;
            if (e.dm_bg)
            {
                guard_sum += *e.dm_bg;
                ++guard_n;
            }
            if (e.score)
            {
                score_sum += *e.score;
                ++score_n;
            }
            latencies.insert(latencies.end(), e.latencies_ms.begin(), e.latencies_ms.end());
        }
        r.avg_dist = dist_sum / static_cast<double>(episodes.size());
        if (guard_n > 0)
        {
            r.avg_guard_dist = guard_sum / static_cast<double>(guard_n);
        }
        if (score_n > 0)
        {
            r.avg_score = score_sum / static_cast<double>(score_n);
        }
        const LatencyStats ls = latency_stats(latencies);
        r.latency_best = ls.best_ms;
        r.latency_worst = ls.worst_ms;
        r.latency_avg = ls.avg_ms;
        r.decisions = ls.count;
        return r;
    }

    nlohmann::json RunReport::to_json() const
    {
        nlohmann::json j;
        j["label"] = label;
        j["episodes"] = episodes;
        j["best_dist"] = best_dist;
        j["avg_dist"] = avg_dist;
        j["avg_guard_dist"] = avg_guard_dist ? nlohmann::json(*avg_guard_dist) : nlohmann::json(nullptr);
        j["avg_score"] = avg_score ? nlohmann::json(*avg_score) : nlohmann::json(nullptr);
        j["latency_best_ms"] = latency_best;
        j["latency_worst_ms"] = latency_worst;
        j["latency_avg_ms"] = latency_avg;
        j["decisions"] = decisions;
        return j;
    }

    std::string RunReport::to_table() const
    {
        return reports_table(std::span<const RunReport>(this, 1));
    }

    std::string reports_table(std::span<const RunReport> reports)
    {
        const auto opt = [](const std::optional<double> &v) { return v ? fmt::format("{:.2f}", *v) : std::string("-"); };
        const auto name = [](const RunReport &r) { return r.label.empty() ? std::string("run") : r.label; };

        std::string out;
        out += fmt::format("{:<24} | {:>14} {:>14} {:>18} | {:>14}\n", "Method", "Best Dist. (m)", "Avg. Dist. (m)",
                           "Avg. to Guard (m)", "Avg. Score");
        for (const auto &r : reports)
        {
            out += fmt::format("{:<24} | {:>14.2f} {:>14.2f} {:>18} | {:>14}\n", name(r), r.best_dist, r.avg_dist,
                               opt(r.avg_guard_dist), opt(r.avg_score));
        }
        out += "\n";
        out += fmt::format("{:<24} | {:>17} {:>18} {:>20}\n", "Agent", "Best Latency (ms)", "Worst Latency (ms)",
                           "Average Latency (ms)");
        for (const auto &r : reports)
        {
            out += fmt::format("{:<24} | {:>17.2f} {:>18.2f} {:>20.2f}\n", name(r), r.latency_best, r.latency_worst,
                               r.latency_avg);
        }
        return out;
    }

} // namespace spaceops
