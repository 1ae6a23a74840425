#pragma once

#include "spaceops/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace spaceops
{

    struct ScoreParams
    {
        double a{1e6};
        double b{0.1};
    };

    /// Running closest approaches. Starts at +inf; updates only ever lower it.
    struct ScoreLedger
    {
        double dm_lb{std::numeric_limits<double>::infinity()}; ///< to Lady (or PE target)
        std::optional<double> dm_bg;                            ///< to Guard, LBG only
        bool tracks_guard{false};
        long long samples{0};

        static ScoreLedger for_pursuit() { return {}; }
        static ScoreLedger for_guarding()
        {
            ScoreLedger l;
            l.tracks_guard = true;
            l.dm_bg = std::numeric_limits<double>::infinity();
            return l;
        }
    };

    /// Unit relative velocity (v_p - v_e) expressed in the vessel frame.
    /// Throws ZeroRelativeVelocity when |v_p - v_e| <= eps.
    Vec3 prograde(const Vec3 &v_pursuer, const Vec3 &v_evader, const Rotation &attitude, double eps = 1e-6);

    /// dist_bg is ignored for ledgers that do not track a guard.
    ScoreLedger update_ledger(ScoreLedger ledger, double dist_lb, std::optional<double> dist_bg = std::nullopt);

    /// dm_lb^2 + a / (dm_bg + b). Throws MissingGuardDistance for PE ledgers.
    double score(const ScoreLedger &ledger, const ScoreParams &params = {});

    /// Per-episode inputs to aggregation.
    struct EpisodeMetrics
    {
        double dm_lb{0.0};
        std::optional<double> dm_bg;
        std::optional<double> score;
        std::vector<double> latencies_ms;
    };

    struct LatencyStats
    {
        double best_ms{0.0};
        double worst_ms{0.0};
        double avg_ms{0.0};
        long long count{0};
    };

    LatencyStats latency_stats(std::span<const double> latencies_ms);

    struct RunReport
    {
        double best_dist{0.0};
        double avg_dist{0.0};
        std::optional<double> avg_guard_dist;
        std::optional<double> avg_score;
        double latency_best{0.0};
        double latency_worst{0.0};
        double latency_avg{0.0};
        long long decisions{0};
        long long episodes{0};
        std::string label;

        nlohmann::json to_json() const;
        /// Aligned plain-text tables: distances/score, then latencies.
        std::string to_table() const;
    };

    /// One row per report in each of the two tables.
    std::string reports_table(std::span<const RunReport> reports);

    /// Throws EmptyRunSet.
    RunReport aggregate_runs(std::span<const EpisodeMetrics> episodes, std::string label = {});

} // namespace spaceops
