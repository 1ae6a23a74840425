#pragma once

#include "spaceops/agents.hpp"
#include "spaceops/scenario.hpp"
#include "spaceops/telemetry.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spaceops
{

    struct RunConfig
    {
        std::string scenario;
        std::string agent;
        int episodes{1};
        std::uint64_t seed{0};
        int jobs{1};
        std::optional<double> dt;
        std::optional<double> max_time;
        std::optional<double> thrust; ///< agent max accel, m/s^2
        ScoreParams score{};

        /// Throws InvalidArgument, UnsupportedScenario.
        ScenarioSpec scenario_spec(std::uint64_t episode_seed) const;
    };

    /// Episode i uses seed + i and a fresh agent. Results are in episode order
    /// whatever `jobs` is.
    std::vector<EpisodeResult> run_batch(const RunConfig &config);

    nlohmann::json results_to_json(const std::vector<EpisodeResult> &results);
    std::vector<EpisodeResult> results_from_json(const nlohmann::json &j);

    void write_results(const std::filesystem::path &path, const std::vector<EpisodeResult> &results);
    std::vector<EpisodeResult> load_results(const std::filesystem::path &path);

    /// Label defaults to "<agent> <scenario>" of the first result.
    RunReport report_results(const std::vector<EpisodeResult> &results, std::string label = {});

    struct DashboardFixture
    {
        std::string name;
        Observation observation;
    };

    std::vector<DashboardFixture> dashboard_fixtures();

    /// FNV-1a 64 over the raw RGB bytes, hex encoded.
    std::string pixel_digest(const RgbImage &img);

    /// Writes <name>.png for every fixture plus digests.json; returns the digest document.
    nlohmann::json render_fixtures(const std::filesystem::path &out_dir, const DashboardConfig &cfg = {});

    /// Entry point of the spaceops executable. 0 ok, 1 runtime error, 2 usage.
    int cli(int argc, const char *const *argv);

} // namespace spaceops
