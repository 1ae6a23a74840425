#include "spaceops/harness.hpp"

#include "spaceops/errors.hpp"
#include "spaceops/prompt.hpp"
#include "spaceops/teleop.hpp"

#include <CLI11.hpp>

#include <fmt/format.h>

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;

namespace spaceops
{

    namespace
    {

        std::atomic<bool> g_interrupted{false};

        extern "C" void on_interrupt(int)
        {
            g_interrupted = true;
        }

        void require_positive(const std::optional<double> &v, const char *name)
        {
            if (v && !(*v > 0.0 && std::isfinite(*v)))
            {
                throw InvalidArgument(fmt::format("{} must be > 0", name));
            }
        }

        /// Blocks until the session finishes, an interrupt arrives or `seconds` elapse (0 = no limit).
        void wait_for_session(const TeleopSession &session, double seconds)
        {
            g_interrupted = false;
            auto previous = std::signal(SIGINT, on_interrupt);
            const auto start = std::chrono::steady_clock::now();
            while (!g_interrupted)
            {
                if (session.wait_finished(std::chrono::milliseconds(100)))
                {
                    break;
                }
                if (seconds > 0.0 &&
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= seconds)
                {
                    break;
                }
            }
            std::signal(SIGINT, previous);
        }

    } // namespace

    ScenarioSpec RunConfig::scenario_spec(std::uint64_t episode_seed) const
    {
        ScenarioSpec spec = parse_scenario_id(scenario);
        require_positive(dt, "dt");
        require_positive(max_time, "max-time");
        require_positive(thrust, "thrust");
        spec.rng_seed = episode_seed;
        if (dt)
        {
            spec.dt = *dt;
        }
        if (max_time)
        {
            spec.max_time = *max_time;
        }
        if (thrust)
        {
            spec.agent_max_accel = *thrust;
        }
        return spec;
    }

    std::vector<EpisodeResult> run_batch(const RunConfig &config)
    {
        if (config.episodes < 1)
        {
            throw InvalidArgument("episodes must be >= 1");
        }
        if (config.jobs < 1)
        {
            throw InvalidArgument("jobs must be >= 1");
        }
        // Fail fast on a bad scenario or agent before spawning workers.
        make_agent(config.agent, config.scenario_spec(config.seed));

        std::vector<EpisodeResult> results(static_cast<std::size_t>(config.episodes));
        EpisodeConfig episode_config;
        episode_config.score = config.score;

        std::atomic<int> next{0};
        std::mutex error_mu;
        std::exception_ptr first_error;
        auto worker = [&] {
            for (int i = next++; i < config.episodes; i = next++)
            {
                try
                {
                    const ScenarioSpec spec = config.scenario_spec(config.seed + static_cast<std::uint64_t>(i));
                    auto agent = make_agent(config.agent, spec);
                    results[static_cast<std::size_t>(i)] = run_episode(spec, *agent, episode_config);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mu);
                    if (!first_error)
                    {
                        first_error = std::current_exception();
                    }
                }
            }
        };
        const int n_threads = std::min(config.jobs, config.episodes);
        if (n_threads == 1)
        {
            worker();
        }
        else
        {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_threads; ++t)
            {
                pool.emplace_back(worker);
            }
            for (auto &t : pool)
            {
                t.join();
            }
        }
        if (first_error)
        {
            std::rethrow_exception(first_error);
        }
        return results;
    }

    nlohmann::json results_to_json(const std::vector<EpisodeResult> &results)
    {
        nlohmann::json out = nlohmann::json::array();
        for (const auto &r : results)
        {
            out.push_back(r.to_json());
        }
        return out;
    }

    std::vector<EpisodeResult> results_from_json(const nlohmann::json &j)
    {
        if (!j.is_array())
        {
            throw InvalidArgument("result file must hold a JSON array");
        }
        std::vector<EpisodeResult> out;
        for (const auto &item : j)
        {
            try
            {
                out.push_back(EpisodeResult::from_json(item));
            }
            catch (const nlohmann::json::exception &e)
            {
                throw InvalidArgument(fmt::format("malformed episode result: {}", e.what()));
            }
        }
        return out;
    }

    void write_results(const fs::path &path, const std::vector<EpisodeResult> &results)
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
        {
            throw IoError(fmt::format("cannot write '{}'", path.string()));
        }
        out << results_to_json(results).dump(2) << '\n';
        if (!out)
        {
            throw IoError(fmt::format("short write to '{}'", path.string()));
        }
    }

    std::vector<EpisodeResult> load_results(const fs::path &path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw IoError(fmt::format("cannot read '{}'", path.string()));
        }
        const auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded())
        {
            throw InvalidArgument(fmt::format("'{}' is not valid JSON", path.string()));
        }
        return results_from_json(doc);
    }

    RunReport report_results(const std::vector<EpisodeResult> &results, std::string label)
    {
        std::vector<EpisodeMetrics> metrics;
        metrics.reserve(results.size());
        for (const auto &r : results)
        {
            metrics.push_back(r.metrics());
        }
        if (label.empty() && !results.empty())
        {
            label = fmt::format("{} {}", results.front().agent, results.front().scenario_id);
        }
        return aggregate_runs(metrics, std::move(label));
    }

    std::vector<DashboardFixture> dashboard_fixtures()
    {
        std::vector<DashboardFixture> out;
        const auto shots = few_shot_observations();
        for (std::size_t i = 0; i < shots.size(); ++i)
        {
            out.push_back({fmt::format("fewshot_{}", i), shots[i]});
        }

        Observation retro = shots.front();
        retro.prograde = Vec3(0.3, -0.9, 0.2).normalized();
        retro.time = 42.0;
        out.push_back({"retrograde_view", retro});

        Observation guarded = shots.front();
        guarded.guard_distance = 600.0;
        guarded.guard_rel_position = Vec3(0.0, 600.0, 0.0);
        guarded.time = 120.5;
        out.push_back({"guard_readout", guarded});

        Observation still = shots.front();
        still.prograde.reset();
        still.speed = 0.0;
        out.push_back({"no_prograde", still});

        Observation pe = shots[1];
        pe.target_name = "Evader";
        pe.scenario_id = "e2";
        out.push_back({"pursuit_evasion", pe});
        return out;
    }

    std::string pixel_digest(const RgbImage &img)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint8_t b : img.bytes())
        {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
        return fmt::format("{:016x}", h);
    }

    nlohmann::json render_fixtures(const fs::path &out_dir, const DashboardConfig &cfg)
    {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec)
        {
            throw IoError(fmt::format("cannot create '{}': {}", out_dir.string(), ec.message()));
        }
        nlohmann::json digests = nlohmann::json::object();
        for (const auto &f : dashboard_fixtures())
        {
            const DashboardImage img = render_dashboard(f.observation, cfg);
            const auto png = img.png();
            std::ofstream out(out_dir / (f.name + ".png"), std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char *>(png.data()), static_cast<std::streamsize>(png.size()));
            if (!out)
            {
                throw IoError(fmt::format("cannot write fixture '{}'", f.name));
            }
            digests[f.name] = {{"pixels", pixel_digest(img.pixels)}, {"phrase", img.phrase}};
        }
        std::ofstream idx(out_dir / "digests.json", std::ios::trunc);
        idx << digests.dump(2) << '\n';
        if (!idx)
        {
            throw IoError("cannot write digests.json");
        }
        return digests;
    }

    int cli(int argc, const char *const *argv)
    {
        CLI::App app{"Orbital agent benchmark and inspection teleoperation tools", "spaceops"};
        app.require_subcommand(1);

        RunConfig run;
        std::string run_out;
        std::optional<double> score_a;
        std::optional<double> score_b;
        auto *run_cmd = app.add_subcommand("run", "Run episodes and write an EpisodeResult JSON array");
        run_cmd->add_option("--scenario", run.scenario, "e1..e4 or lbg1-lgN-iM")->required();
        run_cmd->add_option("--agent", run.agent, "naive | pursuit | mock:<fixture> | remote:<profile.json>")
            ->required();
        run_cmd->add_option("--episodes", run.episodes, "Episode count")->check(CLI::PositiveNumber);
        run_cmd->add_option("--seed", run.seed, "Seed of the first episode; episode i uses seed + i");
        run_cmd->add_option("--jobs", run.jobs, "Parallel episodes")->check(CLI::PositiveNumber);
        run_cmd->add_option("--out", run_out, "Output path ('-' for stdout)")->required();
        run_cmd->add_option("--dt", run.dt, "Propagator step (s)");
        run_cmd->add_option("--max-time", run.max_time, "Episode length (s)");
        run_cmd->add_option("--thrust", run.thrust, "Agent max acceleration (m/s^2)");
        run_cmd->add_option("--score-a", score_a, "Guard penalty numerator");
        run_cmd->add_option("--score-b", score_b, "Guard penalty offset (m)");

        std::vector<std::string> report_files;
        std::string report_json;
        auto *report_cmd = app.add_subcommand("report", "Aggregate result files into a report table");
        report_cmd->add_option("files", report_files, "Result files written by run")->required();
        report_cmd->add_option("--json", report_json, "Also write the reports as JSON to this path");

        std::string fixtures_out;
        auto *fixtures_cmd = app.add_subcommand("render-fixtures", "Regenerate dashboard golden images");
        fixtures_cmd->add_option("--out", fixtures_out, "Output directory")->required();

        std::string bind = "127.0.0.1";
        unsigned short port = 8765;
        double duration = 0.0;
        std::string record_root;
        std::string instruction;
        std::optional<std::string> session_id;
        auto *record_cmd = app.add_subcommand("record", "Serve the teleop endpoints and record a session");
        record_cmd->add_option("--root", record_root, "Dataset root directory")->required();
        record_cmd->add_option("--instruction", instruction, "Episode instruction")->required();
        record_cmd->add_option("--session-id", session_id, "Explicit session id");
        auto *serve_cmd = app.add_subcommand("serve", "Serve the teleop endpoints without recording");
        for (auto *cmd : {record_cmd, serve_cmd})
        {
            cmd->add_option("--bind", bind, "Bind address");
            cmd->add_option("--port", port, "Port (0 picks a free one)");
            cmd->add_option("--duration", duration, "Stop after this many seconds (0 = until finish)");
        }

        try
        {
            app.parse(argc, argv);
        }
        catch (const CLI::CallForHelp &e)
        {
            return app.exit(e);
        }
        catch (const CLI::CallForAllHelp &e)
        {
            return app.exit(e);
        }
        catch (const CLI::ParseError &e)
        {
            app.exit(e);
            return 2;
        }

        try
        {
            if (*run_cmd)
            {
                if (score_a)
                {
                    run.score.a = *score_a;
                }
                if (score_b)
                {
                    run.score.b = *score_b;
                }
                std::vector<EpisodeResult> results;
                try
                {
                    results = run_batch(run);
                }
                catch (const UnsupportedScenario &e)
                {
                    std::cerr << "error: " << e.what() << '\n';
                    return 2;
                }
                catch (const InvalidArgument &e)
                {
                    std::cerr << "error: " << e.what() << '\n';
                    return 2;
                }
                if (run_out == "-")
                {
                    std::cout << results_to_json(results).dump(2) << '\n';
                }
                else
                {
                    write_results(run_out, results);
                }
                return 0;
            }
            if (*report_cmd)
            {
                std::vector<RunReport> reports;
                for (const auto &f : report_files)
                {
                    reports.push_back(report_results(load_results(f)));
                }
                std::cout << reports_table(reports);
                if (!report_json.empty())
                {
                    nlohmann::json j = nlohmann::json::array();
                    for (const auto &r : reports)
                    {
                        j.push_back(r.to_json());
                    }
                    std::ofstream out(report_json, std::ios::trunc);
                    out << j.dump(2) << '\n';
                    if (!out)
                    {
                        throw IoError(fmt::format("cannot write '{}'", report_json));
                    }
                }
                return 0;
            }
            if (*fixtures_cmd)
            {
                const auto digests = render_fixtures(fixtures_out);
                std::cout << fmt::format("wrote {} fixtures to {}\n", digests.size(), fixtures_out);
                return 0;
            }
            if (*record_cmd || *serve_cmd)
            {
                std::optional<RecordingOptions> rec;
                if (*record_cmd)
                {
                    rec = RecordingOptions{record_root, instruction, session_id};
                }
                TeleopSession session({}, rec);
                TeleopServer server(session, bind, port);
                server.start();
                std::cout << fmt::format("listening on http://{}:{} (GET /state, WS /stream)\n", bind, server.port())
                          << std::flush;
                wait_for_session(session, duration);
                server.stop();
                if (const auto dir = session.session_dir())
                {
                    std::cout << fmt::format("session {} with {} frames{}\n", dir->string(), session.frame_count(),
                                             session.finished() ? "" : " (not finished)");
                }
                return 0;
            }
        }
        catch (const UnsupportedScenario &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
        catch (const std::exception &e)
        {
            std::cerr << "error: " << e.what() << '\n';
            return 1;
        }
        return 2;
    }

} // namespace spaceops
