#include "spaceops/actions.hpp"
#include "spaceops/dynamics.hpp"
#include "spaceops/errors.hpp"
#include "spaceops/harness.hpp"
#include "spaceops/inspect.hpp"
#include "spaceops/navball.hpp"
#include "spaceops/prompt.hpp"
#include "spaceops/scenario.hpp"
#include "spaceops/store.hpp"
#include "spaceops/telemetry.hpp"
#include "spaceops/teleop.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <tuple>

namespace py = pybind11;
using namespace spaceops;

namespace
{

    using ActionTuple = std::tuple<int, int, int, double>;

    ActionTuple to_tuple(const DiscreteAction &a)
    {
        return {static_cast<int>(a.forward), static_cast<int>(a.right), static_cast<int>(a.up), a.duration};
    }

    DiscreteAction from_tuple(int forward, int right, int up, double duration)
    {
        return make_action(forward, right, up, duration);
    }

    py::bytes to_bytes(const std::vector<std::uint8_t> &v)
    {
        return py::bytes(reinterpret_cast<const char *>(v.data()), v.size());
    }

    /// JSON crosses the boundary as text; the Python wrapper decodes it.
    std::string results_json(const std::string &scenario, const std::string &agent, int episodes, std::uint64_t seed,
                             std::optional<double> max_time, int jobs)
    {
        RunConfig cfg;
        cfg.scenario = scenario;
        cfg.agent = agent;
        cfg.episodes = episodes;
        cfg.seed = seed;
        cfg.max_time = max_time;
        cfg.jobs = jobs;
        return results_to_json(run_batch(cfg)).dump();
    }

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "spaceops native core";

    py::register_exception<Error>(m, "SpaceopsError");

    m.def(
        "score",
        [](double dm_lb, double dm_bg, double a, double b) {
            return score(update_ledger(ScoreLedger::for_guarding(), dm_lb, dm_bg), {a, b});
        },
        py::arg("dm_lb"), py::arg("dm_bg"), py::arg("a") = 1e6, py::arg("b") = 0.1);

    m.def(
        "prograde", [](const Vec3 &vp, const Vec3 &ve, const Mat3 &r) { return prograde(vp, ve, Rotation(r)); },
        py::arg("v_pursuer"), py::arg("v_evader"), py::arg("rotation"));

    m.def(
        "propagate",
        [](const Vec3 &position, const Vec3 &velocity, double duration, double dt, double mu) {
            BodyParams body;
            body.mu = mu;
            const StateVector s = propagate({position, velocity}, duration, Vec3::Zero(), Rotation{}, body, dt);
            return std::make_tuple(s.position, s.velocity);
        },
        py::arg("position"), py::arg("velocity"), py::arg("duration"), py::arg("dt") = 0.1,
        py::arg("mu") = BodyParams{}.mu);

    m.def(
        "parse_action", [](const std::string &text) { return to_tuple(parse_response(text)); }, py::arg("text"));
    m.def(
        "format_action",
        [](int f, int r, int u, double duration) { return format_action(from_tuple(f, r, u, duration)); },
        py::arg("forward"), py::arg("right"), py::arg("up"), py::arg("duration") = 1.0);
    m.def("enumerate_actions", [] {
        std::vector<ActionTuple> out;
        for (const auto &a : enumerate_actions())
        {
            out.push_back(to_tuple(a));
        }
        return out;
    });

    m.def(
        "scenario_config", [](const std::string &id) { return scenario_to_json(parse_scenario_id(id)).dump(); },
        py::arg("scenario"));
    m.def("run_json", &results_json, py::arg("scenario"), py::arg("agent"), py::arg("episodes") = 1,
          py::arg("seed") = 0, py::arg("max_time") = std::nullopt, py::arg("jobs") = 1);

    m.def("fixture_names", [] {
        std::vector<std::string> names;
        for (const auto &f : dashboard_fixtures())
        {
            names.push_back(f.name);
        }
        return names;
    });
    m.def(
        "render_fixture",
        [](const std::string &name) {
            for (const auto &f : dashboard_fixtures())
            {
                if (f.name == name)
                {
                    const DashboardImage img = render_dashboard(f.observation);
                    return std::make_tuple(to_bytes(img.png()), img.phrase, pixel_digest(img.pixels));
                }
            }
            throw InvalidArgument("unknown fixture '" + name + "'");
        },
        py::arg("name"));

    m.def(
        "export_session",
        [](const std::filesystem::path &dir, std::uint64_t seed) {
            py::list out;
            for (const auto &item : shuffled_export(dir, seed))
            {
                py::dict d;
                d["index"] = item.index;
                d["image"] = to_bytes(item.image);
                d["depth"] = item.depth ? py::object(to_bytes(*item.depth)) : py::none();
                d["state"] = item.state;
                d["action"] = item.action;
                d["instruction"] = item.instruction;
                out.append(d);
            }
            return out;
        },
        py::arg("session_dir"), py::arg("seed"));
    m.def(
        "split_sessions",
        [](const std::filesystem::path &root, std::uint64_t seed) {
            const SessionSplit s = split_sessions(list_sessions(root), seed);
            return std::make_tuple(s.train, s.validation);
        },
        py::arg("root"), py::arg("seed"));

    py::class_<TeleopSession>(m, "TeleopSession")
        .def(py::init([](std::optional<std::filesystem::path> root, std::string instruction) {
                 std::optional<RecordingOptions> rec;
                 if (root)
                 {
                     rec = RecordingOptions{*root, std::move(instruction), std::nullopt};
                 }
                 return std::make_unique<TeleopSession>(TeleopConfig{}, std::move(rec));
             }),
             py::arg("record_root") = std::nullopt, py::arg("instruction") = "")
        .def(
            "handle_json",
            [](TeleopSession &s, const std::string &text) {
                std::vector<std::string> out;
                {
                    py::gil_scoped_release release;
                    for (const auto &r : s.handle(std::string_view(text)))
                    {
                        out.push_back(r.dump());
                    }
                }
                return out;
            },
            py::arg("message"))
        .def("state_json", [](const TeleopSession &s) { return s.state_json().dump(); })
        .def_property_readonly("timestep", &TeleopSession::timestep)
        .def_property_readonly("frame_count", &TeleopSession::frame_count)
        .def_property_readonly("finished", &TeleopSession::finished)
        .def_property_readonly("session_dir", &TeleopSession::session_dir);
}
