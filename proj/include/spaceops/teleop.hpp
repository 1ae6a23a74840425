#pragma once

#include "spaceops/inspect.hpp"
#include "spaceops/store.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace spaceops
{

    struct TeleopConfig
    {
        InspectScene scene{InspectScene::satellite_mock()};
        InspectLimits limits{};
        CameraModel camera{};
        EffectorState initial{default_effector_state()};
        bool stream_depth{true};
    };

    struct RecordingOptions
    {
        std::filesystem::path root;
        std::string instruction;
        std::optional<std::string> session_id;
    };

    /**
     * Message handling for one teleoperated effector. Every method locks, so
     * at most one action is applied at a time.
     *
     * Client messages: {type:"jog", dx:[3], dtheta:[3]}, {type:"snapshot"},
     * {type:"instruction", text}, {type:"finish"}. Replies: {type:"frame",
     * png_base64, depth_png_base64?, pose, t} after each applied action,
     * {type:"finished", frames} after finish, {type:"error", detail} otherwise.
     */
    class TeleopSession
    {
    public:
        explicit TeleopSession(TeleopConfig config = {}, std::optional<RecordingOptions> recording = std::nullopt);

        std::vector<nlohmann::json> handle(std::string_view text);
        std::vector<nlohmann::json> handle(const nlohmann::json &message);

        /// Frame message for the current pose without applying an action.
        nlohmann::json current_frame() const;
        /// Body of GET /state.
        nlohmann::json state_json() const;

        bool try_claim();
        void release();

        bool finished() const;
        /// True once finished, false on timeout.
        bool wait_finished(std::chrono::milliseconds timeout) const;

        EffectorState state() const;
        std::int64_t timestep() const;
        std::int64_t frame_count() const;
        std::int64_t snapshot_count() const;
        std::vector<InspectFrame> snapshots() const;
        std::optional<std::filesystem::path> session_dir() const;

    private:
        nlohmann::json apply(const InspectAction &action);
        nlohmann::json frame_message(const InspectFrame &frame) const;
        static nlohmann::json error(std::string detail);

        TeleopConfig config_;
        mutable std::mutex mu_;
        mutable std::condition_variable finished_cv_;
        EffectorState state_;
        std::int64_t t_{0};
        std::int64_t frames_{0};
        std::string instruction_;
        std::vector<InspectFrame> snapshots_;
        std::optional<SessionWriter> writer_;
        bool finished_{false};
        bool claimed_{false};
    };

    /// GET /state and WS /stream on a local port; one controller at a time,
    /// further upgrade requests get 409.
    class TeleopServer
    {
    public:
        TeleopServer(TeleopSession &session, std::string address = "127.0.0.1", unsigned short port = 0);
        ~TeleopServer();
        TeleopServer(const TeleopServer &) = delete;
        TeleopServer &operator=(const TeleopServer &) = delete;

        /// Binds and starts accepting. Throws IoError when the port is taken.
        void start();
        void stop();
        unsigned short port() const { return port_; }

    private:
        struct Impl;
        std::unique_ptr<Impl> impl_;
        TeleopSession &session_;
        std::string address_;
        unsigned short port_;
    };

} // namespace spaceops
