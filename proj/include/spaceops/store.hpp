#pragma once

#include "spaceops/actions.hpp"
#include "spaceops/dynamics.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spaceops
{

    enum class SessionSource
    {
        Teleop,
        Scripted,
        Agent,
    };

    std::string_view session_source_name(SessionSource s);
    SessionSource parse_session_source(std::string_view name);

    struct FrameRecord
    {
        std::int64_t index{0};
        std::string image;                ///< path relative to the session directory
        std::optional<std::string> depth; ///< path relative to the session directory
        std::vector<double> state;
        std::vector<double> action;

        bool operator==(const FrameRecord &) const = default;
    };

    struct EpisodeSession
    {
        static constexpr int kSchemaVersion = 1;

        std::string id;
        std::string instruction;
        SessionSource source{SessionSource::Scripted};
        std::string created_at;
        std::vector<std::string> state_schema;
        std::vector<std::string> action_schema;
        bool complete{false};
        std::vector<FrameRecord> frames;

        nlohmann::json to_json() const;
        static EpisodeSession from_json(const nlohmann::json &j);
    };

    struct SessionOptions
    {
        std::optional<std::string> id;         ///< next "session_NNNNNN" when absent
        std::optional<std::string> created_at; ///< current UTC time when absent
        std::vector<std::string> state_schema;
        std::vector<std::string> action_schema;
    };

    /// Single writer for one session directory. Every frame and manifest
    /// update goes through a temp file and a rename.
    class SessionWriter
    {
    public:
        /// Throws IoError or DuplicateSession.
        static SessionWriter open(const std::filesystem::path &root, std::string instruction, SessionSource source,
                                  SessionOptions options = {});

        /// Returns the new frame's index. Throws ClosedWriter, SchemaMismatch, IoError.
        std::int64_t append_frame(const std::vector<std::uint8_t> &image_png,
                                  const std::optional<std::vector<std::uint8_t>> &depth_png,
                                  const std::vector<double> &state, const std::vector<double> &action);

        void set_instruction(std::string instruction);
        /// Marks the session complete. Further writes throw ClosedWriter.
        void close();

        bool is_open() const { return open_; }
        const std::filesystem::path &directory() const { return dir_; }
        const EpisodeSession &session() const { return session_; }
        std::size_t frame_count() const { return session_.frames.size(); }

        /// Test hook run after a temp file is written and before its rename;
        /// the argument is the final path. Throwing from it simulates a crash.
        void set_fault_hook(std::function<void(const std::filesystem::path &)> hook) { fault_hook_ = std::move(hook); }

    private:
        SessionWriter() = default;
        void write_atomic(const std::filesystem::path &final_path, std::string_view bytes);
        void flush_manifest();
        void require_open() const;

        std::filesystem::path dir_;
        EpisodeSession session_;
        bool open_{false};
        std::function<void(const std::filesystem::path &)> fault_hook_;
    };

    /// Reads and checks a session directory. Throws CorruptSession.
    EpisodeSession load_session(const std::filesystem::path &session_dir);

    std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);

    struct ExportItem
    {
        std::int64_t index{0};
        std::vector<std::uint8_t> image;
        std::optional<std::vector<std::uint8_t>> depth;
        std::vector<double> state;
        std::vector<double> action;
        std::string instruction;
    };

    /// Every frame of a complete session exactly once, in an order fixed by
    /// `seed` alone. Throws CorruptSession.
    std::vector<ExportItem> shuffled_export(const std::filesystem::path &session_dir, std::uint64_t seed);

    struct SessionSplit
    {
        std::uint64_t seed{0};
        std::vector<std::string> train;
        std::vector<std::string> validation;

        nlohmann::json to_json() const;
    };

    /// Seeded session-level split; validation gets round((1 - train_fraction) * n)
    /// sessions, at least one when n >= 2.
    SessionSplit split_sessions(std::vector<std::string> session_ids, std::uint64_t seed,
                                double train_fraction = 0.9);

    /// Complete sessions under `root`, sorted by id.
    std::vector<std::string> list_sessions(const std::filesystem::path &root);

    void write_split_file(const std::filesystem::path &path, const SessionSplit &split);

    const std::vector<std::string> &vessel_flat_schema();
    std::vector<double> vessel_to_flat(const VesselState &v);
    const std::vector<std::string> &discrete_action_flat_schema();
    std::vector<double> discrete_action_to_flat(const DiscreteAction &a);

} // namespace spaceops
