#include "spaceops/store.hpp"

#include "spaceops/errors.hpp"
#include "spaceops/rng.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>

namespace fs = std::filesystem;

namespace spaceops
{

    namespace
    {

        constexpr const char *kManifest = "manifest.json";
        constexpr const char *kSessionPrefix = "session_";

        std::string utc_now()
        {
            const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
            return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
        }

        std::string next_session_id(const fs::path &root)
        {
            long long next = 0;
            for (const auto &entry : fs::directory_iterator(root))
            {
                const std::string name = entry.path().filename().string();
                if (!entry.is_directory() || !name.starts_with(kSessionPrefix))
                {
                    continue;
                }
                try
                {
                    std::size_t used = 0;
                    const std::string digits = name.substr(std::char_traits<char>::length(kSessionPrefix));
                    const long long n = std::stoll(digits, &used);
                    if (used == digits.size())
                    {
                        next = std::max(next, n + 1);
                    }
                }
                catch (const std::exception &)
                {
                }
            }
            return fmt::format("{}{:06d}", kSessionPrefix, next);
        }

        bool valid_id(std::string_view id)
        {
            return !id.empty() && id != "." && id != ".." &&
                   std::all_of(id.begin(), id.end(), [](char c) {
                       return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
                   });
        }

    } // namespace

    std::string_view session_source_name(SessionSource s)
    {
        switch (s)
        {
        case SessionSource::Teleop:
            return "teleop";
        case SessionSource::Scripted:
            return "scripted";
        case SessionSource::Agent:
            return "agent";
        }
        return "scripted";
    }

    SessionSource parse_session_source(std::string_view name)
    {
        if (name == "teleop")
        {
            return SessionSource::Teleop;
        }
        if (name == "scripted")
        {
            return SessionSource::Scripted;
        }
        if (name == "agent")
        {
            return SessionSource::Agent;
        }
        throw InvalidArgument(fmt::format("unknown session source '{}'", name));
    }

    nlohmann::json EpisodeSession::to_json() const
    {
        nlohmann::json frames_json = nlohmann::json::array();
        for (const auto &f : frames)
        {
            nlohmann::json fj{{"index", f.index}, {"image", f.image}, {"state", f.state}, {"action", f.action}};
            if (f.depth)
            {
                fj["depth"] = *f.depth;
            }
            frames_json.push_back(std::move(fj));
        }
        return {{"schema_version", kSchemaVersion},
                {"id", id},
                {"instruction", instruction},
                {"source", session_source_name(source)},
                {"created_at", created_at},
                {"state_schema", state_schema},
                {"action_schema", action_schema},
                {"complete", complete},
                {"frames", std::move(frames_json)}};
    }

    EpisodeSession EpisodeSession::from_json(const nlohmann::json &j)
    {
        EpisodeSession s;
        s.id = j.at("id").get<std::string>();
        s.instruction = j.at("instruction").get<std::string>();
        s.source = parse_session_source(j.at("source").get<std::string>());
        s.created_at = j.value("created_at", std::string{});
        s.state_schema = j.at("state_schema").get<std::vector<std::string>>();
        s.action_schema = j.at("action_schema").get<std::vector<std::string>>();
        s.complete = j.at("complete").get<bool>();
        for (const auto &fj : j.at("frames"))
        {
            FrameRecord f;
            f.index = fj.at("index").get<std::int64_t>();
            f.image = fj.at("image").get<std::string>();
            if (fj.contains("depth"))
            {
                f.depth = fj["depth"].get<std::string>();
            }
            f.state = fj.at("state").get<std::vector<double>>();
            f.action = fj.at("action").get<std::vector<double>>();
            s.frames.push_back(std::move(f));
        }
        return s;
    }

    SessionWriter SessionWriter::open(const fs::path &root, std::string instruction, SessionSource source,
                                      SessionOptions options)
    {
        std::error_code ec;
        fs::create_directories(root, ec);
        if (ec)
        {
            throw IoError(fmt::format("cannot create '{}': {}", root.string(), ec.message()));
        }
        const std::string id = options.id ? *options.id : next_session_id(root);
        if (!valid_id(id))
        {
            throw InvalidArgument(fmt::format("invalid session id '{}'", id));
        }
        SessionWriter w;
        w.dir_ = root / id;
        if (!fs::create_directory(w.dir_, ec))
        {
            if (!ec)
            {
                throw DuplicateSession(fmt::format("session '{}' already exists under '{}'", id, root.string()));
            }
            throw IoError(fmt::format("cannot create '{}': {}", w.dir_.string(), ec.message()));
        }
        fs::create_directory(w.dir_ / "frames", ec);
        if (ec)
        {
            throw IoError(fmt::format("cannot create frames directory: {}", ec.message()));
        }
        w.session_.id = id;
        w.session_.instruction = std::move(instruction);
        w.session_.source = source;
        w.session_.created_at = options.created_at ? *options.created_at : utc_now();
        w.session_.state_schema = std::move(options.state_schema);
        w.session_.action_schema = std::move(options.action_schema);
        w.open_ = true;
        w.flush_manifest();
        return w;
    }

    void SessionWriter::require_open() const
    {
        if (!open_)
        {
            throw ClosedWriter(fmt::format("session '{}' is closed", session_.id));
        }
    }

    void SessionWriter::write_atomic(const fs::path &final_path, std::string_view bytes)
    {
        fs::path tmp = final_path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out)
            {
                throw IoError(fmt::format("cannot write '{}'", tmp.string()));
            }
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
            out.flush();
            if (!out)
            {
                throw IoError(fmt::format("short write to '{}'", tmp.string()));
            }
        }
        if (fault_hook_)
        {
            fault_hook_(final_path);
        }
        std::error_code ec;
        fs::rename(tmp, final_path, ec);
        if (ec)
        {
            throw IoError(fmt::format("cannot rename '{}': {}", tmp.string(), ec.message()));
        }
    }

    void SessionWriter::flush_manifest()
    {
        write_atomic(dir_ / kManifest, session_.to_json().dump(2));
    }

    std::int64_t SessionWriter::append_frame(const std::vector<std::uint8_t> &image_png,
                                             const std::optional<std::vector<std::uint8_t>> &depth_png,
                                             const std::vector<double> &state, const std::vector<double> &action)
    {
        require_open();
        // an empty schema is adopted from the first frame
        auto check = [this](std::vector<std::string> &slot, std::size_t n, std::string_view what) {
            if (slot.empty() && session_.frames.empty())
            {
                for (std::size_t i = 0; i < n; ++i)
                {
                    slot.push_back(fmt::format("{}{}", what, i));
                }
                return;
            }
            if (slot.size() != n)
            {
                throw SchemaMismatch(fmt::format("{} has {} values, schema expects {}", what, n, slot.size()));
            }
        };
        check(session_.state_schema, state.size(), "state");
        check(session_.action_schema, action.size(), "action");

        const std::int64_t index = static_cast<std::int64_t>(session_.frames.size());
        FrameRecord rec;
        rec.index = index;
        rec.image = fmt::format("frames/{:06d}.png", index);
        rec.state = state;
        rec.action = action;
        const std::string_view image_bytes(reinterpret_cast<const char *>(image_png.data()), image_png.size());
        write_atomic(dir_ / rec.image, image_bytes);
        if (depth_png)
        {
            rec.depth = fmt::format("frames/{:06d}_depth.png", index);
            write_atomic(dir_ / *rec.depth,
                         std::string_view(reinterpret_cast<const char *>(depth_png->data()), depth_png->size()));
        }

        session_.frames.push_back(rec);
        try
        {
            flush_manifest();
        }
        catch (...)
        {
            session_.frames.pop_back();
            throw;
        }
        return index;
    }

    void SessionWriter::set_instruction(std::string instruction)
    {
        require_open();
        session_.instruction = std::move(instruction);
        flush_manifest();
    }

    void SessionWriter::close()
    {
        require_open();
        session_.complete = true;
        flush_manifest();
        open_ = false;
    }

    std::vector<std::uint8_t> read_file_bytes(const fs::path &path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
        {
            throw IoError(fmt::format("cannot read '{}'", path.string()));
        }
        return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    }

    EpisodeSession load_session(const fs::path &session_dir)
    {
        const fs::path manifest = session_dir / kManifest;
        std::ifstream in(manifest);
        if (!in)
        {
            throw CorruptSession(fmt::format("missing manifest in '{}'", session_dir.string()));
        }
        const auto doc = nlohmann::json::parse(in, nullptr, false);
        if (doc.is_discarded() || !doc.is_object())
        {
            throw CorruptSession(fmt::format("unreadable manifest in '{}'", session_dir.string()));
        }
        EpisodeSession s;
        try
        {
            s = EpisodeSession::from_json(doc);
        }
        catch (const nlohmann::json::exception &e)
        {
            throw CorruptSession(fmt::format("malformed manifest in '{}': {}", session_dir.string(), e.what()));
        }
        catch (const InvalidArgument &e)
        {
            throw CorruptSession(e.what());
        }
        for (std::size_t i = 0; i < s.frames.size(); ++i)
        {
            const FrameRecord &f = s.frames[i];
            if (f.index != static_cast<std::int64_t>(i))
            {
                throw CorruptSession(fmt::format("frame {} has index {}", i, f.index));
            }
            if (f.state.size() != s.state_schema.size() || f.action.size() != s.action_schema.size())
            {
                throw CorruptSession(fmt::format("frame {} does not match the session schema", i));
            }
            if (!fs::is_regular_file(session_dir / f.image) || (f.depth && !fs::is_regular_file(session_dir / *f.depth)))
            {
                throw CorruptSession(fmt::format("frame {} references a missing file", i));
            }
        }
        return s;
    }

    std::vector<ExportItem> shuffled_export(const fs::path &session_dir, std::uint64_t seed)
    {
        const EpisodeSession s = load_session(session_dir);
        if (!s.complete)
        {
            throw CorruptSession(fmt::format("session '{}' was never closed", s.id));
        }
        std::vector<ExportItem> items;
        items.reserve(s.frames.size());
        for (std::size_t k : seeded_permutation(s.frames.size(), seed))
        {
            const FrameRecord &f = s.frames[k];
            ExportItem item;
            item.index = f.index;
            item.image = read_file_bytes(session_dir / f.image);
            if (f.depth)
            {
                item.depth = read_file_bytes(session_dir / *f.depth);
            }
            item.state = f.state;
            item.action = f.action;
            item.instruction = s.instruction;
            items.push_back(std::move(item));
        }
        return items;
    }

    nlohmann::json SessionSplit::to_json() const
    {
        return {{"seed", seed}, {"train", train}, {"validation", validation}};
    }

    SessionSplit split_sessions(std::vector<std::string> session_ids, std::uint64_t seed, double train_fraction)
    {
        if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        {
            throw InvalidArgument("train_fraction must be in (0, 1]");
        }
        std::sort(session_ids.begin(), session_ids.end());
        const std::size_t n = session_ids.size();
        std::size_t n_val = static_cast<std::size_t>(std::llround((1.0 - train_fraction) * static_cast<double>(n)));
        if (n >= 2 && train_fraction < 1.0)
        {
            n_val = std::max<std::size_t>(n_val, 1);
        }
        n_val = std::min(n_val, n);
        SessionSplit out;
        out.seed = seed;
        const auto order = seeded_permutation(n, seed);
        for (std::size_t i = 0; i < n; ++i)
        {
            (i < n_val ? out.validation : out.train).push_back(session_ids[order[i]]);
        }
        std::sort(out.train.begin(), out.train.end());
        std::sort(out.validation.begin(), out.validation.end());
        return out;
    }

    std::vector<std::string> list_sessions(const fs::path &root)
    {
        std::vector<std::string> ids;
        for (const auto &entry : fs::directory_iterator(root))
        {
            if (!entry.is_directory() || !fs::is_regular_file(entry.path() / kManifest))
            {
                continue;
            }
            try
            {
                if (load_session(entry.path()).complete)
                {
                    ids.push_back(entry.path().filename().string());
                }
            }
            catch (const CorruptSession &)
            {
            }
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    void write_split_file(const fs::path &path, const SessionSplit &split)
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out)
        {
            throw IoError(fmt::format("cannot write '{}'", path.string()));
        }
        out << split.to_json().dump(2) << '\n';
    }

    const std::vector<std::string> &vessel_flat_schema()
    {
        static const std::vector<std::string> schema{"px", "py", "pz", "vx", "vy", "vz", "fuel"};
        return schema;
    }

    std::vector<double> vessel_to_flat(const VesselState &v)
    {
        const auto &p = v.state.position;
        const auto &u = v.state.velocity;
        return {p.x(), p.y(), p.z(), u.x(), u.y(), u.z(), v.fuel};
    }

    const std::vector<std::string> &discrete_action_flat_schema()
    {
        static const std::vector<std::string> schema{"forward", "right", "up", "duration"};
        return schema;
    }

    std::vector<double> discrete_action_to_flat(const DiscreteAction &a)
    {
        return {static_cast<double>(to_int(a.forward)), static_cast<double>(to_int(a.right)),
                static_cast<double>(to_int(a.up)), a.duration};
    }

} // namespace spaceops
