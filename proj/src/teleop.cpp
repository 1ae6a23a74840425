#include "spaceops/teleop.hpp"

#include "spaceops/errors.hpp"

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <fmt/format.h>

#include <sys/socket.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace spaceops
{

    namespace
    {

        namespace asio = boost::asio;
        namespace beast = boost::beast;
        namespace http = beast::http;
        namespace websocket = beast::websocket;
        using tcp = asio::ip::tcp;

        std::optional<Vec3> read_vec3(const nlohmann::json &msg, const char *key)
        {
            if (!msg.contains(key))
            {
                return Vec3::Zero();
            }
            const auto &v = msg[key];
            if (!v.is_array() || v.size() != 3)
            {
                return std::nullopt;
            }
            Vec3 out;
            for (int i = 0; i < 3; ++i)
            {
                if (!v[i].is_number())
                {
                    return std::nullopt;
                }
                out[i] = v[i].get<double>();
                if (!std::isfinite(out[i]))
                {
                    return std::nullopt;
                }
            }
            return out;
        }

    } // namespace

    TeleopSession::TeleopSession(TeleopConfig config, std::optional<RecordingOptions> recording)
        : config_(std::move(config)), state_(config_.initial)
    {
        config_.scene.validate();
        if (recording)
        {
            SessionOptions opts;
            opts.id = recording->session_id;
            opts.state_schema = EffectorState::flat_schema();
            opts.action_schema = InspectAction::flat_schema();
            instruction_ = recording->instruction;
            writer_.emplace(SessionWriter::open(recording->root, recording->instruction, SessionSource::Teleop, opts));
        }
    }

    nlohmann::json TeleopSession::error(std::string detail)
    {
        return {{"type", "error"}, {"detail", std::move(detail)}};
    }

    nlohmann::json TeleopSession::frame_message(const InspectFrame &frame) const
    {
        nlohmann::json msg{{"type", "frame"},
                           {"png_base64", base64_encode(frame.png())},
                           {"pose", pose_to_json(frame.pose)},
                           {"t", frame.timestep}};
        if (config_.stream_depth)
        {
            msg["depth_png_base64"] = base64_encode(frame.depth_png());
        }
        return msg;
    }

    nlohmann::json TeleopSession::apply(const InspectAction &action)
    {
        const std::int64_t t = t_ + 1;
        InspectStepResult r = apply_inspect_action(config_.scene, state_, action, config_.limits, t, config_.camera);
        InspectFrame frame = r.frame ? std::move(*r.frame) : render_rgbd(config_.scene, r.state, config_.camera);
        frame.timestep = t;
        if (writer_)
        {
            writer_->append_frame(frame.png(), frame.depth_png(), r.state.to_flat(), action.to_flat());
        }
        state_ = r.state;
        t_ = t;
        ++frames_;
        if (action.snap)
        {
            snapshots_.push_back(frame);
        }
        return frame_message(frame);
    }

    std::vector<nlohmann::json> TeleopSession::handle(std::string_view text)
    {
        const auto msg = nlohmann::json::parse(text, nullptr, false);
        if (msg.is_discarded())
        {
            return {error("message is not valid JSON")};
        }
        return handle(msg);
    }

    std::vector<nlohmann::json> TeleopSession::handle(const nlohmann::json &msg)
    {
        if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
        {
            return {error("message must be an object with a string 'type'")};
        }
        const std::string type = msg["type"].get<std::string>();
        std::lock_guard lock(mu_);
        if (finished_)
        {
            return {error("session is finished")};
        }
        try
        {
            if (type == "jog")
            {
                const auto dx = read_vec3(msg, "dx");
                const auto dtheta = read_vec3(msg, "dtheta");
                if (!dx || !dtheta)
                {
                    return {error("jog needs dx and dtheta as arrays of 3 finite numbers")};
                }
                const InspectAction action{*dx, *dtheta, false};
                if (!within_caps(action, config_.limits))
                {
                    return {error(fmt::format("jog exceeds per-step caps (|dx| <= {} m, |dtheta| <= {} rad)",
                                              config_.limits.dx_max, config_.limits.dtheta_max))};
                }
                return {apply(action)};
            }
            if (type == "snapshot")
            {
                return {apply(InspectAction{Vec3::Zero(), Vec3::Zero(), true})};
            }
            if (type == "instruction")
            {
                if (!msg.contains("text") || !msg["text"].is_string())
                {
                    return {error("instruction needs a string 'text'")};
                }
                instruction_ = msg["text"].get<std::string>();
                if (writer_)
                {
                    writer_->set_instruction(instruction_);
                }
                return {};
            }
            if (type == "finish")
            {
                if (writer_)
                {
                    writer_->close();
                }
                finished_ = true;
                finished_cv_.notify_all();
                return {{{"type", "finished"}, {"frames", frames_}}};
            }
        }
        catch (const Error &e)
        {
            return {error(e.what())};
        }
        return {error(fmt::format("unknown message type '{}'", type))};
    }

    nlohmann::json TeleopSession::current_frame() const
    {
        std::lock_guard lock(mu_);
        InspectFrame frame = render_rgbd(config_.scene, state_, config_.camera);
        frame.timestep = t_;
        return frame_message(frame);
    }

    nlohmann::json TeleopSession::state_json() const
    {
        std::lock_guard lock(mu_);
        nlohmann::json j{{"pose", pose_to_json(state_)},
                         {"t", t_},
                         {"frames", frames_},
                         {"snapshots", static_cast<std::int64_t>(snapshots_.size())},
                         {"instruction", instruction_},
                         {"finished", finished_},
                         {"controller", claimed_},
                         {"limits", {{"dx_max", config_.limits.dx_max}, {"dtheta_max", config_.limits.dtheta_max}}}};
        j["session"] = writer_ ? nlohmann::json(writer_->session().id) : nlohmann::json(nullptr);
        return j;
    }

    bool TeleopSession::try_claim()
    {
        std::lock_guard lock(mu_);
        if (claimed_)
        {
            return false;
        }
        claimed_ = true;
        return true;
    }

    void TeleopSession::release()
    {
        std::lock_guard lock(mu_);
        claimed_ = false;
    }

    bool TeleopSession::finished() const
    {
        std::lock_guard lock(mu_);
        return finished_;
    }

    bool TeleopSession::wait_finished(std::chrono::milliseconds timeout) const
    {
        std::unique_lock lock(mu_);
        return finished_cv_.wait_for(lock, timeout, [this] { return finished_; });
    }

    EffectorState TeleopSession::state() const
    {
        std::lock_guard lock(mu_);
        return state_;
    }

    std::int64_t TeleopSession::timestep() const
    {
        std::lock_guard lock(mu_);
        return t_;
    }

    std::int64_t TeleopSession::frame_count() const
    {
        std::lock_guard lock(mu_);
        return frames_;
    }

    std::int64_t TeleopSession::snapshot_count() const
    {
        std::lock_guard lock(mu_);
        return static_cast<std::int64_t>(snapshots_.size());
    }

    std::vector<InspectFrame> TeleopSession::snapshots() const
    {
        std::lock_guard lock(mu_);
        return snapshots_;
    }

    std::optional<std::filesystem::path> TeleopSession::session_dir() const
    {
        std::lock_guard lock(mu_);
        if (!writer_)
        {
            return std::nullopt;
        }
        return writer_->directory();
    }

    struct TeleopServer::Impl
    {
        asio::io_context ioc;
        tcp::acceptor acceptor{ioc};
        std::thread io_thread;
        std::atomic<bool> stopping{false};
        std::mutex mu;
        std::vector<std::thread> workers;
        std::set<int> live_fds;

        void do_accept(TeleopSession &session)
        {
            acceptor.async_accept([this, &session](beast::error_code ec, tcp::socket socket) {
                if (stopping)
                {
                    return;
                }
                if (!ec)
                {
                    std::lock_guard lock(mu);
                    auto sock = std::make_shared<tcp::socket>(std::move(socket));
                    live_fds.insert(sock->native_handle());
                    workers.emplace_back([this, &session, sock] {
                        serve_connection(session, *sock);
                        std::lock_guard inner(mu);
                        live_fds.erase(sock->native_handle());
                    });
                }
                do_accept(session);
            });
        }

        static void respond(tcp::socket &sock, const http::request<http::string_body> &req, http::status status,
                            const std::string &body)
        {
            http::response<http::string_body> res{status, req.version()};
            res.set(http::field::content_type, "application/json");
            res.set(http::field::access_control_allow_origin, "*");
            res.keep_alive(req.keep_alive());
            res.body() = body;
            res.prepare_payload();
            beast::error_code ec;
            http::write(sock, res, ec);
        }

        static void run_stream(TeleopSession &session, tcp::socket &sock, const http::request<http::string_body> &req)
        {
            websocket::stream<tcp::socket &> ws(sock);
            beast::error_code ec;
            ws.accept(req, ec);
            if (ec)
            {
                return;
            }
            ws.text(true);
            ws.write(asio::buffer(session.current_frame().dump()), ec);
            while (!ec)
            {
                beast::flat_buffer buf;
                ws.read(buf, ec);
                if (ec)
                {
                    break;
                }
                const std::string text = beast::buffers_to_string(buf.data());
                for (const auto &reply : session.handle(std::string_view(text)))
                {
                    ws.write(asio::buffer(reply.dump()), ec);
                    if (ec)
                    {
                        break;
                    }
                }
                if (session.finished())
                {
                    ws.close(websocket::close_code::normal, ec);
                    break;
                }
            }
        }

        void serve_connection(TeleopSession &session, tcp::socket &sock)
        {
            beast::flat_buffer buf;
            while (!stopping)
            {
                http::request<http::string_body> req;
                beast::error_code ec;
                http::read(sock, buf, req, ec);
                if (ec)
                {
                    return;
                }
                const std::string target(req.target());
                if (websocket::is_upgrade(req))
                {
                    if (target != "/stream")
                    {
                        respond(sock, req, http::status::not_found, R"({"error":"not found"})");
                        return;
                    }
                    if (!session.try_claim())
                    {
                        respond(sock, req, http::status::conflict, R"({"error":"a controller is already connected"})");
                        return;
                    }
                    run_stream(session, sock, req);
                    session.release();
                    return;
                }
                if (req.method() == http::verb::get && (target == "/state" || target.starts_with("/state?")))
                {
                    respond(sock, req, http::status::ok, session.state_json().dump());
                }
                else
                {
                    respond(sock, req, http::status::not_found, R"({"error":"not found"})");
                }
                if (!req.keep_alive())
                {
                    sock.shutdown(tcp::socket::shutdown_send, ec);
                    return;
                }
            }
        }
    };

    TeleopServer::TeleopServer(TeleopSession &session, std::string address, unsigned short port)
        : impl_(std::make_unique<Impl>()), session_(session), address_(std::move(address)), port_(port)
    {
    }

    TeleopServer::~TeleopServer()
    {
        stop();
    }

    void TeleopServer::start()
    {
        beast::error_code ec;
        const auto addr = asio::ip::make_address(address_, ec);
        if (ec)
        {
            throw InvalidArgument(fmt::format("bad bind address '{}': {}", address_, ec.message()));
        }
        const tcp::endpoint ep{addr, port_};
        auto &acc = impl_->acceptor;
        acc.open(ep.protocol(), ec);
        if (!ec)
        {
            acc.set_option(asio::socket_base::reuse_address(true), ec);
            acc.bind(ep, ec);
        }
        if (!ec)
        {
            acc.listen(asio::socket_base::max_listen_connections, ec);
        }
        if (ec)
        {
            throw IoError(fmt::format("cannot listen on {}:{}: {}", address_, port_, ec.message()));
        }
        port_ = acc.local_endpoint().port();
        impl_->do_accept(session_);
        impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
    }

    void TeleopServer::stop()
    {
        if (!impl_ || impl_->stopping.exchange(true))
        {
            return;
        }
        asio::post(impl_->ioc, [this] {
            beast::error_code ec;
            impl_->acceptor.close(ec);
        });
        if (impl_->io_thread.joinable())
        {
            impl_->io_thread.join();
        }
        std::vector<std::thread> workers;
        {
            std::lock_guard lock(impl_->mu);
            for (int fd : impl_->live_fds)
            {
                ::shutdown(fd, SHUT_RDWR);
            }
            workers.swap(impl_->workers);
        }
        for (auto &w : workers)
        {
            w.join();
        }
    }

} // namespace spaceops
