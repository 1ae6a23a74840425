#pragma once

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <deque>
#include <filesystem>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace spaceops::testing
{

    /// Chat-completions stand-in. Replies are consumed in order; the last one repeats.
    class StubServer
    {
    public:
        struct Reply
        {
            std::string content;
            int delay_ms{0};
            int status{200};
        };

        explicit StubServer(std::vector<Reply> replies) : replies_(replies.begin(), replies.end())
        {
            server_.Post("/v1/chat/completions", [this](const httplib::Request &req, httplib::Response &res) {
                Reply r;
                {
                    std::lock_guard lock(mu_);
                    bodies_.push_back(req.body);
                    headers_.push_back(req.get_header_value("Authorization"));
                    r = replies_.front();
                    if (replies_.size() > 1)
                    {
                        replies_.pop_front();
                    }
                }
                if (r.delay_ms > 0)
                {
                    std::this_thread::sleep_for(std::chrono::milliseconds(r.delay_ms));
                }
                res.status = r.status;
                const nlohmann::json body{
                    {"choices", nlohmann::json::array({{{"message", {{"role", "assistant"}, {"content", r.content}}}}})}};
                res.set_content(body.dump(), "application/json");
            });
            port_ = server_.bind_to_any_port("127.0.0.1");
            thread_ = std::thread([this] { server_.listen_after_bind(); });
            server_.wait_until_ready();
        }

        ~StubServer()
        {
            server_.stop();
            thread_.join();
        }

        std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
        int port() const { return port_; }

        std::size_t request_count() const
        {
            std::lock_guard lock(mu_);
            return bodies_.size();
        }
        std::vector<std::string> bodies() const
        {
            std::lock_guard lock(mu_);
            return bodies_;
        }
        std::vector<std::string> auth_headers() const
        {
            std::lock_guard lock(mu_);
            return headers_;
        }

    private:
        httplib::Server server_;
        std::thread thread_;
        int port_{0};
        mutable std::mutex mu_;
        std::deque<Reply> replies_;
        std::vector<std::string> bodies_;
        std::vector<std::string> headers_;
    };

    /// Fresh directory removed on destruction.
    class TempDir
    {
    public:
        TempDir()
        {
            std::random_device rd;
            path_ = std::filesystem::temp_directory_path() /
                    ("spaceops_test_" + std::to_string(rd()) + "_" + std::to_string(rd()));
            std::filesystem::create_directories(path_);
        }
        ~TempDir()
        {
            std::error_code ec;
            std::filesystem::remove_all(path_, ec);
        }
        const std::filesystem::path &path() const { return path_; }

    private:
        std::filesystem::path path_;
    };

    /// A port nothing listens on (bound then released).
    inline int closed_port()
    {
        const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
        addr.sin_port = 0;
        ::bind(fd, reinterpret_cast<sockaddr *>(&addr), sizeof addr);
        socklen_t len = sizeof addr;
        ::getsockname(fd, reinterpret_cast<sockaddr *>(&addr), &len);
        ::close(fd);
        return ntohs(addr.sin_port);
    }

} // namespace spaceops::testing
