#pragma once

#include <memory>
#include <string>

#include "tabtax/session.hpp"

namespace tabtax {

struct ServiceOptions {
    SessionLimits limits;
    std::size_t max_upload_bytes = std::size_t{512} << 20;
    bool cors = true;  // the browser UI may be served from another origin
};

inline constexpr std::string_view api_version = "1";

/// JSON-over-HTTP front end for SessionRegistry. Every response carries
/// X-API-Version; errors are {"error": message} with 400/404/409/422/500.
class HttpService {
public:
    explicit HttpService(ServiceOptions options = {});
    ~HttpService();

    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    SessionRegistry& registry();

    /// Binds and serves on a background thread. Port 0 picks a free port;
    /// the bound port is returned.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace tabtax
