#pragma once

#include <crowdlist/node/api.hpp>
#include <crowdlist/node/config.hpp>

#include <json.hpp>

#include <chrono>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>

namespace httplib {
class Client;
class Server;
} // namespace httplib

namespace crowdlist::node {

class ConnectionError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct HttpResponse
{
    int status = 0;
    nlohmann::json body; // null when the body is not JSON
};

/// Blocking JSON client for one "host:port" (an http:// prefix is accepted).
class HttpClient
{
public:
    explicit HttpClient(const std::string& address, std::chrono::milliseconds timeout = std::chrono::seconds(5));
    ~HttpClient();
    HttpClient(HttpClient&&) noexcept;
    HttpClient& operator=(HttpClient&&) noexcept;

    /// Throw ConnectionError when no HTTP response arrives.
    HttpResponse get(const std::string& path_and_query);
    HttpResponse post(const std::string& path_and_query, const nlohmann::json& body);

private:
    std::string address_;
    std::unique_ptr<httplib::Client> client_;
};

/// Percent-encodes a query parameter value.
std::string url_encode(std::string_view s);

/// Serves handle_api for one facade; paths under /internal/ go to `internal`.
class ApiServer
{
public:
    using InternalHandler = std::function<ApiResponse(const ApiRequest&)>;

    ApiServer(NodeFacade& facade, InternalHandler internal = {});
    ~ApiServer();

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Throws ConfigError when the address cannot be bound.
    std::uint16_t start(const HostPort& listen);
    void stop();

private:
    NodeFacade& facade_;
    InternalHandler internal_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
};

} // namespace crowdlist::node
