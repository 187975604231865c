#include <crowdlist/node/http.hpp>

#include <httplib.h>

namespace crowdlist::node {

using nlohmann::json;

namespace {

HttpResponse convert(const httplib::Result& res, const std::string& address)
{
    if (!res)
        throw ConnectionError("cannot reach " + address + ": " + httplib::to_string(res.error()));
    HttpResponse out;
    out.status = res->status;
    out.body = json::parse(res->body, nullptr, false);
    if (out.body.is_discarded())
        out.body = nullptr;
    return out;
}

} // namespace

HttpClient::HttpClient(const std::string& address, std::chrono::milliseconds timeout) : address_(address)
{
    std::string base = address;
    if (base.rfind("http://", 0) != 0)
        base = "http://" + base;
    client_ = std::make_unique<httplib::Client>(base);
    client_->set_connection_timeout(timeout);
    client_->set_read_timeout(timeout);
    client_->set_write_timeout(timeout);
}

HttpClient::~HttpClient() = default;
HttpClient::HttpClient(HttpClient&&) noexcept = default;
HttpClient& HttpClient::operator=(HttpClient&&) noexcept = default;

HttpResponse HttpClient::get(const std::string& path_and_query)
{
    return convert(client_->Get(path_and_query), address_);
}

HttpResponse HttpClient::post(const std::string& path_and_query, const json& body)
{
    return convert(client_->Post(path_and_query, body.dump(), "application/json"), address_);
}

std::string url_encode(std::string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s)
    {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~')
            out.push_back(static_cast<char>(c));
        else
        {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 15]);
        }
    }
    return out;
}

ApiServer::ApiServer(NodeFacade& facade, InternalHandler internal)
    : facade_(facade), internal_(std::move(internal)), server_(std::make_unique<httplib::Server>())
{
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        ApiRequest r;
        r.method = req.method;
        r.path = req.path;
        r.body = req.body;
        for (const auto& [k, v] : req.params)
            r.query.emplace(k, v);

        ApiResponse out;
        if (r.path.rfind("/internal/", 0) == 0)
            out = internal_ ? internal_(r) : ApiResponse{404, json{{"error", "NotFound"}}};
        else
            out = handle_api(facade_, r);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
    };
    server_->Get(".*", handler);
    server_->Post(".*", handler);
    server_->Put(".*", handler);
    server_->Delete(".*", handler);

    // httplib also sets SO_REUSEPORT, which lets a second node share a busy port
    server_->set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    });
}

ApiServer::~ApiServer()
{
    stop();
}

std::uint16_t ApiServer::start(const HostPort& listen)
{
    int port = listen.port;
    if (port == 0)
        port = server_->bind_to_any_port(listen.host);
    else if (!server_->bind_to_port(listen.host, port))
        port = -1;
    if (port <= 0)
        throw ConfigError("cannot listen on " + listen.host + ":" + std::to_string(listen.port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return static_cast<std::uint16_t>(port);
}

void ApiServer::stop()
{
    if (server_)
        server_->stop();
    if (thread_.joinable())
        thread_.join();
}

} // namespace crowdlist::node
