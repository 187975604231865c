#include <crowdlist/node/api.hpp>

#include <crowdlist/ledger/state_machine.hpp>
#include <crowdlist/ledger/url.hpp>
#include <crowdlist/node/views.hpp>

#include <charconv>
#include <vector>

namespace crowdlist::node {

using nlohmann::json;

namespace {

constexpr std::string_view prefix = "/api/v1";
constexpr std::uint64_t max_blocks_per_page = 1000;

ApiResponse error(int status, std::string_view code)
{
    return {status, json{{"error", std::string(code)}}};
}

ApiResponse bad_request()
{
    return error(400, "BadRequest");
}

ApiResponse not_found()
{
    return error(404, "NotFound");
}

ApiResponse not_ready()
{
    return error(503, "NodeNotReady");
}

std::vector<std::string> segments(std::string_view path)
{
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < path.size())
    {
        auto next = path.find('/', pos);
        if (next == std::string_view::npos)
            next = path.size();
        if (next > pos)
            out.emplace_back(path.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::optional<std::uint64_t> parse_u64(const std::string& s)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

std::optional<json> parse_body(const std::string& body)
{
    try
    {
        auto j = json::parse(body);
        if (!j.is_object())
            return std::nullopt;
        return j;
    }
    catch (const json::exception&)
    {
        return std::nullopt;
    }
}

std::optional<std::string> string_field(const json& j, const char* name)
{
    auto it = j.find(name);
    if (it == j.end() || !it->is_string())
        return std::nullopt;
    return it->get<std::string>();
}

ApiResponse write(NodeFacade& node, const ApiRequest& req, const std::string& sender, ledger::Payload payload)
{
    std::optional<std::uint64_t> wait_ms;
    if (auto it = req.query.find("wait"); it != req.query.end())
    {
        wait_ms = parse_u64(it->second);
        if (!wait_ms)
            return bad_request();
    }

    auto result = node.submit(sender, std::move(payload));
    if (!result)
        return not_ready();
    if (result->rejection)
        return {400, json{{"error", std::string(ledger::to_string(*result->rejection))}, {"tx_id", result->tx_id}}};

    json body{{"accepted", true}, {"tx_id", result->tx_id}, {"nonce", result->tx.nonce}};
    if (const auto* s = std::get_if<ledger::SubmitUrl>(&result->tx.payload))
        body["url_id"] = ledger::url_id_for(s->url);
    if (wait_ms)
        body["committed"] = node.await_commit(result->tx_id, std::chrono::milliseconds(*wait_ms));
    return {200, std::move(body)};
}

ApiResponse post(NodeFacade& node, const ApiRequest& req, const std::vector<std::string>& seg)
{
    auto body = parse_body(req.body);
    if (!body)
        return bad_request();

    if (seg.size() == 1 && seg[0] == "users")
    {
        auto id = string_field(*body, "verifier_id");
        auto name = string_field(*body, "display_name");
        if (!id || !name)
            return bad_request();
        return write(node, req, *id, ledger::RegisterUser{*name});
    }
    if (seg.size() == 1 && seg[0] == "urls")
    {
        auto sender = string_field(*body, "sender");
        auto url = string_field(*body, "url");
        auto evidence = string_field(*body, "evidence_email");
        if (!sender || !url || !evidence)
            return bad_request();
        return write(node, req, *sender, ledger::SubmitUrl{*url, *evidence});
    }
    if (seg.size() == 3 && seg[0] == "urls" && seg[2] == "votes")
    {
        auto sender = string_field(*body, "sender");
        auto verdict_text = string_field(*body, "verdict");
        if (!sender || !verdict_text)
            return bad_request();
        auto verdict = ledger::parse_verdict(*verdict_text);
        if (!verdict)
            return bad_request();
        return write(node, req, *sender, ledger::CastVote{seg[1], *verdict});
    }
    return not_found();
}

ApiResponse get(NodeFacade& node, const ApiRequest& req, const std::vector<std::string>& seg)
{
    if (seg.size() == 1 && seg[0] == "status")
        return {200, node.status()};

    auto snap = node.snapshot();
    if (!snap)
        return not_ready();
    const auto& state = snap->state;
    const auto threshold = node.vote_threshold();

    auto found = [](std::optional<json> j) { return j ? ApiResponse{200, std::move(*j)} : not_found(); };

    if (seg.size() == 2 && seg[0] == "urls")
        return found(url_view(state, seg[1], threshold));
    if (seg.size() == 3 && seg[0] == "urls" && seg[2] == "timeline")
        return found(timeline_view(state, seg[1], threshold));
    if (seg.size() == 1 && seg[0] == "lookup")
    {
        auto it = req.query.find("url");
        if (it == req.query.end())
            return bad_request();
        auto normalized = ledger::normalize_url(it->second);
        if (!normalized)
            return error(400, ledger::to_string(ledger::Rejection::MalformedUrl));
        return found(url_view(state, ledger::url_id_for(*normalized), threshold));
    }
    if (seg.size() == 1 && seg[0] == "graph")
        return {200, graph_view(state)};
    if (seg.size() == 1 && seg[0] == "blacklist")
        return {200, blacklist_view(state)};
    if (seg.size() == 2 && seg[0] == "verifiers")
        return found(verifier_view(state, seg[1]));
    if (seg.size() == 2 && seg[0] == "chain" && seg[1] == "blocks")
    {
        std::uint64_t from = 0;
        std::uint64_t to = snap->height();
        if (auto it = req.query.find("from"); it != req.query.end())
        {
            auto v = parse_u64(it->second);
            if (!v)
                return bad_request();
            from = *v;
        }
        if (auto it = req.query.find("to"); it != req.query.end())
        {
            auto v = parse_u64(it->second);
            if (!v)
                return bad_request();
            to = *v;
        }
        if (to >= from && to - from >= max_blocks_per_page)
            to = from + max_blocks_per_page - 1;
        return {200, blocks_view(snap->chain, from, to)};
    }
    return not_found();
}

} // namespace

ApiResponse handle_api(NodeFacade& node, const ApiRequest& req)
{
    std::string_view path = req.path;
    if (path.substr(0, prefix.size()) != prefix || (path.size() > prefix.size() && path[prefix.size()] != '/'))
        return not_found();
    const auto seg = segments(path.substr(prefix.size()));
    if (seg.empty())
        return not_found();

    try
    {
        if (req.method == "GET")
            return get(node, req, seg);
        if (req.method == "POST")
            return post(node, req, seg);
        return error(405, "MethodNotAllowed");
    }
    catch (const std::invalid_argument&)
    {
        return bad_request();
    }
}

} // namespace crowdlist::node
