#include <crowdlist/node/config.hpp>

#include <charconv>
#include <fstream>
#include <set>

namespace crowdlist::node {

using nlohmann::json;

HostPort parse_host_port(const std::string& text)
{
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0)
        throw ConfigError("address '" + text + "' is not host:port");
    HostPort hp;
    hp.host = text.substr(0, colon);
    unsigned port = 0;
    const char* first = text.data() + colon + 1;
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, port);
    if (ec != std::errc{} || ptr != last || first == last || port == 0 || port > 65535)
        throw ConfigError("address '" + text + "' has an invalid port");
    hp.port = static_cast<std::uint16_t>(port);
    return hp;
}

NodeConfig parse_node_config(const json& j)
{
    if (!j.is_object())
        throw ConfigError("config must be a JSON object");
    NodeConfig c;
    try
    {
        c.node_id = j.at("node_id").get<std::string>();
        const auto role = j.at("role").get<std::string>();
        if (role == "Validator")
            c.role = consensus::Role::Validator;
        else if (role == "Normal")
            c.role = consensus::Role::Normal;
        else
            throw ConfigError("unknown role '" + role + "' (expected Validator or Normal)");
        c.listen_address = j.value("listen_address", c.listen_address);
        c.validators = j.at("validators").get<std::vector<std::string>>();
        for (const auto& p : j.value("peer_addresses", json::array()))
            c.peer_addresses.push_back({p.at("node_id").get<std::string>(), p.at("address").get<std::string>()});
        c.data_dir = j.at("data_dir").get<std::string>();

        const auto cons = j.value("consensus", json::object());
        c.consensus.base_timeout_ms = cons.value("base_timeout_ms", c.consensus.base_timeout_ms);
        c.consensus.max_block_txs = cons.value("max_block_txs", c.consensus.max_block_txs);

        const auto tr = j.value("truth", json::object());
        c.truth.pagerank.damping = tr.value("damping", c.truth.pagerank.damping);
        c.truth.pagerank.tol = tr.value("tol", c.truth.pagerank.tol);
        c.truth.pagerank.max_iter = tr.value("max_iter", c.truth.pagerank.max_iter);
        c.truth.vote_threshold = tr.value("vote_threshold", c.truth.vote_threshold);
    }
    catch (const json::exception& e)
    {
        throw ConfigError(e.what());
    }

    if (c.node_id.empty())
        throw ConfigError("node_id must not be empty");
    if (c.data_dir.empty())
        throw ConfigError("data_dir must not be empty");
    parse_host_port(c.listen_address);
    try
    {
        consensus::ValidatorSet vs(c.validators);
    }
    catch (const consensus::InvalidValidatorSet& e)
    {
        throw ConfigError(e.what());
    }
    const bool listed = std::find(c.validators.begin(), c.validators.end(), c.node_id) != c.validators.end();
    if (listed != (c.role == consensus::Role::Validator))
        throw ConfigError("node_id must appear in validators exactly when role is Validator");

    std::set<std::string> peers;
    for (const auto& p : c.peer_addresses)
    {
        if (p.node_id == c.node_id || !peers.insert(p.node_id).second)
            throw ConfigError("peer '" + p.node_id + "' is listed twice or is this node");
        parse_host_port(p.address);
    }
    if (c.consensus.base_timeout_ms == 0 || c.consensus.max_block_txs == 0)
        throw ConfigError("consensus timeouts and block size must be positive");
    if (!(c.truth.pagerank.damping > 0.0 && c.truth.pagerank.damping < 1.0) || !(c.truth.pagerank.tol > 0.0) ||
        c.truth.pagerank.max_iter == 0 || c.truth.vote_threshold == 0)
    {
        throw ConfigError("truth parameters out of range");
    }
    return c;
}

NodeConfig load_node_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config " + path.string());
    json j;
    try
    {
        in >> j;
    }
    catch (const json::exception& e)
    {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return parse_node_config(j);
}

json config_to_json(const NodeConfig& c)
{
    json peers = json::array();
    for (const auto& p : c.peer_addresses)
        peers.push_back({{"node_id", p.node_id}, {"address", p.address}});
    return json{{"node_id", c.node_id},
                {"role", std::string(consensus::to_string(c.role))},
                {"listen_address", c.listen_address},
                {"validators", c.validators},
                {"peer_addresses", std::move(peers)},
                {"data_dir", c.data_dir.string()},
                {"consensus", {{"base_timeout_ms", c.consensus.base_timeout_ms},
                               {"max_block_txs", c.consensus.max_block_txs}}},
                {"truth", {{"damping", c.truth.pagerank.damping},
                           {"tol", c.truth.pagerank.tol},
                           {"max_iter", c.truth.pagerank.max_iter},
                           {"vote_threshold", c.truth.vote_threshold}}}};
}

} // namespace crowdlist::node
