#pragma once

#include <crowdlist/consensus/node.hpp>
#include <crowdlist/node/derived.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdlist::node {

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct HostPort
{
    std::string host;
    std::uint16_t port = 0;
};

/// "host:port"; throws ConfigError.
HostPort parse_host_port(const std::string& text);

struct PeerAddress
{
    std::string node_id;
    std::string address; // host:port
};

struct NodeConfig
{
    std::string node_id;
    consensus::Role role = consensus::Role::Validator;
    std::string listen_address = "127.0.0.1:8080";
    std::vector<std::string> validators;
    std::vector<PeerAddress> peer_addresses;
    std::filesystem::path data_dir;
    consensus::NodeOptions consensus;
    TruthParams truth;
};

/// Throws ConfigError on any missing, ill-typed or inconsistent field.
NodeConfig parse_node_config(const nlohmann::json& j);
NodeConfig load_node_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const NodeConfig& c);

} // namespace crowdlist::node
