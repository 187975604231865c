#pragma once

#include <crowdlist/node/node_core.hpp>
#include <crowdlist/node/replica.hpp>

#include <json.hpp>

#include <chrono>
#include <map>
#include <memory>
#include <string>

namespace crowdlist::node {

/// What the HTTP layer needs from a running node.
class NodeFacade
{
public:
    virtual ~NodeFacade() = default;

    /// nullptr while the node is not ready to serve.
    virtual std::shared_ptr<const Snapshot> snapshot() const = 0;
    virtual std::size_t vote_threshold() const = 0;
    /// nullopt while the node is not ready to accept writes.
    virtual std::optional<WriteResult> submit(const std::string& sender, ledger::Payload payload) = 0;
    /// True once the transaction is in this node's committed chain.
    virtual bool await_commit(const std::string& tx_id, std::chrono::milliseconds timeout) = 0;
    virtual nlohmann::json status() const = 0;
};

struct ApiRequest
{
    std::string method;
    std::string path; // already percent-decoded
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse
{
    int status = 200;
    nlohmann::json body;
};

/// Routes /api/v1/... requests. Errors are {"error": code}: ledger rejection
/// names and BadRequest with 400, NotFound with 404, NodeNotReady with 503.
/// Write endpoints accept ?wait=<ms> to block until the transaction commits.
ApiResponse handle_api(NodeFacade& node, const ApiRequest& request);

} // namespace crowdlist::node
