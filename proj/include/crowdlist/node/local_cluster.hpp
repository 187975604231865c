#pragma once

#include <crowdlist/consensus/simulator.hpp>
#include <crowdlist/node/api.hpp>
#include <crowdlist/node/node_core.hpp>

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace crowdlist::node {

struct LocalClusterOptions
{
    std::size_t n_validators = 7;
    std::size_t n_normal = 0;
    std::uint64_t seed = 1;
    consensus::DelayModel delay{5, 20};
    consensus::NodeOptions consensus;
    TruthParams truth;
    /// Each node logs to <data_root>/<node_id>/chain.jsonl when set.
    std::optional<std::filesystem::path> data_root;
    /// Logical time await_commit may advance before giving up.
    std::uint64_t await_horizon_ms = 120000;
};

/// Full nodes (consensus, replica, API facade) sharing one simulated network
/// in a single process. Every method is safe to call from any thread.
class LocalCluster
{
public:
    explicit LocalCluster(LocalClusterOptions options);
    ~LocalCluster();

    std::size_t size() const { return cores_.size(); }
    NodeFacade& facade(std::size_t i);
    const NodeCore& core(std::size_t i) const { return *cores_[i]; }
    const std::string& node_id(std::size_t i) const { return cores_[i]->id(); }

    /// Advances logical time by `ms`.
    void pump(std::uint64_t ms);
    /// Runs until no message or timer is pending (or the horizon passes).
    bool settle();
    std::uint64_t now() const;

private:
    class Facade;
    friend class Facade;

    std::optional<WriteResult> submit(std::size_t from, const std::string& sender, ledger::Payload payload);
    bool await_commit(std::size_t on, const std::string& tx_id, std::chrono::milliseconds timeout);

    LocalClusterOptions options_;
    mutable std::recursive_mutex mu_;
    std::vector<std::unique_ptr<NodeCore>> cores_;
    std::vector<std::unique_ptr<Facade>> facades_;
    std::unique_ptr<consensus::SimNetwork> net_;
};

} // namespace crowdlist::node
