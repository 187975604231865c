#pragma once

#include <crowdlist/node/api.hpp>
#include <crowdlist/node/config.hpp>
#include <crowdlist/node/http.hpp>
#include <crowdlist/node/node_core.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <thread>

namespace crowdlist::node {

/// A node process: NodeCore driven by wall-clock timers, peers reached over
/// HTTP. Consensus messages go to POST /internal/v1/consensus and accepted
/// writes are forwarded to validators through POST /internal/v1/tx. Every
/// node also pulls committed blocks from validator peers, which is how
/// normal nodes follow the chain.
class NodeHost : public NodeFacade
{
public:
    explicit NodeHost(NodeConfig config);
    ~NodeHost() override;

    /// Starts serving; returns the bound port.
    std::uint16_t start();
    void stop();

    std::chrono::milliseconds pull_interval{300};

    std::shared_ptr<const Snapshot> snapshot() const override;
    std::size_t vote_threshold() const override { return config_.truth.vote_threshold; }
    std::optional<WriteResult> submit(const std::string& sender, ledger::Payload payload) override;
    bool await_commit(const std::string& tx_id, std::chrono::milliseconds timeout) override;
    nlohmann::json status() const override;

private:
    struct Outgoing
    {
        std::string address;
        std::string path;
        nlohmann::json body;
    };

    std::uint64_t now() const;
    void deliver(const consensus::Input& input);
    void dispatch(const consensus::StepOutput& out);
    void enqueue(Outgoing o);
    ApiResponse internal(const ApiRequest& req);

    void timer_loop();
    void sender_loop();
    void pull_loop();

    NodeConfig config_;
    std::chrono::steady_clock::time_point epoch_;

    mutable std::mutex mu_; // guards core_
    std::condition_variable changed_; // timer re-armed, commit, or stop
    std::unique_ptr<NodeCore> core_;
    std::atomic<bool> stopping_{false};

    std::mutex out_mu_;
    std::condition_variable out_cv_;
    std::deque<Outgoing> outbox_;

    std::unique_ptr<ApiServer> server_;
    std::vector<std::thread> threads_;
};

} // namespace crowdlist::node
