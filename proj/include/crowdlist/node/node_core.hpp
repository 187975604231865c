#pragma once

#include <crowdlist/consensus/node.hpp>
#include <crowdlist/node/derived.hpp>
#include <crowdlist/node/replica.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace crowdlist::node {

struct WriteResult
{
    std::string tx_id;
    std::optional<ledger::Rejection> rejection;
    ledger::Transaction tx;
    bool accepted() const { return !rejection; }
};

/// One node's consensus state machine and replica. Not thread-safe: the
/// driver (LocalCluster or NodeHost) serializes every call.
class NodeCore
{
public:
    NodeCore(std::string id, consensus::Role role, consensus::ValidatorSet validators,
             consensus::NodeOptions options, TruthParams truth, std::optional<std::filesystem::path> data_dir);

    const std::string& id() const { return consensus_.id(); }
    consensus::Role role() const { return consensus_.role(); }
    const TruthParams& truth() const { return truth_; }
    const Replica& replica() const { return replica_; }
    consensus::ConsensusNode& consensus_node() { return consensus_; }
    const consensus::ConsensusNode& consensus_node() const { return consensus_; }

    /// Builds a transaction with the sender's next nonce and checks it against
    /// the committed state plus this node's earlier accepted writes. A rejected
    /// write consumes no nonce. The caller hands accepted transactions to the
    /// validators' mempools.
    WriteResult prepare_write(const std::string& sender, ledger::Payload payload);

    /// Steps the consensus node and applies whatever it commits.
    consensus::StepOutput step(const consensus::Input& input, std::uint64_t now);

    /// Applies a block the consensus node committed (drivers that step the
    /// ConsensusNode directly call this from their commit hook).
    void on_committed(const ledger::Block& block);

    std::size_t pending_writes() const { return pending_.size(); }

private:
    void rebuild_view();

    TruthParams truth_;
    Replica replica_;
    consensus::ConsensusNode consensus_;
    std::vector<ledger::Transaction> pending_;
    ledger::ChainState view_; // committed state + pending_
};

} // namespace crowdlist::node
