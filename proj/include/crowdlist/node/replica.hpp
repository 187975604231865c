#pragma once

#include <crowdlist/ledger/block_log.hpp>
#include <crowdlist/ledger/types.hpp>

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace crowdlist::node {

class ChainGap : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Immutable view of the chain at one commit; readers hold it without locks.
struct Snapshot
{
    std::vector<std::shared_ptr<const ledger::Block>> chain;
    ledger::ChainState state;
    ledger::Digest state_digest;

    std::uint64_t height() const { return chain.back()->height; }
};

/// Committed chain plus derived state, persisted as <data_dir>/chain.jsonl.
/// apply() is the single writer; snapshot() may be called from any thread.
class Replica
{
public:
    /// Without a data_dir nothing is persisted. An existing log is replayed
    /// (ledger::ReplayError on corruption); a missing one is started with genesis.
    Replica(std::optional<std::filesystem::path> data_dir, ledger::BlockExecutor execute);

    /// Executes and appends a block. Throws ChainGap if it does not extend the
    /// head, ledger::ReplayError if it is invalid or its digest disagrees.
    void apply(const ledger::Block& block);

    std::shared_ptr<const Snapshot> snapshot() const;
    std::uint64_t height() const;
    /// Height of the block that committed this transaction id, if any.
    std::optional<std::uint64_t> committed_height(const std::string& tx_id) const;

    /// Copy of the full chain, e.g. to seed a consensus node after restart.
    std::vector<ledger::Block> chain() const;
    const ledger::BlockExecutor& executor() const { return execute_; }
    std::optional<std::filesystem::path> log_path() const;

private:
    void publish(std::vector<std::shared_ptr<const ledger::Block>> chain, ledger::ChainState state);
    void index(const ledger::Block& block);

    std::optional<ledger::BlockLog> log_;
    ledger::BlockExecutor execute_;

    mutable std::mutex mu_;
    std::shared_ptr<const Snapshot> current_;
    std::unordered_map<std::string, std::uint64_t> tx_heights_;
};

} // namespace crowdlist::node
