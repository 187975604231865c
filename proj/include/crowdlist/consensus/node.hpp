#pragma once

#include <crowdlist/consensus/message.hpp>
#include <crowdlist/consensus/validator_set.hpp>
#include <crowdlist/ledger/block_log.hpp>
#include <crowdlist/ledger/types.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace crowdlist::consensus {

enum class Role
{
    Validator,
    Normal
};

enum class Phase
{
    Idle,
    PrePrepared,
    Prepared,
    Committed
};

std::string_view to_string(Role r);
std::string_view to_string(Phase p);

/// Fires the node's timer. Stale deadlines (rearmed since) are ignored.
struct Timeout
{
    std::uint64_t deadline = 0;
};

/// Hands client transactions to the node's mempool.
struct ProposeRequest
{
    std::vector<ledger::Transaction> txs;
};

using Input = std::variant<Message, Timeout, ProposeRequest>;

struct Outgoing
{
    std::optional<std::string> to; // nullopt = every other node
    Message message;
};

struct StepOutput
{
    std::vector<Outgoing> messages;
    std::vector<ledger::Block> committed;
    std::optional<std::uint64_t> timer_deadline;
};

struct NodeOptions
{
    std::uint64_t base_timeout_ms = 1000;
    std::size_t max_block_txs = 100;
    unsigned max_backoff_doublings = 16;
    std::size_t sync_batch = 16;
};

class ConsensusNode
{
public:
    /// `chain` must start with genesis and already be verified; empty means a fresh genesis chain.
    ConsensusNode(std::string id, Role role, ValidatorSet validators, NodeOptions options = {},
                  ledger::BlockExecutor execute = ledger::ledger_executor(), std::vector<ledger::Block> chain = {},
                  ledger::ChainState state = {});

    StepOutput step(const Input& input, std::uint64_t now);

    const std::string& id() const { return id_; }
    Role role() const { return role_; }
    const ValidatorSet& validators() const { return validators_; }

    /// Height of the last committed block.
    std::uint64_t height() const { return chain_.back().height; }
    std::uint64_t round() const { return round_; }
    Phase phase() const { return phase_; }
    std::optional<ledger::Block> locked_block() const;
    std::optional<std::uint64_t> timer_deadline() const { return timer_; }

    const std::vector<ledger::Block>& chain() const { return chain_; }
    const ledger::ChainState& state() const { return state_; }
    const std::vector<ledger::Transaction>& mempool() const { return mempool_; }

    /// Mempool transactions that would go into a block built now, in order.
    std::vector<ledger::Transaction> proposable() const;
    bool has_proposable() const;

    /// Inputs dropped as malformed or unauthorized.
    std::uint64_t dropped() const { return dropped_; }

    /// Messages held for the given (height, round, kind).
    std::size_t logged(std::uint64_t height, std::uint64_t round, MessageKind kind) const;

private:
    using LogKey = std::tuple<std::uint64_t, std::uint64_t, MessageKind, std::string>;

    struct Lock
    {
        ledger::Block block;
        std::uint64_t round = 0;
    };

    void on_message(const Message& m, std::uint64_t now, StepOutput& out);
    void on_timeout(std::uint64_t now, StepOutput& out);
    void add_to_mempool(const std::vector<ledger::Transaction>& txs);
    void advance(std::uint64_t now, StepOutput& out);

    bool try_commit(std::uint64_t now, StepOutput& out);
    bool update_lock();
    bool catch_up_rounds(std::uint64_t now, StepOutput& out);
    bool enter_round_on_quorum(std::uint64_t now);
    bool maybe_propose(std::uint64_t now, StepOutput& out);
    bool maybe_prepare(StepOutput& out);
    bool maybe_commit_vote(StepOutput& out);
    void update_timer(std::uint64_t now);

    void commit(const ledger::Block& block, StepOutput& out);
    void request_sync(std::uint64_t now, StepOutput& out);
    void help_lagging_peer(const Message& m, StepOutput& out);
    void broadcast(Message m, StepOutput& out);
    Message round_change(std::uint64_t round) const;

    /// Post-state of `block` if it is a valid successor of the head, else nullopt. Cached.
    const std::optional<ledger::ChainState>& check_block(const ledger::Block& block);
    const ledger::Block* body(const ledger::Digest& hash) const;
    /// hash -> distinct senders of `kind` at (next height, round)
    std::map<ledger::Digest, std::size_t> tally(std::uint64_t round, MessageKind kind) const;
    std::uint64_t backoff(std::uint64_t round) const;
    bool active_at_next_height() const;

    std::string id_;
    Role role_;
    ValidatorSet validators_;
    NodeOptions options_;
    ledger::BlockExecutor execute_;

    std::vector<ledger::Block> chain_;
    ledger::ChainState state_;

    std::uint64_t round_ = 0;        // round we act in
    std::uint64_t target_round_ = 0; // round we asked to move to; > round_ while changing
    Phase phase_ = Phase::Idle;
    std::optional<Lock> lock_;
    std::optional<std::uint64_t> timer_;
    std::set<std::uint64_t> proposed_;

    std::map<LogKey, Message> log_;
    std::map<ledger::Digest, ledger::Block> bodies_;
    std::map<ledger::Digest, std::optional<ledger::ChainState>> checked_;
    std::map<std::uint64_t, std::map<ledger::Digest, std::set<std::string>>> synced_;
    std::optional<std::uint64_t> last_sync_request_;
    std::map<std::uint64_t, Message> own_commits_; // recent decided heights

    std::vector<ledger::Transaction> mempool_;
    mutable std::optional<bool> has_proposable_;

    std::uint64_t dropped_ = 0;
};

} // namespace crowdlist::consensus
