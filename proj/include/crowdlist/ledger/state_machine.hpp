#pragma once

#include <crowdlist/ledger/types.hpp>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace crowdlist::ledger {

/// Minimum number of votes before a URL receives a score.
inline constexpr std::size_t default_vote_threshold = 3;

enum class Rejection
{
    UnknownUser,
    BadNonce,
    DuplicateUrl,
    EvidenceMismatch,
    MalformedUrl,
    UnknownUrl,
    DuplicateVote,
    DuplicateUser
};

std::string_view to_string(Rejection r);

/// Returns nullopt when `tx` may be applied to `state`, otherwise the first rule it breaks.
std::optional<Rejection> validate_transaction(const ChainState& state, const Transaction& tx);

/// True when the rejection can never turn into acceptance on a later state.
bool is_permanent(const ChainState& state, const Transaction& tx, Rejection r);

/// Applies a validated transaction. Votes and new URLs are stamped with the
/// height of the block under construction (state.height + 1).
ChainState apply_transaction(ChainState state, const Transaction& tx);
void apply_transaction_in_place(ChainState& state, const Transaction& tx);

/// Applies every transaction then advances the height by one. Throws
/// std::invalid_argument if any transaction fails validation.
ChainState execute_block(ChainState state, std::span<const Transaction> txs);

bool contains_vote(std::span<const Transaction> txs);

/// Status rule shared by every component: Unverified below the vote threshold,
/// otherwise Phishing iff the score is strictly positive.
UrlStatus status_for(std::size_t vote_count, std::optional<double> score,
                     std::size_t threshold = default_vote_threshold);

Digest state_digest(const ChainState& state);

/// SHA-256 over the canonical block with the block_hash field omitted.
Digest compute_block_hash(const Block& block);

/// Fills in block_hash.
Block seal(Block block);

/// Height 0, zero parent, no transactions, proposer "genesis", digest of the empty state.
Block make_genesis();

/// Stable identifier of a transaction independent of its proposer timestamp.
std::string transaction_id(const Transaction& tx);

} // namespace crowdlist::ledger
