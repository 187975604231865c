#pragma once

#include <crowdlist/ledger/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace crowdlist::consensus {

enum class MessageKind
{
    PrePrepare,
    Prepare,
    Commit,
    RoundChange,
    // block catch-up, not part of the three-phase protocol
    SyncRequest,
    SyncResponse
};

std::string_view to_string(MessageKind k);
bool is_consensus(MessageKind k);

struct Message
{
    MessageKind kind = MessageKind::Prepare;
    std::uint64_t height = 0;
    std::uint64_t round = 0;
    std::string sender;
    ledger::Digest block_hash;
    /// PrePrepare: the proposal. RoundChange: the sender's locked block, if any.
    std::optional<ledger::Block> block;
    /// RoundChange: round in which `block` gathered a Prepare quorum.
    std::optional<std::uint64_t> prepared_round;
    /// SyncResponse: consecutive committed blocks starting at `height`.
    std::vector<ledger::Block> blocks;

    bool operator==(const Message&) const = default;
};

void to_json(nlohmann::json& j, const Message& m);
/// Throws ledger::ParseError.
void from_json(const nlohmann::json& j, Message& m);

} // namespace crowdlist::consensus
