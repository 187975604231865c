#include <crowdlist/consensus/message.hpp>

#include <crowdlist/ledger/canonical.hpp>

#include <array>

namespace crowdlist::consensus {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 6> kind_names{"PrePrepare", "Prepare",     "Commit",
                                                     "RoundChange", "SyncRequest", "SyncResponse"};

} // namespace

std::string_view to_string(MessageKind k)
{
    return kind_names[static_cast<std::size_t>(k)];
}

bool is_consensus(MessageKind k)
{
    return k != MessageKind::SyncRequest && k != MessageKind::SyncResponse;
}

void to_json(json& j, const Message& m)
{
    j = json{{"kind", std::string(to_string(m.kind))},
             {"height", m.height},
             {"round", m.round},
             {"sender", m.sender},
             {"block_hash", m.block_hash}};
    if (m.block)
        j["block"] = *m.block;
    if (m.prepared_round)
        j["prepared_round"] = *m.prepared_round;
    if (!m.blocks.empty())
        j["blocks"] = m.blocks;
}

void from_json(const json& j, Message& m)
{
    try
    {
        auto kind = j.at("kind").get<std::string>();
        auto it = std::find(kind_names.begin(), kind_names.end(), kind);
        if (it == kind_names.end())
            throw ledger::ParseError("unknown message kind " + kind);
        m.kind = static_cast<MessageKind>(it - kind_names.begin());
        m.height = j.at("height").get<std::uint64_t>();
        m.round = j.at("round").get<std::uint64_t>();
        m.sender = j.at("sender").get<std::string>();
        m.block_hash = j.at("block_hash").get<ledger::Digest>();
        m.block.reset();
        if (j.contains("block"))
            m.block = j.at("block").get<ledger::Block>();
        m.prepared_round.reset();
        if (j.contains("prepared_round"))
            m.prepared_round = j.at("prepared_round").get<std::uint64_t>();
        m.blocks.clear();
        if (j.contains("blocks"))
            m.blocks = j.at("blocks").get<std::vector<ledger::Block>>();
    }
    catch (const json::exception& e)
    {
        throw ledger::ParseError(e.what());
    }
}

} // namespace crowdlist::consensus
