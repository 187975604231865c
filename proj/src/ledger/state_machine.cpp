#include <crowdlist/ledger/state_machine.hpp>

#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/ledger/url.hpp>

#include <algorithm>
#include <stdexcept>

namespace crowdlist::ledger {

using nlohmann::json;

std::string_view to_string(Rejection r)
{
    switch (r)
    {
    case Rejection::UnknownUser:
        return "UnknownUser";
    case Rejection::BadNonce:
        return "BadNonce";
    case Rejection::DuplicateUrl:
        return "DuplicateUrl";
    case Rejection::EvidenceMismatch:
        return "EvidenceMismatch";
    case Rejection::MalformedUrl:
        return "MalformedUrl";
    case Rejection::UnknownUrl:
        return "UnknownUrl";
    case Rejection::DuplicateVote:
        return "DuplicateVote";
    case Rejection::DuplicateUser:
        return "DuplicateUser";
    }
    return "Unknown";
}

namespace {

std::uint64_t last_nonce(const ChainState& state, const std::string& sender)
{
    auto it = state.sender_nonces.find(sender);
    return it == state.sender_nonces.end() ? 0 : it->second;
}

} // namespace

std::optional<Rejection> validate_transaction(const ChainState& state, const Transaction& tx)
{
    if (tx.sender.empty())
        return Rejection::UnknownUser;

    const bool registered = state.users.contains(tx.sender);
    if (tx.kind() == TxKind::RegisterUser)
    {
        if (registered)
            return Rejection::DuplicateUser;
    }
    else if (!registered)
    {
        return Rejection::UnknownUser;
    }

    if (tx.nonce != last_nonce(state, tx.sender) + 1)
        return Rejection::BadNonce;

    if (const auto* submit = std::get_if<SubmitUrl>(&tx.payload))
    {
        auto normalized = normalize_url(submit->url);
        if (!normalized)
            return Rejection::MalformedUrl;
        if (state.urls.contains(sha256(*normalized).hex()))
            return Rejection::DuplicateUrl;
        if (submit->evidence_email.empty() ||
            submit->evidence_email.find(submit->url) == std::string::npos)
        {
            return Rejection::EvidenceMismatch;
        }
    }
    else if (const auto* vote = std::get_if<CastVote>(&tx.payload))
    {
        auto it = state.urls.find(vote->url_id);
        if (it == state.urls.end())
            return Rejection::UnknownUrl;
        const auto& votes = it->second.votes;
        if (std::any_of(votes.begin(), votes.end(),
                        [&](const Vote& v) { return v.verifier == tx.sender; }))
        {
            return Rejection::DuplicateVote;
        }
    }
    return std::nullopt;
}

bool is_permanent(const ChainState& state, const Transaction& tx, Rejection r)
{
    switch (r)
    {
    case Rejection::UnknownUser:
    case Rejection::UnknownUrl:
        return false;
    case Rejection::BadNonce:
        return tx.nonce <= last_nonce(state, tx.sender);
    default:
        return true;
    }
}

void apply_transaction_in_place(ChainState& state, const Transaction& tx)
{
    const std::uint64_t block_height = state.height + 1;
    state.sender_nonces[tx.sender] = tx.nonce;

    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RegisterUser>)
            {
                VerifierAccount account;
                account.verifier_id = tx.sender;
                account.display_name = p.display_name;
                state.users.emplace(tx.sender, std::move(account));
            }
            else if constexpr (std::is_same_v<P, SubmitUrl>)
            {
                UrlRecord record;
                record.url_id = url_id_for(p.url);
                record.url = p.url;
                record.submitter = tx.sender;
                record.evidence_email = p.evidence_email;
                record.first_block_height = block_height;
                auto id = record.url_id;
                state.urls.emplace(std::move(id), std::move(record));
            }
            else
            {
                auto& record = state.urls.at(p.url_id);
                record.votes.push_back(Vote{tx.sender, p.verdict, record.votes.size() + 1, block_height});
                state.users.at(tx.sender).votes_cast += 1;
            }
        },
        tx.payload);
}

ChainState apply_transaction(ChainState state, const Transaction& tx)
{
    apply_transaction_in_place(state, tx);
    return state;
}

ChainState execute_block(ChainState state, std::span<const Transaction> txs)
{
    for (const auto& tx : txs)
    {
        if (auto r = validate_transaction(state, tx))
            throw std::invalid_argument("invalid transaction in block: " + std::string(to_string(*r)));
        apply_transaction_in_place(state, tx);
    }
    state.height += 1;
    return state;
}

bool contains_vote(std::span<const Transaction> txs)
{
    return std::any_of(txs.begin(), txs.end(), [](const Transaction& tx) { return tx.kind() == TxKind::CastVote; });
}

UrlStatus status_for(std::size_t vote_count, std::optional<double> score, std::size_t threshold)
{
    if (vote_count < threshold || !score)
        return UrlStatus::Unverified;
    return *score > 0.0 ? UrlStatus::Phishing : UrlStatus::NotPhishing;
}

Digest state_digest(const ChainState& state)
{
    return sha256(canonical_serialize(state));
}

Digest compute_block_hash(const Block& block)
{
    json j = block;
    j.erase("block_hash");
    return sha256(canonical_dump(j));
}

Block seal(Block block)
{
    block.block_hash = compute_block_hash(block);
    return block;
}

Block make_genesis()
{
    Block genesis;
    genesis.height = 0;
    genesis.proposer = "genesis";
    genesis.round = 0;
    genesis.state_digest = state_digest(ChainState{});
    return seal(std::move(genesis));
}

std::string transaction_id(const Transaction& tx)
{
    json j = tx;
    j.erase("submitted_at");
    return sha256(canonical_dump(j)).hex();
}

} // namespace crowdlist::ledger
