#pragma once

#include <crowdlist/ledger/digest.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace crowdlist::ledger {

enum class Verdict
{
    Phishing,
    NotPhishing
};

enum class UrlStatus
{
    Unverified,
    Phishing,
    NotPhishing
};

enum class TxKind
{
    RegisterUser,
    SubmitUrl,
    CastVote
};

std::string_view to_string(Verdict v);
std::string_view to_string(UrlStatus s);
std::string_view to_string(TxKind k);

std::optional<Verdict> parse_verdict(std::string_view text);
std::optional<UrlStatus> parse_status(std::string_view text);
std::optional<TxKind> parse_tx_kind(std::string_view text);

struct RegisterUser
{
    std::string display_name;
    bool operator==(const RegisterUser&) const = default;
};

struct SubmitUrl
{
    std::string url;
    std::string evidence_email;
    bool operator==(const SubmitUrl&) const = default;
};

struct CastVote
{
    std::string url_id;
    Verdict verdict = Verdict::Phishing;
    bool operator==(const CastVote&) const = default;
};

using Payload = std::variant<RegisterUser, SubmitUrl, CastVote>;

struct Transaction
{
    std::string sender;
    std::uint64_t nonce = 0;
    /// Logical timestamp, assigned by the block proposer.
    std::uint64_t submitted_at = 0;
    Payload payload;

    TxKind kind() const { return static_cast<TxKind>(payload.index()); }

    bool operator==(const Transaction&) const = default;
};

struct Vote
{
    std::string verifier;
    Verdict verdict = Verdict::Phishing;
    std::uint64_t ordinal = 0;
    std::uint64_t block_height = 0;
    bool operator==(const Vote&) const = default;
};

struct UrlRecord
{
    std::string url_id;
    std::string url;
    std::string submitter;
    std::string evidence_email;
    std::vector<Vote> votes;
    UrlStatus status = UrlStatus::Unverified;
    std::optional<double> phish_score;
    std::uint64_t first_block_height = 0;
    bool operator==(const UrlRecord&) const = default;
};

struct VerifierAccount
{
    std::string verifier_id;
    std::string display_name;
    double rank = 0.0;
    std::uint64_t skill_points = 0;
    std::uint64_t votes_cast = 0;
    std::uint64_t votes_correct = 0;
    bool operator==(const VerifierAccount&) const = default;
};

/// Materialized view of the ledger after the block at `height`.
struct ChainState
{
    std::map<std::string, VerifierAccount> users;
    std::map<std::string, UrlRecord> urls;
    std::uint64_t height = 0;
    std::map<std::string, std::uint64_t> sender_nonces;
    bool operator==(const ChainState&) const = default;
};

struct Block
{
    std::uint64_t height = 0;
    Digest parent_hash;
    std::vector<Transaction> transactions;
    std::string proposer;
    std::uint64_t round = 0;
    Digest state_digest;
    Digest block_hash;
    bool operator==(const Block&) const = default;
};

class ParseError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace crowdlist::ledger
