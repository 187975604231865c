#pragma once

#include <crowdlist/ledger/types.hpp>

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdlist::truth {

using ledger::Verdict;

enum class TruthErrc
{
    EmptyGraph,
    MissingRank,
    EmptyInput,
    NonFiniteGradient,
    InvalidParams,
    DomainMismatch,
    InvalidVotes
};

std::string_view to_string(TruthErrc e);

class TruthError : public std::runtime_error
{
public:
    TruthError(TruthErrc code, const std::string& detail);
    TruthErrc code() const noexcept { return code_; }

private:
    TruthErrc code_;
};

struct VoteEntry
{
    std::string url_id;
    std::string verifier_id;
    Verdict verdict = Verdict::Phishing;
    std::uint64_t ordinal = 0;
    bool operator==(const VoteEntry&) const = default;
};

/// All verdicts of a crowd, indexed per URL (in ordinal order) and per verifier.
/// (url, verifier) pairs are unique and ordinals are 1..k per URL.
class VoteMatrix
{
public:
    VoteMatrix() = default;

    /// Throws TruthError(InvalidVotes) when an invariant does not hold.
    explicit VoteMatrix(std::vector<VoteEntry> entries);

    const std::vector<VoteEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    /// Entry indices per URL, sorted by ordinal.
    const std::map<std::string, std::vector<std::size_t>>& by_url() const { return by_url_; }
    const std::map<std::string, std::vector<std::size_t>>& by_verifier() const { return by_verifier_; }

    bool operator==(const VoteMatrix& other) const { return entries_ == other.entries_; }

private:
    std::vector<VoteEntry> entries_;
    std::map<std::string, std::vector<std::size_t>> by_url_;
    std::map<std::string, std::vector<std::size_t>> by_verifier_;
};

using Labels = std::map<std::string, Verdict>;

/// Compact integer view of a VoteMatrix used by the iterative estimators.
struct DenseVotes
{
    struct Cell
    {
        std::size_t url;
        std::size_t verifier;
        int label; // 1 = Phishing, 0 = NotPhishing
    };

    std::vector<std::string> urls;
    std::vector<std::string> verifiers;
    std::vector<Cell> cells;
    std::vector<std::vector<std::size_t>> cells_of_url;
    std::vector<std::vector<std::size_t>> cells_of_verifier;

    explicit DenseVotes(const VoteMatrix& votes);
};

} // namespace crowdlist::truth
