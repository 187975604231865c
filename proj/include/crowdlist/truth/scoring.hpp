#pragma once

#include <crowdlist/ledger/state_machine.hpp>
#include <crowdlist/truth/pagerank.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace crowdlist::truth {

/// One verdict as seen by the scoring functions, in vote order.
struct Ballot
{
    std::string verifier;
    Verdict verdict = Verdict::Phishing;
};

std::vector<Ballot> ballots_of(std::span<const ledger::Vote> votes);

/// Rank-weighted vote difference in [-1, 1] with no vote-count threshold.
/// Throws TruthError(MissingRank) if a voter has no rank entry.
double weighted_vote_score(const std::map<std::string, double>& ranks, std::span<const Ballot> ballots);

/// (sum of Phishing voter ranks - sum of NotPhishing voter ranks) / sum of all
/// voter ranks; nullopt while fewer than `threshold` votes exist.
std::optional<double> phish_score(const std::map<std::string, double>& ranks, std::span<const Ballot> ballots,
                                  std::size_t threshold = ledger::default_vote_threshold);

struct TimelineEntry
{
    std::uint64_t ordinal = 0;
    std::optional<double> score;
    bool operator==(const TimelineEntry&) const = default;
};

/// Score after each prefix of the vote sequence, holding `ranks` fixed.
std::vector<TimelineEntry> score_timeline(const std::map<std::string, double>& ranks,
                                          std::span<const Ballot> ballots,
                                          std::size_t threshold = ledger::default_vote_threshold);

struct VoteTally
{
    std::uint64_t votes_cast = 0;
    std::uint64_t votes_correct = 0;
};

/// round(100 * (normalized_rank + accuracy)), in 0..200.
std::uint64_t skill_points_for(double normalized_rank, double accuracy);

/// A vote counts as correct when it agrees with the URL's final label. Votes on
/// URLs without a final label count towards votes_cast only.
std::map<std::string, VoteTally> tally_votes(const VoteMatrix& votes, const Labels& final_labels);

/// Skill points for every verifier in `ranks` or `tallies`. Ranks are normalized
/// by the maximum rank; a verifier without votes has accuracy 0.
std::map<std::string, std::uint64_t> skill_points(const std::map<std::string, double>& ranks,
                                                  const std::map<std::string, VoteTally>& tallies);

/// Unweighted majority, ties resolve to NotPhishing.
Labels majority_labels(const VoteMatrix& votes);

/// Labels from the sign of the rank-weighted score on the follower-graph PageRank.
Labels pagerank_labels(const VoteMatrix& votes, const PageRankParams& params = {});

} // namespace crowdlist::truth
