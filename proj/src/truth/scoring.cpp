#include <crowdlist/truth/scoring.hpp>

#include <algorithm>
#include <cmath>

namespace crowdlist::truth {

std::vector<Ballot> ballots_of(std::span<const ledger::Vote> votes)
{
    std::vector<Ballot> out;
    out.reserve(votes.size());
    for (const auto& v : votes)
        out.push_back({v.verifier, v.verdict});
    return out;
}

double weighted_vote_score(const std::map<std::string, double>& ranks, std::span<const Ballot> ballots)
{
    double phishing = 0.0;
    double not_phishing = 0.0;
    for (const auto& b : ballots)
    {
        auto it = ranks.find(b.verifier);
        if (it == ranks.end())
            throw TruthError(TruthErrc::MissingRank, "no rank for verifier " + b.verifier);
        (b.verdict == Verdict::Phishing ? phishing : not_phishing) += it->second;
    }
    const double total = phishing + not_phishing;
    if (total <= 0.0)
        return 0.0;
    return std::clamp((phishing - not_phishing) / total, -1.0, 1.0);
}

std::optional<double> phish_score(const std::map<std::string, double>& ranks, std::span<const Ballot> ballots,
                                  std::size_t threshold)
{
    if (ballots.size() < threshold)
        return std::nullopt;
    return weighted_vote_score(ranks, ballots);
}

std::vector<TimelineEntry> score_timeline(const std::map<std::string, double>& ranks,
                                          std::span<const Ballot> ballots, std::size_t threshold)
{
    std::vector<TimelineEntry> timeline;
    timeline.reserve(ballots.size());
    for (std::size_t k = 1; k <= ballots.size(); ++k)
        timeline.push_back({k, phish_score(ranks, ballots.first(k), threshold)});
    return timeline;
}

std::uint64_t skill_points_for(double normalized_rank, double accuracy)
{
    double points = std::round(100.0 * (normalized_rank + accuracy));
    return static_cast<std::uint64_t>(std::clamp(points, 0.0, 200.0));
}

std::map<std::string, VoteTally> tally_votes(const VoteMatrix& votes, const Labels& final_labels)
{
    std::map<std::string, VoteTally> tallies;
    for (const auto& e : votes.entries())
    {
        auto& t = tallies[e.verifier_id];
        t.votes_cast += 1;
        auto label = final_labels.find(e.url_id);
        if (label != final_labels.end() && label->second == e.verdict)
            t.votes_correct += 1;
    }
    return tallies;
}

std::map<std::string, std::uint64_t> skill_points(const std::map<std::string, double>& ranks,
                                                  const std::map<std::string, VoteTally>& tallies)
{
    double max_rank = 0.0;
    for (const auto& [id, r] : ranks)
        max_rank = std::max(max_rank, r);

    std::map<std::string, std::uint64_t> points;
    auto compute = [&](const std::string& id) {
        double normalized = 0.0;
        if (auto it = ranks.find(id); it != ranks.end() && max_rank > 0.0)
            normalized = it->second / max_rank;
        double accuracy = 0.0;
        if (auto it = tallies.find(id); it != tallies.end() && it->second.votes_cast > 0)
            accuracy = static_cast<double>(it->second.votes_correct) / static_cast<double>(it->second.votes_cast);
        points[id] = skill_points_for(normalized, accuracy);
    };
    for (const auto& [id, r] : ranks)
        compute(id);
    for (const auto& [id, t] : tallies)
    {
        if (!points.contains(id))
            compute(id);
    }
    return points;
}

Labels majority_labels(const VoteMatrix& votes)
{
    Labels labels;
    const auto& entries = votes.entries();
    for (const auto& [url, idx] : votes.by_url())
    {
        long balance = 0;
        for (auto i : idx)
            balance += entries[i].verdict == Verdict::Phishing ? 1 : -1;
        labels.emplace(url, balance > 0 ? Verdict::Phishing : Verdict::NotPhishing);
    }
    return labels;
}

Labels pagerank_labels(const VoteMatrix& votes, const PageRankParams& params)
{
    Labels labels;
    if (votes.empty())
        return labels;
    auto ranks = pagerank(build_verifier_graph(votes), params);
    const auto& entries = votes.entries();
    std::vector<Ballot> ballots;
    for (const auto& [url, idx] : votes.by_url())
    {
        ballots.clear();
        for (auto i : idx)
            ballots.push_back({entries[i].verifier_id, entries[i].verdict});
        labels.emplace(url, weighted_vote_score(ranks.ranks, ballots) > 0.0 ? Verdict::Phishing : Verdict::NotPhishing);
    }
    return labels;
}

} // namespace crowdlist::truth
