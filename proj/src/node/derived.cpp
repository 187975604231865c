#include <crowdlist/node/derived.hpp>

#include <crowdlist/truth/scoring.hpp>

namespace crowdlist::node {

using ledger::ChainState;

truth::VoteMatrix vote_matrix_of(const ChainState& state)
{
    std::vector<truth::VoteEntry> entries;
    for (const auto& [url_id, rec] : state.urls)
        for (const auto& v : rec.votes)
            entries.push_back({url_id, v.verifier, v.verdict, v.ordinal});
    return truth::VoteMatrix(std::move(entries));
}

truth::VerifierGraph verifier_graph_of(const ChainState& state)
{
    auto graph = truth::build_verifier_graph(vote_matrix_of(state));
    for (const auto& [id, account] : state.users)
        graph.nodes.insert(id);
    return graph;
}

void recompute_derived(ChainState& state, const TruthParams& params)
{
    const auto votes = vote_matrix_of(state);
    auto graph = truth::build_verifier_graph(votes);
    for (const auto& [id, account] : state.users)
        graph.nodes.insert(id);
    if (graph.nodes.empty())
        return;
    const auto ranks = truth::pagerank(graph, params.pagerank).ranks;

    truth::Labels final_labels;
    for (auto& [url_id, rec] : state.urls)
    {
        const auto ballots = truth::ballots_of(rec.votes);
        rec.phish_score = truth::phish_score(ranks, ballots, params.vote_threshold);
        rec.status = ledger::status_for(rec.votes.size(), rec.phish_score, params.vote_threshold);
        if (rec.status != ledger::UrlStatus::Unverified)
            final_labels.emplace(url_id, rec.status == ledger::UrlStatus::Phishing ? ledger::Verdict::Phishing
                                                                                   : ledger::Verdict::NotPhishing);
    }

    const auto tallies = truth::tally_votes(votes, final_labels);
    const auto points = truth::skill_points(ranks, tallies);
    for (auto& [id, account] : state.users)
    {
        account.rank = ranks.at(id);
        auto t = tallies.find(id);
        account.votes_correct = t == tallies.end() ? 0 : t->second.votes_correct;
        account.skill_points = points.at(id);
    }
}

ledger::BlockExecutor truth_executor(TruthParams params)
{
    return [params](const ChainState& parent, std::span<const ledger::Transaction> txs) {
        auto post = ledger::execute_block(parent, txs);
        if (ledger::contains_vote(txs))
            recompute_derived(post, params);
        return post;
    };
}

} // namespace crowdlist::node
