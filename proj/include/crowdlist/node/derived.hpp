#pragma once

#include <crowdlist/ledger/block_log.hpp>
#include <crowdlist/ledger/state_machine.hpp>
#include <crowdlist/truth/graph.hpp>
#include <crowdlist/truth/pagerank.hpp>

namespace crowdlist::node {

struct TruthParams
{
    truth::PageRankParams pagerank;
    std::size_t vote_threshold = ledger::default_vote_threshold;
};

truth::VoteMatrix vote_matrix_of(const ledger::ChainState& state);

/// Follower graph over every vote; every registered user is a node.
truth::VerifierGraph verifier_graph_of(const ledger::ChainState& state);

/// Global recomputation: PageRank over the whole graph, then score and status
/// of every URL, then votes_correct and skill points of every user.
void recompute_derived(ledger::ChainState& state, const TruthParams& params);

/// execute_block, followed by recompute_derived when the block carries a vote.
ledger::BlockExecutor truth_executor(TruthParams params);

} // namespace crowdlist::node
