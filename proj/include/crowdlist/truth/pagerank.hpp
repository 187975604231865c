#pragma once

#include <crowdlist/truth/graph.hpp>

#include <map>
#include <string>

namespace crowdlist::truth {

struct PageRankParams
{
    double damping = 0.85;
    double tol = 1e-9; // L1 change between iterations
    unsigned max_iter = 200;
};

struct RankVector
{
    std::map<std::string, double> ranks;
    double damping = 0.85;
    unsigned iterations_used = 0;
    bool converged = false;
};

/// Weighted power-iteration PageRank. Out-edges are normalized by total out
/// weight and dangling nodes spread their rank uniformly, so ranks sum to 1.
///
/// Throws TruthError(EmptyGraph) for a graph without nodes and
/// TruthError(InvalidParams) for damping outside (0,1), tol <= 0 or max_iter == 0.
RankVector pagerank(const VerifierGraph& graph, const PageRankParams& params = {});

} // namespace crowdlist::truth
