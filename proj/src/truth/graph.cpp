#include <crowdlist/truth/graph.hpp>

namespace crowdlist::truth {

VerifierGraph build_verifier_graph(const VoteMatrix& votes)
{
    VerifierGraph graph;
    const auto& entries = votes.entries();
    for (const auto& [url, idx] : votes.by_url())
    {
        for (std::size_t i = 0; i < idx.size(); ++i)
        {
            const auto& earlier = entries[idx[i]].verifier_id;
            graph.nodes.insert(earlier);
            for (std::size_t j = i + 1; j < idx.size(); ++j)
                graph.edges[{earlier, entries[idx[j]].verifier_id}] += 1;
        }
    }
    return graph;
}

} // namespace crowdlist::truth
