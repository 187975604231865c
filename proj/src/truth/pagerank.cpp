#include <crowdlist/truth/pagerank.hpp>

#include <cmath>
#include <numeric>
#include <vector>

namespace crowdlist::truth {

RankVector pagerank(const VerifierGraph& graph, const PageRankParams& params)
{
    if (graph.nodes.empty())
        throw TruthError(TruthErrc::EmptyGraph, "pagerank needs at least one node");
    if (!(params.damping > 0.0 && params.damping < 1.0) || !(params.tol > 0.0) || params.max_iter == 0)
        throw TruthError(TruthErrc::InvalidParams, "pagerank parameters out of range");

    const std::size_t n = graph.nodes.size();
    std::map<std::string_view, std::size_t> index;
    std::vector<std::string_view> names;
    for (const auto& node : graph.nodes)
    {
        index.emplace(node, names.size());
        names.push_back(node);
    }

    struct InEdge
    {
        std::size_t from;
        double weight;
    };
    std::vector<std::vector<InEdge>> in_edges(n);
    std::vector<double> out_weight(n, 0.0);
    for (const auto& [edge, weight] : graph.edges)
    {
        auto from = index.at(edge.first);
        auto to = index.at(edge.second);
        in_edges[to].push_back({from, static_cast<double>(weight)});
        out_weight[from] += static_cast<double>(weight);
    }

    const double d = params.damping;
    const double teleport = (1.0 - d) / static_cast<double>(n);
    std::vector<double> rank(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n);

    RankVector result;
    result.damping = d;
    for (unsigned iter = 1; iter <= params.max_iter; ++iter)
    {
        double dangling = 0.0;
        for (std::size_t u = 0; u < n; ++u)
        {
            if (out_weight[u] == 0.0)
                dangling += rank[u];
        }
        const double dangling_share = dangling / static_cast<double>(n);

        double delta = 0.0;
        for (std::size_t v = 0; v < n; ++v)
        {
            double inflow = 0.0;
            for (const auto& e : in_edges[v])
                inflow += rank[e.from] * e.weight / out_weight[e.from];
            next[v] = teleport + d * (inflow + dangling_share);
            delta += std::abs(next[v] - rank[v]);
        }
        rank.swap(next);
        result.iterations_used = iter;
        if (delta < params.tol)
        {
            result.converged = true;
            break;
        }
    }

    const double total = std::accumulate(rank.begin(), rank.end(), 0.0);
    for (std::size_t v = 0; v < n; ++v)
        result.ranks.emplace(std::string(names[v]), rank[v] / total);
    return result;
}

} // namespace crowdlist::truth
