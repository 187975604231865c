#pragma once

#include <crowdlist/truth/votes.hpp>

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace crowdlist::truth {

/// Directed follower graph: edge (a, b) with weight w means that on w URLs
/// verifier a voted strictly before verifier b.
struct VerifierGraph
{
    std::set<std::string> nodes;
    std::map<std::pair<std::string, std::string>, std::uint64_t> edges;

    bool operator==(const VerifierGraph&) const = default;
};

/// Adds one increment per ordered voter pair (i < j) of every URL.
VerifierGraph build_verifier_graph(const VoteMatrix& votes);

} // namespace crowdlist::truth
