#include <crowdlist/truth/votes.hpp>

#include <algorithm>
#include <set>
#include <utility>

namespace crowdlist::truth {

std::string_view to_string(TruthErrc e)
{
    switch (e)
    {
    case TruthErrc::EmptyGraph:
        return "EmptyGraph";
    case TruthErrc::MissingRank:
        return "MissingRank";
    case TruthErrc::EmptyInput:
        return "EmptyInput";
    case TruthErrc::NonFiniteGradient:
        return "NonFiniteGradient";
    case TruthErrc::InvalidParams:
        return "InvalidParams";
    case TruthErrc::DomainMismatch:
        return "DomainMismatch";
    case TruthErrc::InvalidVotes:
        return "InvalidVotes";
    }
    return "Unknown";
}

TruthError::TruthError(TruthErrc code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code)
{
}

VoteMatrix::VoteMatrix(std::vector<VoteEntry> entries) : entries_(std::move(entries))
{
    std::set<std::pair<std::string_view, std::string_view>> seen;
    for (std::size_t i = 0; i < entries_.size(); ++i)
    {
        const auto& e = entries_[i];
        if (!seen.emplace(e.url_id, e.verifier_id).second)
            throw TruthError(TruthErrc::InvalidVotes, "duplicate vote by " + e.verifier_id + " on " + e.url_id);
        by_url_[e.url_id].push_back(i);
        by_verifier_[e.verifier_id].push_back(i);
    }

    for (auto& [url, idx] : by_url_)
    {
        std::sort(idx.begin(), idx.end(),
                  [&](std::size_t a, std::size_t b) { return entries_[a].ordinal < entries_[b].ordinal; });
        for (std::size_t k = 0; k < idx.size(); ++k)
        {
            if (entries_[idx[k]].ordinal != k + 1)
                throw TruthError(TruthErrc::InvalidVotes, "ordinals of " + url + " are not contiguous from 1");
        }
    }
}

DenseVotes::DenseVotes(const VoteMatrix& votes)
{
    std::map<std::string_view, std::size_t> url_index;
    std::map<std::string_view, std::size_t> verifier_index;
    for (const auto& [url, idx] : votes.by_url())
    {
        url_index.emplace(url, urls.size());
        urls.push_back(url);
    }
    for (const auto& [verifier, idx] : votes.by_verifier())
    {
        verifier_index.emplace(verifier, verifiers.size());
        verifiers.push_back(verifier);
    }

    cells_of_url.resize(urls.size());
    cells_of_verifier.resize(verifiers.size());
    cells.reserve(votes.size());
    for (const auto& e : votes.entries())
    {
        Cell c{url_index.at(e.url_id), verifier_index.at(e.verifier_id), e.verdict == Verdict::Phishing ? 1 : 0};
        cells_of_url[c.url].push_back(cells.size());
        cells_of_verifier[c.verifier].push_back(cells.size());
        cells.push_back(c);
    }
}

} // namespace crowdlist::truth
