#include <crowdlist/node/views.hpp>

#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/node/derived.hpp>
#include <crowdlist/truth/scoring.hpp>

#include <algorithm>

namespace crowdlist::node {

using nlohmann::json;

namespace {

std::map<std::string, double> ranks_of(const ledger::ChainState& state)
{
    std::map<std::string, double> ranks;
    for (const auto& [id, account] : state.users)
        ranks.emplace(id, account.rank);
    return ranks;
}

json optional_score(std::optional<double> s)
{
    return s ? json(*s) : json(nullptr);
}

json timeline_of(const ledger::ChainState& state, const ledger::UrlRecord& rec, std::size_t threshold)
{
    json entries = json::array();
    const auto ballots = truth::ballots_of(rec.votes);
    for (const auto& e : truth::score_timeline(ranks_of(state), ballots, threshold))
        entries.push_back({{"ordinal", e.ordinal}, {"score", optional_score(e.score)}, {"insufficient", !e.score}});
    return entries;
}

} // namespace

std::optional<json> url_view(const ledger::ChainState& state, const std::string& url_id, std::size_t threshold)
{
    auto it = state.urls.find(url_id);
    if (it == state.urls.end())
        return std::nullopt;
    const auto& rec = it->second;

    json voters = json::array();
    for (const auto& v : rec.votes)
    {
        const auto& account = state.users.at(v.verifier);
        voters.push_back({{"verifier_id", v.verifier},
                          {"verdict", std::string(ledger::to_string(v.verdict))},
                          {"ordinal", v.ordinal},
                          {"block_height", v.block_height},
                          {"rank", account.rank},
                          {"skill_points", account.skill_points}});
    }
    return json{{"url_id", rec.url_id},
                {"url", rec.url},
                {"submitter", rec.submitter},
                {"evidence_email", rec.evidence_email},
                {"first_block_height", rec.first_block_height},
                {"status", std::string(ledger::to_string(rec.status))},
                {"phish_score", optional_score(rec.phish_score)},
                {"vote_count", rec.votes.size()},
                {"votes", std::move(voters)},
                {"timeline", timeline_of(state, rec, threshold)}};
}

std::optional<json> timeline_view(const ledger::ChainState& state, const std::string& url_id, std::size_t threshold)
{
    auto it = state.urls.find(url_id);
    if (it == state.urls.end())
        return std::nullopt;
    return json{{"url_id", url_id}, {"timeline", timeline_of(state, it->second, threshold)}};
}

json graph_view(const ledger::ChainState& state)
{
    const auto graph = verifier_graph_of(state);
    const bool any_vote = std::any_of(state.urls.begin(), state.urls.end(),
                                      [](const auto& kv) { return !kv.second.votes.empty(); });
    const double uniform = graph.nodes.empty() ? 0.0 : 1.0 / static_cast<double>(graph.nodes.size());

    json nodes = json::array();
    for (const auto& id : graph.nodes)
    {
        const auto& account = state.users.at(id);
        nodes.push_back({{"id", id}, {"rank", any_vote ? account.rank : uniform}, {"skill_points", account.skill_points}});
    }
    json edges = json::array();
    for (const auto& [pair, w] : graph.edges)
        edges.push_back({{"from", pair.first}, {"to", pair.second}, {"weight", w}});
    return json{{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

json blacklist_view(const ledger::ChainState& state)
{
    std::vector<const ledger::UrlRecord*> listed;
    for (const auto& [id, rec] : state.urls)
        if (rec.status == ledger::UrlStatus::Phishing && rec.phish_score && *rec.phish_score > 0.0)
            listed.push_back(&rec);
    std::stable_sort(listed.begin(), listed.end(), [](const auto* a, const auto* b) {
        if (*a->phish_score != *b->phish_score)
            return *a->phish_score > *b->phish_score;
        return a->url_id < b->url_id;
    });
    json out = json::array();
    for (const auto* rec : listed)
        out.push_back({{"url_id", rec->url_id}, {"url", rec->url}, {"phish_score", *rec->phish_score}});
    return out;
}

std::optional<json> verifier_view(const ledger::ChainState& state, const std::string& verifier_id)
{
    auto it = state.users.find(verifier_id);
    if (it == state.users.end())
        return std::nullopt;
    return json(it->second);
}

json blocks_view(std::span<const std::shared_ptr<const ledger::Block>> chain, std::uint64_t from, std::uint64_t to)
{
    json out = json::array();
    for (auto h = from; h <= to && h < chain.size(); ++h)
        out.push_back(*chain[h]);
    return out;
}

} // namespace crowdlist::node
