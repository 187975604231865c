#include <crowdlist/truth/dataset.hpp>

#include <algorithm>
#include <cmath>
#include <random>

namespace crowdlist::truth {

using nlohmann::json;

namespace {

std::string padded(char prefix, std::size_t i, std::size_t width)
{
    std::string digits = std::to_string(i);
    if (digits.size() < width)
        digits.insert(0, width - digits.size(), '0');
    return prefix + digits;
}

std::size_t width_for(std::size_t n)
{
    return std::to_string(n > 0 ? n - 1 : 0).size();
}

void check(bool ok, const char* what)
{
    if (!ok)
        throw TruthError(TruthErrc::InvalidParams, what);
}

} // namespace

LabeledDataset generate_synthetic(const SyntheticParams& p)
{
    check(p.n_urls >= 1, "n_urls must be at least 1");
    check(p.n_verifiers >= 1, "n_verifiers must be at least 1");
    check(p.phish_fraction >= 0.0 && p.phish_fraction <= 1.0, "phish_fraction must lie in [0,1]");
    check(p.reliability_mean > 0.5 && p.reliability_mean <= 1.0, "reliability_mean must lie in (0.5,1]");
    check(p.reliability_spread >= 0.0, "reliability_spread must be non-negative");
    check(p.participation_exponent >= 0.0, "participation_exponent must be non-negative");
    check(p.min_votes >= 1 && p.min_votes <= p.n_verifiers, "min_votes must lie in [1, n_verifiers]");

    std::mt19937_64 rng(p.seed);

    std::vector<double> reliability(p.n_verifiers, p.reliability_mean);
    if (p.reliability_spread > 0.0)
    {
        std::normal_distribution<double> draw(p.reliability_mean, p.reliability_spread);
        for (auto& r : reliability)
            r = std::clamp(draw(rng), 0.5, 1.0);
        // Activity order follows reliability blurred by noise of the same spread.
        std::vector<std::pair<double, double>> keyed;
        for (double r : reliability)
            keyed.emplace_back(r + draw(rng) - p.reliability_mean, r);
        std::sort(keyed.begin(), keyed.end(), std::greater<>());
        for (std::size_t i = 0; i < keyed.size(); ++i)
            reliability[i] = keyed[i].second;
    }

    std::vector<double> activity(p.n_verifiers);
    for (std::size_t i = 0; i < p.n_verifiers; ++i)
        activity[i] = 1.0 / static_cast<double>(i + 1);

    std::vector<double> size_weights;
    for (std::size_t k = p.min_votes; k <= p.n_verifiers; ++k)
        size_weights.push_back(std::pow(static_cast<double>(k), -p.participation_exponent));
    std::discrete_distribution<std::size_t> voter_count(size_weights.begin(), size_weights.end());

    const auto n_phish = static_cast<std::size_t>(std::llround(static_cast<double>(p.n_urls) * p.phish_fraction));
    std::vector<Verdict> truth_of(p.n_urls, Verdict::NotPhishing);
    std::fill_n(truth_of.begin(), n_phish, Verdict::Phishing);
    std::shuffle(truth_of.begin(), truth_of.end(), rng);

    const auto url_width = width_for(p.n_urls);
    const auto verifier_width = width_for(p.n_verifiers);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    LabeledDataset dataset;
    dataset.generator_params = p;
    std::vector<VoteEntry> entries;
    std::vector<std::size_t> voters;
    for (std::size_t u = 0; u < p.n_urls; ++u)
    {
        const auto url_id = padded('u', u, url_width);
        dataset.truth.emplace(url_id, truth_of[u]);

        const std::size_t k = p.min_votes + voter_count(rng);
        voters.clear();
        std::vector<double> remaining = activity;
        for (std::size_t j = 0; j < k; ++j)
        {
            std::discrete_distribution<std::size_t> pick(remaining.begin(), remaining.end());
            auto v = pick(rng);
            voters.push_back(v);
            remaining[v] = 0.0;
        }
        std::shuffle(voters.begin(), voters.end(), rng);

        for (std::size_t j = 0; j < voters.size(); ++j)
        {
            auto v = voters[j];
            bool correct = unit(rng) < reliability[v];
            Verdict verdict = correct ? truth_of[u]
                                      : (truth_of[u] == Verdict::Phishing ? Verdict::NotPhishing : Verdict::Phishing);
            entries.push_back({url_id, padded('w', v, verifier_width), verdict, j + 1});
        }
    }
    dataset.votes = VoteMatrix(std::move(entries));
    return dataset;
}

void to_json(json& j, const SyntheticParams& p)
{
    j = json{{"n_urls", p.n_urls},
             {"n_verifiers", p.n_verifiers},
             {"phish_fraction", p.phish_fraction},
             {"reliability_mean", p.reliability_mean},
             {"reliability_spread", p.reliability_spread},
             {"participation_exponent", p.participation_exponent},
             {"min_votes", p.min_votes},
             {"seed", p.seed}};
}

void from_json(const json& j, SyntheticParams& p)
{
    try
    {
        p.n_urls = j.value("n_urls", p.n_urls);
        p.n_verifiers = j.value("n_verifiers", p.n_verifiers);
        p.phish_fraction = j.value("phish_fraction", p.phish_fraction);
        p.reliability_mean = j.value("reliability_mean", p.reliability_mean);
        p.reliability_spread = j.value("reliability_spread", p.reliability_spread);
        p.participation_exponent = j.value("participation_exponent", p.participation_exponent);
        p.min_votes = j.value("min_votes", p.min_votes);
        p.seed = j.value("seed", p.seed);
    }
    catch (const json::exception& e)
    {
        throw TruthError(TruthErrc::InvalidParams, e.what());
    }
}

json dataset_to_json(const LabeledDataset& dataset)
{
    json votes = json::array();
    for (const auto& e : dataset.votes.entries())
        votes.push_back(json::array({e.url_id, e.verifier_id, std::string(ledger::to_string(e.verdict)), e.ordinal}));
    json truth = json::object();
    for (const auto& [url, label] : dataset.truth)
        truth[url] = std::string(ledger::to_string(label));

    json j{{"votes", std::move(votes)}, {"truth", std::move(truth)}};
    if (dataset.generator_params)
        j["generator_params"] = *dataset.generator_params;
    return j;
}

LabeledDataset dataset_from_json(const json& j)
{
    auto bad = [](const std::string& why) { return TruthError(TruthErrc::InvalidVotes, why); };
    if (!j.is_object() || !j.contains("votes") || !j["votes"].is_array())
        throw bad("dataset needs a 'votes' array");

    std::vector<VoteEntry> entries;
    for (const auto& row : j["votes"])
    {
        if (!row.is_array() || row.size() != 4 || !row[0].is_string() || !row[1].is_string() || !row[2].is_string() ||
            !row[3].is_number_unsigned())
        {
            throw bad("vote rows are [url_id, verifier_id, verdict, ordinal]");
        }
        auto verdict = ledger::parse_verdict(row[2].get<std::string>());
        if (!verdict)
            throw bad("unknown verdict " + row[2].get<std::string>());
        entries.push_back({row[0].get<std::string>(), row[1].get<std::string>(), *verdict, row[3].get<std::uint64_t>()});
    }

    LabeledDataset dataset;
    dataset.votes = VoteMatrix(std::move(entries));
    if (j.contains("truth"))
    {
        if (!j["truth"].is_object())
            throw bad("'truth' must be an object");
        for (const auto& [url, label] : j["truth"].items())
        {
            auto verdict = label.is_string() ? ledger::parse_verdict(label.get<std::string>()) : std::nullopt;
            if (!verdict)
                throw bad("unknown truth label for " + url);
            dataset.truth.emplace(url, *verdict);
        }
    }
    for (const auto& [url, idx] : dataset.votes.by_url())
    {
        if (!dataset.truth.empty() && !dataset.truth.contains(url))
            throw bad("no truth label for " + url);
    }
    if (j.contains("generator_params"))
        dataset.generator_params = j["generator_params"].get<SyntheticParams>();
    return dataset;
}

EvaluationReport evaluate(const Labels& predicted, const Labels& truth, std::string algorithm)
{
    if (predicted.size() != truth.size() ||
        !std::equal(predicted.begin(), predicted.end(), truth.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; }))
    {
        throw TruthError(TruthErrc::DomainMismatch, "predicted and truth cover different URLs");
    }

    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    auto t = truth.begin();
    for (const auto& [url, label] : predicted)
    {
        const bool predicted_phish = label == Verdict::Phishing;
        const bool actual_phish = (t++)->second == Verdict::Phishing;
        if (predicted_phish && actual_phish)
            ++tp;
        else if (predicted_phish)
            ++fp;
        else if (actual_phish)
            ++fn;
        else
            ++tn;
    }

    EvaluationReport report;
    report.algorithm = std::move(algorithm);
    const double total = static_cast<double>(tp + fp + fn + tn);
    report.accuracy = total > 0 ? static_cast<double>(tp + tn) / total : 1.0;
    report.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 1.0;
    report.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 1.0;
    return report;
}

} // namespace crowdlist::truth
