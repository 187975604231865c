#include <crowdlist/cli/bench.hpp>

#include <crowdlist/truth/dawid_skene.hpp>
#include <crowdlist/truth/glad.hpp>
#include <crowdlist/truth/scoring.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace crowdlist::cli {

using nlohmann::json;
using truth::TruthErrc;
using truth::TruthError;

namespace {

const std::vector<std::string> known_algorithms{"pagerank", "em", "glad", "majority"};

MetricSummary summarize(const std::vector<double>& xs)
{
    MetricSummary s;
    if (xs.empty())
        return s;
    for (double x : xs)
        s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1)
    {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

double median_votes_per_url(const truth::VoteMatrix& votes)
{
    std::vector<std::size_t> counts;
    for (const auto& [url, idx] : votes.by_url())
        counts.push_back(idx.size());
    if (counts.empty())
        return 0.0;
    std::sort(counts.begin(), counts.end());
    auto n = counts.size();
    return n % 2 ? static_cast<double>(counts[n / 2])
                 : 0.5 * static_cast<double>(counts[n / 2 - 1] + counts[n / 2]);
}

bool non_decreasing(const std::vector<double>& trace)
{
    for (std::size_t i = 1; i < trace.size(); ++i)
    {
        if (trace[i] < trace[i - 1] - 1e-9)
            return false;
    }
    return true;
}

std::string percent(const MetricSummary& m)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%6.2f%% ± %.2f%%", 100.0 * m.mean, 100.0 * m.stddev);
    return buf;
}

} // namespace

void validate(const BenchSpec& spec)
{
    if (spec.algorithms.empty())
        throw TruthError(TruthErrc::InvalidParams, "bench needs at least one algorithm");
    if (spec.seeds.empty())
        throw TruthError(TruthErrc::InvalidParams, "bench needs at least one seed");
    for (const auto& a : spec.algorithms)
    {
        if (std::find(known_algorithms.begin(), known_algorithms.end(), a) == known_algorithms.end())
            throw TruthError(TruthErrc::InvalidParams, "unknown algorithm " + a);
    }
}

BenchSpec parse_bench_spec(const json& j)
{
    if (!j.is_object())
        throw TruthError(TruthErrc::InvalidParams, "bench spec must be a JSON object");
    BenchSpec spec;
    spec.generator = j.get<truth::SyntheticParams>();
    try
    {
        if (j.contains("algorithms"))
            spec.algorithms = j.at("algorithms").get<std::vector<std::string>>();
        if (j.contains("seeds"))
            spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
    catch (const json::exception& e)
    {
        throw TruthError(TruthErrc::InvalidParams, e.what());
    }
    validate(spec);
    return spec;
}

BenchResult run_bench(const BenchSpec& spec)
{
    validate(spec);

    BenchResult result;
    for (const auto& a : spec.algorithms)
        result.rows.push_back({a, {}, {}, {}, {}});

    for (auto seed : spec.seeds)
    {
        auto params = spec.generator;
        params.seed = seed;
        const auto dataset = truth::generate_synthetic(params);
        result.median_votes.push_back(median_votes_per_url(dataset.votes));

        for (auto& row : result.rows)
        {
            truth::Labels predicted;
            if (row.algorithm == "pagerank")
            {
                predicted = truth::pagerank_labels(dataset.votes);
            }
            else if (row.algorithm == "em")
            {
                auto ds = truth::dawid_skene(dataset.votes);
                result.em_monotone = result.em_monotone && non_decreasing(ds.log_likelihood);
                predicted = truth::labels_from_posteriors(ds.posteriors);
            }
            else if (row.algorithm == "glad")
            {
                truth::GladParams gp;
                gp.seed = seed;
                predicted = truth::labels_from_posteriors(truth::glad(dataset.votes, gp).posteriors);
            }
            else
            {
                predicted = truth::majority_labels(dataset.votes);
            }
            row.runs.push_back(truth::evaluate(predicted, dataset.truth, row.algorithm));
        }
    }

    for (auto& row : result.rows)
    {
        std::vector<double> acc, prec, rec;
        for (const auto& r : row.runs)
        {
            acc.push_back(r.accuracy);
            prec.push_back(r.precision);
            rec.push_back(r.recall);
        }
        row.accuracy = summarize(acc);
        row.precision = summarize(prec);
        row.recall = summarize(rec);
    }
    return result;
}

std::string format_bench_table(const BenchResult& result)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-10s | %-18s | %-18s | %-18s\n", "Algorithm", "Acc.", "Prec.", "Rec.");
    out << line;
    out << std::string(10, '-') << "-+-" << std::string(18, '-') << "-+-" << std::string(18, '-') << "-+-"
        << std::string(18, '-') << '\n';
    for (const auto& row : result.rows)
    {
        std::snprintf(line, sizeof line, "%-10s | %-18s | %-18s | %-18s\n", row.algorithm.c_str(),
                      percent(row.accuracy).c_str(), percent(row.precision).c_str(), percent(row.recall).c_str());
        out << line;
    }
    return out.str();
}

json bench_to_json(const BenchResult& result)
{
    json rows = json::array();
    for (const auto& row : result.rows)
    {
        auto metric = [](const MetricSummary& m) { return json{{"mean", m.mean}, {"stddev", m.stddev}}; };
        json runs = json::array();
        for (const auto& r : row.runs)
            runs.push_back(json{{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}});
        rows.push_back(json{{"algorithm", row.algorithm},
                            {"accuracy", metric(row.accuracy)},
                            {"precision", metric(row.precision)},
                            {"recall", metric(row.recall)},
                            {"runs", std::move(runs)}});
    }
    return json{{"rows", std::move(rows)}, {"em_monotone", result.em_monotone}, {"median_votes", result.median_votes}};
}

} // namespace crowdlist::cli
