#pragma once

#include <crowdlist/truth/dataset.hpp>

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace crowdlist::cli {

struct BenchSpec
{
    truth::SyntheticParams generator;
    std::vector<std::string> algorithms{"pagerank", "em", "glad", "majority"};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
};

/// Parses a bench file; missing fields take the defaults above. Throws
/// truth::TruthError(InvalidParams) for unknown algorithms or empty lists.
BenchSpec parse_bench_spec(const nlohmann::json& j);
void validate(const BenchSpec& spec);

struct MetricSummary
{
    double mean = 0.0;
    double stddev = 0.0;
};

struct AlgorithmSummary
{
    std::string algorithm;
    MetricSummary accuracy;
    MetricSummary precision;
    MetricSummary recall;
    std::vector<truth::EvaluationReport> runs; // one per seed
};

struct BenchResult
{
    std::vector<AlgorithmSummary> rows;
    /// Every Dawid-Skene trace was non-decreasing within 1e-9 per step.
    bool em_monotone = true;
    /// Median voters per URL for each seed's dataset.
    std::vector<double> median_votes;
};

BenchResult run_bench(const BenchSpec& spec);

/// Three-column table (Algorithm | Acc. | Prec. | Rec.) with mean ± stddev over seeds.
std::string format_bench_table(const BenchResult& result);
nlohmann::json bench_to_json(const BenchResult& result);

} // namespace crowdlist::cli
