#pragma once

#include <crowdlist/truth/votes.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace crowdlist::truth {

struct SyntheticParams
{
    std::size_t n_urls = 2000;
    std::size_t n_verifiers = 50;
    double phish_fraction = 0.5;
    double reliability_mean = 0.8;
    double reliability_spread = 0.1;
    double participation_exponent = 2.0;
    std::size_t min_votes = 3;
    std::uint64_t seed = 1;

    bool operator==(const SyntheticParams&) const = default;
};

struct LabeledDataset
{
    VoteMatrix votes;
    Labels truth;
    std::optional<SyntheticParams> generator_params;
};

/// Synthetic crowd with known ground truth.
///
/// Verifier reliabilities are drawn from N(reliability_mean, reliability_spread)
/// clipped to [0.5, 1] and assigned so that the most active verifiers are the
/// most reliable; activity follows a Zipf(1) law over verifiers. The number of
/// voters per URL follows P(k) ~ k^-participation_exponent on
/// [min_votes, n_verifiers]. Each vote matches the truth with the voter's
/// reliability and the vote order is a uniform shuffle. Exactly
/// round(n_urls * phish_fraction) URLs are phishing.
///
/// Throws TruthError(InvalidParams).
LabeledDataset generate_synthetic(const SyntheticParams& params);

void to_json(nlohmann::json& j, const SyntheticParams& p);
void from_json(const nlohmann::json& j, SyntheticParams& p);

/// {"votes": [[url_id, verifier_id, verdict, ordinal], ...], "truth": {url_id: verdict}}
nlohmann::json dataset_to_json(const LabeledDataset& dataset);
LabeledDataset dataset_from_json(const nlohmann::json& j);

struct EvaluationReport
{
    std::string algorithm;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Phishing is the positive class; precision and recall are 1 when their
/// denominator is empty. Throws TruthError(DomainMismatch) unless both maps
/// cover the same URLs.
EvaluationReport evaluate(const Labels& predicted, const Labels& truth, std::string algorithm = {});

} // namespace crowdlist::truth
