#pragma once

#include <crowdlist/truth/votes.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace crowdlist::truth {

struct GladParams
{
    double learning_rate = 0.5;
    unsigned iters = 40;       // outer EM iterations
    unsigned inner_iters = 25; // gradient steps per M-step
    std::uint64_t seed = 0;    // jitter on the initial abilities/difficulties
    double prior = 0.5;        // class prior P(Phishing)
};

struct GladResult
{
    std::map<std::string, double> posteriors;
    std::map<std::string, double> abilities;    // alpha per verifier
    std::map<std::string, double> difficulties; // beta per url, inverse difficulty is exp(beta)
    std::vector<double> log_likelihood;         // marginal log-likelihood plus Gaussian log priors
};

/// Ability/difficulty model: a verifier v labels url u correctly with probability
/// sigmoid(alpha_v * exp(beta_u)). Priors alpha ~ N(1,1), beta ~ N(0,1).
class GladModel
{
public:
    explicit GladModel(const VoteMatrix& votes);

    const DenseVotes& dense() const { return dense_; }

    /// Posterior P(Phishing) per dense url; adds the marginal log-likelihood to
    /// *log_likelihood when given.
    std::vector<double> e_step(const std::vector<double>& alpha, const std::vector<double>& beta, double prior,
                               double* log_likelihood = nullptr) const;

    /// Expected complete-data log-likelihood (plus log priors) under `posterior`.
    double objective(const std::vector<double>& alpha, const std::vector<double>& beta,
                     const std::vector<double>& posterior) const;

    /// Analytic gradient of objective(). Throws TruthError(NonFiniteGradient).
    void gradient(const std::vector<double>& alpha, const std::vector<double>& beta,
                  const std::vector<double>& posterior, std::vector<double>& grad_alpha,
                  std::vector<double>& grad_beta) const;

private:
    DenseVotes dense_;
};

/// Throws TruthError(EmptyInput) on no votes, InvalidParams on a non-positive
/// learning rate or zero iterations.
GladResult glad(const VoteMatrix& votes, const GladParams& params = {});

} // namespace crowdlist::truth
