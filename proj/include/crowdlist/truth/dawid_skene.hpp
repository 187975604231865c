#pragma once

#include <crowdlist/truth/votes.hpp>

#include <array>
#include <map>
#include <string>
#include <vector>

namespace crowdlist::truth {

/// confusion[true_class][observed_class], class index 1 = Phishing, 0 = NotPhishing.
/// Rows sum to 1.
using Confusion = std::array<std::array<double, 2>, 2>;

struct DawidSkeneParams
{
    double prior = 0.5; // P(Phishing) used for majority ties at initialization
    double tol = 1e-6;  // max posterior change
    unsigned max_iter = 100;
};

struct DawidSkeneResult
{
    std::map<std::string, double> posteriors; // P(Phishing | votes)
    std::map<std::string, Confusion> confusions;
    double class_prior = 0.5;
    /// Objective after every M-step: marginal log-likelihood plus the log of the
    /// Laplace (Dirichlet(2,2)) smoothing prior, which EM never decreases.
    std::vector<double> log_likelihood;
    unsigned iterations = 0;
    bool converged = false;
};

/// Two-class Dawid-Skene EM with add-one smoothing on confusion rows and the class prior.
/// Throws TruthError(EmptyInput) on an empty vote matrix, InvalidParams when prior is not in (0,1).
DawidSkeneResult dawid_skene(const VoteMatrix& votes, const DawidSkeneParams& params = {});

/// One E-step with fixed confusions and class prior. Throws TruthError(InvalidParams)
/// if a voter lacks a confusion matrix.
std::map<std::string, double> dawid_skene_e_step(const VoteMatrix& votes,
                                                 const std::map<std::string, Confusion>& confusions,
                                                 double prior);

Labels labels_from_posteriors(const std::map<std::string, double>& posteriors);

} // namespace crowdlist::truth
