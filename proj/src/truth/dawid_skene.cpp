#include <crowdlist/truth/dawid_skene.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace crowdlist::truth {

namespace {

struct EStep
{
    std::vector<double> posterior; // P(Phishing) per dense url
    double log_likelihood = 0.0;
};

double log_sum_exp(double a, double b)
{
    if (a == -std::numeric_limits<double>::infinity())
        return b;
    if (b == -std::numeric_limits<double>::infinity())
        return a;
    double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

EStep e_step(const DenseVotes& dense, const std::vector<Confusion>& conf, double prior)
{
    EStep out;
    out.posterior.resize(dense.urls.size());
    for (std::size_t u = 0; u < dense.urls.size(); ++u)
    {
        double l1 = std::log(prior);
        double l0 = std::log(1.0 - prior);
        for (auto c : dense.cells_of_url[u])
        {
            const auto& cell = dense.cells[c];
            l1 += std::log(conf[cell.verifier][1][cell.label]);
            l0 += std::log(conf[cell.verifier][0][cell.label]);
        }
        double norm = log_sum_exp(l0, l1);
        if (!std::isfinite(norm))
        {
            out.posterior[u] = prior;
            continue;
        }
        out.posterior[u] = std::exp(l1 - norm);
        out.log_likelihood += norm;
    }
    return out;
}

} // namespace

std::map<std::string, double> dawid_skene_e_step(const VoteMatrix& votes,
                                                 const std::map<std::string, Confusion>& confusions,
                                                 double prior)
{
    DenseVotes dense(votes);
    std::vector<Confusion> conf;
    conf.reserve(dense.verifiers.size());
    for (const auto& v : dense.verifiers)
    {
        auto it = confusions.find(v);
        if (it == confusions.end())
            throw TruthError(TruthErrc::InvalidParams, "no confusion matrix for " + v);
        conf.push_back(it->second);
    }
    auto step = e_step(dense, conf, prior);
    std::map<std::string, double> posteriors;
    for (std::size_t u = 0; u < dense.urls.size(); ++u)
        posteriors.emplace(dense.urls[u], step.posterior[u]);
    return posteriors;
}

DawidSkeneResult dawid_skene(const VoteMatrix& votes, const DawidSkeneParams& params)
{
    if (votes.empty())
        throw TruthError(TruthErrc::EmptyInput, "dawid-skene needs at least one vote");
    if (!(params.prior > 0.0 && params.prior < 1.0))
        throw TruthError(TruthErrc::InvalidParams, "prior must lie in (0,1)");

    DenseVotes dense(votes);
    const std::size_t n_urls = dense.urls.size();
    const std::size_t n_verifiers = dense.verifiers.size();

    std::vector<double> posterior(n_urls);
    for (std::size_t u = 0; u < n_urls; ++u)
    {
        long balance = 0;
        for (auto c : dense.cells_of_url[u])
            balance += dense.cells[c].label == 1 ? 1 : -1;
        posterior[u] = balance > 0 ? 1.0 : balance < 0 ? 0.0 : params.prior;
    }

    DawidSkeneResult result;
    std::vector<Confusion> conf(n_verifiers);
    double class_prior = params.prior;

    for (unsigned iter = 1; iter <= params.max_iter; ++iter)
    {
        // M-step with add-one smoothing
        std::vector<Confusion> counts(n_verifiers, Confusion{});
        for (const auto& cell : dense.cells)
        {
            counts[cell.verifier][1][cell.label] += posterior[cell.url];
            counts[cell.verifier][0][cell.label] += 1.0 - posterior[cell.url];
        }
        double log_prior = 0.0;
        for (std::size_t v = 0; v < n_verifiers; ++v)
        {
            for (int t = 0; t < 2; ++t)
            {
                double row = counts[v][t][0] + counts[v][t][1] + 2.0;
                for (int o = 0; o < 2; ++o)
                {
                    conf[v][t][o] = (counts[v][t][o] + 1.0) / row;
                    log_prior += std::log(conf[v][t][o]);
                }
            }
        }
        double phishing_mass = 0.0;
        for (double p : posterior)
            phishing_mass += p;
        class_prior = (phishing_mass + 1.0) / (static_cast<double>(n_urls) + 2.0);
        log_prior += std::log(class_prior) + std::log(1.0 - class_prior);

        auto step = e_step(dense, conf, class_prior);
        result.log_likelihood.push_back(step.log_likelihood + log_prior);

        double delta = 0.0;
        for (std::size_t u = 0; u < n_urls; ++u)
            delta = std::max(delta, std::abs(step.posterior[u] - posterior[u]));
        posterior = std::move(step.posterior);
        result.iterations = iter;
        if (delta < params.tol)
        {
            result.converged = true;
            break;
        }
    }

    for (std::size_t u = 0; u < n_urls; ++u)
        result.posteriors.emplace(dense.urls[u], posterior[u]);
    for (std::size_t v = 0; v < n_verifiers; ++v)
        result.confusions.emplace(dense.verifiers[v], conf[v]);
    result.class_prior = class_prior;
    return result;
}

Labels labels_from_posteriors(const std::map<std::string, double>& posteriors)
{
    Labels labels;
    for (const auto& [url, p] : posteriors)
        labels.emplace(url, p > 0.5 ? Verdict::Phishing : Verdict::NotPhishing);
    return labels;
}

} // namespace crowdlist::truth
