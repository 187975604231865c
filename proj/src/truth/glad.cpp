#include <crowdlist/truth/glad.hpp>

#include <cmath>
#include <random>

namespace crowdlist::truth {

namespace {

double softplus(double x)
{
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0)
        return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

// log sigmoid(x) and log(1 - sigmoid(x))
double log_correct(double x) { return -softplus(-x); }
double log_wrong(double x) { return -softplus(x); }

double log_priors(const std::vector<double>& alpha, const std::vector<double>& beta)
{
    double lp = 0.0;
    for (double a : alpha)
        lp -= 0.5 * (a - 1.0) * (a - 1.0);
    for (double b : beta)
        lp -= 0.5 * b * b;
    return lp;
}

} // namespace

GladModel::GladModel(const VoteMatrix& votes) : dense_(votes) {}

std::vector<double> GladModel::e_step(const std::vector<double>& alpha, const std::vector<double>& beta,
                                      double prior, double* log_likelihood) const
{
    std::vector<double> posterior(dense_.urls.size());
    for (std::size_t u = 0; u < dense_.urls.size(); ++u)
    {
        double l1 = std::log(prior);
        double l0 = std::log(1.0 - prior);
        const double scale = std::exp(beta[u]);
        for (auto c : dense_.cells_of_url[u])
        {
            const auto& cell = dense_.cells[c];
            double x = alpha[cell.verifier] * scale;
            if (cell.label == 1)
            {
                l1 += log_correct(x);
                l0 += log_wrong(x);
            }
            else
            {
                l1 += log_wrong(x);
                l0 += log_correct(x);
            }
        }
        double m = std::max(l0, l1);
        double norm = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
        posterior[u] = std::exp(l1 - norm);
        if (log_likelihood)
            *log_likelihood += norm;
    }
    return posterior;
}

double GladModel::objective(const std::vector<double>& alpha, const std::vector<double>& beta,
                            const std::vector<double>& posterior) const
{
    double q = log_priors(alpha, beta);
    for (const auto& cell : dense_.cells)
    {
        double correct = cell.label == 1 ? posterior[cell.url] : 1.0 - posterior[cell.url];
        double x = alpha[cell.verifier] * std::exp(beta[cell.url]);
        q += correct * log_correct(x) + (1.0 - correct) * log_wrong(x);
    }
    return q;
}

void GladModel::gradient(const std::vector<double>& alpha, const std::vector<double>& beta,
                         const std::vector<double>& posterior, std::vector<double>& grad_alpha,
                         std::vector<double>& grad_beta) const
{
    grad_alpha.assign(alpha.size(), 0.0);
    grad_beta.assign(beta.size(), 0.0);
    for (std::size_t v = 0; v < alpha.size(); ++v)
        grad_alpha[v] = -(alpha[v] - 1.0);
    for (std::size_t u = 0; u < beta.size(); ++u)
        grad_beta[u] = -beta[u];

    for (const auto& cell : dense_.cells)
    {
        double correct = cell.label == 1 ? posterior[cell.url] : 1.0 - posterior[cell.url];
        double scale = std::exp(beta[cell.url]);
        double a = alpha[cell.verifier];
        double residual = correct - sigmoid(a * scale);
        grad_alpha[cell.verifier] += residual * scale;
        grad_beta[cell.url] += residual * a * scale;
    }

    for (double g : grad_alpha)
    {
        if (!std::isfinite(g))
            throw TruthError(TruthErrc::NonFiniteGradient, "ability gradient is not finite");
    }
    for (double g : grad_beta)
    {
        if (!std::isfinite(g))
            throw TruthError(TruthErrc::NonFiniteGradient, "difficulty gradient is not finite");
    }
}

GladResult glad(const VoteMatrix& votes, const GladParams& params)
{
    if (votes.empty())
        throw TruthError(TruthErrc::EmptyInput, "glad needs at least one vote");
    if (!(params.learning_rate > 0.0) || params.iters == 0 || params.inner_iters == 0 ||
        !(params.prior > 0.0 && params.prior < 1.0))
    {
        throw TruthError(TruthErrc::InvalidParams, "glad parameters out of range");
    }

    GladModel model(votes);
    const auto& dense = model.dense();

    std::mt19937_64 rng(params.seed);
    std::uniform_real_distribution<double> jitter(-0.01, 0.01);
    std::vector<double> alpha(dense.verifiers.size());
    std::vector<double> beta(dense.urls.size());
    for (auto& a : alpha)
        a = 1.0 + jitter(rng);
    for (auto& b : beta)
        b = jitter(rng);

    // Step sizes are scaled by each parameter's vote count so heavy and light
    // verifiers move at comparable rates.
    std::vector<double> step_alpha(alpha.size());
    std::vector<double> step_beta(beta.size());
    for (std::size_t v = 0; v < alpha.size(); ++v)
        step_alpha[v] = params.learning_rate / static_cast<double>(dense.cells_of_verifier[v].size() + 1);
    for (std::size_t u = 0; u < beta.size(); ++u)
        step_beta[u] = params.learning_rate / static_cast<double>(dense.cells_of_url[u].size() + 1);

    GladResult result;
    std::vector<double> grad_alpha;
    std::vector<double> grad_beta;
    std::vector<double> posterior = model.e_step(alpha, beta, params.prior);
    for (unsigned iter = 0; iter < params.iters; ++iter)
    {
        for (unsigned k = 0; k < params.inner_iters; ++k)
        {
            model.gradient(alpha, beta, posterior, grad_alpha, grad_beta);
            for (std::size_t v = 0; v < alpha.size(); ++v)
                alpha[v] += step_alpha[v] * grad_alpha[v];
            for (std::size_t u = 0; u < beta.size(); ++u)
                beta[u] += step_beta[u] * grad_beta[u];
        }
        double ll = log_priors(alpha, beta);
        posterior = model.e_step(alpha, beta, params.prior, &ll);
        result.log_likelihood.push_back(ll);
    }

    for (std::size_t u = 0; u < dense.urls.size(); ++u)
    {
        result.posteriors.emplace(dense.urls[u], posterior[u]);
        result.difficulties.emplace(dense.urls[u], beta[u]);
    }
    for (std::size_t v = 0; v < dense.verifiers.size(); ++v)
        result.abilities.emplace(dense.verifiers[v], alpha[v]);
    return result;
}

} // namespace crowdlist::truth
