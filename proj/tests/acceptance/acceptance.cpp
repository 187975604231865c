// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <crowdlist/cli/bench.hpp>
#include <crowdlist/consensus/simulator.hpp>
#include <crowdlist/ledger/block_log.hpp>
#include <crowdlist/node/derived.hpp>
#include <crowdlist/node/http.hpp>
#include <crowdlist/node/local_cluster.hpp>
#include <crowdlist/truth/dawid_skene.hpp>
#include <crowdlist/truth/pagerank.hpp>
#include <crowdlist/truth/scoring.hpp>

#include <support/gen.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace crowdlist;
using namespace crowdlist::testing;
using nlohmann::json;

namespace {

// Tolerances and limits, fixed here so a change shows up in review.
constexpr double pagerank_fixed_point_tol = 1e-6;
constexpr double rank_sum_tol = 1e-9;
constexpr double equal_rank_tol = 1e-9;
constexpr double em_slack = 1e-9;
constexpr double e_step_tol = 1e-6;
constexpr double glad_rel_tol = 1e-4;
constexpr double score_tol = 1e-9;
constexpr double bench_min_accuracy = 0.90;
constexpr double max_median_votes = 6.0;

constexpr double safety_limit_s = 60.0;
constexpr double liveness_limit_s = 10.0;
constexpr double determinism_limit_s = 30.0;
constexpr double bench_limit_s = 60.0;

constexpr std::size_t safety_scenarios = 120;
constexpr std::size_t random_graphs = 50;
constexpr std::size_t glad_instances = 10;

struct Outcome
{
    bool pass = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what)
    {
        if (!cond)
        {
            if (pass)
                detail << "failed: ";
            else
                detail << "; ";
            detail << what;
            pass = false;
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("crowdlist-accept-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

bool chains_agree(const consensus::SimulationReport& r)
{
    // honest nodes must agree at every height both reached
    for (const auto& a : r.nodes)
        for (const auto& b : r.nodes)
        {
            if (a.fault != consensus::FaultKind::None || b.fault != consensus::FaultKind::None)
                continue;
            const auto n = std::min(a.chain.size(), b.chain.size());
            if (!std::equal(a.chain.begin(), a.chain.begin() + static_cast<std::ptrdiff_t>(n), b.chain.begin()))
                return false;
        }
    return true;
}

void criterion_safety(Outcome& o)
{
    const auto start = Clock::now();
    Rng rng(2024);
    std::size_t faulty_runs = 0, committed = 0, injected = 0;
    for (std::size_t i = 0; i < safety_scenarios; ++i)
    {
        auto s = random_scenario(rng, 7, {consensus::FaultKind::Equivocate, consensus::FaultKind::Crash});
        if (!s.faults.empty())
            ++faulty_runs;
        const auto r = consensus::run_simulation(s);
        o.require(r.safety_ok && chains_agree(r), "scenario " + std::to_string(i) + " diverged");
        committed += r.committed_txs;
        injected += r.injected_txs;
    }
    const double t = seconds_since(start);
    o.require(t < safety_limit_s, "took longer than the limit");
    o.detail << safety_scenarios << " scenarios (" << faulty_runs << " with faults), " << committed << "/" << injected
             << " txs committed, " << t << " s";
}

consensus::Scenario bundled(const std::string& name)
{
    std::ifstream in(std::filesystem::path(CROWDLIST_SCENARIO_DIR) / (name + ".json"));
    return consensus::parse_scenario(json::parse(in));
}

void criterion_liveness(Outcome& o)
{
    const auto start = Clock::now();
    auto two = bundled("7-with-2-crashed");
    std::size_t crashed = 0;
    for (const auto& f : two.faults)
        crashed += f.behavior == consensus::FaultKind::Crash;
    o.require(two.n_validators == 7 && crashed == 2, "fixture is not n=7 with 2 crashed");
    const auto r2 = consensus::run_simulation(two);
    o.require(r2.injected_txs > 0 && r2.committed_txs == r2.injected_txs, "2 crashed did not commit everything");
    o.require(!r2.stalled, "2 crashed reported stalled");

    // same claim on other seeds and other crashed pairs
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        auto s = two;
        s.seed = seed * 101;
        s.faults = {{"v" + std::to_string(seed % 7), consensus::FaultKind::Crash, 0},
                    {"v" + std::to_string((seed + 3) % 7), consensus::FaultKind::Crash, 0}};
        const auto r = consensus::run_simulation(s);
        o.require(r.committed_txs == r.injected_txs, "seed " + std::to_string(s.seed) + " missed transactions");
    }

    const auto r3 = consensus::run_simulation(bundled("7-with-3-crashed"));
    o.require(r3.stalled, "3 crashed did not report stalled");
    const double t = seconds_since(start);
    o.require(t < liveness_limit_s, "took longer than the limit");
    o.detail << "2 crashed: " << r2.committed_txs << "/" << r2.injected_txs << " committed; 3 crashed: stalled="
             << (r3.stalled ? "true" : "false") << ", " << t << " s";
}

// Fifty transactions from a fixed seed: registrations, submissions and votes.
std::vector<ledger::Transaction> mixed_transactions()
{
    std::vector<ledger::Transaction> txs;
    for (std::size_t n_urls = 6;; ++n_urls)
    {
        txs.clear();
        for (const auto& item : make_workload(7, 6, n_urls))
            txs.push_back(item.tx);
        if (txs.size() >= 50)
            break;
    }
    txs.resize(50);
    return txs;
}

void criterion_determinism(Outcome& o)
{
    const auto start = Clock::now();
    TempDir dir;
    node::LocalClusterOptions opts;
    opts.n_validators = 7;
    opts.seed = 3;
    opts.data_root = dir.path;
    node::LocalCluster cluster(opts);

    std::vector<std::unique_ptr<node::ApiServer>> servers;
    std::vector<std::string> addresses;
    for (std::size_t i = 0; i < cluster.size(); ++i)
    {
        servers.push_back(std::make_unique<node::ApiServer>(cluster.facade(i)));
        addresses.push_back("127.0.0.1:" + std::to_string(servers.back()->start({"127.0.0.1", 0})));
    }

    // each write goes to a different node and waits for its commit
    const auto txs = mixed_transactions();
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < txs.size(); ++i)
    {
        const auto& tx = txs[i];
        node::HttpClient c(addresses[i % addresses.size()], std::chrono::seconds(60));
        node::HttpResponse r{};
        if (const auto* p = std::get_if<ledger::RegisterUser>(&tx.payload))
            r = c.post("/api/v1/users?wait=60000", {{"verifier_id", tx.sender}, {"display_name", p->display_name}});
        else if (const auto* p = std::get_if<ledger::SubmitUrl>(&tx.payload))
            r = c.post("/api/v1/urls?wait=60000",
                       {{"sender", tx.sender}, {"url", p->url}, {"evidence_email", p->evidence_email}});
        else
        {
            const auto& v = std::get<ledger::CastVote>(tx.payload);
            r = c.post("/api/v1/urls/" + v.url_id + "/votes?wait=60000",
                       {{"sender", tx.sender}, {"verdict", std::string(ledger::to_string(v.verdict))}});
        }
        accepted += r.status == 200 && r.body.value("committed", false);
    }
    o.require(accepted == txs.size(), "only " + std::to_string(accepted) + " transactions committed");
    cluster.settle();

    std::set<std::string> digests, blacklists;
    for (const auto& a : addresses)
    {
        node::HttpClient c(a);
        digests.insert(c.get("/api/v1/status").body["state_digest"].get<std::string>());
        blacklists.insert(c.get("/api/v1/blacklist").body.dump());
    }
    o.require(digests.size() == 1, "state digests differ");
    o.require(blacklists.size() == 1, "blacklists differ");
    const auto blacklist = json::parse(*blacklists.begin());

    const auto snap = cluster.facade(4).snapshot();
    const ledger::BlockLog log(dir.path / cluster.node_id(4) / "chain.jsonl");
    const auto blocks = log.read_all();
    const auto replayed = ledger::replay(blocks, node::truth_executor({}));
    o.require(ledger::state_digest(replayed.state) == snap->state_digest, "log replay gave a different digest");
    o.require(replayed.chain.size() == snap->chain.size(), "log is missing blocks");

    for (auto& s : servers)
        s->stop();
    const double t = seconds_since(start);
    o.require(t < determinism_limit_s, "took longer than the limit");
    o.detail << accepted << " txs, height " << snap->height() << ", " << blacklist.size() << " blacklisted, digest "
             << snap->state_digest.hex().substr(0, 12) << ", " << t << " s";
}

void criterion_pagerank(Outcome& o)
{
    truth::VerifierGraph ab;
    ab.nodes = {"A", "B"};
    ab.edges[{"A", "B"}] = 1;
    const auto r = truth::pagerank(ab);
    // rA = (1-d)/2 + d*rB/2 with rA + rB = 1 (B dangles)
    const double d = 0.85;
    const double exact = 0.5 / (1 + d / 2);
    o.require(std::abs(r.ranks.at("A") - exact) < pagerank_fixed_point_tol, "A off the fixed point");
    o.require(std::abs(r.ranks.at("B") - (1 - exact)) < pagerank_fixed_point_tol, "B off the fixed point");
    o.require(std::abs(r.ranks.at("A") - 0.3509) < 5e-5 && std::abs(r.ranks.at("B") - 0.6491) < 5e-5,
              "does not round to 0.3509/0.6491");
    o.require(r.converged, "A->B did not converge");

    Rng rng(4);
    double worst = 0.0;
    for (std::size_t i = 0; i < random_graphs; ++i)
    {
        const auto pr = truth::pagerank(random_graph(rng, 20));
        double sum = 0.0;
        for (const auto& [id, v] : pr.ranks)
            sum += v;
        worst = std::max(worst, std::abs(sum - 1.0));
        o.require(pr.converged, "random graph did not converge");
    }
    o.require(worst < rank_sum_tol, "rank sum off by more than the tolerance");

    // cycles, complete graphs and the empty edge set are all vertex-transitive
    double spread = 0.0;
    for (std::size_t n = 1; n <= 8; ++n)
        for (int shape = 0; shape < 3; ++shape)
        {
            truth::VerifierGraph g;
            for (std::size_t i = 0; i < n; ++i)
                g.nodes.insert(verifier_name(i));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    if (i != j && (shape == 1 ? j == (i + 1) % n : shape == 2))
                        g.edges[{verifier_name(i), verifier_name(j)}] = 3;
            const auto pr = truth::pagerank(g);
            for (const auto& [id, v] : pr.ranks)
                spread = std::max(spread, std::abs(v - 1.0 / static_cast<double>(n)));
        }
    o.require(spread < equal_rank_tol, "symmetric graph with unequal ranks");

    o.detail << "A=" << r.ranks.at("A") << " B=" << r.ranks.at("B") << ", max |sum-1|=" << worst
             << ", symmetric spread=" << spread;
}

struct BenchRun
{
    cli::BenchResult result;
    double seconds = 0.0;
};

const BenchRun& default_bench()
{
    static const BenchRun run = [] {
        const auto start = Clock::now();
        BenchRun b;
        b.result = cli::run_bench(cli::BenchSpec{});
        b.seconds = seconds_since(start);
        return b;
    }();
    return run;
}

double mean_accuracy(const cli::BenchResult& r, const std::string& algo)
{
    for (const auto& row : r.rows)
        if (row.algorithm == algo)
            return row.accuracy.mean;
    return -1.0;
}

void criterion_bench(Outcome& o)
{
    const auto& b = default_bench();
    const auto spec = cli::BenchSpec{};
    o.require(spec.generator.n_urls == 2000 && spec.generator.n_verifiers == 50 &&
                  spec.generator.reliability_mean == 0.8 && spec.seeds.size() == 10,
              "default spec changed");
    for (auto m : b.result.median_votes)
        o.require(m <= max_median_votes, "median votes per URL above the limit");
    for (const auto* a : {"pagerank", "em", "glad"})
        o.require(mean_accuracy(b.result, a) >= bench_min_accuracy, std::string(a) + " below the accuracy floor");
    o.require(mean_accuracy(b.result, "pagerank") >= mean_accuracy(b.result, "majority"),
              "pagerank below majority");
    o.require(b.seconds < bench_limit_s, "took longer than the limit");
    char buf[200];
    std::snprintf(buf, sizeof buf, "pagerank %.2f%%, em %.2f%%, glad %.2f%%, majority %.2f%%, %.1f s",
                  100 * mean_accuracy(b.result, "pagerank"), 100 * mean_accuracy(b.result, "em"),
                  100 * mean_accuracy(b.result, "glad"), 100 * mean_accuracy(b.result, "majority"), b.seconds);
    o.detail << buf;
}

void criterion_dawid_skene(Outcome& o)
{
    // re-check every trace here instead of trusting the bench flag alone
    std::size_t runs = 0, steps = 0;
    for (auto seed : cli::BenchSpec{}.seeds)
    {
        auto p = cli::BenchSpec{}.generator;
        p.seed = seed;
        const auto ds = truth::dawid_skene(truth::generate_synthetic(p).votes);
        for (std::size_t i = 1; i < ds.log_likelihood.size(); ++i, ++steps)
            o.require(ds.log_likelihood[i] >= ds.log_likelihood[i - 1] - em_slack,
                      "objective dropped on seed " + std::to_string(seed));
        ++runs;
    }
    o.require(default_bench().result.em_monotone, "bench flagged a non-monotone trace");

    const truth::Confusion c{{{0.8, 0.2}, {0.2, 0.8}}};
    const truth::VoteMatrix votes({{"u", "a", truth::Verdict::Phishing, 1},
                                   {"u", "b", truth::Verdict::Phishing, 2},
                                   {"u", "c", truth::Verdict::Phishing, 3}});
    const double post = truth::dawid_skene_e_step(votes, {{"a", c}, {"b", c}, {"c", c}}, 0.5).at("u");
    // 0.8^3 / (0.8^3 + 0.2^3) = 64/65, which rounds to 0.9846
    const double hand = 64.0 / 65.0;
    o.require(std::abs(post - hand) < e_step_tol, "E-step posterior off the hand value");
    o.require(std::abs(post - 0.9846) < 5e-5, "E-step posterior does not round to 0.9846");
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu runs, %zu EM steps non-decreasing, E-step %.6f", runs, steps, post);
    o.detail << buf;
}

void criterion_glad(Outcome& o)
{
    Rng rng(7);
    double worst = 0.0;
    for (std::size_t i = 0; i < glad_instances; ++i)
        worst = std::max(worst, glad_gradient_error(random_votes(rng, 6, 5, 2), rng));
    o.require(worst < glad_rel_tol, "gradient mismatch");
    o.detail << glad_instances << " instances, max relative error " << worst;
}

void criterion_score(Outcome& o)
{
    node::LocalClusterOptions opts;
    opts.n_validators = 4;
    opts.seed = 8;
    node::LocalCluster cluster(opts);
    node::ApiServer server(cluster.facade(0));
    node::HttpClient c("127.0.0.1:" + std::to_string(server.start({"127.0.0.1", 0})), std::chrono::seconds(60));
    node::ApiServer other(cluster.facade(2));
    node::HttpClient reader("127.0.0.1:" + std::to_string(other.start({"127.0.0.1", 0})));

    auto ok = [&](const node::HttpResponse& r, const std::string& what) {
        o.require(r.status == 200 && r.body.value("committed", false), what + " not committed");
    };
    auto submit = [&](const std::string& url) {
        ok(c.post("/api/v1/urls?wait=60000", {{"sender", "a"}, {"url", url}, {"evidence_email", "Log in at " + url}}),
           url);
        return ledger::url_id_for(url);
    };
    auto vote = [&](const std::string& who, const std::string& id, const char* v) {
        ok(c.post("/api/v1/urls/" + id + "/votes?wait=60000", {{"sender", who}, {"verdict", v}}), who + " vote");
    };

    const std::vector<std::string> users{"a", "b", "c", "d"};
    for (const auto& u : users)
        ok(c.post("/api/v1/users?wait=60000", {{"verifier_id", u}, {"display_name", u}}), "register " + u);
    const auto target = submit("http://account-verify.example/step1");
    const auto tie = submit("http://parcel-fee.example/pay");
    // Two URLs voted in reverse order balance the two forward URLs, so the
    // follower graph ends up complete with equal weights and equal ranks.
    for (const auto* m : {"http://mirror-one.example/", "http://mirror-two.example/"})
    {
        const auto id = submit(m);
        for (auto it = users.rbegin(); it != users.rend(); ++it)
            vote(*it, id, "Phishing");
    }
    vote("a", tie, "Phishing");
    vote("b", tie, "Phishing");
    vote("c", tie, "NotPhishing");
    vote("d", tie, "NotPhishing");

    vote("a", target, "Phishing");
    vote("b", target, "Phishing");
    auto two = reader.get("/api/v1/urls/" + target).body;
    o.require(two["status"] == "Unverified" && two["phish_score"].is_null(), "2 votes not Unverified");

    vote("c", target, "Phishing");
    auto three = reader.get("/api/v1/urls/" + target).body;
    o.require(three["phish_score"].is_number() && std::abs(three["phish_score"].get<double>() - 1.0) < score_tol,
              "[P,P,P] is not 1.0");
    o.require(three["status"] == "Phishing", "[P,P,P] not Phishing");

    vote("d", target, "NotPhishing");
    cluster.settle();
    auto four = reader.get("/api/v1/urls/" + target).body;
    for (const auto& v : four["votes"])
        o.require(std::abs(v["rank"].get<double>() - 0.25) < score_tol, "ranks are not equal");
    o.require(std::abs(four["phish_score"].get<double>() - 0.5) < score_tol, "[P,P,P,N] is not 0.5");

    const auto tl = reader.get("/api/v1/urls/" + target + "/timeline").body["timeline"];
    const bool shape = tl.size() == 4 && tl[0]["score"].is_null() && tl[1]["score"].is_null() &&
                       tl[2]["ordinal"] == 3 && std::abs(tl[2]["score"].get<double>() - 1.0) < score_tol &&
                       tl[3]["ordinal"] == 4 && std::abs(tl[3]["score"].get<double>() - 0.5) < score_tol;
    o.require(shape, "timeline is not [(3,1.0),(4,0.5)]");

    auto zero = reader.get("/api/v1/urls/" + tie).body;
    o.require(zero["phish_score"].is_number() && std::abs(zero["phish_score"].get<double>()) < score_tol,
              "[P,P,N,N] is not 0");
    o.require(zero["status"] == "NotPhishing", "score 0 is not NotPhishing");
    bool tie_listed = false, target_listed = false;
    for (const auto& e : reader.get("/api/v1/blacklist").body)
    {
        tie_listed |= e["url_id"] == tie;
        target_listed |= e["url_id"] == target;
    }
    o.require(!tie_listed, "score 0 URL on the blacklist");
    o.require(target_listed, "score 0.5 URL missing from the blacklist");
    o.detail << "timeline " << tl.dump();
}

void criterion_skill(Outcome& o)
{
    std::size_t checks = 0;
    for (int r = 0; r <= 20; ++r)
    {
        const double rank = r / 20.0;
        for (std::uint64_t cast = 1; cast <= 12; ++cast)
        {
            std::uint64_t last = 0;
            for (std::uint64_t correct = 0; correct <= cast; ++correct, ++checks)
            {
                const std::map<std::string, double> ranks{{"top", 1.0}, {"x", rank}};
                const std::map<std::string, truth::VoteTally> t{{"top", {1, 1}}, {"x", {cast, correct}}};
                const auto p = truth::skill_points(ranks, t).at("x");
                o.require(p >= last, "skill points fell as votes_correct rose");
                o.require(p <= 200, "skill points above 200");
                last = p;
            }
        }
    }
    const std::map<std::string, double> ranks{{"best", 0.7}, {"idle", 0.0}};
    const std::map<std::string, truth::VoteTally> t{{"best", {5, 5}}, {"idle", {4, 0}}};
    const auto sp = truth::skill_points(ranks, t);
    o.require(sp.at("best") == 200, "maximum is not 200");
    o.require(sp.at("idle") == 0, "minimum is not 0");
    o.detail << checks << " monotonicity checks, extremes " << sp.at("idle") << " and " << sp.at("best");
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"consensus safety", criterion_safety},
        {"consensus liveness", criterion_liveness},
        {"replica determinism", criterion_determinism},
        {"pagerank correctness", criterion_pagerank},
        {"truth-discovery benchmark", criterion_bench},
        {"dawid-skene", criterion_dawid_skene},
        {"glad gradient", criterion_glad},
        {"score semantics end-to-end", criterion_score},
        {"skill-point monotonicity", criterion_skill},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i)
    {
        Outcome o;
        try
        {
            criteria[i].second(o);
        }
        catch (const std::exception& e)
        {
            o.require(false, std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": "
                  << o.detail.str() << std::endl;
    }
    return failed ? 1 : 0;
}
