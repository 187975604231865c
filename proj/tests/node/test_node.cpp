#include <doctest.h>

#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/ledger/state_machine.hpp>
#include <crowdlist/node/config.hpp>
#include <crowdlist/node/derived.hpp>
#include <crowdlist/node/local_cluster.hpp>
#include <crowdlist/node/node_core.hpp>
#include <crowdlist/node/replica.hpp>
#include <crowdlist/node/views.hpp>
#include <crowdlist/truth/dataset.hpp>
#include <crowdlist/truth/graph.hpp>

#include <support/api.hpp>
#include <support/workload.hpp>

#include <cmath>
#include <fstream>
#include <random>

using namespace crowdlist;
using namespace crowdlist::node;
using crowdlist::testing::InProcessApi;
using crowdlist::testing::register_tx;
using crowdlist::testing::submit_tx;
using crowdlist::testing::vote_tx;
using ledger::Verdict;
using nlohmann::json;

namespace {

constexpr auto P = Verdict::Phishing;
constexpr auto N = Verdict::NotPhishing;

struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("crowdlist-node-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

// Builds and applies the next block on top of the replica's head.
ledger::Block extend(Replica& r, std::vector<ledger::Transaction> txs)
{
    const auto snap = r.snapshot();
    ledger::Block b;
    b.height = snap->height() + 1;
    b.parent_hash = snap->chain.back()->block_hash;
    b.transactions = std::move(txs);
    b.proposer = "v0";
    b.state_digest = ledger::state_digest(r.executor()(snap->state, b.transactions));
    b = ledger::seal(b);
    r.apply(b);
    return b;
}

// Registers a..e and votes on one URL in the given order.
std::vector<std::vector<ledger::Transaction>> small_history()
{
    const std::string url = "http://paypa1.example/signin";
    return {
        {register_tx("a"), register_tx("b"), register_tx("c"), register_tx("d")},
        {submit_tx("a", 2, url)},
        {vote_tx("a", 3, url, P), vote_tx("b", 2, url, P)},
        {vote_tx("c", 2, url, N)},
        {vote_tx("d", 2, url, P)},
    };
}

LocalClusterOptions cluster_options(std::size_t n, std::uint64_t seed = 1)
{
    LocalClusterOptions o;
    o.n_validators = n;
    o.seed = seed;
    return o;
}

double score_of(const json& view)
{
    REQUIRE(view["phish_score"].is_number());
    return view["phish_score"].get<double>();
}

} // namespace

TEST_CASE("derived state follows the ledger")
{
    Replica r(std::nullopt, truth_executor({}));
    auto h = small_history();
    extend(r, h[0]);
    SUBCASE("register-only blocks leave ranks alone")
    {
        for (const auto& [id, acc] : r.snapshot()->state.users)
            CHECK(acc.rank == 0.0);
    }
    extend(r, h[1]);
    extend(r, h[2]);
    const auto id = ledger::url_id_for("http://paypa1.example/signin");
    CHECK(r.snapshot()->state.urls.at(id).status == ledger::UrlStatus::Unverified);
    CHECK_FALSE(r.snapshot()->state.urls.at(id).phish_score);

    extend(r, h[3]);
    const auto& rec = r.snapshot()->state.urls.at(id);
    // Edges a->b, a->c, b->c; c dangles. With d = 0.85 the fixed point is
    // b = 1.425a, c = 2.63625a, so the score is -0.21125a = -0.21125/5.06125.
    REQUIRE(rec.phish_score);
    CHECK(std::abs(*rec.phish_score - (-0.21125 / 5.06125)) < 1e-6);
    CHECK(rec.status == ledger::UrlStatus::NotPhishing);

    double sum = 0.0;
    for (const auto& [uid, acc] : r.snapshot()->state.users)
    {
        CHECK(acc.rank > 0.0);
        sum += acc.rank;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);

    const auto& users = r.snapshot()->state.users;
    CHECK(users.at("a").votes_correct == 0);
    CHECK(users.at("c").votes_correct == 1);
    CHECK(users.at("c").votes_cast == 1);
    CHECK(users.at("d").votes_cast == 0);
}

TEST_CASE("replicas with the same chain serve identical bytes")
{
    Replica a(std::nullopt, truth_executor({}));
    Replica b(std::nullopt, truth_executor({}));
    for (const auto& txs : small_history())
        b.apply(extend(a, txs));

    const auto& sa = a.snapshot()->state;
    const auto& sb = b.snapshot()->state;
    const auto id = ledger::url_id_for("http://paypa1.example/signin");
    CHECK(url_view(sa, id, 3)->dump() == url_view(sb, id, 3)->dump());
    CHECK(graph_view(sa).dump() == graph_view(sb).dump());
    CHECK(blacklist_view(sa).dump() == blacklist_view(sb).dump());
    CHECK(a.snapshot()->state_digest == b.snapshot()->state_digest);
}

TEST_CASE("replica persistence and recovery")
{
    TempDir dir;
    ledger::Digest digest;
    std::string view;
    const auto id = ledger::url_id_for("http://paypa1.example/signin");
    {
        Replica r(dir.path, truth_executor({}));
        CHECK(r.height() == 0);
        for (const auto& txs : small_history())
            extend(r, txs);
        digest = r.snapshot()->state_digest;
        view = url_view(r.snapshot()->state, id, 3)->dump();
        CHECK(r.committed_height(ledger::transaction_id(register_tx("a"))) == 1);
    }

    SUBCASE("restart replays the log")
    {
        Replica r(dir.path, truth_executor({}));
        CHECK(r.height() == 5);
        CHECK(r.snapshot()->state_digest == digest);
        CHECK(url_view(r.snapshot()->state, id, 3)->dump() == view);
        CHECK(r.committed_height(ledger::transaction_id(register_tx("a"))) == 1);
    }

    SUBCASE("torn final line from a crash mid-append")
    {
        {
            std::ofstream out(dir.path / "chain.jsonl", std::ios::app);
            out << R"({"height":6,"transac)";
        }
        Replica r(dir.path, truth_executor({}));
        CHECK(r.snapshot()->state_digest == digest);
        extend(r, {register_tx("e")});
        Replica again(dir.path, truth_executor({}));
        CHECK(again.height() == 6);
    }

    SUBCASE("a different truth configuration cannot replay this chain")
    {
        TruthParams other;
        other.pagerank.damping = 0.5;
        CHECK_THROWS_AS(Replica(dir.path, truth_executor(other)), ledger::ReplayError);
    }
}

TEST_CASE("replica rejects bad blocks")
{
    Replica r(std::nullopt, truth_executor({}));
    auto b1 = extend(r, {register_tx("a")});

    ledger::Block gap = b1;
    gap.height = 3;
    CHECK_THROWS_AS(r.apply(ledger::seal(gap)), ChainGap);

    ledger::Block wrong_digest;
    wrong_digest.height = 2;
    wrong_digest.parent_hash = b1.block_hash;
    wrong_digest.transactions = {register_tx("b")};
    wrong_digest.state_digest = ledger::sha256("x");
    CHECK_THROWS_AS(r.apply(ledger::seal(wrong_digest)), ledger::ReplayError);
    CHECK(r.height() == 1);
}

TEST_CASE("node core assigns nonces from committed plus pending writes")
{
    const consensus::ValidatorSet vs({"v0"});
    NodeCore core("v0", consensus::Role::Validator, vs, {}, {}, std::nullopt);
    auto w1 = core.prepare_write("alice", ledger::RegisterUser{"Alice"});
    CHECK(w1.accepted());
    CHECK(w1.tx.nonce == 1);
    auto w2 = core.prepare_write("alice", ledger::SubmitUrl{"http://a.example/", "see http://a.example/"});
    CHECK(w2.accepted());
    CHECK(w2.tx.nonce == 2);
    auto dup = core.prepare_write("alice", ledger::SubmitUrl{"http://a.example/", "see http://a.example/"});
    CHECK(dup.rejection == ledger::Rejection::DuplicateUrl);
    auto w3 = core.prepare_write("alice", ledger::CastVote{ledger::url_id_for("http://a.example/"), P});
    CHECK(w3.tx.nonce == 3); // the rejected write used no nonce
    CHECK(core.pending_writes() == 3);

    // a single validator commits on its own
    auto out = core.step(consensus::ProposeRequest{{w1.tx, w2.tx, w3.tx}}, 0);
    CHECK(out.committed.size() == 1);
    CHECK(core.replica().height() == 1);
    CHECK(core.pending_writes() == 0);
    CHECK(core.prepare_write("alice", ledger::RegisterUser{"x"}).rejection == ledger::Rejection::DuplicateUser);
}

TEST_CASE("views")
{
    ledger::ChainState s = ledger::execute_block({}, std::vector{register_tx("a"), register_tx("b"), register_tx("c"),
                                                                 register_tx("d")});
    SUBCASE("graph before any vote uses the teleport rank")
    {
        auto g = graph_view(s);
        REQUIRE(g["nodes"].size() == 4);
        for (const auto& n : g["nodes"])
            CHECK(n["rank"].get<double>() == doctest::Approx(0.25));
        CHECK(g["edges"].empty());
    }
    SUBCASE("blacklist order and exclusions")
    {
        auto add = [&](const std::string& url, ledger::UrlStatus status, std::optional<double> score) {
            ledger::UrlRecord rec;
            rec.url_id = ledger::url_id_for(url);
            rec.url = url;
            rec.status = status;
            rec.phish_score = score;
            s.urls[rec.url_id] = rec;
        };
        CHECK(blacklist_view(s).empty());
        add("http://low.example/", ledger::UrlStatus::Phishing, 0.2);
        add("http://high.example/", ledger::UrlStatus::Phishing, 0.5);
        add("http://zero.example/", ledger::UrlStatus::NotPhishing, 0.0);
        add("http://new.example/", ledger::UrlStatus::Unverified, std::nullopt);
        auto bl = blacklist_view(s);
        REQUIRE(bl.size() == 2);
        CHECK(bl[0]["phish_score"] == 0.5);
        CHECK(bl[1]["phish_score"] == 0.2);
        CHECK(bl[0]["url"] == "http://high.example/");
    }
    SUBCASE("blocks window")
    {
        std::vector<std::shared_ptr<const ledger::Block>> chain{std::make_shared<ledger::Block>(ledger::make_genesis())};
        CHECK(blocks_view(chain, 0, 10).size() == 1);
        CHECK(blocks_view(chain, 1, 10).empty());
    }
}

TEST_CASE("node config")
{
    const json good{{"node_id", "v1"},
                    {"role", "Validator"},
                    {"listen_address", "127.0.0.1:9001"},
                    {"validators", {"v0", "v1"}},
                    {"peer_addresses", {{{"node_id", "v0"}, {"address", "127.0.0.1:9000"}}}},
                    {"data_dir", "/tmp/x"}};
    auto c = parse_node_config(good);
    CHECK(c.node_id == "v1");
    CHECK(c.role == consensus::Role::Validator);
    CHECK(parse_node_config(config_to_json(c)).peer_addresses.size() == 1);

    auto bad = [&](auto mutate) {
        json j = good;
        mutate(j);
        CHECK_THROWS_AS(parse_node_config(j), ConfigError);
    };
    bad([](json& j) { j["role"] = "Observer"; });
    bad([](json& j) { j["node_id"] = "v9"; });
    bad([](json& j) { j.erase("validators"); });
    bad([](json& j) { j["listen_address"] = "nohost"; });
    bad([](json& j) { j["peer_addresses"].push_back({{"node_id", "v1"}, {"address", "127.0.0.1:1"}}); });
    bad([](json& j) { j["truth"] = {{"damping", 1.5}}; });
    bad([](json& j) { j["consensus"] = {{"base_timeout_ms", 0}}; });

    json normal = good;
    normal["role"] = "Normal";
    CHECK_THROWS_AS(parse_node_config(normal), ConfigError); // a normal node is not a validator
    normal["node_id"] = "n0";
    CHECK(parse_node_config(normal).role == consensus::Role::Normal);

    CHECK(parse_host_port("localhost:80").port == 80);
    CHECK_THROWS_AS(parse_host_port("localhost:99999"), ConfigError);
    CHECK_THROWS_AS(load_node_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("api lifecycle on a four-node cluster")
{
    LocalCluster cluster(cluster_options(4));
    InProcessApi api{cluster.facade(0)};
    InProcessApi other{cluster.facade(3)};
    const std::string url = "http://secure-paypa1.example/login";
    const auto id = ledger::url_id_for(url);

    for (const auto* u : {"a", "b", "c", "d", "e"})
    {
        auto r = api.register_user(u);
        CHECK(r.status == 200);
        CHECK(r.body["committed"] == true);
    }
    CHECK(api.register_user("a").body["error"] == "DuplicateUser");

    auto sub = api.submit("a", url);
    CHECK(sub.status == 200);
    CHECK(sub.body["url_id"] == id);

    SUBCASE("submission rules")
    {
        CHECK(api.submit("b", "HTTP://SECURE-PAYPA1.example:80/login").body["error"] == "DuplicateUrl");
        auto no_ev = api.post("/api/v1/urls", {{"sender", "b"}, {"url", "http://x.example/"}, {"evidence_email", "hi"}});
        CHECK(no_ev.status == 400);
        CHECK(no_ev.body["error"] == "EvidenceMismatch");
        CHECK(api.submit("zed", "http://y.example/").body["error"] == "UnknownUser");
        CHECK(api.submit("b", "no-scheme").body["error"] == "MalformedUrl");
    }

    SUBCASE("unknown url and bad verdicts")
    {
        auto r = api.post("/api/v1/urls/deadbeef/votes", {{"sender", "b"}, {"verdict", "Phishing"}});
        CHECK(r.status == 400);
        CHECK(r.body["error"] == "UnknownUrl");
        CHECK(api.post("/api/v1/urls/" + id + "/votes", {{"sender", "b"}, {"verdict", "Maybe"}}).body["error"] ==
              "BadRequest");
    }

    SUBCASE("scoring as votes arrive")
    {
        CHECK(other.lookup(url)["status"] == "Unverified");
        api.vote("a", url, "Phishing");
        api.vote("b", url, "Phishing");
        auto two = other.lookup(url);
        CHECK(two["status"] == "Unverified");
        CHECK(two["phish_score"].is_null());
        for (const auto& e : two["timeline"])
            CHECK(e["insufficient"] == true);

        CHECK(api.vote("b", url, "NotPhishing").body["error"] == "DuplicateVote");
        api.vote("c", url, "NotPhishing");
        CHECK(other.lookup(url)["status"] != "Unverified");
        CHECK(other.lookup(url)["vote_count"] == 3);

        // lookup by raw URL normalizes first
        auto lk = other.get("/api/v1/lookup", {{"url", "HTTP://secure-paypa1.EXAMPLE/login"}});
        CHECK(lk.status == 200);
        CHECK(lk.body["url_id"] == id);
    }

    SUBCASE("read endpoints")
    {
        CHECK(other.get("/api/v1/verifiers/a").body["verifier_id"] == "a");
        CHECK(other.get("/api/v1/verifiers/nobody").status == 404);
        CHECK(other.get("/api/v1/urls/nothing").status == 404);
        CHECK(other.get("/api/v1/urls/nothing/timeline").status == 404);
        CHECK(other.get("/api/v1/lookup").status == 400);
        CHECK(other.get("/api/v1/lookup", {{"url", "nope"}}).body["error"] == "MalformedUrl");
        CHECK(other.get("/api/v1/lookup", {{"url", "http://unknown.example/"}}).status == 404);
        CHECK(other.get("/api/v1/blacklist").body == json::array());
        CHECK(other.get("/api/v1/nowhere").status == 404);
        CHECK(other.get("/elsewhere").status == 404);
        CHECK(node::handle_api(cluster.facade(0), {"DELETE", "/api/v1/blacklist", {}, ""}).status == 405);
        CHECK(api.post("/api/v1/users", json::array()).body["error"] == "BadRequest");
        CHECK(node::handle_api(cluster.facade(0), {"POST", "/api/v1/users", {}, "{not json"}).status == 400);
        CHECK(node::handle_api(cluster.facade(0), {"POST", "/api/v1/users", {{"wait", "x"}}, "{}"}).status == 400);

        auto blocks = other.get("/api/v1/chain/blocks", {{"from", "0"}, {"to", "1"}});
        REQUIRE(blocks.body.size() == 2);
        CHECK(blocks.body[0].get<ledger::Block>() == ledger::make_genesis());
        CHECK(other.get("/api/v1/chain/blocks", {{"from", "x"}}).status == 400);

        auto st = other.get("/api/v1/status").body;
        CHECK(st["node_id"] == "v3");
        CHECK(st["height"].get<std::uint64_t>() >= 1);
    }
}

TEST_CASE("P,P,N then N,N with equal ranks flips the status")
{
    LocalCluster cluster(cluster_options(4, 2));
    InProcessApi api{cluster.facade(1)};
    const std::string u = "http://flip.example/a";
    const std::string mirror = "http://mirror.example/b";
    const std::vector<std::string> users{"a", "b", "c", "d", "e"};
    for (const auto& x : users)
        api.register_user(x);
    api.submit("a", u);
    api.submit("a", mirror);

    // Voting the mirror URL in reverse order makes the follower graph a
    // uniformly weighted complete graph, so every verifier gets rank 1/5.
    for (auto it = users.rbegin(); it != users.rend(); ++it)
        api.vote(*it, mirror, "Phishing");
    api.vote("a", u, "Phishing");
    api.vote("b", u, "Phishing");
    api.vote("c", u, "NotPhishing");
    CHECK(api.lookup(u)["status"] == "Phishing");
    CHECK(score_of(api.lookup(u)) > 0.0);

    api.vote("d", u, "NotPhishing");
    api.vote("e", u, "NotPhishing");
    auto view = InProcessApi{cluster.facade(3)}.lookup(u);
    CHECK(std::abs(score_of(view) - (2.0 - 3.0) / 5.0) < 1e-6);
    CHECK(view["status"] == "NotPhishing");
    for (const auto& v : view["votes"])
        CHECK(std::abs(v["rank"].get<double>() - 0.2) < 1e-6);

    SUBCASE("graph export survives a dataset round trip")
    {
        auto snap = cluster.facade(3).snapshot();
        auto votes = vote_matrix_of(snap->state);
        truth::LabeledDataset ds;
        ds.votes = votes;
        auto back = truth::dataset_from_json(truth::dataset_to_json(ds));
        auto rebuilt = truth::build_verifier_graph(back.votes);

        auto g = graph_view(snap->state);
        std::map<std::pair<std::string, std::string>, std::uint64_t> exported;
        for (const auto& e : g["edges"])
            exported[{e["from"], e["to"]}] = e["weight"];
        CHECK(exported == rebuilt.edges);
        CHECK(g["edges"].size() == 20);
    }
}

TEST_CASE("seven-node cluster commits a URL everywhere")
{
    TempDir dir;
    auto opts = cluster_options(7, 3);
    opts.n_normal = 1;
    opts.data_root = dir.path;
    LocalCluster cluster(opts);
    InProcessApi api{cluster.facade(2)};
    api.register_user("a");
    auto sub = api.submit("a", "http://everywhere.example/");
    CHECK(sub.body["committed"] == true);
    cluster.settle();

    const auto digest = cluster.facade(0).snapshot()->state_digest;
    for (std::size_t i = 0; i < cluster.size(); ++i)
    {
        INFO(cluster.node_id(i));
        CHECK(cluster.facade(i).snapshot()->state_digest == digest);
        CHECK(InProcessApi{cluster.facade(i)}.lookup("http://everywhere.example/")["status"] == "Unverified");
    }
    CHECK(cluster.node_id(7) == "n0");
    CHECK(std::filesystem::exists(dir.path / "n0" / "chain.jsonl"));
    CHECK(cluster.core(7).consensus_node().role() == consensus::Role::Normal);
}
