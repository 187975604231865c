#include <doctest.h>

#include <crowdlist/ledger/url.hpp>
#include <crowdlist/node/http.hpp>
#include <crowdlist/node/local_cluster.hpp>
#include <crowdlist/node/node_host.hpp>

#include <support/ports.hpp>

#include <random>
#include <thread>

using namespace crowdlist;
using namespace crowdlist::node;
using crowdlist::testing::free_port;
using nlohmann::json;

namespace {

struct TempDir
{
    std::filesystem::path path;
    TempDir()
    {
        path = std::filesystem::temp_directory_path() / ("crowdlist-http-" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string evidence(const std::string& url)
{
    return "We noticed unusual activity, verify at " + url;
}

// Polls until pred() holds or the deadline passes.
template <typename Pred>
bool eventually(Pred pred, std::chrono::milliseconds limit = std::chrono::seconds(20))
{
    const auto end = std::chrono::steady_clock::now() + limit;
    while (std::chrono::steady_clock::now() < end)
    {
        if (pred())
            return true;
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    return pred();
}

struct HostCluster
{
    std::vector<NodeConfig> configs;
    std::vector<std::unique_ptr<NodeHost>> hosts;

    HostCluster(std::size_t n_validators, std::size_t n_normal, const std::filesystem::path& root)
    {
        std::vector<std::string> ids;
        for (std::size_t i = 0; i < n_validators; ++i)
            ids.push_back("v" + std::to_string(i));
        std::vector<PeerAddress> all;
        for (std::size_t i = 0; i < n_validators + n_normal; ++i)
        {
            const auto id = i < n_validators ? ids[i] : "n" + std::to_string(i - n_validators);
            all.push_back({id, "127.0.0.1:" + std::to_string(free_port())});
        }
        for (const auto& self : all)
        {
            NodeConfig c;
            c.node_id = self.node_id;
            c.role = self.node_id[0] == 'v' ? consensus::Role::Validator : consensus::Role::Normal;
            c.listen_address = self.address;
            c.validators = ids;
            for (const auto& p : all)
                if (p.node_id != self.node_id)
                    c.peer_addresses.push_back(p);
            c.data_dir = root / self.node_id;
            c.consensus.base_timeout_ms = 300;
            configs.push_back(c);
        }
        for (std::size_t i = 0; i < configs.size(); ++i)
            start(i);
    }

    void start(std::size_t i)
    {
        if (hosts.size() <= i)
            hosts.resize(i + 1);
        hosts[i] = std::make_unique<NodeHost>(configs[i]);
        hosts[i]->pull_interval = std::chrono::milliseconds(100);
        hosts[i]->start();
    }

    void stop(std::size_t i) { hosts[i].reset(); }

    HttpClient client(std::size_t i) const { return HttpClient(configs[i].listen_address); }
};

} // namespace

TEST_CASE("api server over a local cluster")
{
    LocalClusterOptions o;
    o.n_validators = 4;
    LocalCluster cluster(o);
    ApiServer server(cluster.facade(0));
    const auto port = server.start({"127.0.0.1", 0});
    HttpClient c("127.0.0.1:" + std::to_string(port));

    auto r = c.post("/api/v1/users?wait=30000", {{"verifier_id", "alice"}, {"display_name", "Alice"}});
    CHECK(r.status == 200);
    CHECK(r.body["committed"] == true);
    CHECK(r.body["nonce"] == 1);

    const std::string url = "http://login.example/a b?q=1&r=2";
    CHECK(c.post("/api/v1/urls?wait=30000", {{"sender", "alice"}, {"url", url}, {"evidence_email", evidence(url)}})
              .body["error"] == "MalformedUrl");
    const std::string good = "http://login.example/a?q=1&r=2";
    r = c.post("/api/v1/urls?wait=30000", {{"sender", "alice"}, {"url", good}, {"evidence_email", evidence(good)}});
    CHECK(r.status == 200);

    // the query string survives percent-encoding
    r = c.get("/api/v1/lookup?url=" + url_encode(good));
    CHECK(r.status == 200);
    CHECK(r.body["url"] == good);
    CHECK(r.body["status"] == "Unverified");

    CHECK(c.get("/api/v1/urls/" + ledger::url_id_for(good) + "/timeline").body["timeline"] == json::array());
    CHECK(c.get("/api/v1/graph").body["nodes"].size() == 1);
    CHECK(c.get("/api/v1/blacklist").body == json::array());
    CHECK(c.get("/api/v1/missing").status == 404);
    CHECK(c.get("/internal/v1/consensus").status == 404);

    HttpClient raw("127.0.0.1:" + std::to_string(port));
    auto bad = raw.post("/api/v1/users", json("just a string"));
    CHECK(bad.status == 400);
    CHECK(bad.body["error"] == "BadRequest");

    server.stop();
    CHECK_THROWS_AS(HttpClient("127.0.0.1:" + std::to_string(port), std::chrono::milliseconds(300)).get("/"),
                    ConnectionError);
}

TEST_CASE("binding a taken port is a config error")
{
    LocalClusterOptions o;
    o.n_validators = 1;
    LocalCluster cluster(o);
    ApiServer a(cluster.facade(0));
    const auto port = a.start({"127.0.0.1", 0});
    ApiServer b(cluster.facade(0));
    CHECK_THROWS_AS(b.start({"127.0.0.1", port}), ConfigError);
}

TEST_CASE("networked validators and a normal node")
{
    TempDir dir;
    HostCluster hc(4, 1, dir.path);
    const std::size_t normal = 4;

    // Writes through the normal node are forwarded to the validators.
    auto n = hc.client(normal);
    auto r = n.post("/api/v1/users?wait=20000", {{"verifier_id", "alice"}, {"display_name", "Alice"}});
    REQUIRE(r.status == 200);
    CHECK(r.body["committed"] == true);

    const std::string url = "http://wallet-recovery.example/seed";
    r = hc.client(1).post("/api/v1/urls?wait=20000",
                          {{"sender", "alice"}, {"url", url}, {"evidence_email", evidence(url)}});
    REQUIRE(r.status == 200);
    CHECK(r.body["nonce"] == 2);

    auto digests_agree = [&](std::vector<std::size_t> nodes) {
        std::set<std::string> seen;
        for (auto i : nodes)
        {
            try
            {
                auto st = hc.client(i).get("/api/v1/status").body;
                seen.insert(st["state_digest"].get<std::string>() + "@" + std::to_string(st["height"].get<int>()));
            }
            catch (const ConnectionError&)
            {
                return false;
            }
        }
        return seen.size() == 1;
    };
    CHECK(eventually([&] { return digests_agree({0, 1, 2, 3, 4}); }));
    CHECK(n.get("/api/v1/lookup?url=" + url_encode(url)).body["status"] == "Unverified");

    SUBCASE("one validator down, then back")
    {
        hc.stop(3);
        for (const auto* u : {"bob", "carol"})
        {
            auto w = hc.client(0).post("/api/v1/users?wait=20000", {{"verifier_id", u}, {"display_name", u}});
            CHECK(w.body["committed"] == true);
        }
        CHECK(eventually([&] { return digests_agree({0, 1, 2, 4}); }));

        hc.start(3); // replays its log, then catches up from peers
        CHECK(eventually([&] { return digests_agree({0, 1, 2, 3, 4}); }));
        CHECK(hc.client(3).get("/api/v1/verifiers/carol").status == 200);
    }

    SUBCASE("internal endpoints validate input")
    {
        HttpClient v0 = hc.client(0);
        CHECK(v0.post("/internal/v1/consensus", json{{"kind", "Nope"}}).status == 400);
        CHECK(v0.post("/internal/v1/elsewhere", json::object()).status == 404);
        CHECK(v0.get("/internal/v1/tx").status == 405);
        CHECK(n.post("/internal/v1/tx", json::object()).status == 404); // normal nodes take no mempool input
    }
}
