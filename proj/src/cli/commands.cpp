#include <crowdlist/cli/commands.hpp>

#include <crowdlist/cli/bench.hpp>
#include <crowdlist/consensus/simulator.hpp>
#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/ledger/url.hpp>
#include <crowdlist/node/http.hpp>
#include <crowdlist/node/local_cluster.hpp>
#include <crowdlist/node/node_host.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include <pthread.h>

namespace crowdlist::cli {

using nlohmann::json;

namespace {

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path.string());
    return json::parse(in); // throws json::parse_error
}

std::string short_hex(const ledger::Digest& d)
{
    return d.hex().substr(0, 12);
}

void print_report(const consensus::SimulationReport& r, bool expect_stalled, std::ostream& out)
{
    out << "seed " << r.seed << ", simulated " << r.max_time << " ms\n\n";
    out << std::left << std::setw(6) << "node" << std::setw(11) << "role" << std::setw(12) << "fault"
        << std::setw(8) << "height" << std::setw(14) << "state" << std::setw(8) << "sent" << std::setw(9)
        << "dropped" << "mempool\n";
    for (const auto& n : r.nodes)
        out << std::setw(6) << n.id << std::setw(11) << consensus::to_string(n.role) << std::setw(12)
            << consensus::to_string(n.fault) << std::setw(8) << n.height << std::setw(14) << short_hex(n.state_digest)
            << std::setw(8) << n.messages_sent << std::setw(9) << n.dropped_inputs << n.mempool << '\n';
    out << "\ntransactions: " << r.committed_txs << "/" << r.injected_txs << " committed\n";
    out << "messages:";
    for (const auto& [kind, count] : r.message_counts)
        out << ' ' << kind << '=' << count;
    out << " lost=" << r.messages_lost << '\n';
    out << "stalled: " << (r.stalled ? "true" : "false") << " (expected " << (expect_stalled ? "true" : "false")
        << ")\n";
    out << "safety: " << (r.safety_ok ? "ok" : "VIOLATED") << '\n';
}

// Writes share one shape: POST, then print the outcome.
int run_write(const WriteOptions& o, const std::string& path, const json& body, Io io)
{
    std::string target = path;
    if (o.wait_ms)
        target += "?wait=" + std::to_string(*o.wait_ms);
    node::HttpResponse res;
    try
    {
        // A wait can legitimately take as long as requested.
        node::HttpClient client(o.api, std::chrono::milliseconds(10000 + o.wait_ms.value_or(0)));
        res = client.post(target, body);
    }
    catch (const node::ConnectionError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    if (o.json)
        io.out << res.body.dump(2) << '\n';
    if (res.status != 200)
    {
        if (!o.json)
            io.out << "rejected: "
                   << (res.body.is_object() && res.body.contains("error") ? res.body["error"].get<std::string>()
                                                                          : "HTTP " + std::to_string(res.status))
                   << '\n';
        return exit_rejected;
    }
    if (!o.json)
    {
        io.out << "accepted tx " << res.body.value("tx_id", "") << " (nonce " << res.body.value("nonce", 0) << ")\n";
        if (res.body.contains("url_id"))
            io.out << "url_id: " << res.body["url_id"].get<std::string>() << '\n';
        if (res.body.contains("committed"))
            io.out << "committed: " << (res.body["committed"].get<bool>() ? "true" : "false") << '\n';
    }
    return exit_ok;
}

std::string format_score(const json& score)
{
    if (score.is_null())
        return "-";
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << score.get<double>();
    return s.str();
}

void block_stop_signals(sigset_t& set)
{
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

void wait_for_stop_signal(const sigset_t& set)
{
    int sig = 0;
    sigwait(&set, &sig);
}

} // namespace

int cmd_sim(const std::filesystem::path& scenario_path, bool as_json, Io io)
{
    consensus::Scenario scenario;
    consensus::SimulationReport report;
    try
    {
        scenario = consensus::parse_scenario(read_json_file(scenario_path));
        report = consensus::run_simulation(scenario);
    }
    catch (const std::exception& e) // malformed JSON, ScenarioInvalid, ParseError, unreadable file
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    if (as_json)
        io.out << consensus::report_to_json(report).dump(2) << '\n';
    else
        print_report(report, scenario.expect_stalled, io.out);
    return report.safety_ok && report.stalled == scenario.expect_stalled ? exit_ok : exit_rejected;
}

int cmd_bench(const std::optional<std::filesystem::path>& spec_path, std::optional<std::uint64_t> seed, bool as_json,
              Io io)
{
    BenchResult result;
    try
    {
        BenchSpec spec = spec_path ? parse_bench_spec(read_json_file(*spec_path)) : BenchSpec{};
        if (seed)
            spec.seeds = {*seed};
        validate(spec);
        result = run_bench(spec);
    }
    catch (const std::exception& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    if (as_json)
        io.out << bench_to_json(result).dump(2) << '\n';
    else
        io.out << format_bench_table(result);
    return exit_ok;
}

int cmd_register(const WriteOptions& o, const std::string& verifier_id, const std::string& display_name, Io io)
{
    return run_write(o, "/api/v1/users", json{{"verifier_id", verifier_id}, {"display_name", display_name}}, io);
}

int cmd_submit(const WriteOptions& o, const std::string& sender, const std::string& url, const std::string& evidence,
               Io io)
{
    return run_write(o, "/api/v1/urls", json{{"sender", sender}, {"url", url}, {"evidence_email", evidence}}, io);
}

int cmd_vote(const WriteOptions& o, const std::string& sender, const std::string& target, const std::string& verdict,
             Io io)
{
    std::string url_id = target;
    if (target.find("://") != std::string::npos)
    {
        auto normalized = ledger::normalize_url(target);
        if (!normalized)
        {
            io.out << "rejected: MalformedUrl\n";
            return exit_rejected;
        }
        url_id = ledger::url_id_for(*normalized);
    }
    return run_write(o, "/api/v1/urls/" + url_id + "/votes", json{{"sender", sender}, {"verdict", verdict}}, io);
}

int cmd_lookup(const std::string& api, const std::string& url, bool as_json, Io io)
{
    node::HttpResponse res;
    try
    {
        node::HttpClient client(api);
        res = client.get("/api/v1/lookup?url=" + node::url_encode(url));
    }
    catch (const node::ConnectionError& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }

    if (res.status == 404)
    {
        // Nobody has reported it: from the client's side that is still unverified.
        if (as_json)
            io.out << json{{"url", url}, {"status", "Unverified"}, {"on_chain", false}}.dump(2) << '\n';
        else
            io.out << "url: " << url << "\nstatus: Unverified\nnot submitted\n";
        return exit_ok;
    }
    if (res.status != 200)
    {
        if (as_json)
            io.out << res.body.dump(2) << '\n';
        else
            io.out << "rejected: "
                   << (res.body.is_object() && res.body.contains("error") ? res.body["error"].get<std::string>()
                                                                          : "HTTP " + std::to_string(res.status))
                   << '\n';
        return exit_rejected;
    }
    if (as_json)
    {
        io.out << res.body.dump(2) << '\n';
        return exit_ok;
    }
    const auto& b = res.body;
    io.out << "url: " << b.value("url", "") << '\n'
           << "url_id: " << b.value("url_id", "") << '\n'
           << "status: " << b.value("status", "") << '\n'
           << "phish_score: " << format_score(b.value("phish_score", json())) << '\n'
           << "votes: " << b.value("vote_count", 0) << '\n';
    return exit_ok;
}

int cmd_node(const std::filesystem::path& config_path, Io io)
{
    sigset_t set;
    block_stop_signals(set);

    std::unique_ptr<node::NodeHost> host;
    std::uint16_t port = 0;
    node::NodeConfig config;
    try
    {
        config = node::load_node_config(config_path);
        host = std::make_unique<node::NodeHost>(config);
        port = host->start();
    }
    catch (const std::exception& e) // ConfigError, ReplayError, filesystem errors
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    io.out << "node " << config.node_id << " (" << consensus::to_string(config.role) << ") serving on http://"
           << node::parse_host_port(config.listen_address).host << ':' << port << std::endl;
    wait_for_stop_signal(set);
    host->stop();
    return exit_ok;
}

int cmd_local_cluster(std::size_t n, const std::string& listen_base, std::uint64_t seed, Io io)
{
    sigset_t set;
    block_stop_signals(set);

    node::HostPort base;
    std::unique_ptr<node::LocalCluster> cluster;
    std::vector<std::unique_ptr<node::ApiServer>> servers;
    try
    {
        base = node::parse_host_port(listen_base);
        node::LocalClusterOptions options;
        options.n_validators = n;
        options.seed = seed;
        cluster = std::make_unique<node::LocalCluster>(options);
        for (std::size_t i = 0; i < cluster->size(); ++i)
        {
            servers.push_back(std::make_unique<node::ApiServer>(cluster->facade(i)));
            node::HostPort listen = base;
            if (base.port != 0)
                listen.port = static_cast<std::uint16_t>(base.port + i);
            const auto port = servers.back()->start(listen);
            io.out << cluster->node_id(i) << " serving on http://" << base.host << ':' << port << '\n';
        }
    }
    catch (const std::exception& e)
    {
        io.err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    io.out << std::flush;

    // Simulated time follows the wall clock while idle.
    std::atomic<bool> stop{false};
    std::thread pump([&] {
        while (!stop)
        {
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
            cluster->pump(10);
        }
    });
    wait_for_stop_signal(set);
    stop = true;
    pump.join();
    for (auto& s : servers)
        s->stop();
    return exit_ok;
}

} // namespace crowdlist::cli
