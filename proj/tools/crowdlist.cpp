#include <crowdlist/cli/commands.hpp>

#include <CLI11.hpp>

#include <iostream>

using namespace crowdlist::cli;

int main(int argc, char** argv)
{
    CLI::App app{"crowdlist: crowd-verified phishing URL blacklist on a replicated ledger"};
    app.require_subcommand(1);
    Io io{std::cout, std::cerr};

    // node
    std::string config;
    std::size_t local_cluster = 0;
    std::string listen_base = "127.0.0.1:8080";
    std::uint64_t cluster_seed = 1;
    auto* node = app.add_subcommand("node", "Run a node (or an in-process cluster)");
    auto* config_opt = node->add_option("--config", config, "Node config JSON");
    auto* cluster_opt = node->add_option("--local-cluster", local_cluster, "Run N validators in this process")
                            ->check(CLI::Range(1, 64));
    config_opt->excludes(cluster_opt);
    node->add_option("--listen", listen_base, "First API address for --local-cluster (ports count up)");
    node->add_option("--seed", cluster_seed, "Network seed for --local-cluster");

    // sim
    std::string scenario;
    bool json = false;
    auto* sim = app.add_subcommand("sim", "Run a consensus fault scenario");
    sim->add_option("--scenario", scenario, "Scenario JSON")->required();
    sim->add_flag("--json", json, "Print the JSON report");

    // bench
    std::string spec;
    std::uint64_t seed = 0;
    auto* bench = app.add_subcommand("bench", "Compare truth-discovery algorithms on synthetic data");
    auto* spec_opt = bench->add_option("--spec", spec, "Bench spec JSON (default spec if omitted)");
    auto* seed_opt = bench->add_option("--seed", seed, "Run this single seed");
    bench->add_flag("--json", json, "Print JSON");

    // API clients
    WriteOptions w;
    std::optional<std::uint64_t> wait;
    auto add_write_opts = [&](CLI::App* cmd) {
        cmd->add_option("--api", w.api, "Node API address host:port")->required();
        cmd->add_option("--wait", wait, "Wait up to MS for the transaction to commit");
        cmd->add_flag("--json", w.json, "Print the raw response");
    };

    std::string id, name, sender, url, evidence, verdict, target;
    auto* reg = app.add_subcommand("register", "Register a verifier");
    add_write_opts(reg);
    reg->add_option("--id", id, "Verifier id")->required();
    reg->add_option("--name", name, "Display name")->required();

    auto* submit = app.add_subcommand("submit", "Submit a suspected phishing URL");
    add_write_opts(submit);
    submit->add_option("--sender", sender, "Verifier id")->required();
    submit->add_option("--url", url, "Suspected URL")->required();
    submit->add_option("--evidence", evidence, "Evidence email text")->required();

    auto* vote = app.add_subcommand("vote", "Vote on a submitted URL");
    add_write_opts(vote);
    vote->add_option("--sender", sender, "Verifier id")->required();
    vote->add_option("--url", target, "URL or url_id")->required();
    vote->add_option("--verdict", verdict, "Phishing or NotPhishing")->required();

    std::string api;
    auto* lookup = app.add_subcommand("lookup", "Look up a URL's status");
    lookup->add_option("--api", api, "Node API address host:port")->required();
    lookup->add_option("--url", url, "URL")->required();
    lookup->add_flag("--json", json, "Print the raw response");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    w.wait_ms = wait;

    if (node->parsed())
    {
        if (*cluster_opt)
            return cmd_local_cluster(local_cluster, listen_base, cluster_seed, io);
        if (!*config_opt)
        {
            std::cerr << "error: node needs --config or --local-cluster\n";
            return exit_usage;
        }
        return cmd_node(config, io);
    }
    if (sim->parsed())
        return cmd_sim(scenario, json, io);
    if (bench->parsed())
        return cmd_bench(*spec_opt ? std::optional<std::filesystem::path>(spec) : std::nullopt,
                         *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, json, io);
    if (reg->parsed())
        return cmd_register(w, id, name, io);
    if (submit->parsed())
        return cmd_submit(w, sender, url, evidence, io);
    if (vote->parsed())
        return cmd_vote(w, sender, target, verdict, io);
    if (lookup->parsed())
        return cmd_lookup(api, url, json, io);
    return exit_usage;
}
