#pragma once

#include <crowdlist/consensus/node.hpp>

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace crowdlist::consensus {

class ScenarioInvalid : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

enum class FaultKind
{
    None,
    Crash,
    Equivocate,
    Mute
};

std::string_view to_string(FaultKind k);

struct Fault
{
    std::string node;
    FaultKind behavior = FaultKind::None;
    std::uint64_t at_time = 0; // Crash only
};

struct DelayModel
{
    std::uint64_t min_ms = 10;
    std::uint64_t max_ms = 50;
};

/// Messages between group_a and group_b are lost while from_time <= t < to_time.
struct Partition
{
    std::uint64_t from_time = 0;
    std::uint64_t to_time = 0;
    std::vector<std::string> group_a;
    std::vector<std::string> group_b;
};

struct WorkloadItem
{
    std::uint64_t at = 0;
    ledger::Transaction tx;
};

struct Scenario
{
    std::uint64_t seed = 0;
    std::size_t n_validators = 4;
    std::size_t n_normal = 0;
    std::vector<Fault> faults;
    DelayModel delay_model;
    std::vector<Partition> partitions;
    std::vector<WorkloadItem> workload;
    std::uint64_t max_time = 60000;
    /// Faults allowed by the file; defaults to f for n_validators.
    std::optional<std::size_t> fault_budget;
    bool expect_stalled = false;
    std::uint64_t base_timeout_ms = 1000;
    std::size_t max_block_txs = 100;
};

/// "v0".."v{n-1}" then "n0".."n{m-1}".
std::vector<std::string> validator_ids(std::size_t n);
std::vector<std::string> normal_ids(std::size_t n);

/// Throws ScenarioInvalid.
Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
void validate_scenario(const Scenario& s);

/// Delivers messages between in-process nodes on a logical clock. Delays are
/// drawn from one seeded generator, so a run is a pure function of its inputs.
class SimNetwork
{
public:
    using CommitHook = std::function<void(const ConsensusNode&, const ledger::Block&)>;

    SimNetwork(std::uint64_t seed, DelayModel delay);

    /// Nodes are not owned and must outlive the network.
    void add_node(ConsensusNode& node);
    void set_fault(const Fault& fault);
    void add_partition(Partition p);
    void on_commit(CommitHook hook) { on_commit_ = std::move(hook); }

    /// Queues a local input (client request, timer) for a node at `at`.
    void inject(std::uint64_t at, const std::string& node, Input input);

    /// Processes every event with time <= until, then sets the clock to `until`.
    void run_until(std::uint64_t until);
    /// Runs until no delivery is pending or the clock passes `limit`. Returns true if quiet.
    bool settle(std::uint64_t limit);

    std::uint64_t now() const { return now_; }
    bool crashed(const std::string& node) const;
    const std::map<std::string, std::uint64_t>& message_counts() const { return counts_; }
    std::uint64_t sent_by(const std::string& node) const;
    /// PrePrepare, Prepare, Commit and RoundChange only.
    std::uint64_t consensus_sent_by(const std::string& node) const;
    std::uint64_t lost() const { return lost_; }

private:
    struct Event
    {
        std::uint64_t time;
        std::uint64_t seq;
        std::size_t node;
        std::optional<Input> input; // nullopt = crash marker
    };
    struct Later
    {
        bool operator()(const Event& a, const Event& b) const
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::size_t index_of(const std::string& node) const;
    void process(Event e);
    void dispatch(std::size_t from, StepOutput out);
    std::vector<std::pair<std::size_t, Message>> fan_out(std::size_t from, std::vector<Outgoing> msgs);
    std::vector<std::pair<std::size_t, Message>> equivocate(std::size_t from, const std::vector<Outgoing>& msgs);
    bool partitioned(std::size_t a, std::size_t b) const;
    void push(std::uint64_t time, std::size_t node, std::optional<Input> input);

    std::mt19937_64 rng_;
    DelayModel delay_;
    std::vector<ConsensusNode*> nodes_;
    std::vector<FaultKind> faults_;
    std::vector<bool> dead_;
    std::vector<std::optional<std::uint64_t>> armed_;
    std::vector<std::uint64_t> sent_;
    std::vector<std::uint64_t> sent_consensus_;
    std::vector<Partition> partitions_;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::uint64_t seq_ = 0;
    std::uint64_t now_ = 0;
    std::size_t pending_deliveries_ = 0;
    std::map<std::string, std::uint64_t> counts_;
    std::uint64_t lost_ = 0;
    std::map<ledger::Digest, ledger::Digest> forged_;
    CommitHook on_commit_;
};

struct NodeReport
{
    std::string id;
    Role role = Role::Validator;
    FaultKind fault = FaultKind::None;
    std::uint64_t height = 0;
    std::vector<ledger::Digest> chain; // block hashes from genesis
    ledger::Digest state_digest;
    std::uint64_t messages_sent = 0;
    std::uint64_t consensus_messages_sent = 0;
    std::uint64_t dropped_inputs = 0;
    std::size_t mempool = 0;
};

struct SimulationReport
{
    std::uint64_t seed = 0;
    std::uint64_t max_time = 0;
    std::vector<NodeReport> nodes;
    std::map<std::string, std::uint64_t> message_counts;
    std::uint64_t messages_lost = 0;
    std::size_t injected_txs = 0;
    /// Injected transactions found in the longest honest chain.
    std::size_t committed_txs = 0;
    /// Some honest validator still holds transactions it could put in a block.
    bool stalled = false;
    /// No two honest nodes disagree on any height both have committed.
    bool safety_ok = true;
};

nlohmann::json report_to_json(const SimulationReport& r);

/// Throws ScenarioInvalid.
SimulationReport run_simulation(const Scenario& scenario);

} // namespace crowdlist::consensus
