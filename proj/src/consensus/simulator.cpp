#include <crowdlist/consensus/simulator.hpp>

#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/ledger/state_machine.hpp>

#include <algorithm>
#include <memory>
#include <set>

namespace crowdlist::consensus {

using nlohmann::json;

std::string_view to_string(FaultKind k)
{
    switch (k)
    {
    case FaultKind::None: return "none";
    case FaultKind::Crash: return "Crash";
    case FaultKind::Equivocate: return "Equivocate";
    case FaultKind::Mute: return "Mute";
    }
    return "?";
}

std::vector<std::string> validator_ids(std::size_t n)
{
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
        ids.push_back("v" + std::to_string(i));
    return ids;
}

std::vector<std::string> normal_ids(std::size_t n)
{
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i)
        ids.push_back("n" + std::to_string(i));
    return ids;
}

// ---------------------------------------------------------------------------
// scenario files

namespace {

FaultKind parse_fault_kind(const std::string& s)
{
    if (s == "none")
        return FaultKind::None;
    if (s == "Crash")
        return FaultKind::Crash;
    if (s == "Equivocate")
        return FaultKind::Equivocate;
    if (s == "Mute")
        return FaultKind::Mute;
    throw ScenarioInvalid("unknown fault behavior '" + s + "'");
}

std::vector<std::string> string_list(const json& j, const char* field)
{
    if (!j.is_array())
        throw ScenarioInvalid(std::string(field) + " must be an array of node ids");
    return j.get<std::vector<std::string>>();
}

} // namespace

Scenario parse_scenario(const json& j)
{
    if (!j.is_object())
        throw ScenarioInvalid("scenario must be a JSON object");
    Scenario s;
    try
    {
        s.seed = j.at("seed").get<std::uint64_t>();
        s.n_validators = j.at("n_validators").get<std::size_t>();
        s.n_normal = j.value("n_normal", std::size_t{0});
        s.max_time = j.at("max_time").get<std::uint64_t>();

        for (const auto& f : j.value("faults", json::array()))
        {
            Fault fault;
            fault.node = f.at("node").get<std::string>();
            fault.behavior = parse_fault_kind(f.at("behavior").get<std::string>());
            fault.at_time = f.value("at_time", std::uint64_t{0});
            s.faults.push_back(std::move(fault));
        }
        if (j.contains("delay_model"))
        {
            const auto& d = j.at("delay_model");
            s.delay_model.min_ms = d.at("min_ms").get<std::uint64_t>();
            s.delay_model.max_ms = d.at("max_ms").get<std::uint64_t>();
        }
        for (const auto& p : j.value("partitions", json::array()))
        {
            Partition part;
            part.from_time = p.at("from_time").get<std::uint64_t>();
            part.to_time = p.at("to_time").get<std::uint64_t>();
            part.group_a = string_list(p.at("group_a"), "group_a");
            part.group_b = string_list(p.at("group_b"), "group_b");
            s.partitions.push_back(std::move(part));
        }
        for (const auto& w : j.value("workload", json::array()))
        {
            WorkloadItem item;
            item.at = w.at("at").get<std::uint64_t>();
            json tx = w.at("tx");
            if (tx.is_object() && !tx.contains("submitted_at"))
                tx["submitted_at"] = std::uint64_t{0};
            item.tx = tx.get<ledger::Transaction>();
            s.workload.push_back(std::move(item));
        }
        if (j.contains("fault_budget"))
            s.fault_budget = j.at("fault_budget").get<std::size_t>();
        s.expect_stalled = j.value("expect_stalled", false);
        s.base_timeout_ms = j.value("base_timeout_ms", s.base_timeout_ms);
        s.max_block_txs = j.value("max_block_txs", s.max_block_txs);
    }
    catch (const json::exception& e)
    {
        throw ScenarioInvalid(e.what());
    }
    catch (const ledger::ParseError& e)
    {
        throw ScenarioInvalid(std::string("bad workload transaction: ") + e.what());
    }
    validate_scenario(s);
    return s;
}

json scenario_to_json(const Scenario& s)
{
    json faults = json::array();
    for (const auto& f : s.faults)
    {
        json jf{{"node", f.node}, {"behavior", std::string(to_string(f.behavior))}};
        if (f.behavior == FaultKind::Crash)
            jf["at_time"] = f.at_time;
        faults.push_back(std::move(jf));
    }
    json partitions = json::array();
    for (const auto& p : s.partitions)
        partitions.push_back(
            {{"from_time", p.from_time}, {"to_time", p.to_time}, {"group_a", p.group_a}, {"group_b", p.group_b}});
    json workload = json::array();
    for (const auto& w : s.workload)
        workload.push_back({{"at", w.at}, {"tx", w.tx}});

    json j{{"seed", s.seed},
           {"n_validators", s.n_validators},
           {"n_normal", s.n_normal},
           {"faults", std::move(faults)},
           {"delay_model", {{"min_ms", s.delay_model.min_ms}, {"max_ms", s.delay_model.max_ms}}},
           {"partitions", std::move(partitions)},
           {"workload", std::move(workload)},
           {"max_time", s.max_time},
           {"expect_stalled", s.expect_stalled},
           {"base_timeout_ms", s.base_timeout_ms},
           {"max_block_txs", s.max_block_txs}};
    if (s.fault_budget)
        j["fault_budget"] = *s.fault_budget;
    return j;
}

void validate_scenario(const Scenario& s)
{
    if (s.n_validators == 0)
        throw ScenarioInvalid("n_validators must be at least 1");
    if (s.delay_model.min_ms > s.delay_model.max_ms)
        throw ScenarioInvalid("delay_model.min_ms exceeds max_ms");
    if (s.max_time == 0)
        throw ScenarioInvalid("max_time must be positive");
    if (s.base_timeout_ms == 0)
        throw ScenarioInvalid("base_timeout_ms must be positive");
    if (s.max_block_txs == 0)
        throw ScenarioInvalid("max_block_txs must be positive");

    std::set<std::string> known;
    for (auto& id : validator_ids(s.n_validators))
        known.insert(id);
    for (auto& id : normal_ids(s.n_normal))
        known.insert(id);

    std::set<std::string> faulty;
    std::size_t active = 0;
    for (const auto& f : s.faults)
    {
        if (!known.contains(f.node))
            throw ScenarioInvalid("fault names unknown node '" + f.node + "'");
        if (!faulty.insert(f.node).second)
            throw ScenarioInvalid("node '" + f.node + "' has more than one fault");
        if (f.behavior != FaultKind::None)
            ++active;
    }
    const auto budget = s.fault_budget.value_or(max_faults(s.n_validators));
    if (active > budget)
        throw ScenarioInvalid("scenario declares " + std::to_string(active) + " faults but its budget is " +
                              std::to_string(budget));

    for (const auto& p : s.partitions)
    {
        if (p.from_time > p.to_time)
            throw ScenarioInvalid("partition from_time exceeds to_time");
        for (const auto* group : {&p.group_a, &p.group_b})
            for (const auto& id : *group)
                if (!known.contains(id))
                    throw ScenarioInvalid("partition names unknown node '" + id + "'");
    }
}

// ---------------------------------------------------------------------------
// network

SimNetwork::SimNetwork(std::uint64_t seed, DelayModel delay) : rng_(seed), delay_(delay)
{
    if (delay_.min_ms > delay_.max_ms)
        throw ScenarioInvalid("delay_model.min_ms exceeds max_ms");
}

void SimNetwork::add_node(ConsensusNode& node)
{
    nodes_.push_back(&node);
    faults_.push_back(FaultKind::None);
    dead_.push_back(false);
    armed_.emplace_back();
    sent_.push_back(0);
    sent_consensus_.push_back(0);
}

std::size_t SimNetwork::index_of(const std::string& node) const
{
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (nodes_[i]->id() == node)
            return i;
    throw ScenarioInvalid("unknown node '" + node + "'");
}

void SimNetwork::set_fault(const Fault& fault)
{
    const auto i = index_of(fault.node);
    faults_[i] = fault.behavior;
    if (fault.behavior == FaultKind::Crash)
    {
        if (fault.at_time <= now_)
            dead_[i] = true;
        else
            push(fault.at_time, i, std::nullopt);
    }
}

void SimNetwork::add_partition(Partition p)
{
    partitions_.push_back(std::move(p));
}

bool SimNetwork::crashed(const std::string& node) const
{
    return dead_[index_of(node)];
}

std::uint64_t SimNetwork::sent_by(const std::string& node) const
{
    return sent_[index_of(node)];
}

std::uint64_t SimNetwork::consensus_sent_by(const std::string& node) const
{
    return sent_consensus_[index_of(node)];
}

void SimNetwork::push(std::uint64_t time, std::size_t node, std::optional<Input> input)
{
    if (input && std::holds_alternative<Message>(*input))
        ++pending_deliveries_;
    queue_.push(Event{time, seq_++, node, std::move(input)});
}

void SimNetwork::inject(std::uint64_t at, const std::string& node, Input input)
{
    push(std::max(at, now_), index_of(node), std::move(input));
}

void SimNetwork::run_until(std::uint64_t until)
{
    while (!queue_.empty() && queue_.top().time <= until)
    {
        Event e = queue_.top();
        queue_.pop();
        process(std::move(e));
    }
    now_ = std::max(now_, until);
}

bool SimNetwork::settle(std::uint64_t limit)
{
    auto quiet = [this] {
        if (pending_deliveries_ > 0)
            return false;
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (!dead_[i] && nodes_[i]->timer_deadline())
                return false;
        return true;
    };
    while (!quiet())
    {
        if (queue_.empty() || queue_.top().time > limit)
            return false;
        Event e = queue_.top();
        queue_.pop();
        process(std::move(e));
    }
    return true;
}

void SimNetwork::process(Event e)
{
    now_ = std::max(now_, e.time);
    if (e.input && std::holds_alternative<Message>(*e.input))
        --pending_deliveries_;
    if (!e.input)
    {
        dead_[e.node] = true;
        return;
    }
    if (dead_[e.node])
        return;
    if (const auto* t = std::get_if<Timeout>(&*e.input))
    {
        if (armed_[e.node] != t->deadline)
            return;
        armed_[e.node].reset();
    }
    auto out = nodes_[e.node]->step(*e.input, now_);
    dispatch(e.node, std::move(out));
}

void SimNetwork::dispatch(std::size_t from, StepOutput out)
{
    if (on_commit_)
        for (const auto& b : out.committed)
            on_commit_(*nodes_[from], b);

    if (out.timer_deadline && out.timer_deadline != armed_[from])
    {
        armed_[from] = out.timer_deadline;
        push(std::max(*out.timer_deadline, now_), from, Input{Timeout{*out.timer_deadline}});
    }
    else if (!out.timer_deadline)
        armed_[from].reset();

    if (faults_[from] == FaultKind::Mute)
        return;

    auto copies = faults_[from] == FaultKind::Equivocate ? equivocate(from, out.messages)
                                                          : fan_out(from, std::move(out.messages));
    for (auto& [to, m] : copies)
    {
        ++sent_[from];
        if (is_consensus(m.kind))
            ++sent_consensus_[from];
        ++counts_[std::string(to_string(m.kind))];
        if (partitioned(from, to))
        {
            ++lost_;
            continue;
        }
        const auto span = delay_.max_ms - delay_.min_ms + 1;
        const auto delay = delay_.min_ms + rng_() % span;
        push(now_ + delay, to, Input{std::move(m)});
    }
}

std::vector<std::pair<std::size_t, Message>> SimNetwork::fan_out(std::size_t from, std::vector<Outgoing> msgs)
{
    std::vector<std::pair<std::size_t, Message>> copies;
    for (auto& o : msgs)
    {
        if (o.to)
        {
            copies.emplace_back(index_of(*o.to), std::move(o.message));
            continue;
        }
        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (i != from)
                copies.emplace_back(i, o.message);
    }
    return copies;
}

// Honest logic underneath; odd-indexed peers see a different block.
std::vector<std::pair<std::size_t, Message>> SimNetwork::equivocate(std::size_t from,
                                                                    const std::vector<Outgoing>& msgs)
{
    auto forged_hash = [this](const ledger::Digest& h) {
        auto it = forged_.find(h);
        if (it != forged_.end())
            return it->second;
        return ledger::sha256("equivocate:" + h.hex());
    };

    std::vector<Outgoing> expanded;
    for (const auto& o : msgs)
    {
        expanded.push_back(o);
        // Vote Commit before any Prepare quorum exists.
        if (!o.to && o.message.kind == MessageKind::Prepare)
        {
            Outgoing early = o;
            early.message.kind = MessageKind::Commit;
            expanded.push_back(std::move(early));
        }
    }

    std::vector<std::pair<std::size_t, Message>> copies;
    for (auto& o : expanded)
    {
        const auto kind = o.message.kind;
        const bool twist = !o.to && (kind == MessageKind::PrePrepare || kind == MessageKind::Prepare ||
                                     kind == MessageKind::Commit);
        if (!twist)
        {
            auto plain = fan_out(from, {o});
            copies.insert(copies.end(), std::make_move_iterator(plain.begin()), std::make_move_iterator(plain.end()));
            continue;
        }

        Message alt = o.message;
        if (kind == MessageKind::PrePrepare && o.message.block)
        {
            ledger::Block b = *o.message.block;
            for (auto& tx : b.transactions)
                tx.submitted_at += 1;
            b = ledger::seal(std::move(b));
            forged_[o.message.block_hash] = b.block_hash;
            alt.block_hash = b.block_hash;
            alt.block = std::move(b);
        }
        else
            alt.block_hash = forged_hash(o.message.block_hash);

        for (std::size_t i = 0; i < nodes_.size(); ++i)
            if (i != from)
                copies.emplace_back(i, i % 2 == 1 ? alt : o.message);
    }
    return copies;
}

bool SimNetwork::partitioned(std::size_t a, std::size_t b) const
{
    const auto& ida = nodes_[a]->id();
    const auto& idb = nodes_[b]->id();
    for (const auto& p : partitions_)
    {
        if (now_ < p.from_time || now_ >= p.to_time)
            continue;
        auto in = [](const std::vector<std::string>& g, const std::string& id) {
            return std::find(g.begin(), g.end(), id) != g.end();
        };
        if ((in(p.group_a, ida) && in(p.group_b, idb)) || (in(p.group_b, ida) && in(p.group_a, idb)))
            return true;
    }
    return false;
}

// ---------------------------------------------------------------------------
// run_simulation

SimulationReport run_simulation(const Scenario& scenario)
{
    validate_scenario(scenario);

    const auto vids = validator_ids(scenario.n_validators);
    const ValidatorSet vs(vids);
    NodeOptions options;
    options.base_timeout_ms = scenario.base_timeout_ms;
    options.max_block_txs = scenario.max_block_txs;

    std::vector<std::unique_ptr<ConsensusNode>> nodes;
    for (const auto& id : vids)
        nodes.push_back(std::make_unique<ConsensusNode>(id, Role::Validator, vs, options));
    for (const auto& id : normal_ids(scenario.n_normal))
        nodes.push_back(std::make_unique<ConsensusNode>(id, Role::Normal, vs, options));

    SimNetwork net(scenario.seed, scenario.delay_model);
    for (auto& n : nodes)
        net.add_node(*n);
    std::map<std::string, FaultKind> fault_of;
    for (const auto& f : scenario.faults)
    {
        net.set_fault(f);
        fault_of[f.node] = f.behavior;
    }
    for (const auto& p : scenario.partitions)
        net.add_partition(p);

    std::set<std::string> injected;
    for (const auto& w : scenario.workload)
    {
        injected.insert(ledger::transaction_id(w.tx));
        for (const auto& id : vids)
            net.inject(w.at, id, Input{ProposeRequest{{w.tx}}});
    }

    net.run_until(scenario.max_time);

    SimulationReport report;
    report.seed = scenario.seed;
    report.max_time = scenario.max_time;
    report.message_counts = net.message_counts();
    report.messages_lost = net.lost();
    report.injected_txs = injected.size();

    std::vector<const ConsensusNode*> honest;
    for (const auto& n : nodes)
    {
        NodeReport nr;
        nr.id = n->id();
        nr.role = n->role();
        auto f = fault_of.find(n->id());
        nr.fault = f == fault_of.end() ? FaultKind::None : f->second;
        nr.height = n->height();
        for (const auto& b : n->chain())
            nr.chain.push_back(b.block_hash);
        nr.state_digest = ledger::state_digest(n->state());
        nr.messages_sent = net.sent_by(n->id());
        nr.consensus_messages_sent = net.consensus_sent_by(n->id());
        nr.dropped_inputs = n->dropped();
        nr.mempool = n->mempool().size();
        report.nodes.push_back(std::move(nr));

        if (report.nodes.back().fault == FaultKind::None)
        {
            honest.push_back(n.get());
            if (n->role() == Role::Validator && n->has_proposable())
                report.stalled = true;
        }
    }

    const ConsensusNode* longest = nullptr;
    for (const auto* a : honest)
    {
        if (!longest || a->height() > longest->height())
            longest = a;
        for (const auto* b : honest)
        {
            const auto common = std::min(a->chain().size(), b->chain().size());
            for (std::size_t h = 0; h < common; ++h)
                if (a->chain()[h].block_hash != b->chain()[h].block_hash)
                    report.safety_ok = false;
        }
    }
    if (longest)
    {
        std::set<std::string> committed;
        for (const auto& b : longest->chain())
            for (const auto& tx : b.transactions)
                if (injected.contains(ledger::transaction_id(tx)))
                    committed.insert(ledger::transaction_id(tx));
        report.committed_txs = committed.size();
    }
    return report;
}

json report_to_json(const SimulationReport& r)
{
    json nodes = json::array();
    for (const auto& n : r.nodes)
    {
        json chain = json::array();
        for (const auto& h : n.chain)
            chain.push_back(h.hex());
        nodes.push_back({{"id", n.id},
                         {"role", std::string(to_string(n.role))},
                         {"fault", std::string(to_string(n.fault))},
                         {"height", n.height},
                         {"chain", std::move(chain)},
                         {"state_digest", n.state_digest.hex()},
                         {"messages_sent", n.messages_sent},
                         {"consensus_messages_sent", n.consensus_messages_sent},
                         {"dropped_inputs", n.dropped_inputs},
                         {"mempool", n.mempool}});
    }
    return json{{"seed", r.seed},
                {"max_time", r.max_time},
                {"nodes", std::move(nodes)},
                {"message_counts", r.message_counts},
                {"messages_lost", r.messages_lost},
                {"injected_txs", r.injected_txs},
                {"committed_txs", r.committed_txs},
                {"stalled", r.stalled},
                {"safety_ok", r.safety_ok}};
}

} // namespace crowdlist::consensus
