#include <crowdlist/node/node_host.hpp>

#include <crowdlist/ledger/canonical.hpp>

#include <map>

namespace crowdlist::node {

using nlohmann::json;

namespace {

constexpr std::size_t outbox_limit = 10000;
constexpr std::uint64_t pull_batch = 16;

} // namespace

NodeHost::NodeHost(NodeConfig config) : config_(std::move(config)), epoch_(std::chrono::steady_clock::now())
{
    core_ = std::make_unique<NodeCore>(config_.node_id, config_.role, consensus::ValidatorSet(config_.validators),
                                       config_.consensus, config_.truth, config_.data_dir);
    server_ = std::make_unique<ApiServer>(*this, [this](const ApiRequest& r) { return internal(r); });
}

NodeHost::~NodeHost()
{
    stop();
}

std::uint16_t NodeHost::start()
{
    const auto port = server_->start(parse_host_port(config_.listen_address));
    threads_.emplace_back([this] { timer_loop(); });
    threads_.emplace_back([this] { sender_loop(); });
    threads_.emplace_back([this] { pull_loop(); });
    // Kick the timer so a restarted validator with work pending re-arms.
    deliver(consensus::ProposeRequest{});
    return port;
}

void NodeHost::stop()
{
    if (stopping_.exchange(true))
        return;
    {
        std::lock_guard lock(mu_);
    }
    changed_.notify_all();
    {
        std::lock_guard lock(out_mu_);
    }
    out_cv_.notify_all();
    server_->stop();
    for (auto& t : threads_)
        t.join();
    threads_.clear();
}

std::uint64_t NodeHost::now() const
{
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - epoch_).count());
}

void NodeHost::deliver(const consensus::Input& input)
{
    consensus::StepOutput out;
    {
        std::lock_guard lock(mu_);
        out = core_->step(input, now());
    }
    changed_.notify_all();
    dispatch(out);
}

void NodeHost::dispatch(const consensus::StepOutput& out)
{
    for (const auto& o : out.messages)
    {
        const json body = o.message;
        for (const auto& p : config_.peer_addresses)
            if (!o.to || *o.to == p.node_id)
                enqueue({p.address, "/internal/v1/consensus", body});
    }
}

void NodeHost::enqueue(Outgoing o)
{
    {
        std::lock_guard lock(out_mu_);
        if (outbox_.size() >= outbox_limit)
            outbox_.pop_front(); // an unreachable peer must not grow the queue forever
        outbox_.push_back(std::move(o));
    }
    out_cv_.notify_one();
}

std::shared_ptr<const Snapshot> NodeHost::snapshot() const
{
    std::lock_guard lock(mu_);
    return core_->replica().snapshot();
}

std::optional<WriteResult> NodeHost::submit(const std::string& sender, ledger::Payload payload)
{
    WriteResult r;
    {
        std::lock_guard lock(mu_);
        r = core_->prepare_write(sender, std::move(payload));
    }
    if (!r.accepted())
        return r;
    if (config_.role == consensus::Role::Validator)
        deliver(consensus::ProposeRequest{{r.tx}});
    const json body = r.tx;
    for (const auto& p : config_.peer_addresses)
        if (std::find(config_.validators.begin(), config_.validators.end(), p.node_id) != config_.validators.end())
            enqueue({p.address, "/internal/v1/tx", body});
    return r;
}

bool NodeHost::await_commit(const std::string& tx_id, std::chrono::milliseconds timeout)
{
    std::unique_lock lock(mu_);
    return changed_.wait_for(lock, timeout,
                             [&] { return stopping_ || core_->replica().committed_height(tx_id).has_value(); }) &&
           core_->replica().committed_height(tx_id).has_value();
}

json NodeHost::status() const
{
    std::lock_guard lock(mu_);
    const auto snap = core_->replica().snapshot();
    const auto& cn = core_->consensus_node();
    return json{{"node_id", core_->id()},
                {"role", std::string(consensus::to_string(core_->role()))},
                {"height", snap->height()},
                {"state_digest", snap->state_digest.hex()},
                {"round", cn.round()},
                {"mempool", cn.mempool().size()},
                {"pending_writes", core_->pending_writes()}};
}

ApiResponse NodeHost::internal(const ApiRequest& req)
{
    if (req.method != "POST")
        return {405, json{{"error", "MethodNotAllowed"}}};
    json body;
    try
    {
        body = json::parse(req.body);
        if (req.path == "/internal/v1/consensus")
            deliver(body.get<consensus::Message>());
        else if (req.path == "/internal/v1/tx")
        {
            if (config_.role != consensus::Role::Validator)
                return {404, json{{"error", "NotFound"}}};
            deliver(consensus::ProposeRequest{{body.get<ledger::Transaction>()}});
        }
        else
            return {404, json{{"error", "NotFound"}}};
    }
    catch (const std::exception&)
    {
        return {400, json{{"error", "BadRequest"}}};
    }
    return {200, json{{"ok", true}}};
}

void NodeHost::timer_loop()
{
    std::unique_lock lock(mu_);
    while (!stopping_)
    {
        const auto deadline = core_->consensus_node().timer_deadline();
        if (!deadline)
        {
            changed_.wait(lock);
            continue;
        }
        const auto t = now();
        if (t < *deadline)
        {
            changed_.wait_for(lock, std::chrono::milliseconds(*deadline - t));
            continue;
        }
        auto out = core_->step(consensus::Timeout{*deadline}, t);
        lock.unlock();
        changed_.notify_all();
        dispatch(out);
        lock.lock();
    }
}

void NodeHost::sender_loop()
{
    std::map<std::string, HttpClient> clients;
    std::unique_lock lock(out_mu_);
    while (true)
    {
        out_cv_.wait(lock, [&] { return stopping_ || !outbox_.empty(); });
        if (stopping_)
            return;
        auto o = std::move(outbox_.front());
        outbox_.pop_front();
        lock.unlock();
        auto it = clients.find(o.address);
        if (it == clients.end())
            it = clients.emplace(o.address, HttpClient(o.address, std::chrono::milliseconds(500))).first;
        try
        {
            it->second.post(o.path, o.body);
        }
        catch (const ConnectionError&)
        {
            // peer down; consensus retransmits on timeout
        }
        lock.lock();
    }
}

void NodeHost::pull_loop()
{
    std::map<std::string, HttpClient> clients;
    std::unique_lock lock(mu_);
    while (!changed_.wait_for(lock, pull_interval, [&] { return stopping_.load(); }))
    {
        const auto from = core_->replica().height() + 1;
        lock.unlock();
        for (const auto& p : config_.peer_addresses)
        {
            if (std::find(config_.validators.begin(), config_.validators.end(), p.node_id) == config_.validators.end())
                continue;
            auto it = clients.find(p.address);
            if (it == clients.end())
                it = clients.emplace(p.address, HttpClient(p.address, std::chrono::milliseconds(500))).first;
            try
            {
                auto res = it->second.get("/api/v1/chain/blocks?from=" + std::to_string(from) +
                                          "&to=" + std::to_string(from + pull_batch - 1));
                if (res.status != 200 || !res.body.is_array() || res.body.empty())
                    continue;
                consensus::Message m;
                m.kind = consensus::MessageKind::SyncResponse;
                m.height = from;
                m.sender = p.node_id;
                for (const auto& b : res.body)
                    m.blocks.push_back(b.get<ledger::Block>());
                deliver(m);
            }
            catch (const std::exception&)
            {
                // unreachable or garbled peer; try again next round
            }
        }
        lock.lock();
    }
}

} // namespace crowdlist::node
