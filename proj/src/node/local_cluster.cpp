#include <crowdlist/node/local_cluster.hpp>

namespace crowdlist::node {

class LocalCluster::Facade : public NodeFacade
{
public:
    Facade(LocalCluster& cluster, std::size_t index) : cluster_(cluster), index_(index) {}

    std::shared_ptr<const Snapshot> snapshot() const override
    {
        return cluster_.cores_[index_]->replica().snapshot();
    }

    std::size_t vote_threshold() const override { return cluster_.options_.truth.vote_threshold; }

    std::optional<WriteResult> submit(const std::string& sender, ledger::Payload payload) override
    {
        return cluster_.submit(index_, sender, std::move(payload));
    }

    bool await_commit(const std::string& tx_id, std::chrono::milliseconds timeout) override
    {
        return cluster_.await_commit(index_, tx_id, timeout);
    }

    nlohmann::json status() const override
    {
        std::lock_guard lock(cluster_.mu_);
        const auto& core = *cluster_.cores_[index_];
        const auto snap = core.replica().snapshot();
        return nlohmann::json{{"node_id", core.id()},
                              {"role", std::string(consensus::to_string(core.role()))},
                              {"height", snap->height()},
                              {"state_digest", snap->state_digest.hex()},
                              {"round", core.consensus_node().round()},
                              {"mempool", core.consensus_node().mempool().size()},
                              {"pending_writes", core.pending_writes()}};
    }

private:
    LocalCluster& cluster_;
    std::size_t index_;
};

LocalCluster::LocalCluster(LocalClusterOptions options) : options_(std::move(options))
{
    const auto vids = consensus::validator_ids(options_.n_validators);
    const consensus::ValidatorSet vs(vids);

    auto dir_for = [this](const std::string& id) -> std::optional<std::filesystem::path> {
        if (!options_.data_root)
            return std::nullopt;
        return *options_.data_root / id;
    };
    for (const auto& id : vids)
        cores_.push_back(std::make_unique<NodeCore>(id, consensus::Role::Validator, vs, options_.consensus,
                                                    options_.truth, dir_for(id)));
    for (const auto& id : consensus::normal_ids(options_.n_normal))
        cores_.push_back(std::make_unique<NodeCore>(id, consensus::Role::Normal, vs, options_.consensus,
                                                    options_.truth, dir_for(id)));

    net_ = std::make_unique<consensus::SimNetwork>(options_.seed, options_.delay);
    for (auto& c : cores_)
        net_->add_node(c->consensus_node());
    net_->on_commit([this](const consensus::ConsensusNode& n, const ledger::Block& b) {
        for (auto& c : cores_)
            if (&c->consensus_node() == &n)
                c->on_committed(b);
    });
    for (std::size_t i = 0; i < cores_.size(); ++i)
        facades_.push_back(std::make_unique<Facade>(*this, i));
}

LocalCluster::~LocalCluster() = default;

NodeFacade& LocalCluster::facade(std::size_t i)
{
    return *facades_[i];
}

std::optional<WriteResult> LocalCluster::submit(std::size_t from, const std::string& sender, ledger::Payload payload)
{
    std::lock_guard lock(mu_);
    auto result = cores_[from]->prepare_write(sender, std::move(payload));
    if (result.accepted())
    {
        for (std::size_t i = 0; i < options_.n_validators; ++i)
            net_->inject(net_->now(), cores_[i]->id(), consensus::Input{consensus::ProposeRequest{{result.tx}}});
    }
    return result;
}

bool LocalCluster::await_commit(std::size_t on, const std::string& tx_id, std::chrono::milliseconds timeout)
{
    std::lock_guard lock(mu_);
    const auto& replica = cores_[on]->replica();
    // Logical time: the wall-clock timeout only bounds how far we simulate.
    const auto limit = net_->now() + std::max<std::uint64_t>(options_.await_horizon_ms, timeout.count());
    while (!replica.committed_height(tx_id) && net_->now() < limit)
        net_->run_until(std::min(limit, net_->now() + 50));
    return replica.committed_height(tx_id).has_value();
}

void LocalCluster::pump(std::uint64_t ms)
{
    std::lock_guard lock(mu_);
    net_->run_until(net_->now() + ms);
}

bool LocalCluster::settle()
{
    std::lock_guard lock(mu_);
    return net_->settle(net_->now() + options_.await_horizon_ms);
}

std::uint64_t LocalCluster::now() const
{
    std::lock_guard lock(mu_);
    return net_->now();
}

} // namespace crowdlist::node
