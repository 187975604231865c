#include <crowdlist/node/replica.hpp>

#include <crowdlist/ledger/state_machine.hpp>

namespace crowdlist::node {

using ledger::Block;

Replica::Replica(std::optional<std::filesystem::path> data_dir, ledger::BlockExecutor execute)
    : execute_(std::move(execute))
{
    std::vector<Block> blocks;
    if (data_dir)
    {
        log_.emplace(*data_dir / "chain.jsonl");
        log_->repair_tail();
        blocks = log_->read_all();
    }

    if (blocks.empty())
    {
        blocks.push_back(ledger::make_genesis());
        if (log_)
            log_->append(blocks.front());
    }
    auto replayed = ledger::replay(blocks, execute_);

    std::vector<std::shared_ptr<const Block>> chain;
    for (auto& b : replayed.chain)
    {
        index(b);
        chain.push_back(std::make_shared<const Block>(std::move(b)));
    }
    publish(std::move(chain), std::move(replayed.state));
}

void Replica::apply(const Block& block)
{
    auto current = snapshot();
    const auto& head = *current->chain.back();
    if (block.height != head.height + 1)
        throw ChainGap("block " + std::to_string(block.height) + " does not follow local height " +
                       std::to_string(head.height));
    if (block.parent_hash != head.block_hash || ledger::compute_block_hash(block) != block.block_hash)
        throw ledger::ReplayError("block " + std::to_string(block.height) + " does not link to the local head");

    ledger::ChainState post;
    try
    {
        post = execute_(current->state, block.transactions);
    }
    catch (const std::invalid_argument& e)
    {
        throw ledger::ReplayError("block " + std::to_string(block.height) + ": " + e.what());
    }
    if (ledger::state_digest(post) != block.state_digest)
        throw ledger::ReplayError("state digest mismatch at height " + std::to_string(block.height));

    if (log_)
        log_->append(block);
    auto chain = current->chain;
    chain.push_back(std::make_shared<const Block>(block));
    std::lock_guard lock(mu_);
    index(block);
    auto next = std::make_shared<Snapshot>();
    next->chain = std::move(chain);
    next->state_digest = block.state_digest;
    next->state = std::move(post);
    current_ = std::move(next);
}

void Replica::publish(std::vector<std::shared_ptr<const Block>> chain, ledger::ChainState state)
{
    auto next = std::make_shared<Snapshot>();
    next->chain = std::move(chain);
    next->state_digest = ledger::state_digest(state);
    next->state = std::move(state);
    std::lock_guard lock(mu_);
    current_ = std::move(next);
}

void Replica::index(const Block& block)
{
    for (const auto& tx : block.transactions)
        tx_heights_.emplace(ledger::transaction_id(tx), block.height);
}

std::shared_ptr<const Snapshot> Replica::snapshot() const
{
    std::lock_guard lock(mu_);
    return current_;
}

std::uint64_t Replica::height() const
{
    return snapshot()->height();
}

std::optional<std::uint64_t> Replica::committed_height(const std::string& tx_id) const
{
    std::lock_guard lock(mu_);
    auto it = tx_heights_.find(tx_id);
    if (it == tx_heights_.end())
        return std::nullopt;
    return it->second;
}

std::vector<Block> Replica::chain() const
{
    auto s = snapshot();
    std::vector<Block> out;
    out.reserve(s->chain.size());
    for (const auto& b : s->chain)
        out.push_back(*b);
    return out;
}

std::optional<std::filesystem::path> Replica::log_path() const
{
    if (!log_)
        return std::nullopt;
    return log_->path();
}

} // namespace crowdlist::node
