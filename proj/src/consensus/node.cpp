#include <crowdlist/consensus/node.hpp>

#include <crowdlist/ledger/state_machine.hpp>

#include <algorithm>

namespace crowdlist::consensus {

using ledger::Block;
using ledger::ChainState;
using ledger::Digest;
using ledger::Transaction;

std::string_view to_string(Role r)
{
    return r == Role::Validator ? "Validator" : "Normal";
}

std::string_view to_string(Phase p)
{
    switch (p)
    {
    case Phase::Idle: return "Idle";
    case Phase::PrePrepared: return "PrePrepared";
    case Phase::Prepared: return "Prepared";
    case Phase::Committed: return "Committed";
    }
    return "?";
}

ConsensusNode::ConsensusNode(std::string id, Role role, ValidatorSet validators, NodeOptions options,
                             ledger::BlockExecutor execute, std::vector<Block> chain, ChainState state)
    : id_(std::move(id)), role_(role), validators_(std::move(validators)), options_(options),
      execute_(std::move(execute)), chain_(std::move(chain)), state_(std::move(state))
{
    if (chain_.empty())
    {
        chain_.push_back(ledger::make_genesis());
        state_ = ChainState{};
    }
    if (role_ == Role::Validator && !validators_.contains(id_))
        throw InvalidValidatorSet("validator " + id_ + " is not in the validator set");
    if (options_.max_block_txs == 0)
        options_.max_block_txs = 1;
}

std::optional<Block> ConsensusNode::locked_block() const
{
    if (!lock_)
        return std::nullopt;
    return lock_->block;
}

std::size_t ConsensusNode::logged(std::uint64_t height, std::uint64_t round, MessageKind kind) const
{
    auto lo = log_.lower_bound({height, round, kind, std::string{}});
    std::size_t n = 0;
    for (auto it = lo; it != log_.end(); ++it)
    {
        const auto& [h, r, k, s] = it->first;
        if (h != height || r != round || k != kind)
            break;
        ++n;
    }
    return n;
}

StepOutput ConsensusNode::step(const Input& input, std::uint64_t now)
{
    StepOutput out;
    if (const auto* m = std::get_if<Message>(&input))
        on_message(*m, now, out);
    else if (const auto* t = std::get_if<Timeout>(&input))
    {
        if (timer_ && *timer_ == t->deadline && t->deadline <= now)
            on_timeout(now, out);
    }
    else if (const auto* p = std::get_if<ProposeRequest>(&input))
        add_to_mempool(p->txs);

    advance(now, out);
    out.timer_deadline = timer_;
    return out;
}

// ---------------------------------------------------------------------------

void ConsensusNode::on_message(const Message& m, std::uint64_t now, StepOutput& out)
{
    if (m.sender == id_)
        return;
    if (m.kind == MessageKind::SyncRequest)
    {
        if (role_ != Role::Validator || m.height == 0 || m.height > height())
            return;
        Message resp;
        resp.kind = MessageKind::SyncResponse;
        resp.height = m.height;
        resp.sender = id_;
        auto end = std::min<std::uint64_t>(height() + 1, m.height + options_.sync_batch);
        for (auto h = m.height; h < end; ++h)
            resp.blocks.push_back(chain_[h]);
        out.messages.push_back({m.sender, std::move(resp)});
        return;
    }
    if (!validators_.contains(m.sender))
    {
        ++dropped_;
        return;
    }
    if (m.kind == MessageKind::SyncResponse)
    {
        for (const auto& b : m.blocks)
        {
            if (b.height <= height())
                continue;
            if (ledger::compute_block_hash(b) != b.block_hash)
            {
                ++dropped_;
                return;
            }
            bodies_.emplace(b.block_hash, b);
            synced_[b.height][b.block_hash].insert(m.sender);
        }
        return;
    }

    if (m.height <= height())
    {
        if (m.kind == MessageKind::RoundChange)
            help_lagging_peer(m, out);
        return; // already decided
    }
    if (m.kind == MessageKind::PrePrepare)
    {
        if (!m.block || m.block->block_hash != m.block_hash || m.block->height != m.height ||
            m.sender != validators_.leader_for(m.height, m.round) ||
            ledger::compute_block_hash(*m.block) != m.block_hash)
        {
            ++dropped_;
            return;
        }
    }
    if (m.kind == MessageKind::RoundChange && m.block)
    {
        if (!m.prepared_round || m.block->block_hash != m.block_hash ||
            ledger::compute_block_hash(*m.block) != m.block_hash)
        {
            ++dropped_;
            return;
        }
    }

    LogKey key{m.height, m.round, m.kind, m.sender};
    if (log_.contains(key))
        return; // first message wins
    log_.emplace(std::move(key), m);
    if (m.block)
        bodies_.emplace(m.block->block_hash, *m.block);

    if (m.height > height() + 1)
        request_sync(now, out);
}

void ConsensusNode::on_timeout(std::uint64_t now, StepOutput& out)
{
    // The height may already be decided by peers whose votes never reached us.
    last_sync_request_.reset();
    request_sync(now, out);
    if (role_ != Role::Validator)
    {
        timer_ = now + options_.base_timeout_ms;
        return;
    }

    target_round_ = std::max(round_, target_round_) + 1;
    broadcast(round_change(target_round_), out);

    // Votes lost in a partition are resent so peers can still see the
    // quorums behind our lock and our Commit.
    const auto h = height() + 1;
    for (auto it = log_.lower_bound({h, 0, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h; ++it)
    {
        const auto& [kh, kr, kk, ks] = it->first;
        if (ks == id_ && (kk == MessageKind::Prepare || kk == MessageKind::Commit))
            out.messages.push_back({std::nullopt, it->second});
    }
    timer_ = now + backoff(target_round_);
}

void ConsensusNode::add_to_mempool(const std::vector<Transaction>& txs)
{
    for (const auto& tx : txs)
    {
        if (auto r = ledger::validate_transaction(state_, tx); r && ledger::is_permanent(state_, tx, *r))
        {
            ++dropped_;
            continue;
        }
        const auto id = ledger::transaction_id(tx);
        bool seen = std::any_of(mempool_.begin(), mempool_.end(),
                                [&](const Transaction& t) { return ledger::transaction_id(t) == id; });
        if (!seen)
            mempool_.push_back(tx);
    }
    has_proposable_.reset();
}

std::vector<Transaction> ConsensusNode::proposable() const
{
    std::vector<Transaction> picked;
    ChainState scratch = state_;
    for (const auto& tx : mempool_)
    {
        if (picked.size() >= options_.max_block_txs)
            break;
        if (ledger::validate_transaction(scratch, tx))
            continue;
        ledger::apply_transaction_in_place(scratch, tx);
        picked.push_back(tx);
    }
    return picked;
}

bool ConsensusNode::has_proposable() const
{
    if (!has_proposable_)
        has_proposable_ = !proposable().empty();
    return *has_proposable_;
}

// ---------------------------------------------------------------------------

void ConsensusNode::advance(std::uint64_t now, StepOutput& out)
{
    for (;;)
    {
        if (try_commit(now, out))
            continue;
        if (role_ != Role::Validator)
            break;
        bool changed = update_lock();
        changed |= catch_up_rounds(now, out);
        changed |= enter_round_on_quorum(now);
        changed |= maybe_propose(now, out);
        changed |= maybe_prepare(out);
        changed |= maybe_commit_vote(out);
        if (!changed)
            break;
    }
    update_timer(now);
}

bool ConsensusNode::try_commit(std::uint64_t now, StepOutput& out)
{
    const auto h = height() + 1;
    std::optional<Digest> decided;

    for (auto it = log_.lower_bound({h, 0, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h && !decided;)
    {
        const auto r = std::get<1>(it->first);
        for (const auto& [hash, n] : tally(r, MessageKind::Commit))
        {
            if (n >= validators_.quorum())
                decided = hash;
        }
        it = log_.lower_bound({h, r + 1, MessageKind::PrePrepare, std::string{}});
    }
    if (!decided)
    {
        // f + 1 matching sync answers include at least one honest validator.
        if (auto s = synced_.find(h); s != synced_.end())
        {
            for (const auto& [hash, senders] : s->second)
            {
                if (senders.size() >= validators_.max_faults() + 1)
                    decided = hash;
            }
        }
    }
    if (!decided)
        return false;

    const Block* b = body(*decided);
    if (!b)
    {
        request_sync(now, out);
        return false;
    }
    if (!check_block(*b))
    {
        ++dropped_;
        return false;
    }
    commit(*b, out);
    return true;
}

bool ConsensusNode::update_lock()
{
    const auto h = height() + 1;
    const std::uint64_t from = lock_ ? lock_->round + 1 : 0;
    std::optional<Lock> best;
    for (auto it = log_.lower_bound({h, from, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h;)
    {
        const auto r = std::get<1>(it->first);
        for (const auto& [hash, n] : tally(r, MessageKind::Prepare))
        {
            if (n < validators_.quorum())
                continue;
            const Block* b = body(hash);
            if (b && check_block(*b))
                best = Lock{*b, r};
        }
        it = log_.lower_bound({h, r + 1, MessageKind::PrePrepare, std::string{}});
    }
    if (!best)
        return false;
    lock_ = std::move(best);
    return true;
}

bool ConsensusNode::catch_up_rounds(std::uint64_t now, StepOutput& out)
{
    const auto h = height() + 1;
    std::map<std::string, std::uint64_t> highest;
    for (auto it = log_.lower_bound({h, target_round_ + 1, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h; ++it)
    {
        const auto& [kh, kr, kk, ks] = it->first;
        if (kk == MessageKind::RoundChange)
            highest[ks] = std::max(highest[ks], kr);
    }
    const auto need = validators_.max_faults() + 1;
    if (highest.size() < need)
        return false;

    // Largest round that at least f + 1 validators have asked for.
    std::vector<std::uint64_t> rounds;
    for (const auto& [s, r] : highest)
        rounds.push_back(r);
    std::sort(rounds.begin(), rounds.end(), std::greater<>());
    const auto r = rounds[need - 1];
    if (r <= target_round_)
        return false;
    target_round_ = r;
    broadcast(round_change(r), out);
    timer_ = now + backoff(r);
    return true;
}

bool ConsensusNode::enter_round_on_quorum(std::uint64_t now)
{
    const auto h = height() + 1;
    std::optional<std::uint64_t> enter;
    for (auto it = log_.lower_bound({h, round_ + 1, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h;)
    {
        const auto r = std::get<1>(it->first);
        if (logged(h, r, MessageKind::RoundChange) >= validators_.quorum())
            enter = r;
        it = log_.lower_bound({h, r + 1, MessageKind::PrePrepare, std::string{}});
    }
    if (!enter)
        return false;
    // Join the round even if we already asked for a later one; a node that ran
    // ahead alone would otherwise never vote again.
    round_ = *enter;
    target_round_ = round_;
    phase_ = Phase::Idle;
    timer_ = now + backoff(round_);
    return true;
}

bool ConsensusNode::maybe_propose(std::uint64_t now, StepOutput& out)
{
    const auto h = height() + 1;
    if (target_round_ != round_ || validators_.leader_for(h, round_) != id_ || proposed_.contains(round_))
        return false;

    // Re-propose the most recently prepared block we hold or any peer reported.
    std::optional<Block> block;
    std::optional<std::uint64_t> best_round;
    if (lock_)
    {
        block = lock_->block;
        best_round = lock_->round;
    }
    for (auto it = log_.lower_bound({h, round_, MessageKind::RoundChange, std::string{}});
         it != log_.end() && std::get<0>(it->first) == h && std::get<1>(it->first) == round_ &&
         std::get<2>(it->first) == MessageKind::RoundChange;
         ++it)
    {
        const auto& m = it->second;
        if (m.block && m.prepared_round && (!best_round || *m.prepared_round > *best_round) &&
            check_block(*m.block))
        {
            best_round = m.prepared_round;
            block = m.block;
        }
    }
    if (!block)
    {
        auto txs = proposable();
        if (txs.empty())
            return false;
        for (auto& tx : txs)
            tx.submitted_at = now;
        Block b;
        b.height = h;
        b.parent_hash = chain_.back().block_hash;
        b.transactions = std::move(txs);
        b.proposer = id_;
        b.round = round_;
        b.state_digest = ledger::state_digest(execute_(state_, b.transactions));
        block = ledger::seal(std::move(b));
    }

    proposed_.insert(round_);
    Message m;
    m.kind = MessageKind::PrePrepare;
    m.height = h;
    m.round = round_;
    m.sender = id_;
    m.block_hash = block->block_hash;
    m.block = std::move(block);
    broadcast(std::move(m), out);
    return true;
}

bool ConsensusNode::maybe_prepare(StepOutput& out)
{
    const auto h = height() + 1;
    if (target_round_ != round_ || log_.contains({h, round_, MessageKind::Prepare, id_}))
        return false;
    auto it = log_.find({h, round_, MessageKind::PrePrepare, validators_.leader_for(h, round_)});
    if (it == log_.end())
        return false;
    const Block& proposal = *it->second.block;
    if (proposal.round > round_ || proposal.proposer != validators_.leader_for(h, proposal.round))
        return false;
    if (lock_ && lock_->block.block_hash != proposal.block_hash)
        return false;
    if (!check_block(proposal))
        return false;

    Message m;
    m.kind = MessageKind::Prepare;
    m.height = h;
    m.round = round_;
    m.sender = id_;
    m.block_hash = proposal.block_hash;
    broadcast(std::move(m), out);
    phase_ = Phase::PrePrepared;
    return true;
}

bool ConsensusNode::maybe_commit_vote(StepOutput& out)
{
    const auto h = height() + 1;
    if (target_round_ != round_ || log_.contains({h, round_, MessageKind::Commit, id_}))
        return false;
    for (const auto& [hash, n] : tally(round_, MessageKind::Prepare))
    {
        if (n < validators_.quorum())
            continue;
        const Block* b = body(hash);
        if (!b || !check_block(*b))
            continue;
        if (!lock_ || lock_->round <= round_)
            lock_ = Lock{*b, round_};
        Message m;
        m.kind = MessageKind::Commit;
        m.height = h;
        m.round = round_;
        m.sender = id_;
        m.block_hash = hash;
        broadcast(std::move(m), out);
        phase_ = Phase::Prepared;
        return true;
    }
    return false;
}

void ConsensusNode::update_timer(std::uint64_t now)
{
    if (!timer_ && active_at_next_height())
        timer_ = now + backoff(target_round_);
    else if (timer_ && !active_at_next_height())
        timer_.reset();
}

bool ConsensusNode::active_at_next_height() const
{
    if (role_ == Role::Validator && (lock_ || target_round_ > 0 || has_proposable()))
        return true;
    const auto h = height() + 1;
    auto it = log_.lower_bound({h, 0, MessageKind::PrePrepare, std::string{}});
    return (it != log_.end() && std::get<0>(it->first) == h) || synced_.contains(h);
}

// ---------------------------------------------------------------------------

void ConsensusNode::commit(const Block& block, StepOutput& out)
{
    ChainState post = *check_block(block);
    for (auto it = log_.lower_bound({block.height, 0, MessageKind::PrePrepare, std::string{}});
         it != log_.end() && std::get<0>(it->first) == block.height; ++it)
    {
        const auto& m = it->second;
        if (m.kind == MessageKind::Commit && m.sender == id_ && m.block_hash == block.block_hash)
            own_commits_.insert_or_assign(block.height, m);
    }
    while (own_commits_.size() > options_.sync_batch * 4)
        own_commits_.erase(own_commits_.begin());

    chain_.push_back(block);
    state_ = std::move(post);
    out.committed.push_back(block);

    const auto h = height();
    log_.erase(log_.begin(), log_.lower_bound({h + 1, 0, MessageKind::PrePrepare, std::string{}}));
    std::erase_if(bodies_, [h](const auto& kv) { return kv.second.height <= h; });
    synced_.erase(synced_.begin(), synced_.upper_bound(h));
    checked_.clear();

    std::erase_if(mempool_, [this](const Transaction& tx) {
        auto r = ledger::validate_transaction(state_, tx);
        return r && ledger::is_permanent(state_, tx, *r);
    });
    has_proposable_.reset();

    round_ = 0;
    target_round_ = 0;
    phase_ = Phase::Committed;
    lock_.reset();
    proposed_.clear();
    timer_.reset();
}

// A peer still voting on a decided height missed the Commits that decided it.
void ConsensusNode::help_lagging_peer(const Message& m, StepOutput& out)
{
    if (role_ != Role::Validator || m.height == 0)
        return;
    if (auto it = own_commits_.find(m.height); it != own_commits_.end())
        out.messages.push_back({m.sender, it->second});
    Message resp;
    resp.kind = MessageKind::SyncResponse;
    resp.height = m.height;
    resp.sender = id_;
    auto end = std::min<std::uint64_t>(height() + 1, m.height + options_.sync_batch);
    for (auto h = m.height; h < end; ++h)
        resp.blocks.push_back(chain_[h]);
    out.messages.push_back({m.sender, std::move(resp)});
}

void ConsensusNode::request_sync(std::uint64_t now, StepOutput& out)
{
    const auto interval = std::max<std::uint64_t>(1, options_.base_timeout_ms / 2);
    if (last_sync_request_ && now < *last_sync_request_ + interval)
        return;
    last_sync_request_ = now;
    Message m;
    m.kind = MessageKind::SyncRequest;
    m.height = height() + 1;
    m.sender = id_;
    out.messages.push_back({std::nullopt, std::move(m)});
}

void ConsensusNode::broadcast(Message m, StepOutput& out)
{
    if (role_ != Role::Validator)
        return;
    if (is_consensus(m.kind))
    {
        log_.insert_or_assign({m.height, m.round, m.kind, m.sender}, m);
        if (m.block)
            bodies_.emplace(m.block->block_hash, *m.block);
    }
    out.messages.push_back({std::nullopt, std::move(m)});
}

Message ConsensusNode::round_change(std::uint64_t round) const
{
    Message m;
    m.kind = MessageKind::RoundChange;
    m.height = height() + 1;
    m.round = round;
    m.sender = id_;
    if (lock_)
    {
        m.block = lock_->block;
        m.block_hash = lock_->block.block_hash;
        m.prepared_round = lock_->round;
    }
    return m;
}

const std::optional<ChainState>& ConsensusNode::check_block(const Block& block)
{
    if (auto it = checked_.find(block.block_hash); it != checked_.end())
        return it->second;

    std::optional<ChainState> post;
    const auto h = height() + 1;
    if (block.height == h && block.parent_hash == chain_.back().block_hash && !block.transactions.empty() &&
        block.transactions.size() <= options_.max_block_txs &&
        block.proposer == validators_.leader_for(h, block.round) &&
        ledger::compute_block_hash(block) == block.block_hash)
    {
        try
        {
            auto s = execute_(state_, block.transactions);
            if (ledger::state_digest(s) == block.state_digest)
                post = std::move(s);
        }
        catch (const std::exception&)
        {
        }
    }
    return checked_.emplace(block.block_hash, std::move(post)).first->second;
}

const Block* ConsensusNode::body(const Digest& hash) const
{
    auto it = bodies_.find(hash);
    return it == bodies_.end() ? nullptr : &it->second;
}

std::map<Digest, std::size_t> ConsensusNode::tally(std::uint64_t round, MessageKind kind) const
{
    std::map<Digest, std::size_t> counts;
    const auto h = height() + 1;
    for (auto it = log_.lower_bound({h, round, kind, std::string{}}); it != log_.end(); ++it)
    {
        const auto& [kh, kr, kk, ks] = it->first;
        if (kh != h || kr != round || kk != kind)
            break;
        ++counts[it->second.block_hash];
    }
    return counts;
}

std::uint64_t ConsensusNode::backoff(std::uint64_t round) const
{
    const auto shift = std::min<std::uint64_t>(round, options_.max_backoff_doublings);
    return options_.base_timeout_ms << shift;
}

} // namespace crowdlist::consensus
