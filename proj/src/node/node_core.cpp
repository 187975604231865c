#include <crowdlist/node/node_core.hpp>

#include <crowdlist/ledger/state_machine.hpp>

namespace crowdlist::node {

NodeCore::NodeCore(std::string id, consensus::Role role, consensus::ValidatorSet validators,
                   consensus::NodeOptions options, TruthParams truth, std::optional<std::filesystem::path> data_dir)
    : truth_(truth), replica_(data_dir, truth_executor(truth)),
      consensus_(std::move(id), role, std::move(validators), options, replica_.executor(), replica_.chain(),
                 replica_.snapshot()->state)
{
    rebuild_view();
}

WriteResult NodeCore::prepare_write(const std::string& sender, ledger::Payload payload)
{
    WriteResult r;
    r.tx.sender = sender;
    r.tx.payload = std::move(payload);
    auto it = view_.sender_nonces.find(sender);
    r.tx.nonce = (it == view_.sender_nonces.end() ? 0 : it->second) + 1;
    r.tx_id = ledger::transaction_id(r.tx);
    r.rejection = ledger::validate_transaction(view_, r.tx);
    if (r.rejection)
        return r;
    ledger::apply_transaction_in_place(view_, r.tx);
    pending_.push_back(r.tx);
    return r;
}

consensus::StepOutput NodeCore::step(const consensus::Input& input, std::uint64_t now)
{
    auto out = consensus_.step(input, now);
    for (const auto& b : out.committed)
        on_committed(b);
    return out;
}

void NodeCore::on_committed(const ledger::Block& block)
{
    replica_.apply(block);
    rebuild_view();
}

void NodeCore::rebuild_view()
{
    view_ = replica_.snapshot()->state;
    std::vector<ledger::Transaction> still;
    for (auto& tx : pending_)
    {
        if (replica_.committed_height(ledger::transaction_id(tx)))
            continue;
        if (ledger::validate_transaction(view_, tx))
            continue; // superseded, e.g. the same nonce committed from another node
        ledger::apply_transaction_in_place(view_, tx);
        still.push_back(std::move(tx));
    }
    pending_ = std::move(still);
}

} // namespace crowdlist::node
