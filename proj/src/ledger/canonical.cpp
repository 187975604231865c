#include <crowdlist/ledger/canonical.hpp>

namespace crowdlist::ledger {

using nlohmann::json;

namespace {

const json& field(const json& j, const char* name)
{
    if (!j.is_object())
        throw ParseError(std::string("expected object holding '") + name + "'");
    auto it = j.find(name);
    if (it == j.end())
        throw ParseError(std::string("missing field '") + name + "'");
    return *it;
}

std::string get_string(const json& j, const char* name)
{
    const auto& v = field(j, name);
    if (!v.is_string())
        throw ParseError(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

std::uint64_t get_uint(const json& j, const char* name)
{
    const auto& v = field(j, name);
    if (!v.is_number_unsigned())
        throw ParseError(std::string("field '") + name + "' must be an unsigned integer");
    return v.get<std::uint64_t>();
}

double get_real(const json& j, const char* name)
{
    const auto& v = field(j, name);
    if (!v.is_number())
        throw ParseError(std::string("field '") + name + "' must be a number");
    return v.get<double>();
}

Verdict get_verdict(const json& j, const char* name)
{
    auto v = parse_verdict(get_string(j, name));
    if (!v)
        throw ParseError(std::string("field '") + name + "' is not a verdict");
    return *v;
}

} // namespace

void to_json(json& j, const Digest& d)
{
    j = d.hex();
}

void from_json(const json& j, Digest& d)
{
    if (!j.is_string())
        throw ParseError("digest must be a hex string");
    try
    {
        d = Digest::from_hex(j.get<std::string>());
    }
    catch (const std::invalid_argument& e)
    {
        throw ParseError(e.what());
    }
}

void to_json(json& j, const Transaction& tx)
{
    json payload = json::object();
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, RegisterUser>)
            {
                payload["display_name"] = p.display_name;
            }
            else if constexpr (std::is_same_v<P, SubmitUrl>)
            {
                payload["url"] = p.url;
                payload["evidence_email"] = p.evidence_email;
            }
            else
            {
                payload["url_id"] = p.url_id;
                payload["verdict"] = std::string(to_string(p.verdict));
            }
        },
        tx.payload);

    j = json{{"kind", std::string(to_string(tx.kind()))},
             {"sender", tx.sender},
             {"nonce", tx.nonce},
             {"submitted_at", tx.submitted_at},
             {"payload", std::move(payload)}};
}

void from_json(const json& j, Transaction& tx)
{
    auto kind = parse_tx_kind(get_string(j, "kind"));
    if (!kind)
        throw ParseError("unknown transaction kind");
    tx.sender = get_string(j, "sender");
    tx.nonce = get_uint(j, "nonce");
    tx.submitted_at = get_uint(j, "submitted_at");

    const auto& p = field(j, "payload");
    switch (*kind)
    {
    case TxKind::RegisterUser:
        tx.payload = RegisterUser{get_string(p, "display_name")};
        break;
    case TxKind::SubmitUrl:
        tx.payload = SubmitUrl{get_string(p, "url"), get_string(p, "evidence_email")};
        break;
    case TxKind::CastVote:
        tx.payload = CastVote{get_string(p, "url_id"), get_verdict(p, "verdict")};
        break;
    }
}

void to_json(json& j, const Vote& v)
{
    j = json{{"verifier", v.verifier},
             {"verdict", std::string(to_string(v.verdict))},
             {"ordinal", v.ordinal},
             {"block_height", v.block_height}};
}

void from_json(const json& j, Vote& v)
{
    v.verifier = get_string(j, "verifier");
    v.verdict = get_verdict(j, "verdict");
    v.ordinal = get_uint(j, "ordinal");
    v.block_height = get_uint(j, "block_height");
}

void to_json(json& j, const UrlRecord& r)
{
    j = json{{"url_id", r.url_id},
             {"url", r.url},
             {"submitter", r.submitter},
             {"evidence_email", r.evidence_email},
             {"votes", r.votes},
             {"status", std::string(to_string(r.status))},
             {"phish_score", r.phish_score ? json(*r.phish_score) : json(nullptr)},
             {"first_block_height", r.first_block_height}};
}

void from_json(const json& j, UrlRecord& r)
{
    r.url_id = get_string(j, "url_id");
    r.url = get_string(j, "url");
    r.submitter = get_string(j, "submitter");
    r.evidence_email = get_string(j, "evidence_email");
    const auto& votes = field(j, "votes");
    if (!votes.is_array())
        throw ParseError("field 'votes' must be an array");
    r.votes = votes.get<std::vector<Vote>>();
    auto status = parse_status(get_string(j, "status"));
    if (!status)
        throw ParseError("unknown url status");
    r.status = *status;
    const auto& score = field(j, "phish_score");
    if (score.is_null())
        r.phish_score.reset();
    else
        r.phish_score = get_real(j, "phish_score");
    r.first_block_height = get_uint(j, "first_block_height");
}

void to_json(json& j, const VerifierAccount& a)
{
    j = json{{"verifier_id", a.verifier_id},
             {"display_name", a.display_name},
             {"rank", a.rank},
             {"skill_points", a.skill_points},
             {"votes_cast", a.votes_cast},
             {"votes_correct", a.votes_correct}};
}

void from_json(const json& j, VerifierAccount& a)
{
    a.verifier_id = get_string(j, "verifier_id");
    a.display_name = get_string(j, "display_name");
    a.rank = get_real(j, "rank");
    a.skill_points = get_uint(j, "skill_points");
    a.votes_cast = get_uint(j, "votes_cast");
    a.votes_correct = get_uint(j, "votes_correct");
}

void to_json(json& j, const ChainState& s)
{
    json users = json::object();
    for (const auto& [id, account] : s.users)
        users[id] = account;
    json urls = json::object();
    for (const auto& [id, record] : s.urls)
        urls[id] = record;
    json nonces = json::object();
    for (const auto& [id, nonce] : s.sender_nonces)
        nonces[id] = nonce;

    j = json{{"users", std::move(users)},
             {"urls", std::move(urls)},
             {"height", s.height},
             {"sender_nonces", std::move(nonces)}};
}

void from_json(const json& j, ChainState& s)
{
    s = ChainState{};
    const auto& users = field(j, "users");
    const auto& urls = field(j, "urls");
    const auto& nonces = field(j, "sender_nonces");
    if (!users.is_object() || !urls.is_object() || !nonces.is_object())
        throw ParseError("chain state maps must be objects");
    for (const auto& [id, account] : users.items())
        s.users.emplace(id, account.get<VerifierAccount>());
    for (const auto& [id, record] : urls.items())
        s.urls.emplace(id, record.get<UrlRecord>());
    for (const auto& [id, nonce] : nonces.items())
    {
        if (!nonce.is_number_unsigned())
            throw ParseError("sender nonce must be an unsigned integer");
        s.sender_nonces.emplace(id, nonce.get<std::uint64_t>());
    }
    s.height = get_uint(j, "height");
}

void to_json(json& j, const Block& b)
{
    j = json{{"height", b.height},
             {"parent_hash", b.parent_hash},
             {"transactions", b.transactions},
             {"proposer", b.proposer},
             {"round", b.round},
             {"state_digest", b.state_digest},
             {"block_hash", b.block_hash}};
}

void from_json(const json& j, Block& b)
{
    b.height = get_uint(j, "height");
    b.parent_hash = field(j, "parent_hash").get<Digest>();
    const auto& txs = field(j, "transactions");
    if (!txs.is_array())
        throw ParseError("field 'transactions' must be an array");
    b.transactions = txs.get<std::vector<Transaction>>();
    b.proposer = get_string(j, "proposer");
    b.round = get_uint(j, "round");
    b.state_digest = field(j, "state_digest").get<Digest>();
    b.block_hash = field(j, "block_hash").get<Digest>();
}

std::string canonical_dump(const json& j)
{
    return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

} // namespace crowdlist::ledger
