#include <crowdlist/ledger/types.hpp>

namespace crowdlist::ledger {

std::string_view to_string(Verdict v)
{
    return v == Verdict::Phishing ? "Phishing" : "NotPhishing";
}

std::string_view to_string(UrlStatus s)
{
    switch (s)
    {
    case UrlStatus::Unverified:
        return "Unverified";
    case UrlStatus::Phishing:
        return "Phishing";
    case UrlStatus::NotPhishing:
        return "NotPhishing";
    }
    return "Unverified";
}

std::string_view to_string(TxKind k)
{
    switch (k)
    {
    case TxKind::RegisterUser:
        return "RegisterUser";
    case TxKind::SubmitUrl:
        return "SubmitUrl";
    case TxKind::CastVote:
        return "CastVote";
    }
    return "RegisterUser";
}

std::optional<Verdict> parse_verdict(std::string_view text)
{
    if (text == "Phishing")
        return Verdict::Phishing;
    if (text == "NotPhishing")
        return Verdict::NotPhishing;
    return std::nullopt;
}

std::optional<UrlStatus> parse_status(std::string_view text)
{
    if (text == "Unverified")
        return UrlStatus::Unverified;
    if (text == "Phishing")
        return UrlStatus::Phishing;
    if (text == "NotPhishing")
        return UrlStatus::NotPhishing;
    return std::nullopt;
}

std::optional<TxKind> parse_tx_kind(std::string_view text)
{
    if (text == "RegisterUser")
        return TxKind::RegisterUser;
    if (text == "SubmitUrl")
        return TxKind::SubmitUrl;
    if (text == "CastVote")
        return TxKind::CastVote;
    return std::nullopt;
}

} // namespace crowdlist::ledger
