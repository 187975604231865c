#include <crowdlist/ledger/url.hpp>

#include <crowdlist/ledger/digest.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>
#include <utility>

namespace crowdlist::ledger {

namespace {

bool is_scheme_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

constexpr std::array<std::pair<std::string_view, std::string_view>, 5> default_ports{{
    {"http", "80"},
    {"https", "443"},
    {"ftp", "21"},
    {"ws", "80"},
    {"wss", "443"},
}};

bool is_default_port(std::string_view scheme, std::string_view port)
{
    return std::any_of(default_ports.begin(), default_ports.end(),
                       [&](const auto& p) { return p.first == scheme && p.second == port; });
}

} // namespace

std::optional<std::string> normalize_url(std::string_view url)
{
    if (url.empty())
        return std::nullopt;
    if (std::any_of(url.begin(), url.end(), [](unsigned char c) { return c <= 0x20 || c == 0x7f; }))
        return std::nullopt;

    auto colon = url.find("://");
    if (colon == std::string_view::npos || colon == 0)
        return std::nullopt;
    auto scheme = url.substr(0, colon);
    if (!std::isalpha(static_cast<unsigned char>(scheme.front())) ||
        !std::all_of(scheme.begin(), scheme.end(), is_scheme_char))
    {
        return std::nullopt;
    }

    auto rest = url.substr(colon + 3);
    auto authority_end = rest.find_first_of("/?#");
    auto authority = rest.substr(0, authority_end);
    auto tail = authority_end == std::string_view::npos ? std::string_view{} : rest.substr(authority_end);

    std::string_view userinfo;
    if (auto at = authority.rfind('@'); at != std::string_view::npos)
    {
        userinfo = authority.substr(0, at + 1);
        authority = authority.substr(at + 1);
    }

    std::string_view host = authority;
    std::string_view port;
    if (!authority.empty() && authority.front() == '[')
    {
        auto close = authority.find(']');
        if (close == std::string_view::npos)
            return std::nullopt;
        host = authority.substr(0, close + 1);
        auto after = authority.substr(close + 1);
        if (!after.empty())
        {
            if (after.front() != ':')
                return std::nullopt;
            port = after.substr(1);
        }
    }
    else if (auto pc = authority.rfind(':'); pc != std::string_view::npos)
    {
        host = authority.substr(0, pc);
        port = authority.substr(pc + 1);
    }

    if (host.empty() || host == "[]")
        return std::nullopt;
    if (!std::all_of(port.begin(), port.end(), [](unsigned char c) { return std::isdigit(c); }))
        return std::nullopt;

    auto lscheme = lower(scheme);
    std::string out = lscheme;
    out += "://";
    out += userinfo;
    out += lower(host);
    if (!port.empty() && !is_default_port(lscheme, port))
    {
        out += ':';
        out += port;
    }
    out += tail;
    return out;
}

std::string url_id_for(std::string_view url)
{
    auto normalized = normalize_url(url);
    if (!normalized)
        throw std::invalid_argument("malformed url");
    return sha256(*normalized).hex();
}

} // namespace crowdlist::ledger
