#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace crowdlist::ledger {

/// Normalizes an absolute URL: lowercases scheme and host, drops a default port
/// (or an empty one) and keeps userinfo, path, query and fragment verbatim.
/// Returns nullopt when the text is not an absolute URL with a scheme and host.
std::optional<std::string> normalize_url(std::string_view url);

/// Hex SHA-256 of the normalized URL. Throws std::invalid_argument on a malformed URL.
std::string url_id_for(std::string_view url);

} // namespace crowdlist::ledger
