#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace crowdlist::ledger {

/// 32-byte SHA-256 digest. Rendered as lowercase hex in every external form.
struct Digest
{
    std::array<std::uint8_t, 32> bytes{};

    std::string hex() const;

    /// Throws std::invalid_argument unless `text` is exactly 64 hex characters.
    static Digest from_hex(std::string_view text);

    bool is_zero() const;

    auto operator<=>(const Digest&) const = default;
};

Digest sha256(std::string_view data);

} // namespace crowdlist::ledger
