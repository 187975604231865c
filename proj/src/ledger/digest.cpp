#include <crowdlist/ledger/digest.hpp>

#include <openssl/evp.h>

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace crowdlist::ledger {

namespace {

constexpr char hex_digits[] = "0123456789abcdef";

int nibble(char c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

} // namespace

std::string Digest::hex() const
{
    std::string out;
    out.reserve(64);
    for (auto b : bytes)
    {
        out.push_back(hex_digits[b >> 4]);
        out.push_back(hex_digits[b & 0x0f]);
    }
    return out;
}

Digest Digest::from_hex(std::string_view text)
{
    if (text.size() != 64)
        throw std::invalid_argument("digest must be 64 hex characters");

    Digest d;
    for (std::size_t i = 0; i < 32; ++i)
    {
        int hi = nibble(text[2 * i]);
        int lo = nibble(text[2 * i + 1]);
        if (hi < 0 || lo < 0)
            throw std::invalid_argument("digest contains a non-hex character");
        d.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return d;
}

bool Digest::is_zero() const
{
    return std::all_of(bytes.begin(), bytes.end(), [](auto b) { return b == 0; });
}

Digest sha256(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx)
        throw std::runtime_error("EVP_MD_CTX_new failed");

    Digest d;
    unsigned int len = 0;
    if (EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), d.bytes.data(), &len) != 1 || len != d.bytes.size())
    {
        throw std::runtime_error("sha256 failed");
    }
    return d;
}

} // namespace crowdlist::ledger
