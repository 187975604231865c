#pragma once

#include <crowdlist/ledger/types.hpp>

#include <json.hpp>

#include <string>

// JSON mapping for ledger values. nlohmann::json stores objects in a std::map,
// so dump() without indentation is already key-sorted and whitespace-free.
// from_json throws ParseError on missing or ill-typed fields.

namespace crowdlist::ledger {

void to_json(nlohmann::json& j, const Digest& d);
void from_json(const nlohmann::json& j, Digest& d);

void to_json(nlohmann::json& j, const Transaction& tx);
void from_json(const nlohmann::json& j, Transaction& tx);

void to_json(nlohmann::json& j, const Vote& v);
void from_json(const nlohmann::json& j, Vote& v);

void to_json(nlohmann::json& j, const UrlRecord& r);
void from_json(const nlohmann::json& j, UrlRecord& r);

void to_json(nlohmann::json& j, const VerifierAccount& a);
void from_json(const nlohmann::json& j, VerifierAccount& a);

void to_json(nlohmann::json& j, const ChainState& s);
void from_json(const nlohmann::json& j, ChainState& s);

void to_json(nlohmann::json& j, const Block& b);
void from_json(const nlohmann::json& j, Block& b);

/// Serializes a JSON value in canonical form: sorted keys, no whitespace, UTF-8,
/// shortest round-trip reals.
std::string canonical_dump(const nlohmann::json& j);

template <typename T>
std::string canonical_serialize(const T& value)
{
    return canonical_dump(nlohmann::json(value));
}

/// Parses canonical (or any valid) JSON text back into a value; throws ParseError.
template <typename T>
T canonical_parse(std::string_view text)
{
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::parse_error& e)
    {
        throw ParseError(e.what());
    }
    return j.get<T>();
}

} // namespace crowdlist::ledger
