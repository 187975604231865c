#pragma once

#include <crowdlist/ledger/types.hpp>

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Read-side JSON documents. Each is a pure function of committed state, so
// replicas holding the same chain serve byte-identical bodies.

namespace crowdlist::node {

/// Record fields, score, status, per-voter rank and skill points, and timeline.
std::optional<nlohmann::json> url_view(const ledger::ChainState& state, const std::string& url_id,
                                       std::size_t threshold);

/// {url_id, timeline: [{ordinal, score, insufficient}]}
std::optional<nlohmann::json> timeline_view(const ledger::ChainState& state, const std::string& url_id,
                                            std::size_t threshold);

/// {nodes: [{id, rank, skill_points}], edges: [{from, to, weight}]}. Before any
/// vote exists every registered verifier shows the teleport-only rank 1/N.
nlohmann::json graph_view(const ledger::ChainState& state);

/// Phishing URLs only, by score descending then url_id.
nlohmann::json blacklist_view(const ledger::ChainState& state);

std::optional<nlohmann::json> verifier_view(const ledger::ChainState& state, const std::string& verifier_id);

/// Blocks with from <= height <= to that exist locally.
nlohmann::json blocks_view(std::span<const std::shared_ptr<const ledger::Block>> chain, std::uint64_t from,
                           std::uint64_t to);

} // namespace crowdlist::node
