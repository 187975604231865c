#pragma once

#include <crowdlist/ledger/types.hpp>

#include <filesystem>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace crowdlist::ledger {

/// Turns a parent state plus a block's transactions into the post-state whose
/// digest the block commits to.
using BlockExecutor = std::function<ChainState(const ChainState&, std::span<const Transaction>)>;

/// The plain ledger transition (execute_block).
BlockExecutor ledger_executor();

class ReplayError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Append-only newline-delimited JSON log, one canonical block per line.
class BlockLog
{
public:
    explicit BlockLog(std::filesystem::path path);

    const std::filesystem::path& path() const { return path_; }
    bool exists() const;

    void append(const Block& block);
    /// Throws ReplayError on a corrupt line. An unparsable final line without a
    /// newline is a torn append and is skipped.
    std::vector<Block> read_all() const;
    /// Terminates a complete final line or cuts a torn one, so later appends
    /// start on a fresh line.
    void repair_tail();

private:
    std::filesystem::path path_;
};

struct ReplayResult
{
    std::vector<Block> chain;
    ChainState state;
};

/// Re-executes a chain from genesis, checking hashes, parent links and every
/// block's state digest. Throws ReplayError on the first inconsistency.
ReplayResult replay(std::span<const Block> blocks, const BlockExecutor& execute);

} // namespace crowdlist::ledger
