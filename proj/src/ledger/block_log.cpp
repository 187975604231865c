#include <crowdlist/ledger/block_log.hpp>

#include <crowdlist/ledger/canonical.hpp>
#include <crowdlist/ledger/state_machine.hpp>

#include <fstream>
#include <iterator>
#include <string>

namespace crowdlist::ledger {

BlockExecutor ledger_executor()
{
    return [](const ChainState& state, std::span<const Transaction> txs) { return execute_block(state, txs); };
}

BlockLog::BlockLog(std::filesystem::path path) : path_(std::move(path)) {}

bool BlockLog::exists() const
{
    return std::filesystem::exists(path_);
}

void BlockLog::append(const Block& block)
{
    if (path_.has_parent_path())
        std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open block log " + path_.string());
    out << canonical_serialize(block) << '\n';
    out.flush();
    if (!out)
        throw std::runtime_error("write to block log failed");
}

std::vector<Block> BlockLog::read_all() const
{
    std::vector<Block> blocks;
    std::ifstream in(path_, std::ios::binary);
    if (!in)
        return blocks;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    std::size_t lineno = 0;
    while (pos < text.size())
    {
        ++lineno;
        auto nl = text.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        auto line = std::string_view(text).substr(pos, terminated ? nl - pos : std::string::npos);
        pos = terminated ? nl + 1 : text.size();
        if (line.empty())
            continue;
        try
        {
            blocks.push_back(canonical_parse<Block>(line));
        }
        catch (const ParseError& e)
        {
            // An unterminated last line is an append cut short by a crash.
            if (!terminated)
                break;
            throw ReplayError("block log line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return blocks;
}

void BlockLog::repair_tail()
{
    if (!exists())
        return;
    std::ifstream in(path_, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    if (text.empty() || text.back() == '\n')
        return;
    const auto nl = text.rfind('\n');
    const auto start = nl == std::string::npos ? 0 : nl + 1;
    try
    {
        canonical_parse<Block>(std::string_view(text).substr(start));
        std::ofstream(path_, std::ios::app | std::ios::binary) << '\n';
    }
    catch (const ParseError&)
    {
        std::filesystem::resize_file(path_, start);
    }
}

ReplayResult replay(std::span<const Block> blocks, const BlockExecutor& execute)
{
    ReplayResult result;
    const auto genesis = make_genesis();
    if (blocks.empty() || blocks.front() != genesis)
        throw ReplayError("chain does not start with the genesis block");
    result.chain.push_back(genesis);

    for (std::size_t i = 1; i < blocks.size(); ++i)
    {
        const auto& block = blocks[i];
        const auto& parent = result.chain.back();
        if (block.height != parent.height + 1)
            throw ReplayError("height gap at block " + std::to_string(block.height));
        if (block.parent_hash != parent.block_hash)
            throw ReplayError("parent hash mismatch at height " + std::to_string(block.height));
        if (compute_block_hash(block) != block.block_hash)
            throw ReplayError("block hash mismatch at height " + std::to_string(block.height));

        try
        {
            result.state = execute(result.state, block.transactions);
        }
        catch (const std::invalid_argument& e)
        {
            throw ReplayError("height " + std::to_string(block.height) + ": " + e.what());
        }
        if (state_digest(result.state) != block.state_digest)
            throw ReplayError("state digest mismatch at height " + std::to_string(block.height));
        result.chain.push_back(block);
    }
    return result;
}

} // namespace crowdlist::ledger
