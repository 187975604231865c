#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace crowdlist::cli {

// Exit codes shared by every command.
inline constexpr int exit_ok = 0;
inline constexpr int exit_rejected = 1;
inline constexpr int exit_usage = 2;

struct Io
{
    std::ostream& out;
    std::ostream& err;
};

int cmd_sim(const std::filesystem::path& scenario, bool json, Io io);

/// `spec` unset runs the default spec; `seed` replaces the spec's seed list.
int cmd_bench(const std::optional<std::filesystem::path>& spec, std::optional<std::uint64_t> seed, bool json, Io io);

struct WriteOptions
{
    std::string api;
    std::optional<std::uint64_t> wait_ms;
    bool json = false;
};

int cmd_register(const WriteOptions& o, const std::string& verifier_id, const std::string& display_name, Io io);
int cmd_submit(const WriteOptions& o, const std::string& sender, const std::string& url, const std::string& evidence,
               Io io);
/// `target` is a url_id or a URL (anything containing "://" is hashed first).
int cmd_vote(const WriteOptions& o, const std::string& sender, const std::string& target, const std::string& verdict,
             Io io);
int cmd_lookup(const std::string& api, const std::string& url, bool json, Io io);

/// Runs until SIGINT/SIGTERM. Prints the bound address(es) once serving.
int cmd_node(const std::filesystem::path& config, Io io);
int cmd_local_cluster(std::size_t n, const std::string& listen_base, std::uint64_t seed, Io io);

} // namespace crowdlist::cli
