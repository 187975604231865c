#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crowdlist::consensus {

class InvalidValidatorSet : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// f = floor((n - 1) / 3). Throws InvalidValidatorSet for n == 0.
std::size_t max_faults(std::size_t n);

/// 2f + 1. Throws InvalidValidatorSet for n == 0.
std::size_t quorum_size(std::size_t n);

class ValidatorSet
{
public:
    /// Throws InvalidValidatorSet when empty or when an id repeats.
    explicit ValidatorSet(std::vector<std::string> validators);

    const std::vector<std::string>& validators() const { return validators_; }
    std::size_t size() const { return validators_.size(); }
    std::size_t max_faults() const { return consensus::max_faults(size()); }
    std::size_t quorum() const { return quorum_size(size()); }

    /// validators[(height + round) mod n]
    const std::string& leader_for(std::uint64_t height, std::uint64_t round) const;

    bool contains(std::string_view id) const;

private:
    std::vector<std::string> validators_;
};

} // namespace crowdlist::consensus
