#include <crowdlist/consensus/validator_set.hpp>

#include <algorithm>
#include <set>

namespace crowdlist::consensus {

std::size_t max_faults(std::size_t n)
{
    if (n == 0)
        throw InvalidValidatorSet("validator set must not be empty");
    return (n - 1) / 3;
}

std::size_t quorum_size(std::size_t n)
{
    return 2 * max_faults(n) + 1;
}

ValidatorSet::ValidatorSet(std::vector<std::string> validators) : validators_(std::move(validators))
{
    if (validators_.empty())
        throw InvalidValidatorSet("validator set must not be empty");
    std::set<std::string_view> seen;
    for (const auto& v : validators_)
    {
        if (v.empty() || !seen.insert(v).second)
            throw InvalidValidatorSet("validator ids must be unique and non-empty");
    }
}

const std::string& ValidatorSet::leader_for(std::uint64_t height, std::uint64_t round) const
{
    return validators_[(height + round) % validators_.size()];
}

bool ValidatorSet::contains(std::string_view id) const
{
    return std::find(validators_.begin(), validators_.end(), id) != validators_.end();
}

} // namespace crowdlist::consensus
