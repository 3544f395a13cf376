#pragma once

#include <cstdint>

#include "hyts/problem.hpp"

namespace hyts {

// Simulated feedback source: the only place besides oracle computations that sees theta*.
class Environment {
public:
    Environment(const HybridInstance& instance, std::uint64_t seed);

    double observe(const Action& a);
    double observe(std::size_t action_index);

    const HybridInstance& instance() const { return *instance_; }

private:
    const HybridInstance* instance_;
    Rng rng_;
};

}  // namespace hyts
