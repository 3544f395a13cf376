#pragma once

#include <string>

#include "json.hpp"

#include "hyts/problem.hpp"

namespace hyts {

// {arms: [[...], ...] (one list per arm), theta_star, S, family_reward, family_dueling,
//  dispersion_reward, dispersion_dueling, costs: {reward: [...], dueling: [...]}}.
// Doubles are written with 17 significant digits, so the round trip is exact.
nlohmann::json instance_to_json(const HybridInstance& instance);

// Parsed fields before any instance validation (used to report on invalid instances).
struct InstanceData {
    Mat arms;
    Vec theta_star;
    double radius = 0.0;
    GlmFamily reward_family = GlmFamily::bernoulli_logistic();
    GlmFamily dueling_family = GlmFamily::bernoulli_logistic();
    std::optional<Vec> costs;
};

InstanceData instance_data_from_json(const nlohmann::json& j);
HybridInstance instance_from_json(const nlohmann::json& j);

std::string instance_to_string(const HybridInstance& instance);
HybridInstance instance_from_string(const std::string& text);

// FNV-1a over the binary contents (arms, theta*, S, families, costs).
std::uint64_t instance_hash(const HybridInstance& instance);

}  // namespace hyts
