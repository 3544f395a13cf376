#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyts/glm.hpp"

namespace hyts {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Arm indices are 0-based throughout the library and in every file format.
struct Action {
    enum class Kind { reward, duel };

    Kind kind = Kind::reward;
    int first = 0;
    int second = -1;  // unused for reward actions

    static Action reward(int arm);
    static Action duel(int j, int k);  // requires j < k

    bool is_reward() const { return kind == Kind::reward; }
    bool is_duel() const { return kind == Kind::duel; }
    // 1 for reward actions, 2 for duels (bound on the feature norm)
    int rho() const { return is_reward() ? 1 : 2; }

    std::string to_string() const;

    friend bool operator==(const Action&, const Action&) = default;
};

std::size_t num_actions(int num_arms);
// K reward actions, then duels (j, k) in lexicographic order.
std::vector<Action> enumerate_actions(int num_arms);
std::size_t action_index(const Action& a, int num_arms);

// Everything an algorithm may see: features, radius, observation models, costs.
// The true parameter lives only in HybridInstance.
class InstanceView {
public:
    InstanceView(Mat arms, double radius, GlmFamily reward_family, GlmFamily dueling_family,
                 std::optional<Vec> action_costs = std::nullopt);

    int dim() const { return static_cast<int>(arms_.rows()); }
    int num_arms() const { return static_cast<int>(arms_.cols()); }
    std::size_t num_actions() const { return actions_.size(); }
    double radius() const { return radius_; }

    const Mat& arms() const { return arms_; }
    auto arm(int i) const { return arms_.col(i); }
    const std::vector<Action>& actions() const { return actions_; }
    const Action& action(std::size_t index) const { return actions_[index]; }
    std::size_t index_of(const Action& a) const { return action_index(a, num_arms()); }

    Vec feature(const Action& a) const;
    const Vec& feature(std::size_t index) const { return features_[index]; }
    const GlmFamily& family(const Action& a) const { return a.is_reward() ? reward_ : dueling_; }
    const GlmFamily& reward_family() const { return reward_; }
    const GlmFamily& dueling_family() const { return dueling_; }

    const Vec& costs() const { return costs_; }
    double cost(std::size_t index) const { return costs_(static_cast<Eigen::Index>(index)); }
    InstanceView with_costs(Vec costs) const;

private:
    Mat arms_;  // d x K, column i is x_i
    double radius_;
    GlmFamily reward_;
    GlmFamily dueling_;
    Vec costs_;
    std::vector<Action> actions_;
    std::vector<Vec> features_;
};

struct ValidationReport {
    double max_feature_norm = 0.0;
    double theta_norm = 0.0;
    double min_singular_value = 0.0;
    double top_two_gap = 0.0;
    bool costs_positive = true;

    bool norms_ok = false;
    bool theta_ok = false;
    bool span_ok = false;
    bool unique_best_ok = false;

    bool ok() const { return norms_ok && theta_ok && span_ok && unique_best_ok && costs_positive; }
    std::string describe() const;
};

inline constexpr double kDegeneracyTolerance = 1e-10;

ValidationReport validate_instance(const Mat& arms, const Vec& theta_star, double radius, const Vec& costs);

class HybridInstance {
public:
    // Throws DegenerateInstance / InvalidArgument when the checks in validate_instance fail.
    HybridInstance(InstanceView view, Vec theta_star);

    const InstanceView& view() const { return view_; }
    const Vec& theta_star() const { return theta_star_; }
    HybridInstance with_costs(Vec costs) const;

private:
    InstanceView view_;
    Vec theta_star_;
};

struct BestArm {
    int arm = 0;
    Vec gaps;  // gaps[i] = (x_best - x_i)^T theta*, zero at the best arm
    double gap_min = 0.0;
};

BestArm best_arm_and_gaps(const Mat& arms, const Vec& theta);
BestArm best_arm_and_gaps(const HybridInstance& instance);

// Cost vector with one price for every reward action and another for every duel.
Vec modality_costs(int num_arms, double reward_cost, double dueling_cost);

// Main random construction: theta* = (S-1) 1 / sqrt(d), alignments 0.9 and 0.8 (K-i)/(K-1).
HybridInstance gen_main_instance(int num_arms, int dim, double radius, Rng& rng,
                                 FamilyId family = FamilyId::bernoulli_logistic);
// Standard basis plus cos(0.1) e1 + sin(0.1) e2, same theta* rule.
HybridInstance gen_basis_rotated(int dim, double radius, FamilyId family = FamilyId::bernoulli_logistic);
// The two closed-form logistic examples (case 1: duel informative, case 2: reward informative).
HybridInstance gen_closed_form_case(int which, double radius = 5.0);
// d = 1, arms +1 and -1, gaussian channels with unit dispersion, theta* = 1.
HybridInstance gen_toy_1d(double radius = 2.0);

}  // namespace hyts
