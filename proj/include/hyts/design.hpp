#pragma once

#include <optional>
#include <vector>

#include "hyts/problem.hpp"

namespace hyts {

// Sampling proportions over the joint action space (simplex).
struct DesignWeights {
    Vec values;

    static DesignWeights uniform(std::size_t n);
    // Uniform over the given action indices, zero elsewhere.
    static DesignWeights uniform_on(std::size_t n, const std::vector<std::size_t>& support);
    bool on_simplex(double tol = 1e-9) const;
};

// Sampling intensities per unit cost: p >= 0 with <c, p> = 1.
struct CostDesign {
    Vec intensities;

    bool feasible(const Vec& costs, double tol = 1e-9) const;
};

struct FwConfig {
    int max_iterations = 2000;
    // stop once (phi_best - dual lower bound) / phi_best falls below this
    double relative_tolerance = 1e-2;
    double ridge = 1e-12;
    // temperature of the soft maximum over competitor directions, relative to phi
    double smoothing = 1e-2;
    // step at iteration k is 2 / (k + step_offset + 2)
    int step_offset = 1;
    int certificate_every = 25;
    int dual_iterations = 1000;

    void validate() const;
};

struct FwResult {
    Vec weights;  // over the problem's features
    double objective = 0.0;
    double lower_bound = 0.0;
    int iterations = 0;
    bool converged = false;
};

// min over the simplex of max_i g_i^T (sum_a w_a v_a v_a^T)^{-1} g_i, with the v_a
// already scaled by the square root of their information weight.
class MinimaxDesignProblem {
public:
    // reduce_to_span: when the features span a proper subspace containing every
    // direction, work in that subspace (pseudo-inverse semantics). Otherwise a
    // rank-deficient feature set throws NotIdentifiable.
    MinimaxDesignProblem(Mat features, Mat directions, bool reduce_to_span = false);

    std::size_t num_features() const { return static_cast<std::size_t>(features_.cols()); }
    std::size_t num_directions() const { return static_cast<std::size_t>(directions_.cols()); }
    int reduced_dim() const { return static_cast<int>(features_.rows()); }

    Mat matrix(const Vec& w) const;
    // +inf when the smallest eigenvalue of the design matrix is <= 1e-10
    double objective(const Vec& w, double ridge = 1e-12) const;
    FwResult solve(const FwConfig& config, const std::optional<Vec>& warm_start = std::nullopt) const;

private:
    Mat features_;
    Mat directions_;
};

Mat design_matrix(const DesignWeights& w, const Vec& theta, const InstanceView& view);
double minimax_objective(const Vec& theta, int i_hat, const DesignWeights& w, const InstanceView& view);

struct DesignResult {
    DesignWeights weights;
    double objective = 0.0;
    double lower_bound = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Empty subset means every action.
DesignResult frank_wolfe_design(const Vec& theta, int i_hat, const InstanceView& view, const FwConfig& config,
                                const std::optional<DesignWeights>& warm_start = std::nullopt,
                                const std::vector<std::size_t>& subset = {});

struct CostDesignResult {
    CostDesign p;
    DesignWeights w_bar;  // p / sum(p), the proportions actually tracked
    double objective = 0.0;
    double lower_bound = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Optimises over q = c * p on the simplex, with each action's information weight divided by its cost.
CostDesignResult cost_design(const Vec& theta, int i_hat, const InstanceView& view, const Vec& costs,
                             const FwConfig& config, const std::optional<DesignWeights>& warm_start = std::nullopt,
                             const std::vector<std::size_t>& subset = {});

struct CharacteristicTime {
    double value = 0.0;
    double phi = 0.0;
    double gap_min = 0.0;
    double lower_bound = 0.0;  // certified lower bound on the optimal value, same units as value
    Vec weights;
    int iterations = 0;
    bool converged = false;
};

CharacteristicTime characteristic_time(const HybridInstance& instance, const FwConfig& config = {});
CharacteristicTime cost_characteristic_time(const HybridInstance& instance, const Vec& costs,
                                            const FwConfig& config = {});
// Same quantity with the actions limited to `subset` and the max taken over `competitors`
// only (both empty = unrestricted); solved in the span of the allowed features.
CharacteristicTime restricted_characteristic_time(const HybridInstance& instance,
                                                  const std::vector<std::size_t>& subset,
                                                  const std::vector<int>& competitors, const FwConfig& config = {});

// KL(p(. | x_a^T theta) || p(. | x_a^T lambda)).
double kl_action(const Action& a, const Vec& theta, const Vec& lambda, const InstanceView& view);

// 2 min_w max_i |x_{i*,i}|^2_{A_F(w)^{-1}} / Delta_i^2 with the undiscounted Fisher matrix A_F.
CharacteristicTime local_lb_time(const HybridInstance& instance, const FwConfig& config = {});

Mat fisher_design_matrix(const DesignWeights& w, const Vec& theta, const InstanceView& view);

struct ClosedForms {
    double reward_only = 0.0;
    double dueling_only = 0.0;
};

// Logistic closed forms for the two 2-d examples; B_c, B_d are the discount constants
// 2 (1 + rho S M) zeta of each channel.
ClosedForms closed_form_complexities(int which, double b_reward, double b_dueling);

std::vector<std::size_t> reward_actions(const InstanceView& view);
std::vector<std::size_t> dueling_actions(const InstanceView& view);

}  // namespace hyts
