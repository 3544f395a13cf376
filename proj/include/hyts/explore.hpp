#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hyts/design.hpp"
#include "hyts/environment.hpp"
#include "hyts/estimation.hpp"

namespace hyts {

enum class Mode { hybrid, reward_only, dueling_only, random_hybrid, cost_aware };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

// Actions a mode may query, in action-index order.
std::vector<std::size_t> mode_actions(const InstanceView& view, Mode mode);

// Greedy spanning subset of `candidates` (first index wins); throws NotIdentifiable
// when the candidates do not span R^d.
std::vector<std::size_t> spanning_subset(const InstanceView& view, const std::vector<std::size_t>& candidates);

// The mode's actions in the order offered to spanning_subset: cheapest first for cost_aware
// (stable, so equal costs keep index order), index order otherwise.
std::vector<std::size_t> exploration_candidates(const InstanceView& view, Mode mode);

// One pass of the warm-up round robin for the mode; also the forced-exploration support.
std::vector<std::size_t> warmup_sequence(const InstanceView& view, Mode mode);

class TrackingState {
public:
    TrackingState(std::size_t num_actions, std::vector<std::size_t> allowed, std::vector<std::size_t> exploration_support,
                  double alpha);

    struct Choice {
        std::size_t action = 0;
        bool tracking = false;
    };

    // Forced exploration with probability t^{-alpha}, uniform on the exploration support;
    // otherwise the allowed action with the smallest N - W (smallest index on ties), after
    // which W += w_star and N is incremented at the chosen action.
    Choice select_action(const DesignWeights& w_star, std::int64_t t, Rng& rng);
    // The tracking branch alone (no exploration coin).
    std::size_t track(const DesignWeights& w_star);

    const Vec& counts() const { return counts_; }
    const Vec& target_mass() const { return mass_; }
    std::int64_t tracking_rounds() const { return tracking_rounds_; }
    std::int64_t exploration_rounds() const { return exploration_rounds_; }
    const std::vector<std::size_t>& exploration_support() const { return support_; }
    double alpha() const { return alpha_; }

private:
    Vec counts_;
    Vec mass_;
    std::vector<std::size_t> allowed_;
    std::vector<std::size_t> support_;
    double alpha_;
    std::int64_t tracking_rounds_ = 0;
    std::int64_t exploration_rounds_ = 0;
};

struct DesignSchedule {
    int warm_iterations = 50;
    int warm_step_offset = 200;
    int full_every = 50;
    // certificate spacing inside the periodic full solves
    int full_certificate_every = 250;
};

struct AlgoConfig {
    Mode mode = Mode::hybrid;
    double delta = 0.05;
    double alpha = 0.5;
    std::int64_t max_rounds = 5'000'000;
    MleConfig mle;
    FwConfig fw;  // used for the periodic full solves
    DesignSchedule schedule;
    bool record_trace = false;
    bool record_actions = false;

    void validate() const;
};

struct TraceRow {
    std::int64_t t = 0;
    std::size_t action = 0;
    double z = 0.0;
    bool was_tracking = false;
    double beta = 0.0;
    double min_certificate_value = 0.0;
    double phi = 0.0;
};

struct RunResult {
    std::int64_t tau = 0;  // number of queries made before stopping
    int recommended = 0;
    bool correct = false;
    bool converged = false;
    std::int64_t warmup_rounds = 0;
    std::int64_t reward_queries = 0;
    std::int64_t dueling_queries = 0;
    double total_cost = 0.0;
    double reward_cost = 0.0;
    double dueling_cost = 0.0;
    std::int64_t exploration_rounds = 0;
    std::int64_t mle_failures = 0;
    // confidence state at the stopping check, for independent re-verification
    Vec theta_hat;
    Mat info;
    double beta = 0.0;
    std::vector<std::size_t> actions;  // every queried action, when record_actions is set
    std::vector<TraceRow> trace;
};

// argmax_i x_i^T theta_hat, smallest index on ties.
int recommend(const Vec& theta_hat, const InstanceView& view);

// The sequential identification loop. Only `instance.view()` informs decisions; theta*
// is used after stopping to fill RunResult::correct.
RunResult run(const HybridInstance& instance, Environment& env, const AlgoConfig& config, Rng& rng);

void write_trace_csv(std::ostream& os, const RunResult& result, const InstanceView& view);

}  // namespace hyts
