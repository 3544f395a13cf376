#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hyts/problem.hpp"

namespace hyts {

struct ObservationRecord {
    std::int64_t round = 0;
    Action action;
    double z = 0.0;
};

// Per-action sufficient statistics. Every likelihood quantity below is a sum over
// records of terms depending only on (action, z) linearly in z, so it can be
// evaluated from (count, sum z) per action in O(|A| d^2) instead of O(t d^2).
struct ActionStats {
    double count = 0.0;
    double sum_z = 0.0;
    double sum_abs_z = 0.0;
};

// Append-only record of (round, action, observation).
class ObservationLog {
public:
    explicit ObservationLog(const InstanceView& view);

    // Rounds must be strictly increasing; z must lie in the modality's support.
    void append(std::int64_t round, const Action& action, double z);

    const std::vector<ObservationRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::int64_t count_reward() const { return count_reward_; }
    std::int64_t count_dueling() const { return count_dueling_; }
    const std::vector<ActionStats>& stats() const { return stats_; }
    std::int64_t last_round() const { return records_.empty() ? 0 : records_.back().round; }

    void write_csv(std::ostream& os) const;
    static ObservationLog read_csv(std::istream& is, const InstanceView& view);

private:
    int num_arms_;
    GlmFamily reward_;
    GlmFamily dueling_;
    std::vector<ObservationRecord> records_;
    std::vector<ActionStats> stats_;
    std::int64_t count_reward_ = 0;
    std::int64_t count_dueling_ = 0;
};

double cumulative_loss(const ObservationLog& log, const InstanceView& view, const Vec& theta);
Vec loss_gradient(const ObservationLog& log, const InstanceView& view, const Vec& theta);
Mat loss_hessian(const ObservationLog& log, const InstanceView& view, const Vec& theta);

Vec project_to_ball(const Vec& theta, double radius);

struct MleConfig {
    int max_iterations = 5000;
    double gradient_tolerance = 1e-8;
    std::optional<Vec> initial_point;
};

struct MleResult {
    Vec theta;
    double residual = 0.0;  // |theta - P(theta - grad L(theta))| at unit step
    int iterations = 0;
};

double projected_gradient_residual(const ObservationLog& log, const InstanceView& view, const Vec& theta);

// argmin of the cumulative loss over the ball of radius S.
// Projected gradient descent with Armijo backtracking; throws ConvergenceFailure
// carrying the best iterate when max_iterations is exhausted.
MleResult constrained_mle(const ObservationLog& log, const InstanceView& view, const MleConfig& config = {});

}  // namespace hyts
