#include "hyts/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hyts/confidence.hpp"
#include "hyts/errors.hpp"

namespace hyts {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRidgeBand = 1e-8;

struct Evaluation {
    double phi = kInf;
    Vec per_direction;
    Mat solved;  // A^{-1} G
};

Evaluation evaluate(const Mat& features, const Mat& directions, const Vec& w, double ridge) {
    Evaluation ev;
    const Mat A = features * w.asDiagonal() * features.transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(A, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues()(0);
    if (!(lo > kSingularEigenvalue))
        return ev;
    Mat reg = A;
    if (lo < kRidgeBand)
        reg.diagonal().array() += ridge;
    Eigen::LDLT<Mat> ldlt(reg);
    ev.solved = ldlt.solve(directions);
    ev.per_direction = (directions.array() * ev.solved.array()).colwise().sum().transpose();
    ev.phi = ev.per_direction.maxCoeff();
    return ev;
}

Vec soft_weights(const Vec& f, double phi, double smoothing) {
    const double temp = smoothing * phi;
    Vec lam = ((f.array() - phi) / temp).exp();
    return lam / lam.sum();
}

// Lower bound on the optimum from the matrix game with payoff 2 f_i - S_ia: any
// competitor mixture lambda certifies 2 lambda.f - max_a (lambda^T S)_a. Both players
// run optimistic multiplicative weights; the best lambda seen (or its running average) is kept.
double dual_lower_bound(const Vec& f, const Mat& scores, int iterations, double target) {
    const Mat payoff = (2.0 * f).replicate(1, scores.cols()) - scores;
    const double eta = 5.0 / std::max(payoff.cwiseAbs().maxCoeff(), 1e-300);
    const Eigen::Index m = payoff.rows(), n = payoff.cols();
    Vec gain_x = Vec::Zero(m), gain_y = Vec::Zero(n), last_x = Vec::Zero(m), last_y = Vec::Zero(n);
    Vec x(m), y(n);
    auto softmax = [](Vec& p) {
        p = (p.array() - p.maxCoeff()).exp();
        p /= p.sum();
    };
    double best = (payoff.transpose() * Vec::Constant(m, 1.0 / static_cast<double>(m))).minCoeff();
    for (Eigen::Index i = 0; i < m; ++i)
        best = std::max(best, payoff.row(i).minCoeff());
    for (int t = 0; t < iterations && best < target; ++t) {
        x = eta * (gain_x + last_x);
        y = -eta * (gain_y + last_y);
        softmax(x);
        softmax(y);
        last_x.noalias() = payoff * y;
        last_y.noalias() = payoff.transpose() * x;
        gain_x += last_x;
        gain_y += last_y;
        // gain_y / (t + 1) is the payoff of the averaged row strategy
        best = std::max({best, last_y.minCoeff(), gain_y.minCoeff() / (t + 1.0)});
    }
    return best;
}

// Fisher weights drop the self-concordance discount.
double information_scale(const InstanceView& view, const Vec& theta, std::size_t a, bool fisher) {
    if (!fisher)
        return info_coefficient(view, a, theta);
    const GlmFamily& fam = view.family(view.action(a));
    return fam.mean_prime(view.feature(a).dot(theta)) / fam.dispersion_scale();
}

std::vector<std::size_t> all_actions(const InstanceView& view) {
    std::vector<std::size_t> out(view.num_actions());
    for (std::size_t a = 0; a < out.size(); ++a)
        out[a] = a;
    return out;
}

std::vector<std::size_t> resolve_subset(const InstanceView& view, const std::vector<std::size_t>& subset) {
    if (subset.empty())
        return all_actions(view);
    for (std::size_t a : subset)
        if (a >= view.num_actions())
            throw InvalidArgument("action index out of range in subset");
    return subset;
}

Mat scaled_features(const InstanceView& view, const Vec& theta, const std::vector<std::size_t>& subset,
                    const Vec* costs, bool fisher) {
    Mat V(view.dim(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j) {
        const std::size_t a = subset[j];
        double weight = information_scale(view, theta, a, fisher);
        if (costs)
            weight /= (*costs)(static_cast<Eigen::Index>(a));
        V.col(static_cast<Eigen::Index>(j)) = std::sqrt(weight) * view.feature(a);
    }
    return V;
}

std::vector<int> resolve_competitors(const InstanceView& view, int best, const std::vector<int>& competitors) {
    std::vector<int> out;
    if (competitors.empty()) {
        for (int i = 0; i < view.num_arms(); ++i)
            if (i != best)
                out.push_back(i);
        return out;
    }
    for (int i : competitors) {
        if (i < 0 || i >= view.num_arms() || i == best)
            throw InvalidArgument("competitor index invalid");
        out.push_back(i);
    }
    return out;
}

Mat competitor_directions(const InstanceView& view, int best, const std::vector<int>& competitors,
                          const Vec* gaps = nullptr) {
    Mat G(view.dim(), static_cast<Eigen::Index>(competitors.size()));
    for (std::size_t j = 0; j < competitors.size(); ++j) {
        Vec g = view.arm(best) - view.arm(competitors[j]);
        if (gaps)
            g /= (*gaps)(competitors[j]);
        G.col(static_cast<Eigen::Index>(j)) = g;
    }
    return G;
}

void check_arm(const InstanceView& view, int i_hat) {
    if (i_hat < 0 || i_hat >= view.num_arms())
        throw InvalidArgument("arm index out of range");
    if (view.num_arms() < 2)
        throw InvalidArgument("need at least two arms");
}

Vec expand(const Vec& sub, const std::vector<std::size_t>& subset, std::size_t n) {
    Vec full = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < subset.size(); ++j)
        full(static_cast<Eigen::Index>(subset[j])) = sub(static_cast<Eigen::Index>(j));
    return full;
}

std::optional<Vec> restrict_warm(const std::optional<DesignWeights>& warm, const std::vector<std::size_t>& subset,
                                 std::size_t n) {
    if (!warm)
        return std::nullopt;
    if (static_cast<std::size_t>(warm->values.size()) != n)
        throw InvalidArgument("warm start has the wrong length");
    Vec sub(static_cast<Eigen::Index>(subset.size()));
    for (std::size_t j = 0; j < subset.size(); ++j)
        sub(static_cast<Eigen::Index>(j)) = std::max(0.0, warm->values(static_cast<Eigen::Index>(subset[j])));
    const double s = sub.sum();
    if (!(s > 0.0))
        return std::nullopt;
    return Vec(sub / s);
}

CharacteristicTime finish(const FwResult& r, double gap_min, double factor, const std::vector<std::size_t>& subset,
                          std::size_t n) {
    CharacteristicTime out;
    out.phi = r.objective;
    out.gap_min = gap_min;
    out.value = factor * r.objective / (gap_min * gap_min);
    out.lower_bound = factor * r.lower_bound / (gap_min * gap_min);
    out.weights = expand(r.weights, subset, n);
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

}  // namespace

DesignWeights DesignWeights::uniform(std::size_t n) {
    if (n == 0)
        throw InvalidArgument("empty design");
    return {Vec::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n))};
}

DesignWeights DesignWeights::uniform_on(std::size_t n, const std::vector<std::size_t>& support) {
    if (support.empty())
        throw InvalidArgument("empty support");
    Vec v = Vec::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t a : support) {
        if (a >= n)
            throw InvalidArgument("support index out of range");
        v(static_cast<Eigen::Index>(a)) = 1.0 / static_cast<double>(support.size());
    }
    return {v};
}

bool DesignWeights::on_simplex(double tol) const {
    return values.size() > 0 && values.minCoeff() >= 0.0 && std::abs(values.sum() - 1.0) <= tol;
}

bool CostDesign::feasible(const Vec& costs, double tol) const {
    return intensities.size() == costs.size() && intensities.size() > 0 && intensities.minCoeff() >= 0.0 &&
           std::abs(intensities.dot(costs) - 1.0) <= tol;
}

void FwConfig::validate() const {
    if (max_iterations < 0)
        throw InvalidArgument("max_iterations must be nonnegative");
    if (!(relative_tolerance > 0.0))
        throw InvalidArgument("relative_tolerance must be positive");
    if (!(ridge >= 0.0 && ridge <= 1e-8))
        throw InvalidArgument("ridge must lie in [0, 1e-8]");
    if (!(smoothing > 0.0) || step_offset < 0 || certificate_every < 1 || dual_iterations < 0)
        throw InvalidArgument("invalid Frank-Wolfe settings");
}

MinimaxDesignProblem::MinimaxDesignProblem(Mat features, Mat directions, bool reduce_to_span)
    : features_(std::move(features)), directions_(std::move(directions)) {
    if (features_.cols() == 0 || directions_.cols() == 0)
        throw InvalidArgument("design problem needs features and directions");
    if (features_.rows() != directions_.rows())
        throw InvalidArgument("feature and direction dimensions differ");
    if (!reduce_to_span)
        return;
    Eigen::JacobiSVD<Mat> svd(features_, Eigen::ComputeThinU);
    const Vec& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv(0));
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut)
        ++rank;
    if (rank == features_.rows())
        return;
    if (rank == 0)
        throw NotIdentifiable("features are all zero");
    const Mat U = svd.matrixU().leftCols(rank);
    for (Eigen::Index j = 0; j < directions_.cols(); ++j) {
        const Vec g = directions_.col(j);
        const double off = (g - U * (U.transpose() * g)).norm();
        if (off > 1e-9 * std::max(1.0, g.norm()))
            throw NotIdentifiable("a competitor direction lies outside the span of the allowed actions");
    }
    features_ = U.transpose() * features_;
    directions_ = U.transpose() * directions_;
}

Mat MinimaxDesignProblem::matrix(const Vec& w) const {
    return features_ * w.asDiagonal() * features_.transpose();
}

double MinimaxDesignProblem::objective(const Vec& w, double ridge) const {
    if (w.size() != features_.cols())
        throw InvalidArgument("weight vector has the wrong length");
    return evaluate(features_, directions_, w, ridge).phi;
}

FwResult MinimaxDesignProblem::solve(const FwConfig& config, const std::optional<Vec>& warm_start) const {
    config.validate();
    const Eigen::Index n = features_.cols();
    const Vec uniform = Vec::Constant(n, 1.0 / static_cast<double>(n));
    Vec w = uniform;
    if (warm_start) {
        if (warm_start->size() != n)
            throw InvalidArgument("warm start has the wrong length");
        w = *warm_start;
        if (!std::isfinite(objective(w, config.ridge)))
            w = 0.5 * w + 0.5 * uniform;
    }

    FwResult result;
    result.weights = w;
    result.objective = kInf;
    result.lower_bound = 0.0;
    for (int k = 0;; ++k) {
        const Evaluation ev = evaluate(features_, directions_, w, config.ridge);
        if (!std::isfinite(ev.phi)) {
            // only reachable from a degenerate feature set
            if (k == 0)
                throw NotIdentifiable("design matrix is singular at the initial point");
            break;
        }
        if (ev.phi < result.objective) {
            result.objective = ev.phi;
            result.weights = w;
        }
        result.iterations = k;

        // scores(i, a) = (g_i^T A^{-1} v_a)^2
        const Mat scores = (ev.solved.transpose() * features_).array().square().matrix();
        const bool last = k >= config.max_iterations;
        if (k % config.certificate_every == 0 || last) {
            result.lower_bound = std::max(
                result.lower_bound, dual_lower_bound(ev.per_direction, scores, config.dual_iterations,
                                 (1.0 - config.relative_tolerance) * result.objective));
            if (result.objective - result.lower_bound <= config.relative_tolerance * result.objective) {
                result.converged = true;
                break;
            }
        }
        if (last)
            break;

        const Vec lam = soft_weights(ev.per_direction, ev.phi, config.smoothing);
        const Vec pull = scores.transpose() * lam;
        Eigen::Index vertex = 0;
        pull.maxCoeff(&vertex);
        const double step = 2.0 / (k + config.step_offset + 2.0);
        w *= (1.0 - step);
        w(vertex) += step;
    }
    return result;
}

Mat design_matrix(const DesignWeights& w, const Vec& theta, const InstanceView& view) {
    if (static_cast<std::size_t>(w.values.size()) != view.num_actions())
        throw InvalidArgument("weight vector has the wrong length");
    Mat A = Mat::Zero(view.dim(), view.dim());
    for (std::size_t a = 0; a < view.num_actions(); ++a) {
        const double wa = w.values(static_cast<Eigen::Index>(a));
        if (wa == 0.0)
            continue;
        const Vec& x = view.feature(a);
        A.noalias() += (wa * info_coefficient(view, a, theta)) * x * x.transpose();
    }
    return A;
}

Mat fisher_design_matrix(const DesignWeights& w, const Vec& theta, const InstanceView& view) {
    if (static_cast<std::size_t>(w.values.size()) != view.num_actions())
        throw InvalidArgument("weight vector has the wrong length");
    Mat A = Mat::Zero(view.dim(), view.dim());
    for (std::size_t a = 0; a < view.num_actions(); ++a) {
        const Vec& x = view.feature(a);
        A.noalias() += (w.values(static_cast<Eigen::Index>(a)) * information_scale(view, theta, a, true)) * x *
                       x.transpose();
    }
    return A;
}

double minimax_objective(const Vec& theta, int i_hat, const DesignWeights& w, const InstanceView& view) {
    check_arm(view, i_hat);
    const auto subset = all_actions(view);
    const MinimaxDesignProblem problem(scaled_features(view, theta, subset, nullptr, false),
                                       competitor_directions(view, i_hat, resolve_competitors(view, i_hat, {})));
    return problem.objective(w.values);
}

DesignResult frank_wolfe_design(const Vec& theta, int i_hat, const InstanceView& view, const FwConfig& config,
                                const std::optional<DesignWeights>& warm_start,
                                const std::vector<std::size_t>& subset) {
    check_arm(view, i_hat);
    const auto actions = resolve_subset(view, subset);
    const MinimaxDesignProblem problem(scaled_features(view, theta, actions, nullptr, false),
                                       competitor_directions(view, i_hat, resolve_competitors(view, i_hat, {})),
                                       true);
    const FwResult r = problem.solve(config, restrict_warm(warm_start, actions, view.num_actions()));
    return {{expand(r.weights, actions, view.num_actions())}, r.objective, r.lower_bound, r.iterations, r.converged};
}

CostDesignResult cost_design(const Vec& theta, int i_hat, const InstanceView& view, const Vec& costs,
                             const FwConfig& config, const std::optional<DesignWeights>& warm_start,
                             const std::vector<std::size_t>& subset) {
    check_arm(view, i_hat);
    if (static_cast<std::size_t>(costs.size()) != view.num_actions())
        throw InvalidArgument("cost vector has the wrong length");
    if (!(costs.minCoeff() > 0.0))
        throw InvalidArgument("costs must be positive");
    const auto actions = resolve_subset(view, subset);
    const MinimaxDesignProblem problem(scaled_features(view, theta, actions, &costs, false),
                                       competitor_directions(view, i_hat, resolve_competitors(view, i_hat, {})),
                                       true);
    // warm starts are given in tracked proportions; q is proportional to c * w_bar
    // (normalised once, inside restrict_warm, so unit costs reproduce the plain solver exactly)
    std::optional<DesignWeights> warm_q;
    if (warm_start) {
        if (warm_start->values.size() != costs.size())
            throw InvalidArgument("warm start has the wrong length");
        warm_q = DesignWeights{warm_start->values.cwiseProduct(costs)};
    }
    const FwResult r = problem.solve(config, restrict_warm(warm_q, actions, view.num_actions()));
    const Vec q = expand(r.weights, actions, view.num_actions());
    CostDesignResult out;
    out.p.intensities = q.cwiseQuotient(costs);
    out.w_bar.values = out.p.intensities / out.p.intensities.sum();
    out.objective = r.objective;
    out.lower_bound = r.lower_bound;
    out.iterations = r.iterations;
    out.converged = r.converged;
    return out;
}

CharacteristicTime characteristic_time(const HybridInstance& instance, const FwConfig& config) {
    return restricted_characteristic_time(instance, {}, {}, config);
}

CharacteristicTime cost_characteristic_time(const HybridInstance& instance, const Vec& costs, const FwConfig& config) {
    const InstanceView& view = instance.view();
    const BestArm best = best_arm_and_gaps(instance);
    if (static_cast<std::size_t>(costs.size()) != view.num_actions() || !(costs.minCoeff() > 0.0))
        throw InvalidArgument("costs must be positive, one per action");
    const auto actions = all_actions(view);
    const MinimaxDesignProblem problem(
        scaled_features(view, instance.theta_star(), actions, &costs, false),
        competitor_directions(view, best.arm, resolve_competitors(view, best.arm, {})), true);
    const FwResult r = problem.solve(config);
    CharacteristicTime out = finish(r, best.gap_min, 1.0, actions, view.num_actions());
    // report the intensities p = q / c, whose cost-weighted sum is one
    out.weights = out.weights.cwiseQuotient(costs);
    return out;
}

CharacteristicTime restricted_characteristic_time(const HybridInstance& instance,
                                                  const std::vector<std::size_t>& subset,
                                                  const std::vector<int>& competitors, const FwConfig& config) {
    const InstanceView& view = instance.view();
    const BestArm best = best_arm_and_gaps(instance);
    const auto actions = resolve_subset(view, subset);
    const auto rivals = resolve_competitors(view, best.arm, competitors);
    double gap_min = kInf;
    for (int i : rivals)
        gap_min = std::min(gap_min, best.gaps(i));
    const MinimaxDesignProblem problem(scaled_features(view, instance.theta_star(), actions, nullptr, false),
                                       competitor_directions(view, best.arm, rivals), true);
    return finish(problem.solve(config), gap_min, 1.0, actions, view.num_actions());
}

double kl_action(const Action& a, const Vec& theta, const Vec& lambda, const InstanceView& view) {
    const Vec x = view.feature(a);
    const GlmFamily& fam = view.family(a);
    const double e0 = x.dot(theta);
    const double e1 = x.dot(lambda);
    const double kl = (fam.log_partition(e1) - fam.log_partition(e0) - fam.mean(e0) * (e1 - e0)) /
                      fam.dispersion_scale();
    return std::max(0.0, kl);
}

CharacteristicTime local_lb_time(const HybridInstance& instance, const FwConfig& config) {
    const InstanceView& view = instance.view();
    const BestArm best = best_arm_and_gaps(instance);
    const auto actions = all_actions(view);
    const MinimaxDesignProblem problem(
        scaled_features(view, instance.theta_star(), actions, nullptr, true),
        competitor_directions(view, best.arm, resolve_competitors(view, best.arm, {}), &best.gaps), true);
    // directions are already gap-normalised, so the reported gap is 1
    return finish(problem.solve(config), 1.0, 2.0, actions, view.num_actions());
}

ClosedForms closed_form_complexities(int which, double b_reward, double b_dueling) {
    if (!(b_reward > 0.0 && b_dueling > 0.0))
        throw InvalidArgument("discount constants must be positive");
    const GlmFamily fam = GlmFamily::bernoulli_logistic();
    const double d0 = fam.mean_prime(0.0);
    const double d1 = fam.mean_prime(1.0);
    if (which == 1) {
        const double s = 1.0 / std::sqrt(d1) + 1.0 / std::sqrt(d0);
        return {b_reward * s * s, b_dueling / d1};
    }
    if (which == 2) {
        const double a = 1.0 - std::cos(0.1);
        const double s = std::sin(0.1);
        const double t = a / std::sqrt(d1) + s / std::sqrt(d0);
        return {b_reward * t * t / (a * a), b_dueling / (fam.mean_prime(a) * a * a)};
    }
    throw InvalidArgument("closed-form case must be 1 or 2");
}

std::vector<std::size_t> reward_actions(const InstanceView& view) {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < view.num_actions(); ++a)
        if (view.action(a).is_reward())
            out.push_back(a);
    return out;
}

std::vector<std::size_t> dueling_actions(const InstanceView& view) {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a < view.num_actions(); ++a)
        if (view.action(a).is_duel())
            out.push_back(a);
    return out;
}

}  // namespace hyts
