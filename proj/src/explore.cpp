#include "hyts/explore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "hyts/confidence.hpp"
#include "hyts/errors.hpp"

namespace hyts {

namespace {

constexpr double kWarmupEigenvalue = 1e-8;

DesignWeights normalised(Vec w) {
    w /= w.sum();
    return {std::move(w)};
}

}  // namespace

std::string_view mode_name(Mode mode) {
    switch (mode) {
    case Mode::hybrid:
        return "hybrid";
    case Mode::reward_only:
        return "reward_only";
    case Mode::dueling_only:
        return "dueling_only";
    case Mode::random_hybrid:
        return "random_hybrid";
    case Mode::cost_aware:
        return "cost_aware";
    }
    return "unknown";
}

Mode parse_mode(std::string_view name) {
    for (Mode m : {Mode::hybrid, Mode::reward_only, Mode::dueling_only, Mode::random_hybrid, Mode::cost_aware})
        if (mode_name(m) == name)
            return m;
    throw InvalidArgument("unknown mode '" + std::string(name) + "'");
}

std::vector<std::size_t> mode_actions(const InstanceView& view, Mode mode) {
    if (mode == Mode::reward_only)
        return reward_actions(view);
    if (mode == Mode::dueling_only)
        return dueling_actions(view);
    std::vector<std::size_t> all(view.num_actions());
    for (std::size_t a = 0; a < all.size(); ++a)
        all[a] = a;
    return all;
}

std::vector<std::size_t> spanning_subset(const InstanceView& view, const std::vector<std::size_t>& candidates) {
    const int d = view.dim();
    Mat basis(d, 0);
    std::vector<std::size_t> chosen;
    for (std::size_t a : candidates) {
        Vec x = view.feature(a);
        const double norm = x.norm();
        if (basis.cols() > 0)
            x -= basis * (basis.transpose() * x);
        if (x.norm() <= 1e-10 * std::max(1.0, norm))
            continue;
        basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
        basis.col(basis.cols() - 1) = x.normalized();
        chosen.push_back(a);
        if (basis.cols() == d)
            return chosen;
    }
    throw NotIdentifiable("the allowed actions do not span the parameter space");
}

std::vector<std::size_t> exploration_candidates(const InstanceView& view, Mode mode) {
    std::vector<std::size_t> out = mode_actions(view, mode);
    if (mode == Mode::cost_aware)
        std::stable_sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) { return view.cost(a) < view.cost(b); });
    return out;
}

std::vector<std::size_t> warmup_sequence(const InstanceView& view, Mode mode) {
    return spanning_subset(view, exploration_candidates(view, mode));
}

TrackingState::TrackingState(std::size_t num_actions, std::vector<std::size_t> allowed,
                             std::vector<std::size_t> exploration_support, double alpha)
    : counts_(Vec::Zero(static_cast<Eigen::Index>(num_actions))),
      mass_(Vec::Zero(static_cast<Eigen::Index>(num_actions))),
      allowed_(std::move(allowed)),
      support_(std::move(exploration_support)),
      alpha_(alpha) {
    if (!(alpha_ > 0.0 && alpha_ < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (allowed_.empty() || support_.empty())
        throw InvalidArgument("tracking needs nonempty action sets");
    for (std::size_t a : allowed_)
        if (a >= num_actions)
            throw InvalidArgument("allowed action out of range");
    for (std::size_t a : support_)
        if (a >= num_actions)
            throw InvalidArgument("exploration action out of range");
}

TrackingState::Choice TrackingState::select_action(const DesignWeights& w_star, std::int64_t t, Rng& rng) {
    if (w_star.values.size() != counts_.size())
        throw InvalidArgument("target weights have the wrong length");
    if (t < 1)
        throw InvalidArgument("rounds start at 1");
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    const double eps = std::pow(static_cast<double>(t), -alpha_);
    if (coin(rng) < eps) {
        std::uniform_int_distribution<std::size_t> pick(0, support_.size() - 1);
        ++exploration_rounds_;
        return {support_[pick(rng)], false};
    }
    return {track(w_star), true};
}

std::size_t TrackingState::track(const DesignWeights& w_star) {
    if (w_star.values.size() != counts_.size())
        throw InvalidArgument("target weights have the wrong length");
    std::size_t best = allowed_.front();
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t a : allowed_) {
        const auto i = static_cast<Eigen::Index>(a);
        const double deficit = counts_(i) - mass_(i);
        if (deficit < lowest) {
            lowest = deficit;
            best = a;
        }
    }
    mass_ += w_star.values;
    counts_(static_cast<Eigen::Index>(best)) += 1.0;
    ++tracking_rounds_;
    return best;
}

void AlgoConfig::validate() const {
    if (!(delta > 0.0 && delta < 0.5))
        throw InvalidArgument("delta must lie in (0, 0.5)");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw InvalidArgument("alpha must lie in (0, 1)");
    if (max_rounds < 1)
        throw InvalidArgument("max_rounds must be positive");
    if (schedule.warm_iterations < 0 || schedule.warm_step_offset < 0 || schedule.full_every < 1 ||
        schedule.full_certificate_every < 1)
        throw InvalidArgument("invalid design schedule");
    fw.validate();
}

int recommend(const Vec& theta_hat, const InstanceView& view) {
    const Vec scores = view.arms().transpose() * theta_hat;
    int best = 0;
    for (int i = 1; i < scores.size(); ++i)
        if (scores(i) > scores(best))
            best = i;
    return best;
}

RunResult run(const HybridInstance& instance, Environment& env, const AlgoConfig& config, Rng& rng) {
    config.validate();
    const InstanceView& view = instance.view();
    const std::size_t n = view.num_actions();
    const std::vector<std::size_t> allowed = mode_actions(view, config.mode);
    const std::vector<std::size_t> support = warmup_sequence(view, config.mode);
    TrackingState tracker(n, allowed, support, config.alpha);
    ObservationLog log(view);
    RunResult result;

    Vec theta_hat = Vec::Zero(view.dim());
    auto estimate = [&]() {
        MleConfig mc = config.mle;
        mc.initial_point = theta_hat;
        try {
            theta_hat = constrained_mle(log, view, mc).theta;
        } catch (const ConvergenceFailure& e) {
            theta_hat = project_to_ball(e.best_iterate, view.radius());
            ++result.mle_failures;
        }
    };
    auto query = [&](std::int64_t t, std::size_t a, bool tracking, double beta, double cert, double phi) {
        const double z = env.observe(a);
        log.append(t, view.action(a), z);
        const double c = view.cost(a);
        if (view.action(a).is_reward()) {
            ++result.reward_queries;
            result.reward_cost += c;
        } else {
            ++result.dueling_queries;
            result.dueling_cost += c;
        }
        if (config.record_actions)
            result.actions.push_back(a);
        if (config.record_trace)
            result.trace.push_back({t, a, z, tracking, beta, cert, phi});
    };

    std::int64_t t = 1;
    // warm-up: round robin over the spanning subset until A_t is positive definite
    for (;; ++t) {
        if (t > config.max_rounds)
            break;
        query(t, support[static_cast<std::size_t>(t - 1) % support.size()], false, 0.0, 0.0, 0.0);
        estimate();
        Eigen::SelfAdjointEigenSolver<Mat> eig(info_matrix(log, view, theta_hat), Eigen::EigenvaluesOnly);
        if (eig.eigenvalues()(0) > kWarmupEigenvalue) {
            ++t;
            break;
        }
    }
    result.warmup_rounds = static_cast<std::int64_t>(log.size());

    std::optional<DesignWeights> weights;
    std::int64_t since_full = 0;
    const DesignWeights uniform = DesignWeights::uniform(n);
    const Vec& costs = view.costs();
    for (;; ++t) {
        const ConfidenceState state = ConfidenceState::build(log, view, theta_hat, config.delta);
        const int i_hat = recommend(theta_hat, view);
        const double cert = state.certificate_value(view, i_hat);
        result.theta_hat = theta_hat;
        result.info = state.info();
        result.beta = state.beta();
        result.recommended = i_hat;
        if (cert > 0.0) {
            result.converged = true;
            break;
        }
        if (t > config.max_rounds)
            break;

        double phi = 0.0;
        const DesignWeights* target = &uniform;
        if (config.mode != Mode::random_hybrid) {
            const bool full = !weights || since_full >= config.schedule.full_every;
            FwConfig fc = config.fw;
            fc.certificate_every = config.schedule.full_certificate_every;
            if (!full) {
                fc.max_iterations = config.schedule.warm_iterations;
                fc.step_offset = config.schedule.warm_step_offset;
                // no certificate inside the short refresh
                fc.certificate_every = std::numeric_limits<int>::max();
                fc.dual_iterations = 0;
            }
            const std::optional<DesignWeights> warm = full ? std::nullopt : weights;
            if (config.mode == Mode::cost_aware) {
                const CostDesignResult r = cost_design(theta_hat, i_hat, view, costs, fc, warm);
                weights = r.w_bar;
                phi = r.objective;
            } else {
                const std::vector<std::size_t> subset =
                    config.mode == Mode::hybrid ? std::vector<std::size_t>{} : allowed;
                const DesignResult r = frank_wolfe_design(theta_hat, i_hat, view, fc, warm, subset);
                weights = normalised(r.weights.values);
                phi = r.objective;
            }
            since_full = full ? 1 : since_full + 1;
            target = &*weights;
        }

        std::size_t action = 0;
        bool tracking = false;
        if (config.mode == Mode::random_hybrid) {
            std::uniform_int_distribution<std::size_t> pick(0, n - 1);
            action = pick(rng);
        } else {
            const auto choice = tracker.select_action(*target, t, rng);
            action = choice.action;
            tracking = choice.tracking;
        }
        query(t, action, tracking, state.beta(), cert, phi);
        estimate();
    }

    result.tau = static_cast<std::int64_t>(log.size());
    // per-modality subtotals sum to the total exactly
    result.total_cost = result.reward_cost + result.dueling_cost;
    result.exploration_rounds = tracker.exploration_rounds();
    result.correct = result.recommended == best_arm_and_gaps(instance).arm;
    return result;
}

void write_trace_csv(std::ostream& os, const RunResult& result, const InstanceView& view) {
    os << "t,action,z,was_tracking,beta,min_certificate_value,phi\n";
    os.precision(17);
    for (const TraceRow& r : result.trace)
        os << r.t << ",\"" << view.action(r.action).to_string() << "\"," << r.z << ',' << (r.was_tracking ? 1 : 0) << ','
           << r.beta << ',' << r.min_certificate_value << ',' << r.phi << '\n';
}

}  // namespace hyts
