#include "hyts/confidence.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "hyts/errors.hpp"

namespace hyts {

double lipschitz_bound(const ObservationLog& log, const InstanceView& view) {
    double total = 0.0;
    const auto& stats = log.stats();
    for (std::size_t a = 0; a < stats.size(); ++a) {
        if (stats[a].count == 0.0)
            continue;
        const Action& act = view.action(a);
        const GlmFamily& fam = view.family(act);
        const double rho = act.rho();
        const double mu_bar = fam.mean_abs_bound(rho * view.radius());
        total += rho * (stats[a].sum_abs_z + stats[a].count * mu_bar) / fam.dispersion_scale();
    }
    return total;
}

double beta_radius(double lipschitz, int dim, double radius, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw InvalidArgument("delta must lie in (0, 1)");
    if (!(lipschitz >= 0.0) || dim < 1 || !(radius > 0.0))
        throw InvalidArgument("beta_radius needs L >= 0, d >= 1, S > 0");
    const double d = dim;
    const double slope = 2.0 * radius * lipschitz;
    const double base = std::log(1.0 / delta);
    // d log(1/c) + slope c is convex in c with stationary point c = d / slope
    if (slope >= d)
        return base + d * (1.0 + std::log(slope / d));
    return base + slope;
}

double beta_radius_relaxed(double lipschitz, int dim, double radius, double delta) {
    if (!(delta > 0.0 && delta < 1.0))
        throw InvalidArgument("delta must lie in (0, 1)");
    const double d = dim;
    const double e = std::exp(1.0);
    return std::log(1.0 / delta) + d * std::log(std::max(e, 2.0 * e * radius * lipschitz / d));
}

double info_coefficient(const InstanceView& view, std::size_t action, const Vec& theta) {
    const Action& a = view.action(action);
    const GlmFamily& fam = view.family(a);
    const double eta = view.feature(action).dot(theta);
    return fam.mean_prime(eta) /
           (2.0 * (1.0 + view.radius() * a.rho() * fam.sc_constant()) * fam.dispersion_scale());
}

Mat info_matrix(const ObservationLog& log, const InstanceView& view, const Vec& theta_hat) {
    Mat A = Mat::Zero(view.dim(), view.dim());
    const auto& stats = log.stats();
    for (std::size_t a = 0; a < stats.size(); ++a) {
        if (stats[a].count == 0.0)
            continue;
        const Vec& x = view.feature(a);
        A.noalias() += (stats[a].count * info_coefficient(view, a, theta_hat)) * x * x.transpose();
    }
    return A;
}

ConfidenceState::ConfidenceState(Vec theta_hat, Mat info, double beta, double lipschitz)
    : theta_hat_(std::move(theta_hat)), info_(std::move(info)), beta_(beta), lipschitz_(lipschitz) {
    if (info_.rows() != info_.cols() || info_.rows() != theta_hat_.size())
        throw InvalidArgument("information matrix shape does not match theta_hat");
    if (!(beta_ >= 0.0))
        throw InvalidArgument("beta must be nonnegative");
    Eigen::SelfAdjointEigenSolver<Mat> eig(info_, Eigen::EigenvaluesOnly);
    min_eig_ = eig.eigenvalues().size() > 0 ? eig.eigenvalues()(0) : 0.0;
    factor_.compute(info_);
}

ConfidenceState ConfidenceState::build(const ObservationLog& log, const InstanceView& view, const Vec& theta_hat,
                                       double delta) {
    const double L = lipschitz_bound(log, view);
    return {theta_hat, info_matrix(log, view, theta_hat), beta_radius(L, view.dim(), view.radius(), delta), L};
}

double ConfidenceState::inverse_norm_sq(const Vec& g) const {
    if (!identified())
        throw NotIdentified("information matrix is singular");
    return g.dot(factor_.solve(g));
}

double ConfidenceState::min_linear(const Vec& g) const {
    return g.dot(theta_hat_) - std::sqrt(beta_ * inverse_norm_sq(g));
}

bool ConfidenceState::contains(const Vec& theta) const {
    const Vec diff = theta - theta_hat_;
    return diff.dot(info_ * diff) <= beta_;
}

double ConfidenceState::certificate_value(const InstanceView& view, int candidate) const {
    if (!identified())
        return -std::numeric_limits<double>::infinity();
    double worst = std::numeric_limits<double>::infinity();
    for (int j = 0; j < view.num_arms(); ++j) {
        if (j == candidate)
            continue;
        worst = std::min(worst, min_linear(view.arm(candidate) - view.arm(j)));
    }
    return worst;
}

bool ConfidenceState::certify_best(const InstanceView& view, int candidate) const {
    if (candidate < 0 || candidate >= view.num_arms())
        throw InvalidArgument("candidate arm out of range");
    return certificate_value(view, candidate) > 0.0;
}

std::string ConfidenceState::to_json() const {
    Eigen::SelfAdjointEigenSolver<Mat> eig(info_, Eigen::EigenvaluesOnly);
    nlohmann::json j;
    j["theta_hat"] = std::vector<double>(theta_hat_.data(), theta_hat_.data() + theta_hat_.size());
    j["beta"] = beta_;
    j["lipschitz"] = lipschitz_;
    const Vec& ev = eig.eigenvalues();
    j["info_eigenvalues"] = std::vector<double>(ev.data(), ev.data() + ev.size());
    return j.dump();
}

}  // namespace hyts
