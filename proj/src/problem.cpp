#include "hyts/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hyts/errors.hpp"

namespace hyts {

Action Action::reward(int arm) {
    if (arm < 0)
        throw InvalidArgument("arm index must be nonnegative");
    return {Kind::reward, arm, -1};
}

Action Action::duel(int j, int k) {
    if (j < 0 || !(j < k))
        throw InvalidArgument("duel requires 0 <= j < k");
    return {Kind::duel, j, k};
}

std::string Action::to_string() const {
    if (is_reward())
        return "reward(" + std::to_string(first) + ")";
    return "duel(" + std::to_string(first) + "," + std::to_string(second) + ")";
}

std::size_t num_actions(int num_arms) {
    const auto k = static_cast<std::size_t>(num_arms);
    return k + k * (k - 1) / 2;
}

std::vector<Action> enumerate_actions(int num_arms) {
    if (num_arms < 2)
        throw InvalidArgument("need at least two arms");
    std::vector<Action> out;
    out.reserve(num_actions(num_arms));
    for (int i = 0; i < num_arms; ++i)
        out.push_back(Action::reward(i));
    for (int j = 0; j < num_arms; ++j)
        for (int k = j + 1; k < num_arms; ++k)
            out.push_back(Action::duel(j, k));
    return out;
}

std::size_t action_index(const Action& a, int num_arms) {
    if (a.first >= num_arms || (a.is_duel() && a.second >= num_arms))
        throw InvalidArgument("action " + a.to_string() + " out of range");
    if (a.is_reward())
        return static_cast<std::size_t>(a.first);
    const auto K = static_cast<std::size_t>(num_arms);
    const auto j = static_cast<std::size_t>(a.first);
    const auto k = static_cast<std::size_t>(a.second);
    // pairs before row j: sum_{r<j} (K - 1 - r)
    const std::size_t before = j * (2 * K - j - 1) / 2;
    return K + before + (k - j - 1);
}

InstanceView::InstanceView(Mat arms, double radius, GlmFamily reward_family, GlmFamily dueling_family,
                           std::optional<Vec> action_costs)
    : arms_(std::move(arms)), radius_(radius), reward_(reward_family), dueling_(dueling_family) {
    if (arms_.cols() < 2 || arms_.rows() < 1)
        throw InvalidArgument("need at least two arms of dimension >= 1");
    if (!(radius_ > 0.0) || !std::isfinite(radius_))
        throw InvalidArgument("radius S must be positive");
    if (!arms_.allFinite())
        throw InvalidArgument("arm features must be finite");
    actions_ = enumerate_actions(num_arms());
    features_.reserve(actions_.size());
    for (const auto& a : actions_)
        features_.push_back(feature(a));
    costs_ = action_costs ? *action_costs : Vec::Ones(static_cast<Eigen::Index>(actions_.size()));
    if (costs_.size() != static_cast<Eigen::Index>(actions_.size()))
        throw InvalidArgument("cost vector must have one entry per action");
    if (!costs_.allFinite() || (costs_.array() <= 0.0).any())
        throw InvalidArgument("action costs must be positive");
}

Vec InstanceView::feature(const Action& a) const {
    action_index(a, num_arms());
    if (a.is_reward())
        return arms_.col(a.first);
    return arms_.col(a.first) - arms_.col(a.second);
}

InstanceView InstanceView::with_costs(Vec costs) const {
    return {arms_, radius_, reward_, dueling_, std::move(costs)};
}

std::string ValidationReport::describe() const {
    std::ostringstream os;
    os << "max feature norm " << max_feature_norm << (norms_ok ? " ok" : " FAIL") << "; |theta*| " << theta_norm
       << (theta_ok ? " ok" : " FAIL") << "; min singular value " << min_singular_value
       << (span_ok ? " ok" : " FAIL") << "; top-two gap " << top_two_gap << (unique_best_ok ? " ok" : " FAIL")
       << "; costs " << (costs_positive ? "ok" : "FAIL");
    return os.str();
}

ValidationReport validate_instance(const Mat& arms, const Vec& theta_star, double radius, const Vec& costs) {
    ValidationReport r;
    r.max_feature_norm = arms.colwise().norm().maxCoeff();
    r.norms_ok = r.max_feature_norm <= 1.0 + 1e-12;
    r.theta_norm = theta_star.norm();
    r.theta_ok = theta_star.size() == arms.rows() && r.theta_norm <= radius + 1e-12;
    // singular values of the K x d stacked feature matrix
    Eigen::JacobiSVD<Mat> svd(arms.transpose());
    const auto& sv = svd.singularValues();
    r.min_singular_value = arms.cols() >= arms.rows() ? sv(sv.size() - 1) : 0.0;
    r.span_ok = r.min_singular_value > kDegeneracyTolerance;
    if (theta_star.size() == arms.rows()) {
        Vec scores = arms.transpose() * theta_star;
        std::vector<double> s(scores.data(), scores.data() + scores.size());
        std::sort(s.begin(), s.end(), std::greater<>());
        r.top_two_gap = s[0] - s[1];
    }
    r.unique_best_ok = r.top_two_gap > kDegeneracyTolerance;
    r.costs_positive = costs.allFinite() && (costs.array() > 0.0).all();
    return r;
}

HybridInstance::HybridInstance(InstanceView view, Vec theta_star)
    : view_(std::move(view)), theta_star_(std::move(theta_star)) {
    const auto r = validate_instance(view_.arms(), theta_star_, view_.radius(), view_.costs());
    if (!r.norms_ok || !r.theta_ok)
        throw InvalidArgument("invalid instance: " + r.describe());
    if (!r.span_ok || !r.unique_best_ok)
        throw DegenerateInstance("degenerate instance: " + r.describe());
}

HybridInstance HybridInstance::with_costs(Vec costs) const {
    return {view_.with_costs(std::move(costs)), theta_star_};
}

BestArm best_arm_and_gaps(const Mat& arms, const Vec& theta) {
    const Vec scores = arms.transpose() * theta;
    BestArm out;
    scores.maxCoeff(&out.arm);
    out.gaps = Vec::Constant(scores.size(), scores(out.arm)) - scores;
    out.gap_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < scores.size(); ++i)
        if (i != out.arm)
            out.gap_min = std::min(out.gap_min, out.gaps(i));
    if (!(out.gap_min > kDegeneracyTolerance))
        throw DegenerateInstance("best arm is not unique (top-two gap " + std::to_string(out.gap_min) + ")");
    return out;
}

BestArm best_arm_and_gaps(const HybridInstance& instance) {
    return best_arm_and_gaps(instance.view().arms(), instance.theta_star());
}

Vec modality_costs(int num_arms, double reward_cost, double dueling_cost) {
    Vec c(static_cast<Eigen::Index>(num_actions(num_arms)));
    c.head(num_arms).setConstant(reward_cost);
    c.tail(c.size() - num_arms).setConstant(dueling_cost);
    return c;
}

namespace {

Vec theta_rule(int dim, double radius) {
    return Vec::Constant(dim, (radius - 1.0) / std::sqrt(static_cast<double>(dim)));
}

}  // namespace

HybridInstance gen_main_instance(int num_arms, int dim, double radius, Rng& rng, FamilyId family) {
    if (num_arms < 2 || dim < 1)
        throw InvalidArgument("gen_main_instance needs K >= 2 and d >= 1");
    if (!(radius > 1.0))
        throw InvalidArgument("gen_main_instance needs S > 1");
    const Vec theta = theta_rule(dim, radius);
    const Vec u = theta.normalized();
    std::normal_distribution<double> gauss(0.0, 1.0);

    Mat arms(dim, num_arms);
    for (int i = 0; i < num_arms; ++i) {
        const double c = i == 0 ? 0.9 : 0.8 * (num_arms - 1 - i) / (num_arms - 1);
        if (std::abs(c) > 1.0)
            throw ConstructionFailure("alignment coefficient exceeds the unit ball");
        const double residual = std::sqrt(std::max(0.0, 1.0 - c * c));
        Vec v = Vec::Zero(dim);
        if (dim > 1) {
            // uniform direction on the unit sphere of the orthogonal complement of theta*
            for (int attempt = 0;; ++attempt) {
                for (int k = 0; k < dim; ++k)
                    v(k) = gauss(rng);
                v -= u * u.dot(v);
                if (v.norm() > 1e-8)
                    break;
                if (attempt > 100)
                    throw ConstructionFailure("could not sample an orthogonal direction");
            }
            v.normalize();
        }
        arms.col(i) = c * u + residual * v;
    }
    const GlmFamily fam = GlmFamily::canonical(family);
    return {InstanceView(arms, radius, fam, fam), theta};
}

HybridInstance gen_basis_rotated(int dim, double radius, FamilyId family) {
    if (dim < 2)
        throw InvalidArgument("gen_basis_rotated needs d >= 2");
    Mat arms = Mat::Zero(dim, dim + 1);
    arms.leftCols(dim).setIdentity();
    arms(0, dim) = std::cos(0.1);
    arms(1, dim) = std::sin(0.1);
    const GlmFamily fam = GlmFamily::canonical(family);
    return {InstanceView(arms, radius, fam, fam), theta_rule(dim, radius)};
}

HybridInstance gen_closed_form_case(int which, double radius) {
    const GlmFamily fam = GlmFamily::bernoulli_logistic();
    Vec theta(2);
    theta << 1.0, 0.0;
    if (which == 1) {
        Mat arms(2, 2);
        arms << 1.0, 0.0,
                0.0, -1.0;
        return {InstanceView(arms, radius, fam, fam), theta};
    }
    if (which == 2) {
        Mat arms(2, 3);
        arms << 1.0, 0.0, std::cos(0.1),
                0.0, 1.0, std::sin(0.1);
        return {InstanceView(arms, radius, fam, fam), theta};
    }
    throw InvalidArgument("closed-form case must be 1 or 2");
}

HybridInstance gen_toy_1d(double radius) {
    Mat arms(1, 2);
    arms << 1.0, -1.0;
    const GlmFamily fam = GlmFamily::gaussian();
    return {InstanceView(arms, radius, fam, fam), Vec::Ones(1)};
}

}  // namespace hyts
