#include "hyts/estimation.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "hyts/errors.hpp"

namespace hyts {

ObservationLog::ObservationLog(const InstanceView& view)
    : num_arms_(view.num_arms()),
      reward_(view.reward_family()),
      dueling_(view.dueling_family()),
      stats_(view.num_actions()) {}

void ObservationLog::append(std::int64_t round, const Action& action, double z) {
    if (!records_.empty() && round <= records_.back().round)
        throw InvalidArgument("observation rounds must be strictly increasing");
    const std::size_t idx = action_index(action, num_arms_);
    const GlmFamily& fam = action.is_reward() ? reward_ : dueling_;
    if (action.is_duel() && !(z == 0.0 || z == 1.0))
        throw InvalidArgument("dueling observations must be 0 or 1");
    if (!fam.in_support(z))
        throw InvalidArgument("observation outside the reward family support");
    records_.push_back({round, action, z});
    auto& s = stats_[idx];
    s.count += 1.0;
    s.sum_z += z;
    s.sum_abs_z += std::abs(z);
    (action.is_reward() ? count_reward_ : count_dueling_) += 1;
}

void ObservationLog::write_csv(std::ostream& os) const {
    os << "round,action_kind,i,j,k,z\n";
    std::ostringstream line;
    line.precision(17);
    for (const auto& r : records_) {
        line.str("");
        line << r.round << ',';
        if (r.action.is_reward())
            line << "reward," << r.action.first << ",,,";
        else
            line << "duel,," << r.action.first << ',' << r.action.second << ',';
        line << r.z << '\n';
        os << line.str();
    }
}

ObservationLog ObservationLog::read_csv(std::istream& is, const InstanceView& view) {
    ObservationLog log(view);
    std::string line;
    if (!std::getline(is, line) || line != "round,action_kind,i,j,k,z")
        throw InvalidArgument("observation CSV: bad header");
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (cells.size() == 5 && line.back() == ',')
            cells.emplace_back();
        if (cells.size() != 6)
            throw InvalidArgument("observation CSV line " + std::to_string(lineno) + ": expected 6 columns");
        try {
            const auto round = std::stoll(cells[0]);
            const double z = std::stod(cells[5]);
            if (cells[1] == "reward")
                log.append(round, Action::reward(std::stoi(cells[2])), z);
            else if (cells[1] == "duel")
                log.append(round, Action::duel(std::stoi(cells[3]), std::stoi(cells[4])), z);
            else
                throw InvalidArgument("unknown action kind '" + cells[1] + "'");
        } catch (const std::logic_error& e) {
            throw InvalidArgument("observation CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return log;
}

double cumulative_loss(const ObservationLog& log, const InstanceView& view, const Vec& theta) {
    double total = 0.0;
    const auto& stats = log.stats();
    for (std::size_t a = 0; a < stats.size(); ++a) {
        if (stats[a].count == 0.0)
            continue;
        const GlmFamily& fam = view.family(view.action(a));
        const double eta = view.feature(a).dot(theta);
        total += (stats[a].count * fam.log_partition(eta) - stats[a].sum_z * eta) / fam.dispersion_scale();
    }
    return total;
}

Vec loss_gradient(const ObservationLog& log, const InstanceView& view, const Vec& theta) {
    Vec g = Vec::Zero(view.dim());
    const auto& stats = log.stats();
    for (std::size_t a = 0; a < stats.size(); ++a) {
        if (stats[a].count == 0.0)
            continue;
        const GlmFamily& fam = view.family(view.action(a));
        const Vec& x = view.feature(a);
        const double eta = x.dot(theta);
        g += ((stats[a].count * fam.mean(eta) - stats[a].sum_z) / fam.dispersion_scale()) * x;
    }
    return g;
}

Mat loss_hessian(const ObservationLog& log, const InstanceView& view, const Vec& theta) {
    Mat h = Mat::Zero(view.dim(), view.dim());
    const auto& stats = log.stats();
    for (std::size_t a = 0; a < stats.size(); ++a) {
        if (stats[a].count == 0.0)
            continue;
        const GlmFamily& fam = view.family(view.action(a));
        const Vec& x = view.feature(a);
        h.noalias() += (stats[a].count * fam.mean_prime(x.dot(theta)) / fam.dispersion_scale()) * x * x.transpose();
    }
    return h;
}

Vec project_to_ball(const Vec& theta, double radius) {
    const double n = theta.norm();
    if (n <= radius)
        return theta;
    return theta * (radius / n);
}

double projected_gradient_residual(const ObservationLog& log, const InstanceView& view, const Vec& theta) {
    const Vec g = loss_gradient(log, view, theta);
    return (theta - project_to_ball(theta - g, view.radius())).norm();
}

MleResult constrained_mle(const ObservationLog& log, const InstanceView& view, const MleConfig& config) {
    if (log.empty())
        throw InvalidArgument("constrained_mle needs at least one observation");
    if (!(config.gradient_tolerance > 0.0) || config.max_iterations < 1)
        throw InvalidArgument("MleConfig: tolerance must be positive and max_iterations >= 1");
    const double S = view.radius();
    Vec theta = config.initial_point ? *config.initial_point : Vec::Zero(view.dim());
    if (theta.size() != view.dim())
        throw InvalidArgument("MleConfig: initial point has the wrong dimension");
    if (theta.norm() > S * (1.0 + 1e-12))
        throw InvalidArgument("MleConfig: initial point outside the ball");
    theta = project_to_ball(theta, S);

    double loss = cumulative_loss(log, view, theta);
    Vec grad = loss_gradient(log, view, theta);
    // first trial step: inverse of a trace bound on the Hessian
    double step = 1.0 / std::max(loss_hessian(log, view, theta).trace(), 1e-12);

    constexpr double armijo = 1e-4;
    for (int it = 0; it < config.max_iterations; ++it) {
        const double residual = (theta - project_to_ball(theta - grad, S)).norm();
        if (residual <= config.gradient_tolerance)
            return {theta, residual, it};

        Vec next;
        double next_loss = 0.0;
        bool accepted = false;
        for (int halvings = 0; halvings < 80; ++halvings) {
            next = project_to_ball(theta - step * grad, S);
            next_loss = cumulative_loss(log, view, next);
            // slack at the rounding level of the loss keeps the search alive near the optimum
            const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(loss) + 1.0);
            if (next_loss <= loss + armijo * grad.dot(next - theta) + slack) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || next == theta)
            break;
        const Vec next_grad = loss_gradient(log, view, next);
        // Barzilai-Borwein trial step for the next iteration
        const Vec s = next - theta;
        const Vec y = next_grad - grad;
        const double sy = s.dot(y);
        step = sy > 0.0 ? s.squaredNorm() / sy : 2.0 * step;
        theta = std::move(next);
        grad = next_grad;
        loss = next_loss;
    }
    const double residual = (theta - project_to_ball(theta - grad, S)).norm();
    if (residual <= config.gradient_tolerance)
        return {theta, residual, config.max_iterations};
    throw ConvergenceFailure("constrained MLE did not reach the residual tolerance", theta, residual);
}

}  // namespace hyts
