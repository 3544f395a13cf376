#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hyts {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Best arm not unique, or arm features do not span R^d.
struct DegenerateInstance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Information matrix singular: the ellipsoid is unbounded in some direction.
struct NotIdentified : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The action set of a sampling mode cannot identify the parameter at all.
struct NotIdentifiable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConvergenceFailure : std::runtime_error {
    ConvergenceFailure(const std::string& what, Eigen::VectorXd best, double residual)
        : std::runtime_error(what), best_iterate(std::move(best)), residual(residual) {}

    Eigen::VectorXd best_iterate;
    double residual;
};

}  // namespace hyts
