#pragma once

#include <string>

#include <Eigen/Cholesky>

#include "hyts/estimation.hpp"

namespace hyts {

// Almost-sure bound on the Lipschitz modulus of the cumulative loss over the ball:
// sum_s rho_s (|z_s| + sup_{|eta| <= rho_s S} |mu(eta)|) / zeta_s.
double lipschitz_bound(const ObservationLog& log, const InstanceView& view);

// log(1/delta) + inf_{c in (0,1]} { d log(1/c) + 2 S L c }, evaluated in closed form.
double beta_radius(double lipschitz, int dim, double radius, double delta);
// The looser displayed form log(1/delta) + d log(max(e, 2 e S L / d)).
double beta_radius_relaxed(double lipschitz, int dim, double radius, double delta);

// Weight of one observation of action a in the information matrix at theta:
// mu'(x_a^T theta) / (2 (1 + S rho_a M) zeta).
double info_coefficient(const InstanceView& view, std::size_t action, const Vec& theta);

Mat info_matrix(const ObservationLog& log, const InstanceView& view, const Vec& theta_hat);

inline constexpr double kSingularEigenvalue = 1e-10;

// Snapshot (theta_hat, A_t, beta_t) describing the ellipsoid
// { theta : |theta - theta_hat|^2_{A_t} <= beta_t }.
class ConfidenceState {
public:
    ConfidenceState(Vec theta_hat, Mat info, double beta, double lipschitz = 0.0);

    static ConfidenceState build(const ObservationLog& log, const InstanceView& view, const Vec& theta_hat,
                                 double delta);

    const Vec& theta_hat() const { return theta_hat_; }
    const Mat& info() const { return info_; }
    double beta() const { return beta_; }
    double lipschitz() const { return lipschitz_; }
    double min_eigenvalue() const { return min_eig_; }
    bool identified() const { return min_eig_ > kSingularEigenvalue; }

    // |g|^2 in the inverse information metric; throws NotIdentified when singular.
    double inverse_norm_sq(const Vec& g) const;
    // min of g^T theta over the ellipsoid: g^T theta_hat - sqrt(beta) |g|_{A^{-1}}.
    double min_linear(const Vec& g) const;
    bool contains(const Vec& theta) const;
    // Smallest min_linear(x_candidate - x_j) over competitors j; -inf when not identified.
    double certificate_value(const InstanceView& view, int candidate) const;
    // Every competitor's minimum strictly positive. Singular information maps to false.
    bool certify_best(const InstanceView& view, int candidate) const;

    std::string to_json() const;

private:
    Vec theta_hat_;
    Mat info_;
    double beta_;
    double lipschitz_;
    double min_eig_;
    Eigen::LDLT<Mat> factor_;
};

}  // namespace hyts
