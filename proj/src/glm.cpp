#include "hyts/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hyts/errors.hpp"

namespace hyts {

namespace {

void require_finite(double eta) {
    if (!std::isfinite(eta))
        throw InvalidArgument("natural parameter must be finite");
}

// log(1 + e^eta) without overflow.
double softplus(double eta) {
    if (eta > 0.0)
        return eta + std::log1p(std::exp(-eta));
    return std::log1p(std::exp(eta));
}

}  // namespace

double sigmoid(double eta) {
    if (eta >= 0.0)
        return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

std::string_view family_name(FamilyId id) {
    switch (id) {
    case FamilyId::gaussian:
        return "gaussian";
    case FamilyId::bernoulli_logistic:
        return "bernoulli_logistic";
    }
    return "unknown";
}

FamilyId parse_family(std::string_view name) {
    if (name == "gaussian")
        return FamilyId::gaussian;
    if (name == "bernoulli_logistic")
        return FamilyId::bernoulli_logistic;
    throw InvalidArgument("unknown GLM family '" + std::string(name) + "'");
}

GlmFamily::GlmFamily(FamilyId id, double dispersion_scale, double sc_constant)
    : id_(id), dispersion_(dispersion_scale), sc_constant_(sc_constant) {
    if (!(dispersion_scale > 0.0) || !std::isfinite(dispersion_scale))
        throw InvalidArgument("dispersion_scale must be positive");
    if (!(sc_constant >= 0.0) || !std::isfinite(sc_constant))
        throw InvalidArgument("sc_constant must be nonnegative");
}

GlmFamily GlmFamily::gaussian(double dispersion_scale) {
    return {FamilyId::gaussian, dispersion_scale, 0.0};
}

GlmFamily GlmFamily::bernoulli_logistic(double dispersion_scale) {
    return {FamilyId::bernoulli_logistic, dispersion_scale, 1.0};
}

GlmFamily GlmFamily::canonical(FamilyId id, double dispersion_scale) {
    return id == FamilyId::gaussian ? gaussian(dispersion_scale) : bernoulli_logistic(dispersion_scale);
}

double GlmFamily::log_partition(double eta) const {
    require_finite(eta);
    if (id_ == FamilyId::gaussian)
        return 0.5 * eta * eta;
    return softplus(eta);
}

double GlmFamily::mean(double eta) const {
    require_finite(eta);
    if (id_ == FamilyId::gaussian)
        return eta;
    return sigmoid(eta);
}

double GlmFamily::mean_prime(double eta) const {
    require_finite(eta);
    if (id_ == FamilyId::gaussian)
        return 1.0;
    // e^{-|eta|} / (1 + e^{-|eta|})^2 keeps precision in the tails
    const double e = std::exp(-std::abs(eta));
    return e / ((1.0 + e) * (1.0 + e));
}

double GlmFamily::mean_second(double eta) const {
    require_finite(eta);
    if (id_ == FamilyId::gaussian)
        return 0.0;
    return mean_prime(eta) * (1.0 - 2.0 * sigmoid(eta));
}

bool GlmFamily::in_support(double z) const {
    if (!std::isfinite(z))
        return false;
    if (id_ == FamilyId::bernoulli_logistic)
        return z == 0.0 || z == 1.0;
    return true;
}

double GlmFamily::neg_log_lik(double z, double eta) const {
    if (!in_support(z))
        throw InvalidArgument("observation outside the family support");
    return (log_partition(eta) - z * eta) / dispersion_;
}

double GlmFamily::mean_abs_bound(double eta_bound) const {
    if (id_ == FamilyId::gaussian)
        return std::abs(eta_bound);
    return 1.0;
}

double GlmFamily::sample(double eta, Rng& rng) const {
    require_finite(eta);
    if (id_ == FamilyId::gaussian) {
        std::normal_distribution<double> noise(0.0, std::sqrt(dispersion_));
        return eta + noise(rng);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < sigmoid(eta) ? 1.0 : 0.0;
}

double GlmFamily::self_concordance_margin(double eta_bound, int grid_size) const {
    if (!(eta_bound > 0.0) || grid_size < 2)
        throw InvalidArgument("self_concordance_margin needs eta_bound > 0 and grid_size >= 2");
    double margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid_size; ++k) {
        const double eta = -eta_bound + 2.0 * eta_bound * k / (grid_size - 1);
        margin = std::min(margin, sc_constant_ * mean_prime(eta) - std::abs(mean_second(eta)));
    }
    return margin;
}

}  // namespace hyts
