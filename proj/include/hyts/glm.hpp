#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace hyts {

using Rng = std::mt19937_64;

enum class FamilyId { gaussian, bernoulli_logistic };

std::string_view family_name(FamilyId id);
FamilyId parse_family(std::string_view name);

// One-parameter exponential family p(r | eta) = exp((r eta - b(eta)) / zeta + c(r)).
// b, mu = b', mu' = b'' and mu'' are analytic per family.
class GlmFamily {
public:
    GlmFamily(FamilyId id, double dispersion_scale, double sc_constant);

    static GlmFamily gaussian(double dispersion_scale = 1.0);
    static GlmFamily bernoulli_logistic(double dispersion_scale = 1.0);
    // Canonical self-concordance constant for the id (0 for gaussian, 1 for logistic).
    static GlmFamily canonical(FamilyId id, double dispersion_scale = 1.0);

    FamilyId id() const { return id_; }
    double dispersion_scale() const { return dispersion_; }
    double sc_constant() const { return sc_constant_; }

    double log_partition(double eta) const;
    double mean(double eta) const;
    double mean_prime(double eta) const;
    double mean_second(double eta) const;

    bool in_support(double z) const;
    // (b(eta) - z eta) / zeta
    double neg_log_lik(double z, double eta) const;

    // sup_{|eta| <= eta_bound} |mu(eta)|; logistic uses the global bound 1.
    double mean_abs_bound(double eta_bound) const;

    double sample(double eta, Rng& rng) const;

    // min over a uniform grid on [-eta_bound, eta_bound] of M mu'(eta) - |mu''(eta)|.
    double self_concordance_margin(double eta_bound, int grid_size) const;

    friend bool operator==(const GlmFamily&, const GlmFamily&) = default;

private:
    FamilyId id_;
    double dispersion_;
    double sc_constant_;
};

double sigmoid(double eta);

}  // namespace hyts
