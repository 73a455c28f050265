#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cradle {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Energy and derivative of a scalar potential at one point.
struct EnergyForce {
    double energy = 0.0;
    double force = 0.0;  ///< first derivative of the energy
};

/// Physical parameters of the chain.
///
/// The interaction is V = V_alpha + W with
///   V_alpha'(r) = -k_minus (-r)^alpha  (r <= 0),   k_plus r^alpha  (r >= 0),
///   W'(r)       =  w_plus (r)_+^(alpha+beta) - w_minus (-r)_+^(alpha+beta),
/// and the on-site perturbation phi'(x) = g x |x|^(alpha-1+gamma).
/// An infinite beta (gamma) switches W (phi) off.
struct PotentialSpec {
    double alpha = 1.5;
    double k_minus = 1.0;
    double k_plus = 0.0;
    double w_minus = 0.0;
    double w_plus = 0.0;
    double beta = kInfinity;
    double g = 0.0;
    double gamma = kInfinity;

    [[nodiscard]] bool has_w() const { return std::isfinite(beta); }
    [[nodiscard]] bool has_phi() const { return std::isfinite(gamma); }

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const {
        if (!(alpha > 1.0) || !std::isfinite(alpha))
            throw std::invalid_argument("PotentialSpec: alpha must be a finite number > 1");
        if (!(k_minus >= 0.0) || !(k_plus >= 0.0))
            throw std::invalid_argument("PotentialSpec: contact stiffnesses must be >= 0");
        if (k_minus == 0.0 && k_plus == 0.0)
            throw std::invalid_argument("PotentialSpec: k_minus and k_plus cannot both vanish");
        if (!(beta > 0.0))
            throw std::invalid_argument("PotentialSpec: beta must be > 0 (or infinite)");
        if (!(gamma > 0.0))
            throw std::invalid_argument("PotentialSpec: gamma must be > 0 (or infinite)");
        if (has_w() && (!(w_minus >= 0.0) || !(w_plus >= 0.0)))
            throw std::invalid_argument("PotentialSpec: W coefficients must be >= 0");
        if (has_phi() && !std::isfinite(g))
            throw std::invalid_argument("PotentialSpec: g must be finite");
    }
};

/// Classical Hertz contact: alpha = 3/2, one-sided compression stiffness k, no perturbations.
inline PotentialSpec hertz_preset(double k = 1.0) {
    PotentialSpec s;
    s.alpha = 1.5;
    s.k_minus = k;
    s.k_plus = 0.0;
    return s;
}

namespace detail {

// (r)_+^p for p > 0
inline double positive_power(double r, double p) { return r > 0.0 ? std::pow(r, p) : 0.0; }

}  // namespace detail

/// Homogeneous part V_alpha and its derivative.
inline EnergyForce homogeneous_interaction(double r, const PotentialSpec& spec) {
    const double a = spec.alpha;
    if (r < 0.0) {
        const double m = std::pow(-r, a);
        return {spec.k_minus * m * (-r) / (1.0 + a), -spec.k_minus * m};
    }
    if (r > 0.0) {
        const double m = std::pow(r, a);
        return {spec.k_plus * m * r / (1.0 + a), spec.k_plus * m};
    }
    return {};
}

/// Second derivative of V_alpha; Hölder continuous at r = 0 when alpha < 2.
inline double homogeneous_stiffness(double r, const PotentialSpec& spec) {
    const double a = spec.alpha;
    if (r < 0.0) return a * spec.k_minus * std::pow(-r, a - 1.0);
    if (r > 0.0) return a * spec.k_plus * std::pow(r, a - 1.0);
    return 0.0;
}

/// V = V_alpha + W and V'.
inline EnergyForce interaction(double r, const PotentialSpec& spec) {
    EnergyForce out = homogeneous_interaction(r, spec);
    if (spec.has_w()) {
        const double p = spec.alpha + spec.beta;
        const double up = detail::positive_power(r, p);
        const double down = detail::positive_power(-r, p);
        out.force += spec.w_plus * up - spec.w_minus * down;
        out.energy += (spec.w_plus * up * std::max(r, 0.0) + spec.w_minus * down * std::max(-r, 0.0)) /
                      (p + 1.0);
    }
    return out;
}

/// phi and phi'. The harmonic part x^2/2 is not included.
inline EnergyForce onsite(double x, const PotentialSpec& spec) {
    if (!spec.has_phi() || x == 0.0) return {};
    const double p = spec.alpha - 1.0 + spec.gamma;
    const double ax = std::abs(x);
    const double m = std::pow(ax, p);
    return {spec.g * m * ax * ax / (p + 2.0), spec.g * x * m};
}

/// eta = min(alpha - 1, beta, gamma); infinite entries drop out naturally.
inline double eta_exponent(const PotentialSpec& spec) {
    return std::min({spec.alpha - 1.0, spec.beta, spec.gamma});
}

}  // namespace cradle
