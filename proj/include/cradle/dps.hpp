#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <sstream>
#include <span>
#include <stdexcept>
#include <vector>

#include "cradle/ode.hpp"
#include "cradle/potentials.hpp"
#include "cradle/sequence.hpp"

namespace cradle {

using cplx = std::complex<double>;

/// Complex envelope a_n on the window [n_lo, n_lo + size).
struct Amplitude {
    int n_lo = 0;
    std::vector<cplx> a;
    Boundary boundary = Boundary::free;

    Amplitude() = default;
    Amplitude(int lo, std::size_t sites, Boundary b = Boundary::free) : n_lo(lo), a(sites), boundary(b) {}
    Amplitude(int lo, std::vector<cplx> values, Boundary b = Boundary::free)
        : n_lo(lo), a(std::move(values)), boundary(b) {}

    [[nodiscard]] std::size_t size() const { return a.size(); }
    [[nodiscard]] std::size_t index(int n) const { return static_cast<std::size_t>(n - n_lo); }

    [[nodiscard]] double sup_norm() const {
        double m = 0.0;
        for (const auto& z : a) m = std::max(m, std::abs(z));
        return m;
    }
    [[nodiscard]] double l2_norm() const {
        double s = 0.0;
        for (const auto& z : a) s += std::norm(z);
        return std::sqrt(s);
    }
};

struct DpsInvariants {
    double l2_norm_sq = 0.0;
    double bond_norm = 0.0;  ///< sum |a_{n+1} - a_n|^(alpha+1)
    cplx momentum;           ///< sum a_n
    double hamiltonian = 0.0;
};

// ---------------------------------------------------------------------------
// The coefficient omega_0

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    std::size_t nodes = 0;
};

/// (2/pi) * integral_0^{pi/2} cos(t)^(alpha+1) dt by tanh-sinh quadrature, halving the step
/// until two successive levels agree to 1e-13 relative or the node budget is spent.
inline QuadratureResult wallis_quadrature(double alpha, std::size_t max_nodes = 1u << 14) {
    if (!(alpha > 0.0)) throw std::invalid_argument("wallis_quadrature: alpha must be > 0");
    if (max_nodes < 16) throw std::invalid_argument("wallis_quadrature: need at least 16 nodes");
    constexpr double pi = std::numbers::pi;
    const double power = alpha + 1.0;
    // t = (pi/4)(1 + tanh(s)), s = (pi/2) sinh(u); distances to both ends computed without cancellation
    auto term = [&](double u) {
        const double s = 0.5 * pi * std::sinh(u);
        const double to_hi = 0.5 * pi / (1.0 + std::exp(2.0 * s));
        const double to_lo = 0.5 * pi / (1.0 + std::exp(-2.0 * s));
        const double c = to_lo < 0.25 * pi ? std::cos(to_lo) : std::sin(to_hi);
        const double ch = std::cosh(s);
        const double w = 0.25 * pi * 0.5 * pi * std::cosh(u) / (ch * ch);
        return w * std::pow(c, power);
    };
    constexpr double u_max = 3.5;  // weights below 1e-40 beyond this

    QuadratureResult res;
    double h = 0.5;
    double sum = term(0.0);
    std::size_t nodes = 1;
    for (double u = h; u <= u_max; u += h) {
        sum += term(u) + term(-u);
        nodes += 2;
    }
    double prev = h * sum;
    while (true) {
        const double half = 0.5 * h;
        for (double u = half; u <= u_max; u += h) {
            sum += term(u) + term(-u);
            nodes += 2;
        }
        h = half;
        const double cur = h * sum;
        res.value = cur * 2.0 / pi;
        res.error_estimate = std::abs(cur - prev) * 2.0 / pi;
        res.nodes = nodes;
        if (res.error_estimate <= 1e-13 * std::abs(res.value)) return res;
        if (2 * nodes > max_nodes) {
            std::ostringstream msg;
            msg << "Wallis quadrature did not converge: estimate " << res.error_estimate << " after "
                << nodes << " nodes";
            throw NumericalError(NumericalError::Kind::no_convergence, 0.0, msg.str());
        }
        prev = cur;
    }
}

inline double c_alpha(double alpha, std::size_t n_quad = 1u << 14) {
    return wallis_quadrature(alpha, n_quad).value;
}

/// Gamma-function form of the same Wallis integral.
inline double c_alpha_closed_form(double alpha) {
    return alpha * std::tgamma(alpha / 2.0) /
           (std::sqrt(std::numbers::pi) * (alpha + 1.0) * std::tgamma((alpha + 1.0) / 2.0));
}

/// omega_0 = (k- + k+) 2^((alpha-3)/2) alpha Gamma(alpha/2) / (sqrt(pi)(alpha+1) Gamma((alpha+1)/2)).
inline double omega0(const PotentialSpec& spec) {
    return (spec.k_minus + spec.k_plus) * std::pow(2.0, (spec.alpha - 3.0) / 2.0) *
           c_alpha_closed_form(spec.alpha);
}

/// (1/sqrt2)(1/2pi) integral e^{-it} V'_alpha(sqrt2 Re(a e^{it})) dt by the trapezoidal rule.
///
/// The uniform grid is offset by -arg(a) so the points where the contact opens or closes
/// (Re(a e^{it}) = 0) fall on nodes whenever n_samples is a multiple of 4. The integrand is
/// only Hölder there, and node-aligned kinks keep the rule accurate to ~1e-10 at 1024 nodes.
inline cplx ftilde_oracle(cplx a, const PotentialSpec& spec, std::size_t n_samples) {
    if (n_samples < 64) throw std::invalid_argument("ftilde_oracle: need at least 64 samples");
    if (a == cplx{}) return {};
    const double theta = std::arg(a);
    const double dt = 2.0 * std::numbers::pi / static_cast<double>(n_samples);
    cplx sum;
    for (std::size_t j = 0; j < n_samples; ++j) {
        const double t = -theta + dt * static_cast<double>(j);
        const cplx carrier = std::polar(1.0, t);
        const double r = std::sqrt(2.0) * (a * carrier).real();
        sum += std::conj(carrier) * homogeneous_interaction(r, spec).force;
    }
    return sum / (static_cast<double>(n_samples) * std::sqrt(2.0));
}

// ---------------------------------------------------------------------------
// The discrete p-Laplacian and the amplitude flow

/// (Delta_{alpha+1} a)_n = g(a_{n+1} - a_n) - g(a_n - a_{n-1}), g(w) = w|w|^(alpha-1).
template <class T>
std::vector<T> p_laplacian(std::span<const T> a, double alpha, Boundary boundary) {
    const std::size_t n = a.size();
    std::vector<T> flux(n + 1, T{});
    for (std::size_t i = 1; i < n; ++i) flux[i] = signed_power(a[i] - a[i - 1], alpha);
    if (boundary == Boundary::periodic && n > 0) {
        flux[0] = signed_power(a[0] - a[n - 1], alpha);
        flux[n] = flux[0];
    }
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = flux[i + 1] - flux[i];
    return out;
}

inline Amplitude p_laplacian(const Amplitude& a, double alpha) {
    return {a.n_lo, p_laplacian<cplx>(a.a, alpha, a.boundary), a.boundary};
}

/// d a / d tau = -i omega_0 Delta_{alpha+1} a.
inline Amplitude dps_rhs(const Amplitude& a, const PotentialSpec& spec) {
    Amplitude d = p_laplacian(a, spec.alpha);
    const cplx factor{0.0, -omega0(spec)};
    for (auto& z : d.a) z *= factor;
    return d;
}

struct DpsTrajectory {
    std::vector<double> taus;
    std::vector<Amplitude> amplitudes;
    StepStats stats;
};

/// Integrates the amplitude equation from a0 and samples it at the requested slow times.
inline DpsTrajectory integrate_dps(const Amplitude& a0, const PotentialSpec& spec,
                                   std::span<const double> sample_taus, double tol) {
    spec.validate();
    if (a0.a.empty()) throw std::invalid_argument("integrate_dps: empty amplitude");
    const double w0 = omega0(spec);
    const double alpha = spec.alpha;
    const Boundary boundary = a0.boundary;
    auto rhs = [&](double, const std::vector<cplx>& y, std::vector<cplx>& dy) {
        const auto lap = p_laplacian<cplx>(y, alpha, boundary);
        for (std::size_t i = 0; i < y.size(); ++i) dy[i] = cplx{0.0, -w0} * lap[i];
    };
    OdeOptions opt;
    opt.tol = tol;
    auto raw = integrate_adaptive<cplx>(rhs, a0.a, 0.0, sample_taus, opt);
    DpsTrajectory out;
    out.taus = std::move(raw.times);
    out.stats = raw.stats;
    out.amplitudes.reserve(raw.states.size());
    for (auto& s : raw.states) out.amplitudes.emplace_back(a0.n_lo, std::move(s), boundary);
    return out;
}

inline DpsTrajectory integrate_dps(const Amplitude& a0, const PotentialSpec& spec, double tau_end, double tol,
                                   std::size_t n_samples = 64) {
    if (!(tau_end > 0.0)) throw std::invalid_argument("integrate_dps: tau_end must be > 0");
    if (n_samples == 0) n_samples = 1;
    std::vector<double> taus(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j)
        taus[j] = tau_end * static_cast<double>(j + 1) / static_cast<double>(n_samples);
    taus.back() = tau_end;
    return integrate_dps(a0, spec, taus, tol);
}

// ---------------------------------------------------------------------------
// Conserved quantities and the bounds built on them

inline double bond_norm(const Amplitude& a, double alpha) {
    const auto d = difference<cplx>(a.a, Direction::plus, a.boundary);
    double s = 0.0;
    for (const auto& z : d) s += std::pow(std::abs(z), alpha + 1.0);
    return s;
}

inline DpsInvariants dps_invariants(const Amplitude& a, const PotentialSpec& spec) {
    DpsInvariants inv;
    for (const auto& z : a.a) {
        inv.l2_norm_sq += std::norm(z);
        inv.momentum += z;
    }
    inv.bond_norm = bond_norm(a, spec.alpha);
    inv.hamiltonian = 2.0 * omega0(spec) / (spec.alpha + 1.0) * inv.bond_norm;
    return inv;
}

/// Q_alpha(a) = ||delta+ a||_{alpha+1} / ||a||_2.
inline double q_alpha(const Amplitude& a, double alpha) {
    const double l2 = a.l2_norm();
    if (l2 == 0.0) throw std::invalid_argument("q_alpha: zero amplitude");
    return std::pow(bond_norm(a, alpha), 1.0 / (alpha + 1.0)) / l2;
}

struct LinfBounds {
    double conservation_bound = 0.0;  ///< (||delta+ a/2||^{alpha+1}_{alpha+1} / ||a||_2^2)^{1/(alpha-1)}
    double quotient_bound = 0.0;      ///< (Q_alpha/2)^{(alpha+1)/(alpha-1)} ||a||_2
};

/// Lower bounds on ||a(tau)||_inf valid for all tau, from conservation of ||a||_2 and the bond norm.
inline LinfBounds linf_lower_bound(const Amplitude& a0, double alpha) {
    const double l2sq = a0.l2_norm() * a0.l2_norm();
    if (l2sq == 0.0) throw std::invalid_argument("linf_lower_bound: zero amplitude");
    const double half_bonds = std::pow(0.5, alpha + 1.0) * bond_norm(a0, alpha);
    LinfBounds b;
    b.conservation_bound = std::pow(half_bonds / l2sq, 1.0 / (alpha - 1.0));
    b.quotient_bound = std::pow(0.5 * q_alpha(a0, alpha), (alpha + 1.0) / (alpha - 1.0)) * std::sqrt(l2sq);
    return b;
}

/// T_1 ||a0||^(1-alpha) with T_1 = [(alpha-1) 2^(alpha+1) omega_0]^-1.
inline double existence_time(double a0_norm, const PotentialSpec& spec) {
    if (!(a0_norm > 0.0)) throw std::invalid_argument("existence_time: norm must be > 0");
    const double a = spec.alpha;
    const double t1 = 1.0 / ((a - 1.0) * std::pow(2.0, a + 1.0) * omega0(spec));
    return t1 * std::pow(a0_norm, 1.0 - a);
}

}  // namespace cradle
