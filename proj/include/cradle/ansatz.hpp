#pragma once

// Multiple-scale approximation of the chain:
//   X_app(t) = eps Y0(tau)(t) + eps^alpha Y1(tau)(t),  tau = eps^(alpha-1) t,
//   Y0 = a e^{it} e_1 + c.c.,  Y1 = K G_alpha(Y0).

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cradle/dps.hpp"
#include "cradle/lattice.hpp"
#include "cradle/loop.hpp"

namespace cradle {

struct AnsatzParams {
    double epsilon = 0.1;
    PotentialSpec spec;
    int max_harmonic = 32;
    std::size_t n_time_samples = 256;

    void validate() const {
        if (!(epsilon > 0.0)) throw std::invalid_argument("AnsatzParams: epsilon must be > 0");
        if (max_harmonic < 1) throw std::invalid_argument("AnsatzParams: max_harmonic must be >= 1");
        if (n_time_samples < 4 * static_cast<std::size_t>(max_harmonic))
            throw std::invalid_argument("AnsatzParams: n_time_samples must be >= 4 * max_harmonic");
        spec.validate();
    }
};

/// (eps/sqrt2) a e^{it} (1, i) + c.c.; `a` is the slice at tau = eps^(alpha-1) t.
inline LatticeState leading_ansatz(const Amplitude& a, double eps, double t) {
    LatticeState X(a.n_lo, a.size(), a.boundary);
    const cplx carrier = std::polar(1.0, t);
    const double s = std::sqrt(2.0) * eps;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const cplx z = a.a[i] * carrier;
        X.x[i] = s * z.real();
        X.v[i] = -s * z.imag();
    }
    return X;
}

/// Y0 = a e^{it} e_1 + c.c. as a loop field.
inline LoopField leading_loop(const Amplitude& a, int max_harmonic) {
    LoopField Y(a.n_lo, a.size(), max_harmonic, a.boundary);
    const double s = 1.0 / std::sqrt(2.0);
    auto& p = Y.mode(1);
    auto& m = Y.mode(-1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        p.first[i] = s * a.a[i];
        p.second[i] = s * cplx{0.0, 1.0} * a.a[i];
        m.first[i] = std::conj(p.first[i]);
        m.second[i] = std::conj(p.second[i]);
    }
    return Y;
}

namespace detail {

inline PotentialSpec homogeneous_part(const PotentialSpec& spec) {
    PotentialSpec h = spec;
    h.beta = kInfinity;
    h.gamma = kInfinity;
    h.w_minus = h.w_plus = h.g = 0.0;
    return h;
}

// delta+ [V''_alpha(delta- x) delta- z], with the boundary treatment of lattice_force
inline std::vector<double> linearized_force(std::span<const double> x, std::span<const double> z,
                                            const PotentialSpec& spec, Boundary boundary) {
    const std::size_t n = x.size();
    std::vector<double> bond(n + 1, 0.0);
    for (std::size_t i = 1; i < n; ++i) bond[i] = homogeneous_stiffness(x[i] - x[i - 1], spec) * (z[i] - z[i - 1]);
    if (boundary == Boundary::periodic && n > 0) {
        bond[0] = homogeneous_stiffness(x[0] - x[n - 1], spec) * (z[0] - z[n - 1]);
        bond[n] = bond[0];
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = bond[i + 1] - bond[i];
    return f;
}

// positions of Y0(t) built from an arbitrary complex sequence: sqrt2 Re(b e^{it})
inline std::vector<double> carrier_positions(const std::vector<cplx>& b, double t) {
    std::vector<double> x(b.size());
    const cplx carrier = std::polar(std::sqrt(2.0), t);
    for (std::size_t i = 0; i < b.size(); ++i) x[i] = (b[i] * carrier).real();
    return x;
}

}  // namespace detail

/// G_alpha(Y0(t)) = (0, delta+ V'_alpha(delta- Y0_1(t))) sampled uniformly in t and transformed.
inline LoopField galpha_loop(const Amplitude& a, const AnsatzParams& params) {
    params.validate();
    const PotentialSpec hom = detail::homogeneous_part(params.spec);
    const auto times = loop_sample_times(params.n_time_samples);
    std::vector<LatticeState> samples;
    samples.reserve(times.size());
    for (double t : times) {
        LatticeState G(a.n_lo, a.size(), a.boundary);
        const auto x = detail::carrier_positions(a.a, t);
        G.v = lattice_force(x, hom, a.boundary);
        samples.push_back(std::move(G));
    }
    return loop_from_samples(samples, params.max_harmonic);
}

/// Y1 = K G_alpha(Y0).
inline LoopField corrector(const Amplitude& a, const AnsatzParams& params) {
    const LoopField G = galpha_loop(a, params);
    LoopField Y1 = loop_solve_K(G);
    Y1.aliasing_suspect = G.aliasing_suspect;
    return Y1;
}

/// d Y1 / d tau = K DG_alpha(Y0)[d Y0 / d tau], where `da` is d a / d tau.
inline LoopField corrector_tau_derivative(const Amplitude& a, const Amplitude& da, const AnsatzParams& params) {
    params.validate();
    if (da.size() != a.size()) throw std::invalid_argument("corrector_tau_derivative: windows differ");
    const PotentialSpec hom = detail::homogeneous_part(params.spec);
    const auto times = loop_sample_times(params.n_time_samples);
    std::vector<LatticeState> samples;
    samples.reserve(times.size());
    for (double t : times) {
        LatticeState G(a.n_lo, a.size(), a.boundary);
        const auto x = detail::carrier_positions(a.a, t);
        const auto z = detail::carrier_positions(da.a, t);
        G.v = detail::linearized_force(x, z, hom, a.boundary);
        samples.push_back(std::move(G));
    }
    return loop_solve_K(loop_from_samples(samples, params.max_harmonic));
}

namespace detail {

inline LatticeState combine(double c0, const LatticeState& A, double c1, const LatticeState& B) {
    LatticeState out = A;
    for (std::size_t i = 0; i < A.size(); ++i) {
        out.x[i] = c0 * A.x[i] + c1 * B.x[i];
        out.v[i] = c0 * A.v[i] + c1 * B.v[i];
    }
    return out;
}

inline LatticeState full_from_corrector(const Amplitude& a, const LoopField& Y1, double t, const AnsatzParams& p) {
    const LatticeState lead = leading_ansatz(a, p.epsilon, t);
    return combine(1.0, lead, std::pow(p.epsilon, p.spec.alpha), Y1.evaluate(t));
}

// E = X' - J X - G(X), J X = (X_2, -X_1), given X and X'
inline LatticeState defect(const LatticeState& X, const LatticeState& dX, const PotentialSpec& spec) {
    LatticeState E = X;
    const auto f = lattice_force(X.x, spec, X.boundary);
    for (std::size_t i = 0; i < X.size(); ++i) {
        E.x[i] = dX.x[i] - X.v[i];
        E.v[i] = dX.v[i] + X.x[i] - f[i];
    }
    return E;
}

}  // namespace detail

/// eps Y0(t) + eps^alpha Y1(t) with `a` the slice at tau = eps^(alpha-1) t.
inline LatticeState full_ansatz(const Amplitude& a, double t, const AnsatzParams& params) {
    return detail::full_from_corrector(a, corrector(a, params), t, params);
}

/// E(t) = X_app' - J X_app - G(X_app) for the full potential, `a` the DpS slice at tau = eps^(alpha-1) t.
/// Slow derivatives come from the amplitude equation and the chain rule; fast ones from Fourier synthesis.
inline LatticeState residual(const Amplitude& a, double t, const AnsatzParams& params) {
    params.validate();
    const double eps = params.epsilon;
    const double alpha = params.spec.alpha;
    const double slow = std::pow(eps, alpha - 1.0);
    const double eps_a = std::pow(eps, alpha);

    const Amplitude da = dps_rhs(a, params.spec);
    const LoopField Y1 = corrector(a, params);
    const LoopField dY1 = corrector_tau_derivative(a, da, params);

    const LatticeState X = detail::full_from_corrector(a, Y1, t, params);
    // d/dt of eps Y0: fast part leading_ansatz at t + pi/2 shifts e^{it} to i e^{it}
    LatticeState dX = detail::combine(1.0, leading_ansatz(a, eps, t + 0.5 * std::numbers::pi), slow,
                                      leading_ansatz(da, eps, t));
    dX = detail::combine(1.0, dX, eps_a, Y1.evaluate_dt(t));
    dX = detail::combine(1.0, dX, eps_a * slow, dY1.evaluate(t));
    return detail::defect(X, dX, params.spec);
}

/// Same defect with the slow derivatives replaced by central differences of step `dtau`,
/// the neighbouring slices obtained by integrating the amplitude equation forward and,
/// through a(tau - h) = conj(flow_h(conj a)), backward.
inline LatticeState residual_finite_difference(const Amplitude& a, double t, const AnsatzParams& params,
                                               double dtau, double tol = 1e-12) {
    params.validate();
    if (!(dtau > 0.0)) throw std::invalid_argument("residual_finite_difference: dtau must be > 0");
    const double eps = params.epsilon;
    const double alpha = params.spec.alpha;
    const double slow = std::pow(eps, alpha - 1.0);
    const double eps_a = std::pow(eps, alpha);

    const double step[1] = {dtau};
    Amplitude forward = integrate_dps(a, params.spec, step, tol).amplitudes.back();
    Amplitude conj_a = a;
    for (auto& z : conj_a.a) z = std::conj(z);
    Amplitude backward = integrate_dps(conj_a, params.spec, step, tol).amplitudes.back();
    for (auto& z : backward.a) z = std::conj(z);

    const LoopField Y1 = corrector(a, params);
    const LoopField Y1f = corrector(forward, params);
    const LoopField Y1b = corrector(backward, params);

    const double inv = 1.0 / (2.0 * dtau);
    const LatticeState X = detail::full_from_corrector(a, Y1, t, params);
    const LatticeState dY0 = detail::combine(inv, leading_ansatz(forward, eps, t), -inv, leading_ansatz(backward, eps, t));
    const LatticeState dY1 = detail::combine(inv, Y1f.evaluate(t), -inv, Y1b.evaluate(t));
    LatticeState dX = detail::combine(1.0, leading_ansatz(a, eps, t + 0.5 * std::numbers::pi), slow, dY0);
    dX = detail::combine(1.0, dX, eps_a, Y1.evaluate_dt(t));
    dX = detail::combine(1.0, dX, eps_a * slow, dY1);
    return detail::defect(X, dX, params.spec);
}

}  // namespace cradle
