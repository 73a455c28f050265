#pragma once

// 2pi-periodic lattice states of the fast time, stored as truncated Fourier series
//   Y(t) = sum_{|k| <= K} c_k e^{ikt},   c_k = (first_k, second_k) in C^sites x C^sites,
// with c_{-k} = conj(c_k) so that Y(t) is real.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cradle/lattice.hpp"

namespace cradle {

using cplx = std::complex<double>;

struct LoopMode {
    std::vector<cplx> first;   ///< position component
    std::vector<cplx> second;  ///< velocity component
};

struct LoopField {
    int n_lo = 0;
    std::size_t sites = 0;
    int max_harmonic = 0;
    Boundary boundary = Boundary::free;
    std::vector<LoopMode> modes;  ///< modes[k + max_harmonic], k in [-K, K]
    /// Set when the top retained harmonic carries more than 1e-6 of the total coefficient mass.
    bool aliasing_suspect = false;

    LoopField() = default;
    LoopField(int lo, std::size_t n, int K, Boundary b = Boundary::free)
        : n_lo(lo), sites(n), max_harmonic(K), boundary(b), modes(static_cast<std::size_t>(2 * K + 1)) {
        if (K < 0) throw std::invalid_argument("LoopField: negative max_harmonic");
        for (auto& m : modes) {
            m.first.assign(n, cplx{});
            m.second.assign(n, cplx{});
        }
    }

    [[nodiscard]] LoopMode& mode(int k) { return modes.at(static_cast<std::size_t>(k + max_harmonic)); }
    [[nodiscard]] const LoopMode& mode(int k) const {
        return modes.at(static_cast<std::size_t>(k + max_harmonic));
    }

    /// Y(t) as a real lattice state.
    [[nodiscard]] LatticeState evaluate(double t) const { return synthesize(t, false); }
    /// dY/dt(t), exact for the stored series.
    [[nodiscard]] LatticeState evaluate_dt(double t) const { return synthesize(t, true); }

    /// sum_k max_n |c_k,n| (Euclidean in the pair); an upper bound for sup_t ||Y(t)||_inf.
    [[nodiscard]] double coefficient_bound() const {
        double s = 0.0;
        for (const auto& m : modes) {
            double best = 0.0;
            for (std::size_t i = 0; i < sites; ++i)
                best = std::max(best, std::sqrt(std::norm(m.first[i]) + std::norm(m.second[i])));
            s += best;
        }
        return s;
    }

    /// Largest componentwise violation of c_{-k} = conj(c_k).
    [[nodiscard]] double reality_defect() const {
        double d = 0.0;
        for (int k = 0; k <= max_harmonic; ++k) {
            const auto& p = mode(k);
            const auto& m = mode(-k);
            for (std::size_t i = 0; i < sites; ++i) {
                d = std::max(d, std::abs(p.first[i] - std::conj(m.first[i])));
                d = std::max(d, std::abs(p.second[i] - std::conj(m.second[i])));
            }
        }
        return d;
    }

private:
    LatticeState synthesize(double t, bool derivative) const {
        LatticeState X(n_lo, sites, boundary);
        // c_0 + 2 Re sum_{k>0} c_k e^{ikt}
        for (int k = derivative ? 1 : 0; k <= max_harmonic; ++k) {
            cplx w = std::polar(1.0, static_cast<double>(k) * t);
            if (derivative) w *= cplx{0.0, static_cast<double>(k)};
            const double weight = k == 0 ? 1.0 : 2.0;
            const auto& m = mode(k);
            for (std::size_t i = 0; i < sites; ++i) {
                X.x[i] += weight * (m.first[i] * w).real();
                X.v[i] += weight * (m.second[i] * w).real();
            }
        }
        return X;
    }
};

/// Samples t_j = 2 pi j / n_samples, j = 0..n_samples-1.
inline std::vector<double> loop_sample_times(std::size_t n_samples) {
    std::vector<double> t(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j)
        t[j] = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_samples);
    return t;
}

/// Discrete Fourier coefficients of a sampled real loop, truncated at K.
/// `samples[j]` is the loop at loop_sample_times(n)[j].
inline LoopField loop_from_samples(const std::vector<LatticeState>& samples, int K) {
    if (samples.empty()) throw std::invalid_argument("loop_from_samples: no samples");
    const std::size_t n = samples.size();
    if (n < 4 * static_cast<std::size_t>(std::max(K, 1)))
        throw std::invalid_argument("loop_from_samples: need at least 4 samples per retained harmonic");
    const auto& s0 = samples.front();
    LoopField U(s0.n_lo, s0.size(), K, s0.boundary);
    const auto times = loop_sample_times(n);
    for (int k = 0; k <= K; ++k) {
        auto& m = U.mode(k);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx w = std::polar(1.0 / static_cast<double>(n), -static_cast<double>(k) * times[j]);
            const auto& X = samples[j];
            for (std::size_t i = 0; i < U.sites; ++i) {
                m.first[i] += X.x[i] * w;
                m.second[i] += X.v[i] * w;
            }
        }
        if (k > 0) {
            auto& c = U.mode(-k);
            for (std::size_t i = 0; i < U.sites; ++i) {
                c.first[i] = std::conj(m.first[i]);
                c.second[i] = std::conj(m.second[i]);
            }
        }
    }
    const double total = U.coefficient_bound();
    if (K > 0 && total > 0.0) {
        double top = 0.0;
        const auto& m = U.mode(K);
        for (std::size_t i = 0; i < U.sites; ++i)
            top = std::max(top, std::sqrt(std::norm(m.first[i]) + std::norm(m.second[i])));
        U.aliasing_suspect = 2.0 * top > 1e-6 * total;
    }
    return U;
}

/// Samples `f` on the uniform fast-time grid and transforms.
inline LoopField loop_from_function(const std::function<LatticeState(double)>& f, std::size_t n_samples, int K) {
    std::vector<LatticeState> samples;
    samples.reserve(n_samples);
    for (double t : loop_sample_times(n_samples)) samples.push_back(f(t));
    return loop_from_samples(samples, K);
}

// Components along e_{+1} = (1, i)/sqrt2 and e_{-1} = (1, -i)/sqrt2.
namespace detail {

inline cplx pi_plus(cplx first, cplx second) { return (first - cplx{0.0, 1.0} * second) / std::sqrt(2.0); }
inline cplx pi_minus(cplx first, cplx second) { return (first + cplx{0.0, 1.0} * second) / std::sqrt(2.0); }

// c = alpha_+ e_{+1} + alpha_- e_{-1}
inline void recombine(cplx ap, cplx am, cplx& first, cplx& second) {
    const double s = 1.0 / std::sqrt(2.0);
    first = s * (ap + am);
    second = s * cplx{0.0, 1.0} * (ap - am);
}

}  // namespace detail

/// zeta(U) = (1/2pi) integral e^{-it} pi_1 U(t) dt: the e_{+1} part of harmonic 1.
inline std::vector<cplx> loop_zeta(const LoopField& U) {
    std::vector<cplx> z(U.sites);
    if (U.max_harmonic < 1) return z;
    const auto& m = U.mode(1);
    for (std::size_t i = 0; i < U.sites; ++i) z[i] = detail::pi_plus(m.first[i], m.second[i]);
    return z;
}

/// Projection onto ker(d/dt - J): keeps zeta(U) e^{it} e_1 + c.c.
inline LoopField loop_project_P(const LoopField& U) {
    LoopField out(U.n_lo, U.sites, U.max_harmonic, U.boundary);
    if (U.max_harmonic < 1) return out;
    const auto& in = U.mode(1);
    auto& p = out.mode(1);
    auto& m = out.mode(-1);
    // e_1 e_1^* = [[1, -i], [i, 1]] / 2; this form is exactly idempotent in floating point
    for (std::size_t i = 0; i < U.sites; ++i) {
        const cplx f = in.first[i], s = in.second[i];
        p.first[i] = {(f.real() + s.imag()) / 2, (f.imag() - s.real()) / 2};
        p.second[i] = {(s.real() - f.imag()) / 2, (f.real() + s.imag()) / 2};
        m.first[i] = std::conj(p.first[i]);
        m.second[i] = std::conj(p.second[i]);
    }
    return out;
}

/// The periodic solution Y of (d/dt - J) Y = (I - P) U lying in range(d/dt - J).
///
/// J e_sigma = i sigma e_sigma, so the coefficient of e^{ikt} e_sigma is divided by i(k - sigma);
/// the resonant pairs (1, +1) and (-1, -1) are removed by (I - P).
inline LoopField loop_solve_K(const LoopField& U) {
    LoopField out(U.n_lo, U.sites, U.max_harmonic, U.boundary);
    for (int k = -U.max_harmonic; k <= U.max_harmonic; ++k) {
        const auto& in = U.mode(k);
        auto& o = out.mode(k);
        const cplx inv_plus = k == 1 ? cplx{} : 1.0 / cplx{0.0, static_cast<double>(k - 1)};
        const cplx inv_minus = k == -1 ? cplx{} : 1.0 / cplx{0.0, static_cast<double>(k + 1)};
        for (std::size_t i = 0; i < U.sites; ++i) {
            const cplx ap = detail::pi_plus(in.first[i], in.second[i]) * inv_plus;
            const cplx am = detail::pi_minus(in.first[i], in.second[i]) * inv_minus;
            detail::recombine(ap, am, o.first[i], o.second[i]);
        }
    }
    return out;
}

/// (d/dt - J) Y, harmonic by harmonic: i k c_k - (c_k.second, -c_k.first).
inline LoopField loop_apply_dt_minus_J(const LoopField& Y) {
    LoopField out(Y.n_lo, Y.sites, Y.max_harmonic, Y.boundary);
    for (int k = -Y.max_harmonic; k <= Y.max_harmonic; ++k) {
        const auto& in = Y.mode(k);
        auto& o = out.mode(k);
        const cplx ik{0.0, static_cast<double>(k)};
        for (std::size_t i = 0; i < Y.sites; ++i) {
            o.first[i] = ik * in.first[i] - in.second[i];
            o.second[i] = ik * in.second[i] + in.first[i];
        }
    }
    return out;
}

inline LoopField operator-(const LoopField& a, const LoopField& b) {
    if (a.sites != b.sites || a.max_harmonic != b.max_harmonic)
        throw std::invalid_argument("LoopField difference: shapes differ");
    LoopField d = a;
    d.aliasing_suspect = false;
    for (std::size_t m = 0; m < a.modes.size(); ++m)
        for (std::size_t i = 0; i < a.sites; ++i) {
            d.modes[m].first[i] -= b.modes[m].first[i];
            d.modes[m].second[i] -= b.modes[m].second[i];
        }
    return d;
}

/// Largest coefficient modulus over all stored modes and sites.
inline double max_coefficient(const LoopField& U) {
    double m = 0.0;
    for (const auto& mode : U.modes)
        for (std::size_t i = 0; i < U.sites; ++i)
            m = std::max({m, std::abs(mode.first[i]), std::abs(mode.second[i])});
    return m;
}

}  // namespace cradle
