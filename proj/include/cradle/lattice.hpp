#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cradle/ode.hpp"
#include "cradle/potentials.hpp"
#include "cradle/sequence.hpp"

namespace cradle {

/// Positions and velocities on the index window [n_lo, n_lo + size).
struct LatticeState {
    int n_lo = 0;
    std::vector<double> x;
    std::vector<double> v;
    Boundary boundary = Boundary::free;

    LatticeState() = default;
    LatticeState(int lo, std::size_t sites, Boundary b = Boundary::free)
        : n_lo(lo), x(sites, 0.0), v(sites, 0.0), boundary(b) {}

    [[nodiscard]] std::size_t size() const { return x.size(); }
    [[nodiscard]] int n_hi() const { return n_lo + static_cast<int>(x.size()) - 1; }
    [[nodiscard]] std::size_t index(int n) const { return static_cast<std::size_t>(n - n_lo); }

    void validate() const {
        if (x.size() != v.size()) throw std::invalid_argument("LatticeState: position/velocity windows differ");
        if (x.empty()) throw std::invalid_argument("LatticeState: empty window");
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!std::isfinite(x[i]) || !std::isfinite(v[i]))
                throw std::invalid_argument("LatticeState: non-finite entry");
    }
};

inline LatticeState operator-(const LatticeState& a, const LatticeState& b) {
    if (a.n_lo != b.n_lo || a.size() != b.size())
        throw std::invalid_argument("LatticeState difference: windows differ");
    LatticeState d = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d.x[i] -= b.x[i];
        d.v[i] -= b.v[i];
    }
    return d;
}

enum class Norm { l1, l2, linf };

inline const char* to_string(Norm p) {
    switch (p) {
        case Norm::l1: return "1";
        case Norm::l2: return "2";
        case Norm::linf: return "inf";
    }
    return "?";
}

inline Norm parse_norm(std::string_view s) {
    if (s == "1") return Norm::l1;
    if (s == "2") return Norm::l2;
    if (s == "inf" || s == "infinity") return Norm::linf;
    throw std::invalid_argument("unknown norm '" + std::string(s) + "' (expected 1|2|inf)");
}

/// ||X||_p = (sum (x_n^2 + v_n^2)^(p/2))^(1/p); sup of the site moduli for p = inf.
inline double pair_norm(const LatticeState& X, Norm p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        const double m = std::hypot(X.x[i], X.v[i]);
        switch (p) {
            case Norm::l1: acc += m; break;
            case Norm::l2: acc += m * m; break;
            case Norm::linf: acc = std::max(acc, m); break;
        }
    }
    return p == Norm::l2 ? std::sqrt(acc) : acc;
}

/// F(x) = delta+ V'(delta- x) - phi'(x). Gaps across a free edge are zero.
inline std::vector<double> lattice_force(std::span<const double> x, const PotentialSpec& spec,
                                         Boundary boundary) {
    const std::size_t n = x.size();
    // bond[i] carries V'(x_i - x_{i-1}); bond[n] aliases bond[0]
    std::vector<double> bond(n + 1, 0.0);
    for (std::size_t i = 1; i < n; ++i) bond[i] = interaction(x[i] - x[i - 1], spec).force;
    if (boundary == Boundary::periodic && n > 0) {
        bond[0] = interaction(x[0] - x[n - 1], spec).force;
        bond[n] = bond[0];
    }
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = bond[i + 1] - bond[i] - onsite(x[i], spec).force;
    return f;
}

/// Right-hand side of X' = JX + G(X): (v, -x + F(x)).
inline LatticeState lattice_rhs(const LatticeState& X, const PotentialSpec& spec) {
    LatticeState d = X;
    const auto f = lattice_force(X.x, spec, X.boundary);
    for (std::size_t i = 0; i < X.size(); ++i) {
        d.x[i] = X.v[i];
        d.v[i] = -X.x[i] + f[i];
    }
    return d;
}

/// H = sum v^2/2 + x^2/2 + phi(x) + sum over bonds V(x_{n+1} - x_n).
inline double hamiltonian(const LatticeState& X, const PotentialSpec& spec) {
    double h = 0.0;
    const std::size_t n = X.size();
    for (std::size_t i = 0; i < n; ++i) {
        h += 0.5 * X.v[i] * X.v[i] + 0.5 * X.x[i] * X.x[i] + onsite(X.x[i], spec).energy;
        if (i + 1 < n) h += interaction(X.x[i + 1] - X.x[i], spec).energy;
    }
    if (X.boundary == Boundary::periodic && n > 0) h += interaction(X.x[0] - X.x[n - 1], spec).energy;
    return h;
}

struct LatticeOptions {
    /// Resolve the unit-frequency carrier: at least 50 steps per period.
    double h_max = 2.0 * std::numbers::pi / 50.0;
    std::size_t edge_sites = 4;
    /// Edge modulus allowed relative to the sup of the whole state.
    double edge_threshold = 1e-10;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<LatticeState> states;
    StepStats stats;
    /// Largest (edge sup) / (state sup) ratio seen at the samples; free windows only.
    double max_edge_ratio = 0.0;
    bool boundary_contaminated = false;
};

/// Sup of the site modulus over the `edge_sites` outermost sites at each end.
inline double edge_modulus(const LatticeState& X, std::size_t edge_sites) {
    const std::size_t n = X.size();
    const std::size_t k = std::min(edge_sites, n);
    double m = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        m = std::max(m, std::hypot(X.x[i], X.v[i]));
        m = std::max(m, std::hypot(X.x[n - 1 - i], X.v[n - 1 - i]));
    }
    return m;
}

/// Integrates the chain from X0 and returns it at each requested time (sorted, >= 0).
inline Trajectory integrate_lattice(const LatticeState& X0, const PotentialSpec& spec,
                                    std::span<const double> sample_times, double tol,
                                    const LatticeOptions& lopt = {}) {
    X0.validate();
    spec.validate();
    const std::size_t n = X0.size();
    std::vector<double> y(2 * n);
    std::copy(X0.x.begin(), X0.x.end(), y.begin());
    std::copy(X0.v.begin(), X0.v.end(), y.begin() + static_cast<std::ptrdiff_t>(n));

    const Boundary boundary = X0.boundary;
    auto rhs = [&](double, const std::vector<double>& s, std::vector<double>& ds) {
        const std::span<const double> x(s.data(), n);
        const auto f = lattice_force(x, spec, boundary);
        for (std::size_t i = 0; i < n; ++i) {
            ds[i] = s[n + i];
            ds[n + i] = -s[i] + f[i];
        }
    };

    OdeOptions opt;
    opt.tol = tol;
    opt.h_max = lopt.h_max;
    auto raw = integrate_adaptive<double>(rhs, std::move(y), 0.0, sample_times, opt);

    Trajectory traj;
    traj.times = std::move(raw.times);
    traj.stats = raw.stats;
    traj.states.reserve(raw.states.size());
    for (const auto& s : raw.states) {
        LatticeState X(X0.n_lo, n, boundary);
        std::copy(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(n), X.x.begin());
        std::copy(s.begin() + static_cast<std::ptrdiff_t>(n), s.end(), X.v.begin());
        if (boundary == Boundary::free) {
            const double whole = pair_norm(X, Norm::linf);
            if (whole > 0.0) {
                const double ratio = edge_modulus(X, lopt.edge_sites) / whole;
                traj.max_edge_ratio = std::max(traj.max_edge_ratio, ratio);
            }
        }
        traj.states.push_back(std::move(X));
    }
    traj.boundary_contaminated = traj.max_edge_ratio > lopt.edge_threshold;
    return traj;
}

/// Uniformly spaced samples on (0, t_end], endpoint included.
inline Trajectory integrate_lattice(const LatticeState& X0, const PotentialSpec& spec, double t_end,
                                    double tol, std::size_t n_samples = 64,
                                    const LatticeOptions& lopt = {}) {
    if (!(t_end > 0.0)) throw std::invalid_argument("integrate_lattice: t_end must be > 0");
    if (n_samples == 0) n_samples = 1;
    std::vector<double> times(n_samples);
    for (std::size_t j = 0; j < n_samples; ++j)
        times[j] = t_end * static_cast<double>(j + 1) / static_cast<double>(n_samples);
    times.back() = t_end;
    return integrate_lattice(X0, spec, times, tol, lopt);
}

}  // namespace cradle
