#pragma once

// Localized solutions of the stationary amplitude equation v = -Delta_{alpha+1} v
// and the periodic orbits they generate.

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cradle/dps.hpp"
#include "cradle/lattice.hpp"

namespace cradle {

enum class Centering { site, bond };

inline std::string_view to_string(Centering c) { return c == Centering::site ? "site" : "bond"; }

inline Centering parse_centering(std::string_view s) {
    if (s == "site") return Centering::site;
    if (s == "bond") return Centering::bond;
    throw std::invalid_argument("unknown centering '" + std::string(s) + "' (expected site|bond)");
}

/// v on [-N, N] (site) or [-N+1, N] (bond).
struct BreatherProfile {
    int n_lo = 0;
    std::vector<double> values;
    Centering centering = Centering::site;
    double residual_norm = 0.0;
    int newton_iterations = 0;
    double seed = 0.0;  ///< amplitude s of the two-site seed that converged

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] int n_hi() const { return n_lo + static_cast<int>(values.size()) - 1; }
    [[nodiscard]] double at(int n) const {
        return n < n_lo || n > n_hi() ? 0.0 : values[static_cast<std::size_t>(n - n_lo)];
    }
    [[nodiscard]] int half_width() const { return n_hi(); }
};

/// v + Delta_{alpha+1} v; sites outside the window count as zero.
inline std::vector<double> stationary_residual(std::span<const double> v, double alpha) {
    const std::size_t n = v.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? 0.0 : v[i - 1];
        const double right = i + 1 == n ? 0.0 : v[i + 1];
        r[i] = v[i] + signed_power(right - v[i], alpha) - signed_power(v[i] - left, alpha);
    }
    return r;
}

struct Tridiagonal {
    std::vector<double> lower;  ///< lower[i] = d r_i / d v_{i-1}, lower[0] unused
    std::vector<double> diag;
    std::vector<double> upper;  ///< upper[i] = d r_i / d v_{i+1}, upper[n-1] unused
};

/// Jacobian of stationary_residual (same zero extension).
inline Tridiagonal stationary_jacobian(std::span<const double> v, double alpha) {
    const std::size_t n = v.size();
    Tridiagonal J{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
    auto slope = [alpha](double w) { return alpha * std::pow(std::abs(w), alpha - 1.0); };
    for (std::size_t i = 0; i < n; ++i) {
        const double left = i == 0 ? 0.0 : v[i - 1];
        const double right = i + 1 == n ? 0.0 : v[i + 1];
        const double sp = slope(right - v[i]);
        const double sm = slope(v[i] - left);
        J.diag[i] = 1.0 - sp - sm;
        if (i + 1 < n) J.upper[i] = sp;
        if (i > 0) J.lower[i] = sm;
    }
    return J;
}

namespace detail {

// Thomas algorithm; returns false on a vanishing pivot
inline bool solve_tridiagonal(Tridiagonal J, std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    for (std::size_t i = 1; i < n; ++i) {
        if (J.diag[i - 1] == 0.0) return false;
        const double m = J.lower[i] / J.diag[i - 1];
        J.diag[i] -= m * J.upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (J.diag[n - 1] == 0.0) return false;
    rhs[n - 1] /= J.diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - J.upper[i] * rhs[i + 1]) / J.diag[i];
    for (double x : rhs)
        if (!std::isfinite(x)) return false;
    return true;
}

// Reduced unknowns u_0..u_N (site: v_j = u_j = v_{-j}) or u_1..u_N (bond: v_j = u_j = -v_{1-j}).
struct ReducedSystem {
    double alpha;
    Centering centering;

    // v_{j-1}: the mirror image across the centre for the first unknown
    [[nodiscard]] double left_of_first(const std::vector<double>& u) const {
        if (u.size() < 2 && centering == Centering::site) return 0.0;
        return centering == Centering::site ? u[1] : -u[0];
    }

    [[nodiscard]] std::vector<double> residual(const std::vector<double>& u) const {
        const std::size_t n = u.size();
        std::vector<double> r(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i == 0 ? left_of_first(u) : u[i - 1];
            const double right = i + 1 == n ? 0.0 : u[i + 1];
            r[i] = u[i] + signed_power(right - u[i], alpha) - signed_power(u[i] - left, alpha);
        }
        return r;
    }

    [[nodiscard]] Tridiagonal jacobian(const std::vector<double>& u) const {
        const std::size_t n = u.size();
        Tridiagonal J{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0), std::vector<double>(n, 0.0)};
        auto slope = [this](double w) { return alpha * std::pow(std::abs(w), alpha - 1.0); };
        for (std::size_t i = 0; i < n; ++i) {
            const double left = i == 0 ? left_of_first(u) : u[i - 1];
            const double right = i + 1 == n ? 0.0 : u[i + 1];
            const double sp = slope(right - u[i]);
            const double sm = slope(u[i] - left);
            J.diag[i] = 1.0 - sp - sm;
            if (i + 1 < n) J.upper[i] = sp;
            if (i > 0) J.lower[i] = sm;
            if (i == 0) {
                if (centering == Centering::site) {
                    if (n > 1) J.upper[0] += sm;  // v_{-1} = u_1
                } else {
                    J.diag[0] -= sm;  // v_0 = -u_1 doubles the left gap
                }
            }
        }
        return J;
    }
};

inline double sup_abs(const std::vector<double>& r) {
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace detail

struct NewtonOptions {
    int max_iterations = 200;
    double target = 1e-12;
    double fallback_target = 1e-10;
};

/// Damped Newton on the symmetry-reduced system with zero values beyond the window.
///
/// Seeds with the two-site pattern in l_inf balance: v_0 = s, v_{+-1} = -s/2 (site) or
/// v_0 = -v_1 = s (bond). Each Newton step starts at `damping` and is halved until the residual
/// decreases; a run that stalls is retried with half the damping, and a collapse onto v = 0 is
/// reseeded at a larger s.
inline BreatherProfile solve_stationary(double alpha, Centering centering, int half_width, double damping = 1.0,
                                        const NewtonOptions& opt = {}) {
    if (!(alpha > 1.0)) throw std::invalid_argument("solve_stationary: alpha must be > 1");
    if (half_width < 8) throw std::invalid_argument("solve_stationary: half_width must be >= 8");
    if (!(damping > 0.0 && damping <= 1.0)) throw std::invalid_argument("solve_stationary: damping must be in (0, 1]");

    const detail::ReducedSystem sys{alpha, centering};
    const std::size_t n_unknowns = centering == Centering::site ? static_cast<std::size_t>(half_width) + 1
                                                                 : static_cast<std::size_t>(half_width);
    const double s_balance = centering == Centering::site
                                 ? std::pow(0.5 / std::pow(1.5, alpha), 1.0 / (alpha - 1.0))
                                 : std::pow(1.0 / (std::pow(2.0, alpha) + 1.0), 1.0 / (alpha - 1.0));

    double best_residual = INFINITY;
    std::vector<double> best;
    int iterations = 0;
    double used_seed = 0.0;

    for (double seed_scale : {1.0, 2.0, 0.5, 4.0}) {
        const double s = s_balance * seed_scale;
        for (double damp = damping; damp >= damping / 16.0; damp *= 0.5) {
            std::vector<double> u(n_unknowns, 0.0);
            if (centering == Centering::site) {
                u[0] = s;
                u[1] = -0.5 * s;
            } else {
                u[0] = -s;
            }
            auto r = sys.residual(u);
            double rn = detail::sup_abs(r);
            int it = 0;
            for (; it < opt.max_iterations && rn >= opt.target; ++it) {
                std::vector<double> step = r;
                if (!detail::solve_tridiagonal(sys.jacobian(u), step)) break;
                double lambda = damp;
                bool improved = false;
                for (int k = 0; k < 40; ++k, lambda *= 0.5) {
                    std::vector<double> trial = u;
                    for (std::size_t i = 0; i < u.size(); ++i) trial[i] -= lambda * step[i];
                    auto rt = sys.residual(trial);
                    const double tn = detail::sup_abs(rt);
                    if (tn < rn) {
                        u = std::move(trial);
                        r = std::move(rt);
                        rn = tn;
                        improved = true;
                        break;
                    }
                }
                if (!improved) break;
            }
            // v = 0 solves the equation too; only a nontrivial centre counts
            const bool trivial = std::abs(u[0]) < 1e-3 * s;
            if (!trivial && rn < best_residual) {
                best_residual = rn;
                best = u;
                iterations = it;
                used_seed = s;
            }
            if (!trivial && rn < opt.target) break;
        }
        if (best_residual < opt.target) break;
    }

    if (best.empty() || !(best_residual < opt.fallback_target)) {
        std::ostringstream msg;
        msg << "stationary Newton did not converge (alpha=" << alpha << ", " << to_string(centering)
            << ", best residual " << best_residual << ")";
        throw NumericalError(NumericalError::Kind::no_convergence, 0.0, msg.str());
    }

    BreatherProfile p;
    p.centering = centering;
    p.newton_iterations = iterations;
    p.seed = used_seed;
    if (centering == Centering::site) {
        p.n_lo = -half_width;
        p.values.assign(2 * n_unknowns - 1, 0.0);
        for (std::size_t j = 0; j < n_unknowns; ++j) {
            p.values[static_cast<std::size_t>(half_width) + j] = best[j];
            p.values[static_cast<std::size_t>(half_width) - j] = best[j];
        }
    } else {
        p.n_lo = -half_width + 1;
        p.values.assign(2 * n_unknowns, 0.0);
        // index of site n is n + half_width - 1; u_j holds v_{j+1}
        for (std::size_t j = 0; j < n_unknowns; ++j) {
            p.values[static_cast<std::size_t>(half_width) + j] = best[j];
            p.values[static_cast<std::size_t>(half_width) - 1 - j] = -best[j];
        }
    }
    p.residual_norm = detail::sup_abs(stationary_residual(p.values, alpha));
    return p;
}

/// Sites where |v_n| is a normal double; the far tail underflows and carries no sign.
inline bool in_support(double v) { return std::abs(v) >= DBL_MIN; }

struct ProfileChecks {
    bool symmetric = false;    ///< v_n = v_{-n} (site) or v_n = -v_{1-n} (bond), bit for bit
    bool alternating = false;  ///< (-1)^n v_n > 0 on the support
    bool monotone = false;     ///< |v_n| > |v_{n-1}| for n <= 0 on the support, up to the centre
    int support_hi = 0;        ///< largest n in the support
};

inline ProfileChecks check_profile(const BreatherProfile& v) {
    ProfileChecks c;
    c.symmetric = true;
    for (int n = v.n_lo; n <= v.n_hi(); ++n) {
        const int mirror = v.centering == Centering::site ? -n : 1 - n;
        const double expected = v.centering == Centering::site ? v.at(mirror) : -v.at(mirror);
        if (v.at(n) != expected) c.symmetric = false;
    }
    c.alternating = true;
    c.support_hi = v.centering == Centering::site ? 0 : 1;
    for (int n = v.n_lo; n <= v.n_hi(); ++n) {
        const double x = v.at(n);
        if (!in_support(x)) continue;
        if ((n % 2 == 0 ? x : -x) <= 0.0) c.alternating = false;
        c.support_hi = std::max(c.support_hi, n);
    }
    // the left flank ends at the centre site (site) or at n = 0 (bond)
    c.monotone = true;
    bool started = false;
    for (int n = v.n_lo + 1; n <= 0; ++n) {
        if (!in_support(v.at(n - 1))) continue;
        started = true;
        if (!(std::abs(v.at(n)) > std::abs(v.at(n - 1)))) c.monotone = false;
    }
    if (!started && !in_support(v.at(0))) c.monotone = false;
    return c;
}

/// Least n0 >= 0 with |v_n| <= q^(1 + alpha^(n - n0)) for every stored n >= n0.
inline std::optional<int> decay_certificate(const BreatherProfile& v, double alpha, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("decay_certificate: q must lie in (0, 1)");
    const int hi = v.n_hi();
    for (int n0 = 0; n0 <= std::max(hi, 0); ++n0) {
        bool ok = true;
        for (int n = std::max(n0, v.n_lo); n <= hi && ok; ++n) {
            const double bound = std::pow(q, 1.0 + std::pow(alpha, static_cast<double>(n - n0)));
            ok = std::abs(v.at(n)) <= bound;
        }
        if (ok) return n0;
    }
    return std::nullopt;
}

/// The profile as an amplitude eps * v, zero-padded by `pad` sites on both sides.
inline Amplitude profile_amplitude(const BreatherProfile& v, double eps = 1.0, std::size_t pad = 0) {
    Amplitude a(v.n_lo - static_cast<int>(pad), v.size() + 2 * pad);
    for (std::size_t i = 0; i < v.size(); ++i) a.a[i + pad] = eps * v.values[i];
    return a;
}

/// Omega = 1 + omega_0 eps^(alpha-1).
inline double breather_frequency(double eps, const PotentialSpec& spec) {
    return 1.0 + omega0(spec) * std::pow(eps, spec.alpha - 1.0);
}

/// sqrt2 eps (v cos(Omega t), -v sin(Omega t)), zero-padded by `pad` sites.
inline LatticeState lattice_breather(const BreatherProfile& v, double eps, const PotentialSpec& spec, double t,
                                     std::size_t pad = 0) {
    const double omega = breather_frequency(eps, spec);
    const double c = std::sqrt(2.0) * eps * std::cos(omega * t);
    const double s = -std::sqrt(2.0) * eps * std::sin(omega * t);
    LatticeState X(v.n_lo - static_cast<int>(pad), v.size() + 2 * pad);
    for (std::size_t i = 0; i < v.size(); ++i) {
        X.x[i + pad] = c * v.values[i];
        X.v[i + pad] = s * v.values[i];
    }
    return X;
}

/// a_n(tau) = eps v_n e^{i omega_0 eps^(alpha-1) tau}.
inline Amplitude dps_breather_orbit(const BreatherProfile& v, double eps, const PotentialSpec& spec, double tau,
                                    std::size_t pad = 0) {
    Amplitude a = profile_amplitude(v, eps, pad);
    const cplx phase = std::polar(1.0, omega0(spec) * std::pow(std::abs(eps), spec.alpha - 1.0) * tau);
    for (auto& z : a.a) z *= phase;
    return a;
}

}  // namespace cradle
