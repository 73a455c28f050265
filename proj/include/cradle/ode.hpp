#pragma once

// Adaptive Dormand-Prince 5(4) integrator over std::vector<T>, T real or complex.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace cradle {

/// Raised when an integration cannot be completed. `time` is where it stopped.
class NumericalError : public std::runtime_error {
public:
    enum class Kind { step_underflow, non_finite, max_steps, no_convergence, precondition };

    NumericalError(Kind kind, double time, const std::string& what)
        : std::runtime_error(what), kind_(kind), time_(time) {}

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] double time() const { return time_; }

private:
    Kind kind_;
    double time_;
};

inline const char* to_string(NumericalError::Kind k) {
    switch (k) {
        case NumericalError::Kind::step_underflow: return "step_underflow";
        case NumericalError::Kind::non_finite: return "non_finite";
        case NumericalError::Kind::max_steps: return "max_steps";
        case NumericalError::Kind::no_convergence: return "no_convergence";
        case NumericalError::Kind::precondition: return "precondition";
    }
    return "unknown";
}

struct OdeOptions {
    /// Local error per unit step, relative to the sup norm of the state.
    double tol = 1e-9;
    double h_max = std::numeric_limits<double>::infinity();
    double h_min = 1e-13;
    double h_init = 1e-2;
    std::size_t max_steps = 20'000'000;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
    double largest_step = 0.0;
    double smallest_step = std::numeric_limits<double>::infinity();
};

template <class T>
struct OdeSamples {
    std::vector<double> times;
    std::vector<std::vector<T>> states;
    StepStats stats;
};

namespace detail {

template <class T>
bool all_finite(const std::vector<T>& y) {
    for (const auto& v : y) {
        if constexpr (std::is_floating_point_v<T>) {
            if (!std::isfinite(v)) return false;
        } else {
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        }
    }
    return true;
}

template <class T>
double sup_norm(const std::vector<T>& y) {
    double m = 0.0;
    for (const auto& v : y) m = std::max(m, static_cast<double>(std::abs(v)));
    return m;
}

// Dormand & Prince (1980) coefficients.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline constexpr double kErrorTarget = 0.1;

}  // namespace detail

/// Integrates y' = rhs(t, y) from t0 and returns the state at each requested sample time.
///
/// `rhs` has signature void(double t, const std::vector<T>& y, std::vector<T>& dydt).
/// Sample times must be non-decreasing and >= t0; steps are shortened to land on them
/// exactly. A step is accepted when max_i |err_i| <= 0.1 * tol * h * max(|y|_inf, |y_new|_inf);
/// the factor 0.1 keeps long-run energy drift within a few tol on contact chains.
template <class T, class Rhs>
OdeSamples<T> integrate_adaptive(Rhs&& rhs, std::vector<T> y, double t0,
                                 std::span<const double> sample_times, const OdeOptions& opt) {
    using C = detail::Dopri5;
    if (!(opt.tol > 0.0)) throw std::invalid_argument("integrate_adaptive: tol must be > 0");
    for (std::size_t i = 0; i < sample_times.size(); ++i) {
        if (sample_times[i] < t0 || (i > 0 && sample_times[i] < sample_times[i - 1]))
            throw std::invalid_argument("integrate_adaptive: sample times must be sorted and >= t0");
    }

    OdeSamples<T> out;
    out.times.reserve(sample_times.size());
    out.states.reserve(sample_times.size());
    const std::size_t n = y.size();
    std::vector<T> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

    double t = t0;
    double h = std::min(opt.h_init, opt.h_max);
    rhs(t, y, k1);
    ++out.stats.rhs_evaluations;
    if (!detail::all_finite(k1) || !detail::all_finite(y))
        throw NumericalError(NumericalError::Kind::non_finite, t, "non-finite initial state or derivative");

    std::size_t steps = 0;
    for (double target : sample_times) {
        while (t < target) {
            if (++steps > opt.max_steps) {
                std::ostringstream msg;
                msg << "step budget exhausted at t=" << t;
                throw NumericalError(NumericalError::Kind::max_steps, t, msg.str());
            }
            const bool clipped = t + h >= target;
            const double h_try = clipped ? target - t : h;

            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h_try * (C::a21 * k1[i]);
            rhs(t + C::c2 * h_try, tmp, k2);
            for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h_try * (C::a31 * k1[i] + C::a32 * k2[i]);
            rhs(t + C::c3 * h_try, tmp, k3);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h_try * (C::a41 * k1[i] + C::a42 * k2[i] + C::a43 * k3[i]);
            rhs(t + C::c4 * h_try, tmp, k4);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h_try * (C::a51 * k1[i] + C::a52 * k2[i] + C::a53 * k3[i] + C::a54 * k4[i]);
            rhs(t + C::c5 * h_try, tmp, k5);
            for (std::size_t i = 0; i < n; ++i)
                tmp[i] = y[i] + h_try * (C::a61 * k1[i] + C::a62 * k2[i] + C::a63 * k3[i] +
                                         C::a64 * k4[i] + C::a65 * k5[i]);
            rhs(t + h_try, tmp, k6);
            for (std::size_t i = 0; i < n; ++i)
                y_new[i] = y[i] + h_try * (C::b1 * k1[i] + C::b3 * k3[i] + C::b4 * k4[i] + C::b5 * k5[i] +
                                           C::b6 * k6[i]);
            rhs(t + h_try, y_new, k7);
            out.stats.rhs_evaluations += 6;

            if (!detail::all_finite(y_new) || !detail::all_finite(k7)) {
                std::ostringstream msg;
                msg << "non-finite state encountered at t=" << t << " (step " << h_try << ")";
                throw NumericalError(NumericalError::Kind::non_finite, t, msg.str());
            }

            for (std::size_t i = 0; i < n; ++i)
                err[i] = h_try * (C::e1 * k1[i] + C::e3 * k3[i] + C::e4 * k4[i] + C::e5 * k5[i] +
                                  C::e6 * k6[i] + C::e7 * k7[i]);
            double scale = std::max(detail::sup_norm(y), detail::sup_norm(y_new));
            if (scale == 0.0) scale = 1.0;
            const double err_norm = detail::sup_norm(err) / (detail::kErrorTarget * opt.tol * h_try * scale);

            if (err_norm <= 1.0) {
                t = clipped ? target : t + h_try;
                y.swap(y_new);
                k1.swap(k7);
                ++out.stats.accepted;
                out.stats.largest_step = std::max(out.stats.largest_step, h_try);
                out.stats.smallest_step = std::min(out.stats.smallest_step, h_try);
                const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.25), 0.2, 5.0);
                // a step shortened to hit a sample says nothing about the natural step size
                if (!clipped || h_try * grow > h) h = std::min(opt.h_max, h_try * grow);
            } else {
                ++out.stats.rejected;
                h = h_try * std::clamp(0.9 * std::pow(err_norm, -0.25), 0.1, 0.9);
                if (h < opt.h_min) {
                    std::ostringstream msg;
                    msg << "step size underflow at t=" << t << " (h=" << h << ")";
                    throw NumericalError(NumericalError::Kind::step_underflow, t, msg.str());
                }
            }
        }
        out.times.push_back(target);
        out.states.push_back(y);
    }
    return out;
}

}  // namespace cradle
