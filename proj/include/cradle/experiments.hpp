#pragma once

// Validation studies: approximation error and residual against eps, breather persistence,
// and non-dispersion of an impulse.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "cradle/ansatz.hpp"
#include "cradle/breather.hpp"
#include "cradle/dps.hpp"
#include "cradle/lattice.hpp"

namespace cradle {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least squares line through (ln x, ln y).
inline SlopeFit fit_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 2) throw std::invalid_argument("fit_slope: need at least 2 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0)) throw std::invalid_argument("fit_slope: coordinates must be > 0");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double n = static_cast<double>(points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(y) - my);
    }
    if (sxx <= 1e-300) throw std::invalid_argument("fit_slope: abscissae are degenerate");
    SlopeFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    return f;
}

/// 0, horizon, and one point in each of `n` equal bins, placed by a golden-ratio sequence
/// with a seeded random start.
inline std::vector<double> horizon_samples(double horizon, std::size_t n, std::uint64_t seed) {
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon_samples: horizon must be >= 0");
    if (horizon == 0.0) return {0.0};
    std::mt19937_64 rng(seed);
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const double step = std::numbers::phi - 1.0;
    std::vector<double> t{0.0};
    for (std::size_t j = 0; j < n; ++j) {
        u += step;
        u -= std::floor(u);
        const double s = horizon * (static_cast<double>(j) + u) / static_cast<double>(n);
        if (s > t.back() && s < horizon) t.push_back(s);
    }
    t.push_back(horizon);
    return t;
}

struct ExperimentOptions {
    std::size_t n_samples = 64;
    std::uint64_t seed = 20240601;
    std::size_t jobs = 1;
    int max_harmonic = 32;
    std::size_t n_time_samples = 256;
    LatticeOptions lattice;
};

struct RunResult {
    double value = 0.0;
    double horizon = 0.0;  ///< fast-time horizon T eps^(1-alpha)
    double max_edge_ratio = 0.0;
    bool boundary_contaminated = false;
    bool aliasing_suspect = false;
};

namespace detail {

inline void require_existence(const Amplitude& a0, const PotentialSpec& spec, double T, Norm p) {
    if (p != Norm::linf) return;  // global existence for p in [1, alpha+1]
    const double norm = a0.sup_norm();
    if (norm == 0.0) return;
    const double tmax = existence_time(norm, spec);
    if (T > tmax) {
        std::ostringstream msg;
        msg << "horizon T=" << T << " exceeds the guaranteed existence time " << tmax
            << " of the amplitude equation in l_inf";
        throw NumericalError(NumericalError::Kind::precondition, 0.0, msg.str());
    }
}

inline double slow_rate(double eps, const PotentialSpec& spec) { return std::pow(eps, spec.alpha - 1.0); }

}  // namespace detail

/// max over sampled t in [0, T eps^(1-alpha)] of ||X(t) - X_a(t)||_p, X(0) = X_a(0).
inline RunResult sup_error(const PotentialSpec& spec, const Amplitude& a0, double eps, double T, Norm p, double tol,
                           const ExperimentOptions& opt = {}) {
    spec.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("sup_error: eps must be > 0");
    if (!(T >= 0.0)) throw std::invalid_argument("sup_error: T must be >= 0");
    detail::require_existence(a0, spec, T, p);

    const double rate = detail::slow_rate(eps, spec);
    RunResult res;
    res.horizon = T / rate;
    if (T == 0.0 || a0.sup_norm() == 0.0) return res;

    const auto times = horizon_samples(res.horizon, opt.n_samples, opt.seed);
    std::vector<double> taus(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) taus[i] = rate * times[i];

    LatticeState X0 = leading_ansatz(a0, eps, 0.0);
    const Trajectory traj = integrate_lattice(X0, spec, times, tol, opt.lattice);
    const DpsTrajectory amp = integrate_dps(a0, spec, taus, tol);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const LatticeState Xa = leading_ansatz(amp.amplitudes[i], eps, times[i]);
        res.value = std::max(res.value, pair_norm(traj.states[i] - Xa, p));
    }
    res.max_edge_ratio = traj.max_edge_ratio;
    res.boundary_contaminated = traj.boundary_contaminated;
    return res;
}

/// max over sampled t in [0, T eps^(1-alpha)] of ||E(t)||_p along the amplitude flow from a0.
inline RunResult sup_residual(const PotentialSpec& spec, const Amplitude& a0, double eps, double T, Norm p,
                              double tol, const ExperimentOptions& opt = {}) {
    spec.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("sup_residual: eps must be > 0");
    if (!(T >= 0.0)) throw std::invalid_argument("sup_residual: T must be >= 0");
    detail::require_existence(a0, spec, T, p);

    AnsatzParams params;
    params.epsilon = eps;
    params.spec = spec;
    params.max_harmonic = opt.max_harmonic;
    params.n_time_samples = opt.n_time_samples;

    const double rate = detail::slow_rate(eps, spec);
    RunResult res;
    res.horizon = T / rate;
    const auto times = horizon_samples(res.horizon, opt.n_samples, opt.seed);
    std::vector<double> taus(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) taus[i] = rate * times[i];

    const auto amp = integrate_dps(a0, spec, taus, tol);
    for (std::size_t i = 0; i < times.size(); ++i)
        res.value = std::max(res.value, pair_norm(residual(amp.amplitudes[i], times[i], params), p));
    res.aliasing_suspect = galpha_loop(a0, params).aliasing_suspect;
    return res;
}

enum class ScalingMode { error, residual };

inline std::string_view to_string(ScalingMode m) { return m == ScalingMode::error ? "error" : "residual"; }

inline ScalingMode parse_scaling_mode(std::string_view s) {
    if (s == "error") return ScalingMode::error;
    if (s == "residual") return ScalingMode::residual;
    throw std::invalid_argument("unknown scaling mode '" + std::string(s) + "' (expected error|residual)");
}

struct ScalingReport {
    ScalingMode mode = ScalingMode::error;
    Norm norm_p = Norm::linf;
    std::vector<double> epsilons;  ///< strictly decreasing
    std::vector<double> errors;
    std::vector<double> horizons;
    std::vector<RunResult> runs;
    double fitted_slope = 0.0;
    double fitted_intercept = 0.0;
    double predicted_slope = 0.0;
};

/// Runs `job(i)` for i in [0, n) on up to `jobs` threads; rethrows the first failure by index.
template <class Job>
void parallel_for(std::size_t n, std::size_t jobs, Job&& job) {
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// sup_error or sup_residual for each eps and the log-log slope through the results.
inline ScalingReport scaling_study(const PotentialSpec& spec, const Amplitude& a0, std::vector<double> eps_list,
                                   double T, Norm p, double tol, ScalingMode mode,
                                   const ExperimentOptions& opt = {}) {
    if (eps_list.size() < 3) throw std::invalid_argument("scaling_study: need at least 3 epsilons");
    std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
    if (std::adjacent_find(eps_list.begin(), eps_list.end()) != eps_list.end())
        throw std::invalid_argument("scaling_study: epsilons must be distinct");
    if (!(eps_list.back() > 0.0)) throw std::invalid_argument("scaling_study: epsilons must be > 0");
    if (eps_list.front() < 4.0 * eps_list.back())
        throw std::invalid_argument("scaling_study: epsilons must span at least two octaves");

    ScalingReport rep;
    rep.mode = mode;
    rep.norm_p = p;
    rep.epsilons = eps_list;
    rep.runs.resize(eps_list.size());
    const double eta = eta_exponent(spec);
    rep.predicted_slope = mode == ScalingMode::error ? 1.0 + eta : spec.alpha + eta;

    parallel_for(eps_list.size(), opt.jobs, [&](std::size_t i) {
        rep.runs[i] = mode == ScalingMode::error ? sup_error(spec, a0, eps_list[i], T, p, tol, opt)
                                                 : sup_residual(spec, a0, eps_list[i], T, p, tol, opt);
    });

    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        rep.errors.push_back(rep.runs[i].value);
        rep.horizons.push_back(rep.runs[i].horizon);
        if (!(rep.runs[i].value > 0.0)) {
            std::ostringstream msg;
            msg << "scaling_study: zero " << to_string(mode) << " at eps=" << eps_list[i];
            throw NumericalError(NumericalError::Kind::precondition, 0.0, msg.str());
        }
        pts.emplace_back(eps_list[i], rep.runs[i].value);
    }
    const SlopeFit fit = fit_slope(pts);
    rep.fitted_slope = fit.slope;
    rep.fitted_intercept = fit.intercept;
    return rep;
}

/// sup over sampled t in [0, T eps^(1-alpha)] of ||X(t) - X_b(t)||_p / eps^(1+eta), X(0) = X_b(0).
/// The profile is embedded with `pad` zero sites on both sides.
inline RunResult breather_persistence(const PotentialSpec& spec, const BreatherProfile& v, double eps, double T,
                                      Norm p, double tol, std::size_t pad = 8, const ExperimentOptions& opt = {}) {
    spec.validate();
    if (!(eps > 0.0)) throw std::invalid_argument("breather_persistence: eps must be > 0");
    if (!(T >= 0.0)) throw std::invalid_argument("breather_persistence: T must be >= 0");
    RunResult res;
    res.horizon = T / detail::slow_rate(eps, spec);
    bool trivial = T == 0.0;
    if (!trivial) trivial = std::none_of(v.values.begin(), v.values.end(), [](double x) { return x != 0.0; });
    if (trivial) return res;

    const auto times = horizon_samples(res.horizon, opt.n_samples, opt.seed);
    const Trajectory traj = integrate_lattice(lattice_breather(v, eps, spec, 0.0, pad), spec, times, tol, opt.lattice);
    double dev = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i)
        dev = std::max(dev, pair_norm(traj.states[i] - lattice_breather(v, eps, spec, times[i], pad), p));
    res.value = dev / std::pow(eps, 1.0 + eta_exponent(spec));
    res.max_edge_ratio = traj.max_edge_ratio;
    res.boundary_contaminated = traj.boundary_contaminated;
    return res;
}

struct ImpulseResult {
    double min_linf = 0.0;         ///< min over the sampled horizon of ||X(t)||_inf
    double predicted_bound = 0.0;  ///< 2^((2alpha-1)/(1-alpha)) N^(1/(1-alpha)) |v_i|
    double epsilon = 0.0;          ///< |v_i| sqrt(N)
    double horizon = 0.0;          ///< mu nu |ln eps| eps^(1-alpha)
    std::size_t window = 0;
    int reruns = 0;
    double max_edge_ratio = 0.0;
    bool boundary_contaminated = false;
    double dps_min_linf = 0.0;     ///< min of ||a(tau)||_inf over the matching slow horizon
    double dps_lower_bound = 0.0;  ///< linf_lower_bound of the matching amplitude
};

struct ImpulseOptions {
    double nu = 1.0;
    std::size_t min_pad = 16;
    int max_reruns = 4;
};

/// x(0) = 0 and xdot_n(0) = v_i on sites 1..N; the window is widened until the edges stay quiet.
inline ImpulseResult impulse_decay(const PotentialSpec& spec, int N, double v_i, double mu, double tol,
                                   const ImpulseOptions& iopt = {}, const ExperimentOptions& opt = {}) {
    spec.validate();
    if (N < 1) throw std::invalid_argument("impulse_decay: N must be >= 1");
    const double eta = eta_exponent(spec);
    if (!(mu > 0.0 && mu < eta)) throw std::invalid_argument("impulse_decay: mu must lie in (0, eta)");
    ImpulseResult res;
    if (v_i == 0.0) return res;

    const double a = spec.alpha;
    res.epsilon = std::abs(v_i) * std::sqrt(static_cast<double>(N));
    if (!(res.epsilon < 1.0)) throw std::invalid_argument("impulse_decay: |v_i| sqrt(N) must be < 1");
    res.predicted_bound = std::pow(2.0, (2.0 * a - 1.0) / (1.0 - a)) *
                          std::pow(static_cast<double>(N), 1.0 / (1.0 - a)) * std::abs(v_i);
    res.horizon = mu * iopt.nu * std::abs(std::log(res.epsilon)) * std::pow(res.epsilon, 1.0 - a);

    const auto times = horizon_samples(res.horizon, opt.n_samples, opt.seed);
    std::size_t pad = iopt.min_pad + static_cast<std::size_t>(std::ceil(res.horizon));
    for (int attempt = 0;; ++attempt, pad *= 2) {
        LatticeState X0(1 - static_cast<int>(pad), static_cast<std::size_t>(N) + 2 * pad);
        for (int n = 1; n <= N; ++n) X0.v[X0.index(n)] = v_i;
        const Trajectory traj = integrate_lattice(X0, spec, times, tol, opt.lattice);
        res.min_linf = INFINITY;
        for (const auto& X : traj.states) res.min_linf = std::min(res.min_linf, pair_norm(X, Norm::linf));
        res.window = X0.size();
        res.reruns = attempt;
        res.max_edge_ratio = traj.max_edge_ratio;
        res.boundary_contaminated = traj.boundary_contaminated;
        if (!traj.boundary_contaminated || attempt >= iopt.max_reruns) break;
    }

    // the amplitude with X_a(0) = X(0): a_n = -i v_i / (sqrt2 eps) on the impulse sites
    Amplitude a0(1 - static_cast<int>(pad), static_cast<std::size_t>(N) + 2 * pad);
    for (int n = 1; n <= N; ++n) a0.a[a0.index(n)] = cplx{0.0, -v_i / (std::sqrt(2.0) * res.epsilon)};
    res.dps_lower_bound = linf_lower_bound(a0, a).conservation_bound;
    std::vector<double> taus(times.begin() + 1, times.end());
    for (auto& t : taus) t *= detail::slow_rate(res.epsilon, spec);
    const auto amp = integrate_dps(a0, spec, taus, tol);
    res.dps_min_linf = a0.sup_norm();
    for (const auto& s : amp.amplitudes) res.dps_min_linf = std::min(res.dps_min_linf, s.sup_norm());
    return res;
}

}  // namespace cradle
