#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cradle/ansatz.hpp"
#include "cradle/breather.hpp"

using namespace cradle;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Amplitude random_disk(std::mt19937_64& rng, std::size_t n, std::size_t pad = 0) {
    std::uniform_real_distribution<double> r(0.0, 1.0), th(-std::numbers::pi, std::numbers::pi);
    Amplitude a(0, n + 2 * pad);
    for (std::size_t i = pad; i < pad + n; ++i) a.a[i] = std::polar(std::sqrt(r(rng)), th(rng));
    return a;
}

AnsatzParams params(double eps, std::size_t samples = 256, int K = 32) {
    AnsatzParams p;
    p.epsilon = eps;
    p.spec = hertz_preset();
    p.n_time_samples = samples;
    p.max_harmonic = K;
    return p;
}

double sup_over_period(const LoopField& Y, std::size_t n = 64) {
    double m = 0.0;
    for (double t : loop_sample_times(n)) m = std::max(m, pair_norm(Y.evaluate(t), Norm::linf));
    return m;
}

}  // namespace

TEST_CASE("leading Ansatz examples", "[ansatz]") {
    const Amplitude c(0, std::vector<cplx>(3, 0.4));
    const double eps = 0.1;
    const auto X0 = leading_ansatz(c, eps, 0.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK_THAT(X0.x[i], WithinRel(std::sqrt(2.0) * eps * 0.4, 1e-15));
        CHECK(X0.v[i] == 0.0);
    }
    const auto Xq = leading_ansatz(c, eps, std::numbers::pi / 2);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK_THAT(Xq.x[i], WithinAbs(0.0, 1e-16));
        CHECK_THAT(Xq.v[i], WithinRel(-std::sqrt(2.0) * eps * 0.4, 1e-15));
    }
    std::mt19937_64 rng(31);
    const auto a = random_disk(rng, 6);
    for (double t : {0.0, 0.9, 3.3})
        CHECK_THAT(pair_norm(leading_ansatz(a, eps, t), Norm::linf), WithinRel(std::sqrt(2.0) * eps * a.sup_norm(), 1e-14));
}

TEST_CASE("leading loop evaluates to the leading Ansatz at unit scale", "[ansatz]") {
    std::mt19937_64 rng(32);
    const auto a = random_disk(rng, 5);
    const auto Y0 = leading_loop(a, 4);
    for (double t : {0.0, 1.0, 5.5}) {
        const auto X = leading_ansatz(a, 1.0, t);
        const auto L = Y0.evaluate(t);
        CHECK(pair_norm(X - L, Norm::linf) < 1e-15);
    }
    CHECK(max_coefficient(leading_loop(a, 4) - loop_project_P(leading_loop(a, 4))) < 1e-15);
}

TEST_CASE("G_alpha of trivial amplitudes vanishes", "[ansatz]") {
    CHECK(max_coefficient(galpha_loop(Amplitude(0, 4), params(0.1))) == 0.0);
    const Amplitude c(0, std::vector<cplx>(4, cplx{0.3, -0.7}));
    CHECK(max_coefficient(galpha_loop(c, params(0.1))) == 0.0);
    CHECK(max_coefficient(corrector(c, params(0.1))) == 0.0);
    CHECK(max_coefficient(corrector(Amplitude(0, 4), params(0.1))) == 0.0);
}

TEST_CASE("an even contact law produces only odd harmonics", "[ansatz]") {
    std::mt19937_64 rng(33);
    const auto a = random_disk(rng, 6);
    auto p = params(0.1);
    p.spec.k_plus = 1.0;
    const auto G = galpha_loop(a, p);
    double odd = 0.0, even = 0.0;
    for (int k = 0; k <= p.max_harmonic; ++k) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(G.mode(k).second[i]));
        (k % 2 ? odd : even) = std::max(k % 2 ? odd : even, m);
    }
    CHECK(odd > 0.1);
    CHECK(even < 1e-14);
}

TEST_CASE("solvability: zeta of G_alpha(Y0) is the amplitude equation", "[ansatz][property]") {
    std::mt19937_64 rng(34);
    const auto p = params(0.1, 4096);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_disk(rng, 16);
        const auto z = loop_zeta(galpha_loop(a, p));
        const auto rhs = dps_rhs(a, p.spec);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK_THAT(z[i].real(), WithinAbs(rhs.a[i].real(), 1e-8));
            CHECK_THAT(z[i].imag(), WithinAbs(rhs.a[i].imag(), 1e-8));
        }
    }
}

TEST_CASE("the Hertz corrector carries a static compression offset", "[ansatz]") {
    const auto v = solve_stationary(1.5, Centering::site, 8);
    const auto Y1 = corrector(profile_amplitude(v, 1.0, 2), params(0.1));
    double dc = 0.0;
    for (const auto& c : Y1.mode(0).first) dc = std::max(dc, std::abs(c));
    CHECK(dc > 1e-3);
    CHECK(max_coefficient(loop_project_P(Y1)) < 1e-15);
}

TEST_CASE("corrector converges under time-resolution doubling", "[ansatz][property]") {
    std::mt19937_64 rng(35);
    const auto a = random_disk(rng, 8, 2);
    const auto coarse = corrector(a, params(0.1, 4096));
    const auto fine = corrector(a, params(0.1, 8192));
    CHECK(max_coefficient(coarse - fine) < 1e-8);
}

TEST_CASE("full Ansatz adds the corrector at order eps^alpha", "[ansatz]") {
    std::mt19937_64 rng(36);
    const auto a = random_disk(rng, 6, 2);
    const double eps = 0.05;
    const auto p = params(eps);
    const auto Y1 = corrector(a, p);
    const double bound = std::pow(eps, 1.5) * sup_over_period(Y1, 256);
    for (double t : {0.0, 0.4, 2.7}) {
        const auto diff = full_ansatz(a, t, p) - leading_ansatz(a, eps, t);
        CHECK(pair_norm(diff, Norm::linf) <= bound * (1 + 1e-12));
        CHECK(pair_norm(diff - detail::combine(std::pow(eps, 1.5), Y1.evaluate(t), 0.0, Y1.evaluate(t)), Norm::linf) < 1e-15);
    }
    const Amplitude c(0, std::vector<cplx>(4, 0.5));
    CHECK(pair_norm(full_ansatz(c, 1.3, p) - leading_ansatz(c, eps, 1.3), Norm::linf) == 0.0);
}

TEST_CASE("residual vanishes where the Ansatz is exact", "[ansatz]") {
    const auto p = params(0.1);
    for (double t : {0.0, 1.7}) {
        CHECK(pair_norm(residual(Amplitude(0, 5), t, p), Norm::linf) == 0.0);
        const Amplitude c(0, std::vector<cplx>(5, cplx{0.6, 0.2}));
        CHECK(pair_norm(residual(c, t, p), Norm::linf) < 1e-15);
    }
}

TEST_CASE("finite-difference residual converges to the chain-rule residual", "[ansatz]") {
    // V'' is only Holder-1/2, so central differences in tau converge like dtau^(1/2)
    const auto v = solve_stationary(1.5, Centering::site, 8);
    std::mt19937_64 rng(37);
    for (const auto& a : {profile_amplitude(v, 1.0, 4), random_disk(rng, 6, 4)}) {
        const auto p = params(0.1, 2048);
        const auto exact = residual(a, 0.3, p);
        const double scale = pair_norm(exact, Norm::linf);
        const double coarse = pair_norm(exact - residual_finite_difference(a, 0.3, p, 1e-2), Norm::linf);
        const double fine = pair_norm(exact - residual_finite_difference(a, 0.3, p, 1e-4), Norm::linf);
        INFO("residual " << scale << " coarse " << coarse << " fine " << fine);
        CHECK(fine < 0.2 * coarse);
        CHECK(fine < 1e-3 * scale);
    }
}

TEST_CASE("residual is far below the Ansatz itself", "[ansatz]") {
    // E = O(eps^(alpha + eta)) against an O(eps) state
    const auto v = solve_stationary(1.5, Centering::site, 8);
    const auto a = profile_amplitude(v, 1.0, 4);
    for (double eps : {0.1, 0.05}) {
        const auto p = params(eps);
        double e = 0.0;
        for (double t : loop_sample_times(16)) e = std::max(e, pair_norm(residual(a, t, p), Norm::linf));
        CHECK(e < 10 * std::pow(eps, 2.0));
        CHECK(e > 0.0);
    }
}

TEST_CASE("ansatz parameters are validated", "[ansatz]") {
    auto p = params(0.1, 64, 32);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = params(0.0);
    CHECK_THROWS_AS(galpha_loop(Amplitude(0, 2), p), std::invalid_argument);
    p = params(0.1);
    CHECK_THROWS_AS(corrector_tau_derivative(Amplitude(0, 2), Amplitude(0, 3), p), std::invalid_argument);
}
