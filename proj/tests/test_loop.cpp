#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cradle/loop.hpp"

using namespace cradle;
using Catch::Matchers::WithinAbs;

namespace {

constexpr cplx I{0.0, 1.0};

// u e^{ikt} e_sigma + c.c. on a window of `n` sites, e_sigma = (1, sigma i)/sqrt2
LoopField pure(std::size_t n, int K, int k, int sigma, const std::vector<cplx>& u) {
    LoopField U(0, n, K);
    const double s = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx f = s * u[i], g = s * static_cast<double>(sigma) * I * u[i];
        U.mode(k).first[i] += f;
        U.mode(k).second[i] += g;
        U.mode(-k).first[i] += std::conj(f);
        U.mode(-k).second[i] += std::conj(g);
    }
    return U;
}

LoopField random_loop(std::mt19937_64& rng, std::size_t n, int K) {
    std::normal_distribution<double> z;
    LoopField U(-1, n, K);
    for (int k = 0; k <= K; ++k)
        for (std::size_t i = 0; i < n; ++i) {
            auto& m = U.mode(k);
            m.first[i] = k == 0 ? cplx{z(rng)} : cplx{z(rng), z(rng)};
            m.second[i] = k == 0 ? cplx{z(rng)} : cplx{z(rng), z(rng)};
            U.mode(-k).first[i] = std::conj(m.first[i]);
            U.mode(-k).second[i] = std::conj(m.second[i]);
        }
    return U;
}

double max_abs_diff(const LoopField& a, const LoopField& b) { return max_coefficient(a - b); }

}  // namespace

TEST_CASE("P examples", "[loop]") {
    const std::vector<cplx> u{{0.5, -1.0}, {2.0, 0.3}};
    LoopField c(0, 2, 4);
    c.mode(0).first = {1.0, -2.0};
    c.mode(0).second = {0.5, 0.5};
    CHECK(max_coefficient(loop_project_P(c)) == 0.0);

    const auto res = pure(2, 4, 1, 1, u);
    CHECK(max_abs_diff(loop_project_P(res), res) < 1e-15);
    CHECK(max_coefficient(loop_project_P(pure(2, 4, 2, 1, u))) == 0.0);
    // e^{it} e_{-1} is not resonant
    CHECK(max_coefficient(loop_project_P(pure(2, 4, 1, -1, u))) < 1e-15);

    const auto z = loop_zeta(res);
    for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(z[i] - u[i]) < 1e-15);
}

TEST_CASE("K examples", "[loop]") {
    const std::vector<cplx> u{{0.5, -1.0}, {2.0, 0.3}};
    std::vector<cplx> minus_iu(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) minus_iu[i] = -I * u[i];
    CHECK(max_abs_diff(loop_solve_K(pure(2, 4, 2, 1, u)), pure(2, 4, 2, 1, minus_iu)) < 1e-15);

    LoopField c(0, 2, 4);
    c.mode(0).first = {1.0, -2.0};
    c.mode(0).second = {0.5, 0.25};
    const auto y = loop_solve_K(c);
    CHECK(std::abs(y.mode(0).first[0] - 0.5) < 1e-15);
    CHECK(std::abs(y.mode(0).first[1] - 0.25) < 1e-15);
    CHECK(std::abs(y.mode(0).second[0] + 1.0) < 1e-15);
    CHECK(std::abs(y.mode(0).second[1] - 2.0) < 1e-15);

    CHECK(max_coefficient(loop_solve_K(pure(2, 4, 1, 1, u))) == 0.0);
}

TEST_CASE("K inverts every non-resonant pure harmonic", "[loop]") {
    const std::vector<cplx> u{{0.7, 0.2}};
    for (int k = 0; k <= 8; ++k)
        for (int sigma : {1, -1}) {
            INFO("k " << k << " sigma " << sigma);
            const auto Y = loop_solve_K(pure(1, 8, k, sigma, u));
            if (k == 1 && sigma == 1) {
                CHECK(max_coefficient(Y) == 0.0);
                continue;
            }
            const cplx factor = 1.0 / (I * static_cast<double>(k - sigma));
            CHECK(max_abs_diff(Y, pure(1, 8, k, sigma, {factor * u[0]})) < 1e-15);
        }
}

TEST_CASE("P is idempotent and annihilates the range of K", "[loop][property]") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const auto U = random_loop(rng, 5, 6);
        const auto P = loop_project_P(U);
        CHECK(max_abs_diff(loop_project_P(P), P) == 0.0);
        CHECK(max_coefficient(loop_project_P(loop_solve_K(U))) < 1e-15);
    }
}

TEST_CASE("K solves the defect equation harmonic by harmonic", "[loop][property]") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        const auto U = random_loop(rng, 5, 6);
        const auto lhs = loop_apply_dt_minus_J(loop_solve_K(U));
        const auto rhs = U - loop_project_P(U);
        CHECK(max_abs_diff(lhs, rhs) < 1e-12);
    }
}

TEST_CASE("loop operations preserve reality", "[loop][property]") {
    std::mt19937_64 rng(23);
    const auto U = random_loop(rng, 4, 5);
    CHECK(U.reality_defect() == 0.0);
    CHECK(loop_project_P(U).reality_defect() < 1e-15);
    CHECK(loop_solve_K(U).reality_defect() < 1e-15);
    CHECK(loop_apply_dt_minus_J(U).reality_defect() < 1e-15);
}

TEST_CASE("sampling and transforming recovers the coefficients", "[loop]") {
    std::mt19937_64 rng(24);
    const auto U = random_loop(rng, 3, 5);
    const auto V = loop_from_function([&](double t) { return U.evaluate(t); }, 64, 5);
    CHECK(max_abs_diff(U, V) < 1e-13);
    CHECK(V.aliasing_suspect);  // the random top harmonic is as large as the rest
    CHECK(V.reality_defect() == 0.0);

    auto W = U;
    for (auto& c : W.mode(5).first) c = 0.0;
    for (auto& c : W.mode(5).second) c = 0.0;
    for (auto& c : W.mode(-5).first) c = 0.0;
    for (auto& c : W.mode(-5).second) c = 0.0;
    CHECK_FALSE(loop_from_function([&](double t) { return W.evaluate(t); }, 64, 5).aliasing_suspect);

    CHECK_THROWS_AS(loop_from_function([&](double t) { return U.evaluate(t); }, 16, 5), std::invalid_argument);
}

TEST_CASE("time derivative agrees with finite differences", "[loop]") {
    std::mt19937_64 rng(25);
    const auto U = random_loop(rng, 3, 4);
    const double h = 1e-5;
    for (double t : {0.0, 1.1, 4.0}) {
        const auto d = U.evaluate_dt(t);
        const auto p = U.evaluate(t + h), m = U.evaluate(t - h);
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK_THAT(d.x[i], WithinAbs((p.x[i] - m.x[i]) / (2 * h), 1e-7));
            CHECK_THAT(d.v[i], WithinAbs((p.v[i] - m.v[i]) / (2 * h), 1e-7));
        }
    }
    // a resonant loop is 2pi-periodic and bounded by its coefficient sum
    const auto R = pure(1, 2, 1, 1, {cplx{1.0, 0.0}});
    for (double t : {0.0, 0.7, 2.0}) {
        const auto X = R.evaluate(t);
        CHECK_THAT(X.x[0], WithinAbs(std::sqrt(2.0) * std::cos(t), 1e-15));
        CHECK_THAT(X.v[0], WithinAbs(-std::sqrt(2.0) * std::sin(t), 1e-15));
        CHECK(std::abs(X.x[0]) <= R.coefficient_bound());
    }
}
