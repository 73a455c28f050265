#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "cradle/breather.hpp"
#include "cradle/lattice.hpp"

using namespace cradle;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

LatticeState unit_site(int lo, std::size_t n, int at, double x, double v) {
    LatticeState X(lo, n);
    X.x[X.index(at)] = x;
    X.v[X.index(at)] = v;
    return X;
}

// 64-site Hertz chain carrying the eps = 0.1 site breather
LatticeState breather_chain() {
    static const BreatherProfile v = solve_stationary(1.5, Centering::site, 16);
    LatticeState X = lattice_breather(v, 0.1, hertz_preset(), 0.0, 16);
    X.x.pop_back();  // 33 + 2 * 16 = 65 sites; the last one is zero
    X.v.pop_back();
    REQUIRE(X.size() == 64);
    return X;
}

}  // namespace

TEST_CASE("differences of a constant vanish", "[lattice]") {
    const std::vector<double> c(5, 2.5);
    for (auto dir : {Direction::plus, Direction::minus})
        for (auto b : {Boundary::free, Boundary::periodic})
            for (double d : difference(c, dir, b)) CHECK(d == 0.0);
}

TEST_CASE("forward difference of a unit site", "[lattice]") {
    // window n = -2..2, unit at n = 0
    const std::vector<double> x{0, 0, 1, 0, 0};
    const auto d = difference(x, Direction::plus, Boundary::free);
    CHECK(d == std::vector<double>{0, 1, -1, 0, 0});
    const auto m = difference(x, Direction::minus, Boundary::free);
    CHECK(m == std::vector<double>{0, 0, 1, -1, 0});
}

TEST_CASE("second difference is the discrete Laplacian", "[lattice]") {
    const std::vector<double> x{0.3, -1.2, 2.0, 0.7, -0.4, 1.1};
    const auto dd = difference(difference(x, Direction::plus, Boundary::free), Direction::minus, Boundary::free);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) CHECK_THAT(dd[i], WithinAbs(x[i + 1] - 2 * x[i] + x[i - 1], 1e-15));
}

TEST_CASE("periodic differences wrap and free edges have zero gap", "[lattice]") {
    const std::vector<std::complex<double>> a{{1, 1}, {0, 2}, {3, 0}};
    const auto p = difference(a, Direction::plus, Boundary::periodic);
    CHECK(p[2] == a[0] - a[2]);
    const auto f = difference(a, Direction::plus, Boundary::free);
    CHECK(f[2] == std::complex<double>{});
    const auto m = difference(a, Direction::minus, Boundary::periodic);
    CHECK(m[0] == a[0] - a[2]);
}

TEST_CASE("force of a single displaced site", "[lattice]") {
    // x = -1 at n = 0 on n = -2..2
    const std::vector<double> x{0, 0, -1, 0, 0};
    const auto f = lattice_force(x, hertz_preset(), Boundary::free);
    // only the bond (n-1, n) = (-1, 0) is compressed: V'(-1) = -1
    CHECK(f == std::vector<double>{0, -1, 1, 0, 0});
    CHECK(lattice_force(std::vector<double>(4, 0.0), hertz_preset(), Boundary::free) == std::vector<double>(4, 0.0));
}

TEST_CASE("force is translation invariant without on-site potential", "[lattice][property]") {
    PotentialSpec s;
    s.k_plus = 0.7;
    const std::vector<double> x{0.1, -0.4, 0.3, 0.25, -0.2};
    std::vector<double> y = x;
    for (auto& v : y) v += 1.75;
    for (auto b : {Boundary::free, Boundary::periodic}) {
        const auto fx = lattice_force(x, s, b);
        const auto fy = lattice_force(y, s, b);
        for (std::size_t i = 0; i < x.size(); ++i) CHECK_THAT(fy[i], WithinAbs(fx[i], 1e-14));
    }
}

TEST_CASE("right-hand side examples", "[lattice]") {
    const auto s = hertz_preset();
    const LatticeState zero(0, 4);
    const auto d0 = lattice_rhs(zero, s);
    for (std::size_t i = 0; i < 4; ++i) CHECK((d0.x[i] == 0.0 && d0.v[i] == 0.0));

    LatticeState X(0, 3);
    X.v = {0.5, -1.0, 2.0};
    const auto d1 = lattice_rhs(X, s);
    CHECK(d1.x == X.v);
    CHECK(d1.v == std::vector<double>(3, 0.0));

    const LatticeState single = unit_site(0, 1, 0, 0.8, 0.0);
    const auto d2 = lattice_rhs(single, s);
    CHECK(d2.x[0] == 0.0);
    CHECK(d2.v[0] == -0.8);
}

TEST_CASE("Hamiltonian examples", "[lattice]") {
    const auto s = hertz_preset();
    CHECK(hamiltonian(LatticeState(0, 5), s) == 0.0);
    CHECK_THAT(hamiltonian(unit_site(-2, 5, 0, 0.0, 0.6), s), WithinRel(0.18, 1e-15));
    // 1/2 from the site, V(-1) = 0.4 from the bond on its right, V(1) = 0 on its left
    CHECK_THAT(hamiltonian(unit_site(-2, 5, 0, 1.0, 0.0), s), WithinRel(0.9, 1e-15));
}

TEST_CASE("periodic Hamiltonian includes the wrap bond", "[lattice]") {
    const auto s = hertz_preset();
    LatticeState X(0, 3, Boundary::periodic);
    X.x = {0.0, 0.0, 1.0};
    // bonds x1-x0 = 0, x2-x1 = 1, wrap x0-x2 = -1
    CHECK_THAT(hamiltonian(X, s), WithinRel(0.5 + 0.4, 1e-15));
}

TEST_CASE("pair norm examples", "[lattice]") {
    CHECK(pair_norm(LatticeState(0, 3), Norm::linf) == 0.0);
    CHECK(pair_norm(unit_site(0, 3, 1, 3.0, 4.0), Norm::linf) == 5.0);
    LatticeState X(0, 2);
    X.x = {1.0, 0.0};
    X.v = {0.0, 1.0};
    CHECK_THAT(pair_norm(X, Norm::l2), WithinRel(std::sqrt(2.0), 1e-15));
    CHECK_THAT(pair_norm(X, Norm::l1), WithinRel(2.0, 1e-15));
}

TEST_CASE("an isolated site oscillates harmonically", "[lattice][integrate]") {
    const double x0 = 0.3, v0 = -0.2, tol = 1e-10;
    const auto traj = integrate_lattice(unit_site(0, 1, 0, x0, v0), hertz_preset(), 20.0, tol, 40);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        CHECK_THAT(traj.states[k].x[0], WithinAbs(x0 * std::cos(t) + v0 * std::sin(t), 100 * tol));
        CHECK_THAT(traj.states[k].v[0], WithinAbs(-x0 * std::sin(t) + v0 * std::cos(t), 100 * tol));
    }
}

TEST_CASE("energy drift is proportional to the tolerance", "[lattice][integrate][property]") {
    const LatticeState X0 = breather_chain();
    const auto s = hertz_preset();
    const double h0 = hamiltonian(X0, s);
    for (double tol : {1e-6, 1e-8, 1e-10}) {
        const auto traj = integrate_lattice(X0, s, 100.0, tol, 50);
        double drift = 0.0;
        for (const auto& X : traj.states) drift = std::max(drift, std::abs(hamiltonian(X, s) - h0) / h0);
        INFO("tol " << tol << " drift " << drift);
        CHECK(drift <= 10 * tol);
    }
}

TEST_CASE("reversing velocities retraces the trajectory", "[lattice][integrate][property]") {
    const double tol = 1e-10;
    const auto s = hertz_preset();
    const LatticeState X0 = breather_chain();
    auto X = integrate_lattice(X0, s, 30.0, tol, 1).states.back();
    for (auto& v : X.v) v = -v;
    auto back = integrate_lattice(X, s, 30.0, tol, 1).states.back();
    for (auto& v : back.v) v = -v;
    CHECK(pair_norm(back - X0, Norm::linf) <= 100 * tol);
}

TEST_CASE("tightening the tolerance moves the solution by less than 50 tol", "[lattice][integrate][property]") {
    const auto s = hertz_preset();
    const LatticeState X0 = breather_chain();
    for (double tol : {1e-7, 1e-9}) {
        const auto a = integrate_lattice(X0, s, 50.0, tol, 10);
        const auto b = integrate_lattice(X0, s, 50.0, tol / 100, 10);
        double diff = 0.0;
        for (std::size_t k = 0; k < a.states.size(); ++k)
            diff = std::max(diff, pair_norm(a.states[k] - b.states[k], Norm::linf));
        INFO("tol " << tol << " diff " << diff);
        CHECK(diff <= 50 * tol);
    }
}

TEST_CASE("norms are conserved while no contact engages", "[lattice][integrate][property]") {
    // a uniform state keeps every gap at zero
    LatticeState X0(0, 6);
    for (std::size_t i = 0; i < 6; ++i) {
        X0.x[i] = 0.4;
        X0.v[i] = -0.1;
    }
    const auto traj = integrate_lattice(X0, hertz_preset(), 25.0, 1e-10, 30);
    for (auto p : {Norm::l1, Norm::l2, Norm::linf})
        for (const auto& X : traj.states) CHECK_THAT(pair_norm(X, p), WithinRel(pair_norm(X0, p), 1e-8));
}

TEST_CASE("edge monitor flags mass near the window edge", "[lattice][integrate]") {
    const auto s = hertz_preset();
    const auto quiet = integrate_lattice(unit_site(-10, 21, 0, 0.05, 0.0), s, 5.0, 1e-9, 5);
    CHECK_FALSE(quiet.boundary_contaminated);
    CHECK(quiet.max_edge_ratio < 1e-10);
    const auto loud = integrate_lattice(unit_site(-10, 21, -9, 0.05, 0.0), s, 5.0, 1e-9, 5);
    CHECK(loud.boundary_contaminated);
    CHECK(loud.max_edge_ratio > 0.5);
}

TEST_CASE("sample times are honoured exactly", "[lattice][integrate]") {
    const std::vector<double> times{0.0, 0.1, 0.1, 2.5, 7.0};
    const auto traj = integrate_lattice(unit_site(0, 3, 1, 0.1, 0.0), hertz_preset(), times, 1e-9);
    CHECK(traj.times == times);
    CHECK(traj.states.front().x == std::vector<double>{0.0, 0.1, 0.0});
}

TEST_CASE("integration failures are reported", "[lattice][integrate]") {
    // phi' = -x|x|^(1.5) overpowers the restoring force: finite-time blow-up
    PotentialSpec s = hertz_preset();
    s.g = -1.0;
    s.gamma = 1.0;
    try {
        integrate_lattice(unit_site(0, 1, 0, 3.0, 0.0), s, 50.0, 1e-9, 1);
        FAIL("blow-up was not detected");
    } catch (const NumericalError& e) {
        CHECK(e.time() > 0.0);
        CHECK(e.time() < 50.0);
    }
    CHECK_THROWS_AS(integrate_lattice(unit_site(0, 1, 0, 0.1, 0.0), hertz_preset(), -1.0, 1e-9), std::invalid_argument);
    CHECK_THROWS_AS(integrate_lattice(unit_site(0, 1, 0, 0.1, 0.0), hertz_preset(), 1.0, 0.0), std::invalid_argument);
    LatticeState bad(0, 2);
    bad.x[1] = NAN;
    CHECK_THROWS_AS(integrate_lattice(bad, hertz_preset(), 1.0, 1e-9), std::invalid_argument);
}
