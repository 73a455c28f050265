#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cradle {

/// How a finite index window closes off.
///   free:     sites outside the window copy the edge value, so boundary gaps are zero
///   periodic: indices wrap around
enum class Boundary { free, periodic };

enum class Direction { plus, minus };

inline std::string_view to_string(Boundary b) { return b == Boundary::free ? "free" : "periodic"; }

inline Boundary parse_boundary(std::string_view s) {
    if (s == "free") return Boundary::free;
    if (s == "periodic") return Boundary::periodic;
    throw std::invalid_argument("unknown boundary '" + std::string(s) + "' (expected free|periodic)");
}

/// (delta+ x)_n = x_{n+1} - x_n, (delta- x)_n = x_n - x_{n-1}.
template <class T>
std::vector<T> difference(std::span<const T> x, Direction dir, Boundary boundary) {
    if (x.empty()) throw std::invalid_argument("difference: empty sequence");
    const std::size_t n = x.size();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (dir == Direction::plus) {
            const bool edge = i + 1 == n;
            const T next = edge ? (boundary == Boundary::periodic ? x[0] : x[i]) : x[i + 1];
            out[i] = next - x[i];
        } else {
            const bool edge = i == 0;
            const T prev = edge ? (boundary == Boundary::periodic ? x[n - 1] : x[i]) : x[i - 1];
            out[i] = x[i] - prev;
        }
    }
    return out;
}

template <class T>
std::vector<T> difference(const std::vector<T>& x, Direction dir, Boundary boundary) {
    return difference(std::span<const T>(x), dir, boundary);
}

/// w |w|^(alpha-1), the homogeneous odd power used by the (alpha+1)-Laplacian.
inline double signed_power(double w, double alpha) {
    return w == 0.0 ? 0.0 : w * std::pow(std::abs(w), alpha - 1.0);
}

inline std::complex<double> signed_power(std::complex<double> w, double alpha) {
    const double m = std::abs(w);
    return m == 0.0 ? std::complex<double>{} : w * std::pow(m, alpha - 1.0);
}

}  // namespace cradle
