#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "nlpencil/linalg.hpp"

namespace nlpencil::cheb {

/// Chebyshev points of the second kind (Gauss-Lobatto) on [a, b], ascending.
[[nodiscard]] inline std::vector<double> lobatto_nodes(int n, double a, double b) {
    require(n >= 2, ErrorKind::InvalidArgument, "need at least two collocation nodes");
    std::vector<double> x(n);
    const int deg = n - 1;
    for (int j = 0; j <= deg; ++j) {
        // sin form keeps the nodes symmetric to round-off
        const double t = -std::sin(kPi * (deg - 2.0 * j) / (2.0 * deg));
        x[j] = 0.5 * (a + b) + 0.5 * (b - a) * t;
    }
    x.front() = a;
    x.back() = b;
    return x;
}

/// Barycentric weights of the Lobatto points, ascending order:
/// w_j = (-1)^j delta_j with delta = 1/2 at the endpoints.
[[nodiscard]] inline std::vector<double> lobatto_weights(int n) {
    std::vector<double> w(n);
    for (int j = 0; j < n; ++j) {
        w[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    }
    return w;
}

/// Differentiation matrices D^(1..max_order) for the polynomial interpolant on
/// the given nodes. Off-diagonal entries follow the Weideman-Reddy recursion;
/// diagonals use the negative-sum identity so constants are annihilated.
[[nodiscard]] inline std::vector<RMatrix> differentiation_matrices(const std::vector<double>& x,
                                                                   const std::vector<double>& w,
                                                                   int max_order) {
    const int n = static_cast<int>(x.size());
    RMatrix z = RMatrix::Zero(n, n);
    RMatrix c = RMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            z(i, j) = 1.0 / (x[i] - x[j]);
            c(i, j) = w[j] / w[i];
        }
    }
    std::vector<RMatrix> out;
    RMatrix d = RMatrix::Identity(n, n);
    for (int ell = 1; ell <= max_order; ++ell) {
        RMatrix next(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                next(i, j) = ell * z(i, j) * (c(i, j) * d(i, i) - d(i, j));
            }
        }
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) s += next(i, j);
            next(i, i) = -s;
        }
        d = next;
        out.push_back(d);
    }
    return out;
}

/// Row r such that r . f(x) is the barycentric interpolant of f at `t`.
[[nodiscard]] inline RVector interpolation_row(const std::vector<double>& x,
                                               const std::vector<double>& w, double t) {
    const int n = static_cast<int>(x.size());
    RVector row = RVector::Zero(n);
    const double scale = std::abs(x.back() - x.front());
    for (int j = 0; j < n; ++j) {
        if (std::abs(t - x[j]) <= 1e-14 * scale) {
            row(j) = 1.0;
            return row;
        }
    }
    double denom = 0.0;
    for (int j = 0; j < n; ++j) {
        row(j) = w[j] / (t - x[j]);
        denom += row(j);
    }
    return row / denom;
}

}  // namespace nlpencil::cheb
