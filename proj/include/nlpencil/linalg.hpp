#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "nlpencil/error.hpp"

namespace nlpencil {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

[[nodiscard]] inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

inline void require_finite(Complex z, const char* what) {
    require(is_finite(z), ErrorKind::InvalidArgument, std::string(what) + " must be finite");
}

/// z^k for k >= 0 by repeated multiplication (0^0 = 1).
[[nodiscard]] inline Complex ipow(Complex z, int k) {
    Complex r{1.0, 0.0};
    for (int i = 0; i < k; ++i) r *= z;
    return r;
}

/// Singular values in descending order.
[[nodiscard]] inline RVector singular_values(const CMatrix& a) {
    return Eigen::BDCSVD<CMatrix>(a).singularValues();
}

[[nodiscard]] inline double sigma_min(const CMatrix& a) {
    const RVector s = singular_values(a);
    return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index owns its
/// result slot, so callers reduce in index order and outputs do not depend on
/// the thread count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers =
        std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, threads)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// Gauss-Legendre nodes and weights on [-1, 1] (Newton on P_n from Chebyshev
/// initial guesses).
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

[[nodiscard]] inline GaussLegendre gauss_legendre(int n) {
    require(n >= 1, ErrorKind::InvalidArgument, "Gauss-Legendre order must be >= 1");
    GaussLegendre gl;
    gl.nodes.resize(n);
    gl.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        gl.nodes[i] = -x;
        gl.nodes[n - 1 - i] = x;
        gl.weights[i] = w;
        gl.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
    return gl;
}

}  // namespace nlpencil
