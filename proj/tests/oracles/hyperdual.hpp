#pragma once

// Hyper-dual numbers with complex parts: x = a + b e1 + c e2 + d e1 e2 with
// e1^2 = e2^2 = 0. Seeding y1 with e1 and y2 with e2 (or the same variable
// with both) yields exact first and mixed second derivatives.

#include <complex>

namespace oracle {

using C = std::complex<double>;

struct HyperDual {
    C a, b, c, d;

    friend HyperDual operator+(const HyperDual& x, const HyperDual& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend HyperDual operator-(const HyperDual& x, const HyperDual& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend HyperDual operator*(const HyperDual& x, const HyperDual& y) {
        return {x.a * y.a, x.a * y.b + x.b * y.a, x.a * y.c + x.c * y.a,
                x.a * y.d + x.b * y.c + x.c * y.b + x.d * y.a};
    }
    friend HyperDual operator*(C s, const HyperDual& x) { return {s * x.a, s * x.b, s * x.c, s * x.d}; }
};

/// Lifts a scalar function with known first and second derivatives.
template <class F, class F1, class F2>
HyperDual lift(const HyperDual& x, F f, F1 f1, F2 f2) {
    const C v1 = f1(x.a);
    return {f(x.a), v1 * x.b, v1 * x.c, v1 * x.d + f2(x.a) * x.b * x.c};
}

inline HyperDual exp(const HyperDual& x) {
    const auto e = [](C t) { return std::exp(t); };
    return lift(x, e, e, e);
}

inline HyperDual log(const HyperDual& x) {
    return lift(
        x, [](C t) { return std::log(t); }, [](C t) { return 1.0 / t; },
        [](C t) { return -1.0 / (t * t); });
}

inline HyperDual inv(const HyperDual& x) {
    return lift(
        x, [](C t) { return 1.0 / t; }, [](C t) { return -1.0 / (t * t); },
        [](C t) { return 2.0 / (t * t * t); });
}

inline HyperDual sqrt(const HyperDual& x) {
    return lift(
        x, [](C t) { return std::sqrt(t); }, [](C t) { return 0.5 / std::sqrt(t); },
        [](C t) { return -0.25 / (t * std::sqrt(t)); });
}

/// Polar angle of (y1, y2): value from atan2, derivatives from the smooth
/// derivative of atan(y2 / y1), so y1 must be nonzero.
inline HyperDual angle(const HyperDual& y1, const HyperDual& y2) {
    const HyperDual t = y2 * inv(y1);
    const HyperDual at = lift(
        t, [](C s) { return std::atan(s); }, [](C s) { return 1.0 / (1.0 + s * s); },
        [](C s) { return -2.0 * s / ((1.0 + s * s) * (1.0 + s * s)); });
    return {C(std::atan2(y2.a.real(), y1.a.real())), at.b, at.c, at.d};
}

}  // namespace oracle
