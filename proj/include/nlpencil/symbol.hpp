#pragma once

#include <cmath>

#include "nlpencil/problem.hpp"

namespace nlpencil {

/// True when a20 x^2 + a11 x y + a02 y^2 vanishes for no real (x, y) != 0.
[[nodiscard]] inline bool is_elliptic(const Symbol2& s) {
    if (std::abs(s.a20) == 0.0 || std::abs(s.a02) == 0.0) return false;
    // Roots t = x/y of a20 t^2 + a11 t + a02; a real root is a characteristic direction.
    const Complex disc = std::sqrt(s.a11 * s.a11 - 4.0 * s.a20 * s.a02);
    for (const Complex t : {(-s.a11 + disc) / (2.0 * s.a20), (-s.a11 - disc) / (2.0 * s.a20)}) {
        if (std::abs(t.imag()) <= 1e-12 * std::max(1.0, std::abs(t))) return false;
    }
    return true;
}

namespace detail {

// c0 + c2 cos 2phi + s2 sin 2phi, collapsed to a constant when the
// harmonic part vanishes; returns nullopt for the zero function.
inline std::optional<CoeffFn> trig2(Complex c0, Complex c2, Complex s2) {
    const auto zero = [](Complex z) { return std::abs(z) == 0.0; };
    if (zero(c2) && zero(s2)) {
        if (zero(c0)) return std::nullopt;
        return CoeffFn(c0);
    }
    TrigPoly t;
    if (!zero(c0)) t.terms.push_back({0, c0, Complex{}});
    t.terms.push_back({2, c2, s2});
    return CoeffFn(std::move(t));
}

}  // namespace detail

/// Angular pencil of a20 d11 + a11 d12 + a02 d22 in polar coordinates:
/// A(r^{i lambda} Phi) = r^{i lambda - 2} (pencil(lambda) Phi).
[[nodiscard]] inline PencilOperator polar_pencil_from_symbol(Complex a20, Complex a11, Complex a02) {
    require_finite(a20, "a20");
    require_finite(a11, "a11");
    require_finite(a02, "a02");
    const Symbol2 sym{a20, a11, a02};
    require(is_elliptic(sym), ErrorKind::NonElliptic, "symbol vanishes on a real direction");

    // With nu = i lambda:
    //   d11 -> (nu(nu-1)c^2 + nu s^2) - 2(nu-1)cs d + s^2 d^2
    //   d22 -> (nu(nu-1)s^2 + nu c^2) + 2(nu-1)cs d + c^2 d^2
    //   d12 -> nu(nu-2)cs + (nu-1)(c^2-s^2) d - cs d^2
    const Complex sum = a20 + a02;
    const Complex diff = a02 - a20;
    PencilOperator op;
    op.order = 2;
    op.symbol = sym;
    const auto put = [&](int k, int p, std::optional<CoeffFn> c) {
        if (c) op.terms[{k, p}] = std::move(*c);
    };
    put(2, 0, detail::trig2(0.5 * sum, 0.5 * diff, -0.5 * a11));
    put(1, 1, detail::trig2(0.0, kI * a11, kI * diff));
    put(1, 0, detail::trig2(0.0, -a11, -diff));
    put(0, 2, detail::trig2(-0.5 * sum, 0.5 * diff, -0.5 * a11));
    put(0, 1, detail::trig2(0.0, kI * diff, -kI * a11));
    return op;
}

[[nodiscard]] inline PencilOperator polar_pencil_from_symbol(const Symbol2& s) {
    return polar_pencil_from_symbol(s.a20, s.a11, s.a02);
}

}  // namespace nlpencil
