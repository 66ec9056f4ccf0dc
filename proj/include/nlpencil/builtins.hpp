#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "nlpencil/symbol.hpp"

namespace nlpencil {

using ParamMap = std::map<std::string, double>;

namespace detail {

inline double param(const ParamMap& params, const std::string& key) {
    auto it = params.find(key);
    require(it != params.end(), ErrorKind::InvalidArgument, "missing parameter '" + key + "'");
    require(std::isfinite(it->second), ErrorKind::InvalidArgument,
            "parameter '" + key + "' must be finite");
    return it->second;
}

inline void only_keys(const ParamMap& params, std::set<std::string> allowed) {
    for (const auto& [k, _] : params) {
        require(allowed.count(k) > 0, ErrorKind::InvalidArgument, "unexpected parameter '" + k + "'");
    }
}

inline BoundaryRow row(int component, Side side, std::vector<BCTerm> terms) {
    BoundaryRow r;
    r.component = component;
    r.side = side;
    r.row_order = 0;
    r.terms = std::move(terms);
    return r;
}

inline BCTerm eval_term(int source, double shift, double coeff) {
    return BCTerm{source, shift, 1.0, evaluation_op(coeff)};
}

inline Component laplace_component(double lo, double hi) {
    return Component{lo, hi, polar_pencil_from_symbol(-1.0, 0.0, -1.0)};
}

}  // namespace detail

/// -Delta on the full circle with periodic matching rows for any elliptic
/// second-order symbol.
[[nodiscard]] inline PencilProblem full_circle_problem(const Symbol2& symbol) {
    PencilProblem p;
    p.m = 1;
    p.components.push_back(Component{0.0, 2.0 * kPi, polar_pencil_from_symbol(symbol)});
    for (int j0 = 0; j0 < 2; ++j0) {
        BoundaryRow r;
        r.component = 0;
        r.side = j0 == 0 ? Side::Lower : Side::Upper;
        r.row_order = j0;
        r.kind = RowKind::PeriodicMatch;
        r.match_order = j0;
        p.rows.push_back(r);
    }
    return p;
}

[[nodiscard]] inline const std::vector<std::string>& builtin_names() {
    static const std::vector<std::string> names{"dirichlet_laplace", "periodic_laplace",
                                                "ex21_sector", "ex6_quarter", "ex11_orbit4"};
    return names;
}

/// Worked pencils shipped with the library. Parameter keys: d, alpha1,
/// alpha2, beta1, beta2 (radians for d).
[[nodiscard]] inline PencilProblem builtin_problem(const std::string& name, const ParamMap& params) {
    using detail::eval_term;
    using detail::param;
    using detail::row;
    PencilProblem p;
    p.m = 1;
    if (name == "dirichlet_laplace") {
        detail::only_keys(params, {"d"});
        const double d = param(params, "d");
        require(d > 0.0 && d <= 2.0 * kPi, ErrorKind::InvalidArgument, "d must lie in (0, 2pi]");
        p.components.push_back(detail::laplace_component(0.0, d));
        p.rows.push_back(row(0, Side::Lower, {eval_term(0, 0.0, 1.0)}));
        p.rows.push_back(row(0, Side::Upper, {eval_term(0, 0.0, 1.0)}));
    } else if (name == "periodic_laplace") {
        detail::only_keys(params, {});
        p = full_circle_problem(Symbol2{-1.0, 0.0, -1.0});
    } else if (name == "ex21_sector") {
        detail::only_keys(params, {"d", "alpha1", "alpha2"});
        const double d = param(params, "d");
        require(d > 0.0 && d < 2.0 * kPi, ErrorKind::InvalidArgument, "d must lie in (0, 2pi)");
        const double a1 = param(params, "alpha1");
        const double a2 = param(params, "alpha2");
        p.components.push_back(detail::laplace_component(0.0, d));
        p.rows.push_back(row(0, Side::Lower, {eval_term(0, 0.0, 1.0), eval_term(0, d / 2, -a1)}));
        p.rows.push_back(row(0, Side::Upper, {eval_term(0, 0.0, 1.0), eval_term(0, -d / 2, -a2)}));
    } else if (name == "ex6_quarter") {
        detail::only_keys(params, {"alpha1", "alpha2"});
        const double a1 = param(params, "alpha1");
        const double a2 = param(params, "alpha2");
        const double q = kPi / 4;
        p.components.push_back(detail::laplace_component(-q, q));
        p.rows.push_back(row(0, Side::Lower, {eval_term(0, 0.0, 1.0), eval_term(0, q, -a1)}));
        p.rows.push_back(row(0, Side::Upper, {eval_term(0, 0.0, 1.0), eval_term(0, -q, -a2)}));
    } else if (name == "ex11_orbit4") {
        detail::only_keys(params, {"alpha1", "alpha2", "beta1", "beta2"});
        const double a1 = param(params, "alpha1");
        const double a2 = param(params, "alpha2");
        const double b1 = param(params, "beta1");
        const double b2 = param(params, "beta2");
        const double q = kPi / 4;
        // v1, v2 live on {y2 > y1}, v3, v4 on {y2 < -y1}; the Dirichlet sides
        // are the rays y2 = +-y1 with y1 > 0, i.e. pi/4 and 7pi/4.
        p.components.push_back(detail::laplace_component(q, 5 * q));
        p.components.push_back(detail::laplace_component(q, 5 * q));
        p.components.push_back(detail::laplace_component(3 * q, 7 * q));
        p.components.push_back(detail::laplace_component(3 * q, 7 * q));
        p.rows.push_back(row(0, Side::Lower, {eval_term(0, 0.0, 1.0)}));
        p.rows.push_back(row(0, Side::Upper, {eval_term(0, 0.0, 1.0), eval_term(2, 0.0, a1),
                                              eval_term(3, 0.0, b1)}));
        p.rows.push_back(row(1, Side::Lower, {eval_term(1, 0.0, 1.0)}));
        p.rows.push_back(row(1, Side::Upper, {eval_term(1, 0.0, 1.0), eval_term(2, 0.0, b1),
                                              eval_term(3, 0.0, a1)}));
        p.rows.push_back(row(2, Side::Lower, {eval_term(2, 0.0, 1.0), eval_term(0, 0.0, a2),
                                              eval_term(1, 0.0, b2)}));
        p.rows.push_back(row(2, Side::Upper, {eval_term(2, 0.0, 1.0)}));
        p.rows.push_back(row(3, Side::Lower, {eval_term(3, 0.0, 1.0), eval_term(0, 0.0, b2),
                                              eval_term(1, 0.0, a2)}));
        p.rows.push_back(row(3, Side::Upper, {eval_term(3, 0.0, 1.0)}));
    } else {
        fail(ErrorKind::InvalidArgument, "unknown built-in problem '" + name + "'");
    }
    return p;
}

}  // namespace nlpencil
