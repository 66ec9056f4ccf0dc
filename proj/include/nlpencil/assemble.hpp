#pragma once

#include <cmath>
#include <vector>

#include "nlpencil/chebyshev.hpp"
#include "nlpencil/problem.hpp"

namespace nlpencil {

/// Collocation grid of one angular interval.
struct ComponentGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> nodes;    // ascending, endpoints included
    std::vector<double> weights;  // barycentric weights
    std::vector<RMatrix> diff;    // diff[k] = D^k, k = 0..2m (diff[0] = I)
};

/// Per-component Chebyshev-Lobatto collocation of a pencil problem. Unknowns
/// are ordered component-major, node-minor.
class Discretization {
public:
    Discretization() = default;

    /// Builds the grid for `p`; validates the problem and the principal
    /// angular coefficient at every node.
    static Discretization build(const PencilProblem& p, int n_phi) {
        require_valid(p);
        require(n_phi >= 2 * p.m + 2, ErrorKind::InvalidArgument,
                "n_phi must be at least 2m + 2");
        Discretization d;
        d.n_phi_ = n_phi;
        d.m_ = p.m;
        for (const auto& c : p.components) {
            ComponentGrid g;
            g.lo = c.lo;
            g.hi = c.hi;
            g.nodes = cheb::lobatto_nodes(n_phi, c.lo, c.hi);
            g.weights = cheb::lobatto_weights(n_phi);
            g.diff.push_back(RMatrix::Identity(n_phi, n_phi));
            for (auto& dk : cheb::differentiation_matrices(g.nodes, g.weights, 2 * p.m))
                g.diff.push_back(std::move(dk));
            const auto& principal = c.op.terms.at({2 * p.m, 0});
            for (double x : g.nodes) {
                require(std::abs(principal(x)) > 1e-14, ErrorKind::NonElliptic,
                        "principal angular coefficient vanishes at a collocation node");
            }
            d.grids_.push_back(std::move(g));
        }
        return d;
    }

    [[nodiscard]] int n_phi() const { return n_phi_; }
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int n_components() const { return static_cast<int>(grids_.size()); }
    [[nodiscard]] int size() const { return n_phi_ * n_components(); }
    [[nodiscard]] int offset(int component) const { return component * n_phi_; }
    [[nodiscard]] const ComponentGrid& grid(int component) const { return grids_.at(component); }
    [[nodiscard]] const std::vector<double>& nodes(int component) const {
        return grid(component).nodes;
    }
    [[nodiscard]] const RMatrix& diff(int component, int order) const {
        return grid(component).diff.at(order);
    }

    /// Barycentric interpolation row of `component` at `angle`.
    [[nodiscard]] RVector interp_row(int component, double angle) const {
        const auto& g = grid(component);
        const double tol = 1e-12 * (g.hi - g.lo);
        require(angle >= g.lo - tol && angle <= g.hi + tol, ErrorKind::OutOfDomain,
                "angle outside the component interval");
        return cheb::interpolation_row(g.nodes, g.weights, angle);
    }

    /// Throws DimensionMismatch unless this grid was built for a problem with
    /// the same shape as `p`.
    void check_compatible(const PencilProblem& p) const {
        bool ok = p.m == m_ && p.n_components() == n_components();
        for (int j = 0; ok && j < n_components(); ++j) {
            ok = p.components[j].lo == grids_[j].lo && p.components[j].hi == grids_[j].hi;
        }
        require(ok, ErrorKind::DimensionMismatch, "discretization was built for a different problem");
    }

private:
    int n_phi_ = 0;
    int m_ = 1;
    std::vector<ComponentGrid> grids_;
};

/// T(lambda) = sum_g exp(i lambda L_g) sum_p lambda^p M_{g,p}, where L_g = ln chi
/// and the factor chi^{-m_row} is folded into M. Group 0 has L = 0.
struct AssemblyPlan {
    struct Group {
        double log_chi = 0.0;
        std::vector<CMatrix> powers;  // powers[p] multiplies lambda^p
    };
    int size = 0;
    std::vector<Group> groups;
};

namespace detail {

inline AssemblyPlan::Group& plan_group(AssemblyPlan& plan, double log_chi, int max_power) {
    for (auto& g : plan.groups) {
        if (g.log_chi == log_chi) {
            while (static_cast<int>(g.powers.size()) <= max_power)
                g.powers.push_back(CMatrix::Zero(plan.size, plan.size));
            return g;
        }
    }
    AssemblyPlan::Group g;
    g.log_chi = log_chi;
    for (int q = 0; q <= max_power; ++q) g.powers.push_back(CMatrix::Zero(plan.size, plan.size));
    plan.groups.push_back(std::move(g));
    return plan.groups.back();
}

// Global row index that a boundary row replaces: lower-side rows take node
// rows 0..m-1 in order of appearance, upper-side rows take n-m..n-1.
inline std::vector<int> boundary_row_slots(const PencilProblem& p, const Discretization& d) {
    std::vector<int> slots(p.rows.size());
    std::vector<int> lower(p.n_components(), 0), upper(p.n_components(), 0);
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        const auto& row = p.rows[r];
        const int base = d.offset(row.component);
        if (row.side == Side::Lower) {
            slots[r] = base + lower[row.component]++;
        } else {
            slots[r] = base + d.n_phi() - p.m + upper[row.component]++;
        }
    }
    return slots;
}

}  // namespace detail

[[nodiscard]] inline AssemblyPlan make_plan(const PencilProblem& p, const Discretization& d) {
    d.check_compatible(p);
    AssemblyPlan plan;
    plan.size = d.size();
    const int n = d.n_phi();
    int max_power = 0;
    for (const auto& c : p.components) max_power = std::max(max_power, c.op.max_lambda_power());
    detail::plan_group(plan, 0.0, max_power);

    const auto slots = detail::boundary_row_slots(p, d);
    std::vector<bool> replaced(plan.size, false);
    for (int s : slots) replaced[s] = true;

    for (int j = 0; j < p.n_components(); ++j) {
        const auto& op = p.components[j].op;
        const auto& nodes = d.nodes(j);
        const int off = d.offset(j);
        for (const auto& [key, coeff] : op.terms) {
            const auto [k, pw] = key;
            auto& target = plan.groups[0].powers[pw];
            const RMatrix& dk = d.diff(j, k);
            for (int i = 0; i < n; ++i) {
                if (replaced[off + i]) continue;
                const Complex a = coeff(nodes[i]);
                if (a == Complex{}) continue;
                target.block(off + i, off, 1, n) += a * dk.row(i).cast<Complex>();
            }
        }
    }

    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        const auto& row = p.rows[r];
        const int g_row = slots[r];
        if (row.kind == RowKind::PeriodicMatch) {
            const RMatrix& dj = d.diff(row.component, row.match_order);
            const int off = d.offset(row.component);
            plan.groups[0].powers[0].block(g_row, off, 1, n) +=
                (dj.row(0) - dj.row(n - 1)).cast<Complex>();
            continue;
        }
        const double theta0 = p.row_angle(row);
        for (const auto& term : row.terms) {
            const double log_chi = std::log(term.chi);
            const double scale = std::exp(-row.row_order * log_chi);
            auto& group = detail::plan_group(plan, log_chi, term.op.max_lambda_power());
            const double theta = theta0 + term.shift;
            const RVector interp = d.interp_row(term.source, theta);
            const int off = d.offset(term.source);
            for (const auto& [key, coeff] : term.op.terms) {
                const auto [k, pw] = key;
                const Complex a = scale * coeff(theta);
                if (a == Complex{}) continue;
                const RVector rowvec = d.diff(term.source, k).transpose() * interp;
                group.powers[pw].block(g_row, off, 1, n) += a * rowvec.transpose().cast<Complex>();
            }
        }
    }
    return plan;
}

/// s-th lambda-derivative of the planned matrix function (s = 0 gives T).
[[nodiscard]] inline CMatrix assemble_derivative(const AssemblyPlan& plan, Complex lambda, int s) {
    require(s >= 0, ErrorKind::InvalidArgument, "derivative order must be >= 0");
    require_finite(lambda, "lambda");
    CMatrix out = CMatrix::Zero(plan.size, plan.size);
    for (const auto& g : plan.groups) {
        const Complex il = kI * g.log_chi;
        const Complex e = std::exp(il * lambda);
        // Leibniz: d^s [e^{i L lambda} P(lambda)] = sum_t C(s,t) (iL)^{s-t} e P^{(t)}
        double binom = 1.0;
        for (int t = 0; t <= s; ++t) {
            if (t > 0) binom = binom * (s - t + 1) / t;
            const Complex outer = binom * ipow(il, s - t) * e;
            if (outer == Complex{}) continue;
            for (int pw = t; pw < static_cast<int>(g.powers.size()); ++pw) {
                double falling = 1.0;
                for (int u = 0; u < t; ++u) falling *= (pw - u);
                const Complex c = outer * falling * ipow(lambda, pw - t);
                if (c == Complex{}) continue;
                out.noalias() += c * g.powers[pw];
            }
        }
    }
    return out;
}

[[nodiscard]] inline CMatrix assemble(const AssemblyPlan& plan, Complex lambda) {
    return assemble_derivative(plan, lambda, 0);
}

[[nodiscard]] inline CMatrix assemble(const PencilProblem& p, const Discretization& d, Complex lambda) {
    return assemble(make_plan(p, d), lambda);
}

[[nodiscard]] inline CMatrix assemble_derivative(const PencilProblem& p, const Discretization& d,
                                                 Complex lambda, int s) {
    require(s >= 1, ErrorKind::InvalidArgument, "derivative order must be >= 1");
    return assemble_derivative(make_plan(p, d), lambda, s);
}

}  // namespace nlpencil
