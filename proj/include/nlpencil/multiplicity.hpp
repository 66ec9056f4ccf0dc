#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/SVD>

#include "nlpencil/nep.hpp"

namespace nlpencil {

/// Angular grid data needed to turn nodal vectors back into functions.
struct GridLayout {
    struct Piece {
        double lo = 0.0;
        double hi = 0.0;
        std::vector<double> nodes;
        std::vector<double> weights;
    };
    int n_phi = 0;
    std::vector<Piece> pieces;

    static GridLayout of(const Discretization& d) {
        GridLayout g;
        g.n_phi = d.n_phi();
        for (int j = 0; j < d.n_components(); ++j) {
            const auto& c = d.grid(j);
            g.pieces.push_back({c.lo, c.hi, c.nodes, c.weights});
        }
        return g;
    }
};

struct JordanChain {
    std::vector<CVector> vectors;  // psi^0 .. psi^{p-1}, nodal values over all components

    [[nodiscard]] int rank() const { return static_cast<int>(vectors.size()); }
};

struct EigenRecord {
    Complex lambda;
    int geometric_mult = 0;
    std::vector<JordanChain> chains;  // ranks non-increasing
    int algebraic_mult = 0;
    double sigma_min = 0.0;
    bool resolution_stable = true;
    GridLayout layout;

    [[nodiscard]] std::vector<int> ranks() const {
        std::vector<int> r;
        for (const auto& c : chains) r.push_back(c.rank());
        return r;
    }
};

namespace detail {

struct KernelData {
    Eigen::BDCSVD<CMatrix> svd;
    int nullity = 0;
    double sigma_max = 0.0;
};

inline KernelData kernel_data(const CMatrix& t, double tol) {
    KernelData k{Eigen::BDCSVD<CMatrix>(t, Eigen::ComputeFullU | Eigen::ComputeFullV), 0, 0.0};
    const RVector& s = k.svd.singularValues();
    k.sigma_max = s.size() ? s(0) : 0.0;
    const double threshold = tol * std::max(1.0, k.sigma_max);
    require(s.size() > 0 && s(s.size() - 1) <= threshold, ErrorKind::NotAnEigenvalue,
            "sigma_min " + std::to_string(s.size() ? s(s.size() - 1) : 0.0) +
                " exceeds the kernel threshold");
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) <= threshold) ++k.nullity;
    return k;
}

}  // namespace detail

/// Orthonormal basis (columns) of the numerical kernel {sigma <= tol * sigma_max}.
[[nodiscard]] inline CMatrix nullspace(const PencilFunction& f, Complex lambda, double tol) {
    require(tol > 0.0 && tol < 1.0, ErrorKind::InvalidArgument, "tol must lie in (0, 1)");
    const auto k = detail::kernel_data(f(lambda), tol);
    return k.svd.matrixV().rightCols(k.nullity);
}

[[nodiscard]] inline std::vector<CVector> nullspace(const PencilProblem& p, const Discretization& d,
                                                    Complex lambda, double tol) {
    const CMatrix v = nullspace(PencilFunction(p, d), lambda, tol);
    std::vector<CVector> out;
    for (Eigen::Index j = 0; j < v.cols(); ++j) out.emplace_back(v.col(j));
    return out;
}

/// Canonical system of Jordan chains at an eigenvalue: level by level, psi^p
/// solves T psi^p = -sum_{s>=1} T^(s) psi^{p-s} / s!, and a chain stops when
/// the right-hand side leaves the range of T.
[[nodiscard]] inline EigenRecord jordan_system(const PencilFunction& f, Complex lambda,
                                               const NepOptions& opts = {}) {
    opts.validate();
    const double tol = opts.residual_tol;
    const CMatrix t0 = f(lambda);
    const auto ker = detail::kernel_data(t0, tol);
    const int n = f.size();
    const int q = ker.nullity;
    const CMatrix vn = ker.svd.matrixV().rightCols(q);
    const CMatrix y = ker.svd.matrixU().rightCols(q);
    const RVector& sv = ker.svd.singularValues();
    const int range_rank = n - q;

    // Minimum-norm solution of T x = b restricted to range(T).
    const auto pinv_solve = [&](const CVector& b) {
        const CVector c = ker.svd.matrixU().leftCols(range_rank).adjoint() * b;
        return CVector(ker.svd.matrixV().leftCols(range_rank) *
                       (c.array() / sv.head(range_rank).array().cast<Complex>()).matrix());
    };

    const int max_levels = std::max(2, std::min(32, n));
    std::vector<CMatrix> ts{t0};
    ts.reserve(max_levels + 2);
    std::vector<double> tnorm{t0.norm()};
    const auto deriv = [&](int s) -> const CMatrix& {
        while (static_cast<int>(ts.size()) <= s) {
            ts.push_back(f.derivative(lambda, static_cast<int>(ts.size())));
            tnorm.push_back(ts.back().norm());
        }
        return ts[s];
    };

    // Kernel freedom psi^{p-1} += V e shifts the solvability defect by S1 e.
    const CMatrix s1 = y.adjoint() * deriv(1) * vn;
    const Eigen::JacobiSVD<CMatrix> s1svd(s1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    int s1rank = 0;
    for (Eigen::Index i = 0; i < s1svd.singularValues().size(); ++i)
        if (s1svd.singularValues()(i) > tol * std::max(1.0, tnorm[1])) ++s1rank;
    const CMatrix qs = s1svd.matrixU().leftCols(s1rank);

    std::vector<JordanChain> active(q), finished;
    for (int j = 0; j < q; ++j) active[j].vectors.push_back(vn.col(j));

    for (int p = 1; p <= max_levels && !active.empty(); ++p) {
        const int k = static_cast<int>(active.size());
        CMatrix rhs(n, k);
        double scale = 0.0;
        for (int a = 0; a < k; ++a) {
            CVector r = CVector::Zero(n);
            double sc = 0.0;
            double fact = 1.0;
            for (int s = 1; s <= p; ++s) {
                fact *= s;
                const CVector& psi = active[a].vectors[p - s];
                r -= deriv(s) * psi / fact;
                sc += tnorm[s] * psi.norm() / fact;
            }
            rhs.col(a) = r;
            scale = std::max(scale, sc);
        }
        CMatrix defect = y.adjoint() * rhs;
        if (p >= 2 && s1rank > 0) defect -= qs * (qs.adjoint() * defect);
        const Eigen::JacobiSVD<CMatrix> dsvd(defect, Eigen::ComputeFullV);
        const RVector& ds = dsvd.singularValues();
        int blocked = 0;
        for (Eigen::Index i = 0; i < ds.size(); ++i)
            if (ds(i) > tol * (scale + 1.0)) ++blocked;
        // Right singular vectors: the first `blocked` columns cannot be extended.
        const CMatrix rot = dsvd.matrixV();
        std::vector<JordanChain> rotated(k);
        for (int j = 0; j < k; ++j) {
            for (int lvl = 0; lvl < p; ++lvl) {
                CVector v = CVector::Zero(n);
                for (int a = 0; a < k; ++a) v += rot(a, j) * active[a].vectors[lvl];
                rotated[j].vectors.push_back(v);
            }
        }
        const CMatrix rrhs = rhs * rot;
        std::vector<JordanChain> next;
        for (int j = 0; j < k; ++j) {
            if (j < blocked) {
                finished.push_back(std::move(rotated[j]));
                continue;
            }
            CVector r = rrhs.col(j);
            if (p >= 2 && s1rank > 0) {
                const CVector c = qs.adjoint() * (y.adjoint() * r);
                const CVector e = s1svd.matrixV().leftCols(s1rank) *
                                  (c.array() / s1svd.singularValues().head(s1rank).array().cast<Complex>())
                                      .matrix();
                rotated[j].vectors[p - 1] += vn * e;
                r -= deriv(1) * (vn * e);
            }
            rotated[j].vectors.push_back(pinv_solve(r));
            next.push_back(std::move(rotated[j]));
        }
        active = std::move(next);
    }
    for (auto& c : active) finished.push_back(std::move(c));
    std::stable_sort(finished.begin(), finished.end(),
                     [](const JordanChain& a, const JordanChain& b) { return a.rank() > b.rank(); });

    EigenRecord rec;
    rec.lambda = lambda;
    rec.geometric_mult = q;
    rec.chains = std::move(finished);
    for (const auto& c : rec.chains) rec.algebraic_mult += c.rank();
    rec.sigma_min = sv(n - 1);
    rec.layout = GridLayout::of(f.disc());
    return rec;
}

[[nodiscard]] inline EigenRecord jordan_system(const PencilProblem& p, const Discretization& d, Complex lambda,
                                               const NepOptions& opts = {}) {
    return jordan_system(PencilFunction(p, d), lambda, opts);
}

/// || sum_{s=0}^{p} T^(s) psi^{p-s} / s! || for each level p of a chain.
[[nodiscard]] inline std::vector<double> chain_residuals(const PencilFunction& f, Complex lambda,
                                                         const JordanChain& chain) {
    std::vector<double> out;
    for (int p = 0; p < chain.rank(); ++p) {
        CVector r = CVector::Zero(f.size());
        double fact = 1.0;
        for (int s = 0; s <= p; ++s) {
            if (s > 0) fact *= s;
            r += f.derivative(lambda, s) * chain.vectors[p - s] / fact;
        }
        out.push_back(r.norm());
    }
    return out;
}

}  // namespace nlpencil
