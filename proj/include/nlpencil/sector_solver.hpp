#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "nlpencil/spectral_report.hpp"

namespace nlpencil {

/// Nonlocal side condition u(side) - alpha u(side + shift) = 0, with the shift
/// measured from the side into the sector.
struct SideCondition {
    double alpha = 0.0;
    double shift = 0.0;
};

using PolarField = std::function<Complex(double r, double phi)>;
using AngularData = std::function<Complex(double phi)>;

/// -Delta u + c u = f on {0 < r < R, 0 < phi < d}, nonlocal rows on both
/// sides, Dirichlet data g on r = R.
struct SectorProblem2D {
    double d = kPi / 2;
    double R = 1.0;
    double r0 = 0.01;  // inner cutoff for exponent fits
    Complex c{};
    std::array<SideCondition, 2> sides{};  // [0]: phi = 0, [1]: phi = d
    PolarField rhs = [](double, double) { return Complex{}; };
    AngularData dirichlet = [](double) { return Complex{}; };

    void validate() const {
        require(std::isfinite(d) && d > 0.0 && d < 2.0 * kPi, ErrorKind::InvalidProblem, "d must lie in (0, 2pi)");
        require(std::isfinite(R) && R > 0.0, ErrorKind::InvalidProblem, "R must be > 0");
        require(std::isfinite(r0) && r0 > 0.0 && r0 < R, ErrorKind::InvalidProblem, "r0 must lie in (0, R)");
        require(std::isfinite(c.real()) && std::isfinite(c.imag()), ErrorKind::InvalidProblem, "c must be finite");
        for (const auto& s : sides) {
            require(std::isfinite(s.alpha), ErrorKind::InvalidProblem, "alpha must be finite");
            require(s.shift > 0.0 && s.shift < d, ErrorKind::InvalidProblem, "shift must point into the sector");
        }
        require(static_cast<bool>(rhs) && static_cast<bool>(dirichlet), ErrorKind::InvalidProblem,
                "rhs and Dirichlet data must be set");
    }
};

/// Radial levels r_j = R (j / n_r)^{1/rho_g}, j = 1..n_r (graded toward the
/// vertex for rho_g < 1) and uniform angles phi_k = k d / n_a, k = 0..n_a.
struct PolarGrid {
    int n_r = 0;
    int n_a = 0;
    double rho_g = 0.7;
    double R = 1.0;
    double d = kPi / 2;
    std::vector<double> r;
    std::vector<double> phi;

    static PolarGrid make(const SectorProblem2D& sp, int n_r, int n_a, double rho_g = 0.7) {
        require(n_r >= 4 && n_a >= 2, ErrorKind::InvalidArgument, "grid needs n_r >= 4 and n_a >= 2");
        require(rho_g > 0.0 && rho_g <= 1.0, ErrorKind::InvalidArgument, "rho_g must lie in (0, 1]");
        PolarGrid g;
        g.n_r = n_r;
        g.n_a = n_a;
        g.rho_g = rho_g;
        g.R = sp.R;
        g.d = sp.d;
        for (int j = 1; j <= n_r; ++j) g.r.push_back(sp.R * std::pow(static_cast<double>(j) / n_r, 1.0 / rho_g));
        g.r.back() = sp.R;
        for (int k = 0; k <= n_a; ++k) g.phi.push_back(sp.d * k / n_a);
        return g;
    }

    [[nodiscard]] int n_phi_nodes() const { return n_a + 1; }
    [[nodiscard]] int size() const { return n_r * (n_a + 1); }
    [[nodiscard]] int index(int j, int k) const { return j * (n_a + 1) + k; }
    [[nodiscard]] double dphi() const { return d / n_a; }

    /// Number of angular steps covered by a shift; throws when the shift is
    /// not a grid multiple.
    [[nodiscard]] int shift_steps(double shift) const {
        const double q = shift / dphi();
        const int s = static_cast<int>(std::lround(q));
        require(std::abs(q - s) <= 1e-9 * std::max(1.0, q) && s >= 1 && s <= n_a - 1,
                ErrorKind::GridIncompatible,
                "shift " + std::to_string(shift) + " is not a multiple of the angular step");
        return s;
    }

    /// Trapezoid weights in phi.
    [[nodiscard]] std::vector<double> angular_weights() const {
        std::vector<double> w(n_a + 1, dphi());
        w.front() *= 0.5;
        w.back() *= 0.5;
        return w;
    }

    /// Integral of r dr over the control interval of each ring.
    [[nodiscard]] std::vector<double> radial_weights() const {
        std::vector<double> w(n_r);
        for (int j = 0; j < n_r; ++j) {
            const double lo = j == 0 ? 0.0 : 0.5 * (r[j - 1] + r[j]);
            const double hi = j == n_r - 1 ? r[j] : 0.5 * (r[j] + r[j + 1]);
            w[j] = 0.5 * (hi * hi - lo * lo);
        }
        return w;
    }
};

struct SolveDiagnostics {
    double residual = 0.0;       // ||A u - b||_inf of the row-scaled system
    double rhs_norm = 0.0;       // ||b||_inf
    double condition_estimate = 0.0;
    long nonzeros = 0;
};

struct GridSolution {
    PolarGrid grid;
    CVector values;  // index(j, k)
    SolveDiagnostics diagnostics;

    [[nodiscard]] Complex at(int j, int k) const { return values(grid.index(j, k)); }

    /// Angular L2 norm of ring j (trapezoid in phi).
    [[nodiscard]] double ring_norm(int j) const {
        const auto w = grid.angular_weights();
        double s = 0.0;
        for (int k = 0; k <= grid.n_a; ++k) s += w[k] * std::norm(at(j, k));
        return std::sqrt(s);
    }
};

namespace detail {

using SparseC = Eigen::SparseMatrix<Complex>;

inline double one_norm(const SparseC& a) {
    double best = 0.0;
    for (int j = 0; j < a.outerSize(); ++j) {
        double s = 0.0;
        for (SparseC::InnerIterator it(a, j); it; ++it) s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

inline double inf_norm(const CVector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Hager-Higham estimate of ||A^{-1}||_1 from an existing factorization.
template <class Solver>
double inverse_one_norm_estimate(Solver& lu, int n) {
    CVector x = CVector::Constant(n, Complex(1.0 / n, 0.0));
    double est = 0.0;
    for (int it = 0; it < 5; ++it) {
        const CVector y = lu.solve(x);
        est = y.cwiseAbs().sum();
        CVector xi(n);
        for (int i = 0; i < n; ++i) xi(i) = std::abs(y(i)) > 0.0 ? y(i) / std::abs(y(i)) : Complex(1.0, 0.0);
        const CVector z = lu.adjoint().solve(xi);
        Eigen::Index jmax = 0;
        const double zmax = z.cwiseAbs().maxCoeff(&jmax);
        if (zmax <= std::real(z.dot(x))) break;
        x.setZero();
        x(jmax) = 1.0;
    }
    return est;
}

}  // namespace detail

/// Second-order polar finite differences for -Delta + c. The innermost ring
/// uses a zero-flux closure over [0, r_{3/2}], side rows hold the nonlocal
/// condition exactly on grid lines, and the outer ring carries Dirichlet data.
[[nodiscard]] inline GridSolution solve_sector(const SectorProblem2D& sp, const PolarGrid& grid) {
    sp.validate();
    require(grid.R == sp.R && grid.d == sp.d && static_cast<int>(grid.r.size()) == grid.n_r,
            ErrorKind::GridIncompatible, "grid was built for a different sector");
    const int s_lo = grid.shift_steps(sp.sides[0].shift);
    const int s_hi = grid.shift_steps(sp.sides[1].shift);
    const int n = grid.size();
    const int na = grid.n_a;
    const double dp = grid.dphi();
    const auto& r = grid.r;

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 5);
    CVector b = CVector::Zero(n);
    for (int j = 0; j < grid.n_r; ++j) {
        for (int k = 0; k <= na; ++k) {
            const int row = grid.index(j, k);
            if (j == grid.n_r - 1) {
                trip.emplace_back(row, row, 1.0);
                b(row) = sp.dirichlet(grid.phi[k]);
                continue;
            }
            if (k == 0 || k == na) {
                const auto& side = sp.sides[k == 0 ? 0 : 1];
                const int partner = k == 0 ? s_lo : na - s_hi;
                trip.emplace_back(row, row, 1.0);
                if (side.alpha != 0.0) trip.emplace_back(row, grid.index(j, partner), -side.alpha);
                continue;
            }
            const double rp = r[j + 1];
            const double rm = j == 0 ? 0.0 : r[j - 1];
            const double face_p = 0.5 * (r[j] + rp);
            const double face_m = j == 0 ? 0.0 : 0.5 * (r[j] + rm);
            const double vol = 0.5 * (face_p * face_p - face_m * face_m);
            const double cp = face_p / (rp - r[j]) / vol;
            const double cm = j == 0 ? 0.0 : face_m / (r[j] - rm) / vol;
            const double ca = 1.0 / (r[j] * r[j] * dp * dp);
            const Complex diag = cp + cm + 2.0 * ca + sp.c;
            // Rows are scaled by the Laplacian diagonal so the system is well balanced.
            const double scale = 1.0 / (cp + cm + 2.0 * ca);
            trip.emplace_back(row, row, diag * scale);
            trip.emplace_back(row, grid.index(j + 1, k), -cp * scale);
            if (j > 0) trip.emplace_back(row, grid.index(j - 1, k), -cm * scale);
            trip.emplace_back(row, grid.index(j, k + 1), -ca * scale);
            trip.emplace_back(row, grid.index(j, k - 1), -ca * scale);
            b(row) = sp.rhs(r[j], grid.phi[k]) * scale;
        }
    }
    detail::SparseC a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    a.makeCompressed();

    Eigen::SparseLU<detail::SparseC, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(a);
    lu.factorize(a);
    require(lu.info() == Eigen::Success, ErrorKind::SingularSystem,
            "sparse LU factorization failed: " + lu.lastErrorMessage());

    GridSolution sol;
    sol.grid = grid;
    sol.values = lu.solve(b);
    sol.diagnostics.nonzeros = a.nonZeros();
    sol.diagnostics.rhs_norm = detail::inf_norm(b);
    sol.diagnostics.residual = detail::inf_norm(a * sol.values - b);
    const double anorm = detail::one_norm(a);
    sol.diagnostics.condition_estimate = anorm * detail::inverse_one_norm_estimate(lu, n);
    const double bound = 1e-10 * (sol.diagnostics.rhs_norm + anorm * detail::inf_norm(sol.values));
    require(sol.values.allFinite() && sol.diagnostics.residual <= bound, ErrorKind::SingularSystem,
            "residual " + std::to_string(sol.diagnostics.residual) + " with condition estimate " +
                std::to_string(sol.diagnostics.condition_estimate));
    return sol;
}

/// Discrete L2 norm over the sector (ring control volumes times trapezoid in phi).
[[nodiscard]] inline double grid_l2_norm(const PolarGrid& g, const CVector& v) {
    const auto wr = g.radial_weights();
    const auto wa = g.angular_weights();
    double s = 0.0;
    for (int j = 0; j < g.n_r; ++j)
        for (int k = 0; k <= g.n_a; ++k) s += wr[j] * wa[k] * std::norm(v(g.index(j, k)));
    return std::sqrt(s);
}

[[nodiscard]] inline CVector sample(const PolarGrid& g, const PolarField& u) {
    CVector v(g.size());
    for (int j = 0; j < g.n_r; ++j)
        for (int k = 0; k <= g.n_a; ++k) v(g.index(j, k)) = u(g.r[j], g.phi[k]);
    return v;
}

struct ManufacturedParams {
    double d = kPi / 2;
    double alpha1 = 0.5;
    double alpha2 = 0.5;
    Complex c{};
    double R = 1.0;
    int n_phi = 48;  // angular collocation size for the singular profile
};

struct ManufacturedCase {
    std::string name;
    SectorProblem2D problem;
    PolarField exact;
    Complex lambda{};  // eigenvalue of the singular part, if any
};

namespace detail {

/// Coefficients (a, b, c) of w = a + b cos 2phi + c sin 2phi with
/// w(0) = alpha1 w(d/2) and w(d) = alpha2 w(d/2).
inline std::array<double, 3> compliant_profile(double d, double a1, double a2) {
    const auto basis = [](double phi) { return std::array<double, 3>{1.0, std::cos(2 * phi), std::sin(2 * phi)}; };
    const auto b0 = basis(0.0), bm = basis(d / 2), b1 = basis(d);
    std::array<double, 3> u{}, v{};
    for (int i = 0; i < 3; ++i) {
        u[i] = b0[i] - a1 * bm[i];
        v[i] = b1[i] - a2 * bm[i];
    }
    std::array<double, 3> w{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
    const double scale = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2])});
    require(scale > 1e-12, ErrorKind::InvalidArgument, "side rows admit no quadratic profile");
    for (double& x : w) x /= scale;
    return w;
}

}  // namespace detail

/// Manufactured solutions on the ex21-type sector (shifts d/2 on both sides).
/// smooth_compliant: u = r^2 w(phi) with w satisfying both side rows.
/// singular_leading: adds Re of the singular function of the eigenvalue
/// closest below the real axis.
[[nodiscard]] inline ManufacturedCase manufactured_case(const std::string& name, const ManufacturedParams& mp = {}) {
    ManufacturedCase mc;
    mc.name = name;
    SectorProblem2D& sp = mc.problem;
    sp.d = mp.d;
    sp.R = mp.R;
    sp.r0 = 0.01 * mp.R;
    sp.c = mp.c;
    sp.sides = {SideCondition{mp.alpha1, mp.d / 2}, SideCondition{mp.alpha2, mp.d / 2}};
    const auto w = detail::compliant_profile(mp.d, mp.alpha1, mp.alpha2);
    const auto wf = [w](double phi) { return w[0] + w[1] * std::cos(2 * phi) + w[2] * std::sin(2 * phi); };
    const Complex c = mp.c;
    if (name == "smooth_compliant") {
        mc.exact = [wf](double r, double phi) { return Complex(r * r * wf(phi), 0.0); };
        sp.rhs = [w, wf, c](double r, double phi) { return -4.0 * w[0] + c * (r * r * wf(phi)); };
    } else if (name == "singular_leading") {
        const PencilFunction f(builtin_problem("ex21_sector", {{"d", mp.d}, {"alpha1", mp.alpha1}, {"alpha2", mp.alpha2}}),
                               mp.n_phi);
        const auto eigs = beyn_eigs(f, Rectangle{-4.0, 4.0, -3.05, -0.02});
        require(!eigs.empty(), ErrorKind::NoConvergence, "no pencil eigenvalue with -3.05 < Im lambda < -0.02");
        const auto top = std::max_element(eigs.begin(), eigs.end(), [](const EigenEstimate& x, const EigenEstimate& y) {
            return x.lambda.imag() < y.lambda.imag() ||
                   (x.lambda.imag() == y.lambda.imag() && std::abs(x.lambda.real()) > std::abs(y.lambda.real()));
        });
        const EigenRecord rec = jordan_system(f, top->lambda);
        auto sf = std::make_shared<SingularFunction>(singular_functions(rec).front());
        // Recompute the profile from the row-equilibrated pencil: collocation rows
        // are O(n^4) against O(1) boundary rows, and equilibration keeps the
        // boundary rows accurate to round-off without changing the kernel.
        CMatrix t = f(rec.lambda);
        for (Eigen::Index i = 0; i < t.rows(); ++i) t.row(i) /= t.row(i).norm();
        const Eigen::BDCSVD<CMatrix> svd(t, Eigen::ComputeFullV);
        sf->profiles[0] = svd.matrixV().col(t.cols() - 1);
        // Rotate the profile so its largest nodal value is real and positive.
        Eigen::Index imax = 0;
        sf->profiles[0].cwiseAbs().maxCoeff(&imax);
        const Complex phase = std::conj(sf->profiles[0](imax)) / std::abs(sf->profiles[0](imax));
        for (auto& p : sf->profiles) p *= phase / sf->profiles[0].cwiseAbs().maxCoeff();
        mc.lambda = rec.lambda;
        mc.exact = [sf, wf](double r, double phi) {
            return Complex(std::real(eval_singular(*sf, r, phi, 0)) + r * r * wf(phi), 0.0);
        };
        sp.rhs = [sf, w, wf, c](double r, double phi) {
            return -4.0 * w[0] + c * (std::real(eval_singular(*sf, r, phi, 0)) + r * r * wf(phi));
        };
    } else {
        fail(ErrorKind::InvalidArgument, "unknown manufactured case '" + name + "'");
    }
    const PolarField exact = mc.exact;
    const double R = mp.R;
    sp.dirichlet = [exact, R](double phi) { return exact(R, phi); };
    return mc;
}

struct GridSpec {
    int n_r = 32;
    int n_a = 32;
    double rho_g = 0.7;
};

struct ExponentFit {
    double beta = 0.0;
    double r2 = 0.0;
    int rings = 0;
};

/// Least-squares slope of log ||u(r, .)|| against log r over the rings with
/// r_lo <= r <= r_hi.
[[nodiscard]] inline ExponentFit fit_exponent(const GridSolution& sol, double r_lo, double r_hi) {
    const auto& g = sol.grid;
    require(r_lo > 0.0 && r_lo < r_hi && r_hi <= g.R / 4 * (1 + 1e-12), ErrorKind::InvalidArgument,
            "fit window must satisfy 0 < r_lo < r_hi <= R/4");
    std::vector<double> xs, ys;
    for (int j = 0; j < g.n_r; ++j) {
        if (g.r[j] < r_lo || g.r[j] > r_hi) continue;
        const double nrm = sol.ring_norm(j);
        require(nrm > 0.0, ErrorKind::InvalidArgument, "ring norm vanishes inside the fit window");
        xs.push_back(std::log(g.r[j]));
        ys.push_back(std::log(nrm));
    }
    const int m = static_cast<int>(xs.size());
    require(m >= 4, ErrorKind::InvalidArgument, "fit window holds fewer than 4 rings");
    double mx = 0, my = 0;
    for (int i = 0; i < m; ++i) {
        mx += xs[i] / m;
        my += ys[i] / m;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (int i = 0; i < m; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    ExponentFit fit;
    fit.beta = sxy / sxx;
    double ss_res = 0.0;
    for (int i = 0; i < m; ++i) {
        const double e = ys[i] - (my + fit.beta * (xs[i] - mx));
        ss_res += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    fit.rings = m;
    return fit;
}

struct ConvergenceLevel {
    GridSpec grid;
    double l2_error = 0.0;
    double max_error = 0.0;
    std::optional<ExponentFit> exponent;
};

struct ConvergenceRecord {
    std::string name;
    std::vector<ConvergenceLevel> levels;
    std::optional<double> l2_order;   // empty when the errors vanish
    std::optional<double> max_order;
};

namespace detail {

inline std::optional<double> observed_order(const std::vector<double>& n, const std::vector<double>& err) {
    for (double e : err)
        if (!(e > 1e-300)) return std::nullopt;
    const int m = static_cast<int>(n.size());
    double mx = 0, my = 0;
    for (int i = 0; i < m; ++i) {
        mx += std::log2(n[i]) / m;
        my += std::log2(err[i]) / m;
    }
    double sxx = 0, sxy = 0;
    for (int i = 0; i < m; ++i) {
        sxx += (std::log2(n[i]) - mx) * (std::log2(n[i]) - mx);
        sxy += (std::log2(n[i]) - mx) * (std::log2(err[i]) - my);
    }
    return -sxy / sxx;
}

}  // namespace detail

/// Errors against the exact evaluator on successively doubled grids and the
/// least-squares order in log2. With `fit_window` set, the exponent fit is
/// recorded on every level.
[[nodiscard]] inline ConvergenceRecord convergence_study(const ManufacturedCase& mc, const std::vector<GridSpec>& grids,
                                                         std::optional<std::pair<double, double>> fit_window = {}) {
    require(grids.size() >= 3, ErrorKind::InvalidArgument, "convergence study needs at least 3 grids");
    for (std::size_t i = 1; i < grids.size(); ++i) {
        require(grids[i].n_r == 2 * grids[i - 1].n_r && grids[i].n_a == 2 * grids[i - 1].n_a,
                ErrorKind::InvalidArgument, "each grid must double the previous one in both directions");
    }
    ConvergenceRecord rec;
    rec.name = mc.name;
    std::vector<double> ns, l2, mx;
    for (const auto& gs : grids) {
        const PolarGrid g = PolarGrid::make(mc.problem, gs.n_r, gs.n_a, gs.rho_g);
        const GridSolution sol = solve_sector(mc.problem, g);
        const CVector err = sol.values - sample(g, mc.exact);
        ConvergenceLevel lvl;
        lvl.grid = gs;
        lvl.l2_error = grid_l2_norm(g, err);
        lvl.max_error = detail::inf_norm(err);
        if (fit_window) lvl.exponent = fit_exponent(sol, fit_window->first, fit_window->second);
        rec.levels.push_back(lvl);
        ns.push_back(gs.n_r);
        l2.push_back(lvl.l2_error);
        mx.push_back(lvl.max_error);
    }
    rec.l2_order = detail::observed_order(ns, l2);
    rec.max_order = detail::observed_order(ns, mx);
    return rec;
}

[[nodiscard]] inline ConvergenceRecord convergence_study(const std::string& name, const std::vector<GridSpec>& grids,
                                                         const ManufacturedParams& mp = {}) {
    return convergence_study(manufactured_case(name, mp), grids);
}

/// Smooth bump centred inside the sector, supported away from its boundary.
[[nodiscard]] inline PolarField bump_rhs(double d, double R) {
    const double x0 = 0.5 * R * std::cos(d / 2), y0 = 0.5 * R * std::sin(d / 2);
    const double rad = 0.2 * R * std::min(1.0, std::sin(std::min(d, kPi) / 2));
    return [=](double r, double phi) {
        const double dx = r * std::cos(phi) - x0, dy = r * std::sin(phi) - y0;
        const double t = (dx * dx + dy * dy) / (rad * rad);
        return Complex(t < 1.0 ? std::exp(-1.0 / (1.0 - t)) : 0.0, 0.0);
    };
}

struct ResolventScan {
    double h = 0.0;
    std::vector<double> p;
    std::vector<double> norms;  // ||u_p||_{L2}
    double slope = 0.0;         // least-squares slope of log ||u_p|| vs log p
};

/// Solves -Delta u + e^{ih} p^2 u = f with zero Dirichlet data for each p,
/// with f = base.rhs rescaled to unit discrete L2 norm.
[[nodiscard]] inline ResolventScan resolvent_scan(const SectorProblem2D& base, double h, const std::vector<double>& p_values,
                                                  const GridSpec& gs, int threads = 1) {
    require(std::abs(h) < kPi / 2, ErrorKind::InvalidArgument, "|h| must be < pi/2");
    require(p_values.size() >= 5, ErrorKind::InvalidArgument, "resolvent scan needs at least 5 p values");
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        require(p_values[i] > 0.0 && (i == 0 || p_values[i] > p_values[i - 1]), ErrorKind::InvalidArgument,
                "p values must be positive and increasing");
    }
    SectorProblem2D sp = base;
    sp.dirichlet = [](double) { return Complex{}; };
    const PolarGrid g = PolarGrid::make(sp, gs.n_r, gs.n_a, gs.rho_g);
    const double fn = grid_l2_norm(g, sample(g, base.rhs));
    require(fn > 0.0, ErrorKind::InvalidArgument, "right-hand side vanishes on the grid");
    const PolarField f = base.rhs;
    sp.rhs = [f, fn](double r, double phi) { return f(r, phi) / fn; };

    ResolventScan out;
    out.h = h;
    out.p = p_values;
    out.norms.assign(p_values.size(), 0.0);
    parallel_for(p_values.size(), threads, [&](std::size_t i) {
        SectorProblem2D spi = sp;
        spi.c = std::polar(p_values[i] * p_values[i], h);
        out.norms[i] = grid_l2_norm(g, solve_sector(spi, g).values);
    });
    out.slope = -detail::observed_order(p_values, out.norms).value_or(0.0);
    return out;
}

enum class NormFlavor { H, E };

/// Weighted Sobolev-type norm of grid values: sum over |alpha| <= k of
/// integral of r^{2(a-k+|alpha|)} |D^alpha u|^2 (H) or
/// r^{2a} (r^{2(|alpha|-k)} + 1) |D^alpha u|^2 (E). Trapezoid in phi,
/// midpoint cells in log r, optionally restricted to r_min <= r <= r_max.
[[nodiscard]] inline double weighted_norm(const PolarGrid& g, const CVector& u, double a, int k, NormFlavor flavor,
                                          double r_min = 0.0, double r_max = std::numeric_limits<double>::infinity()) {
    require(k >= 0 && k <= 2, ErrorKind::InvalidArgument, "k must be 0, 1 or 2");
    require(u.size() == g.size(), ErrorKind::DimensionMismatch, "values do not match the grid");
    const int nr = g.n_r, na = g.n_a;
    const auto& r = g.r;
    const auto& ph = g.phi;
    const auto at = [&](int j, int kk) { return u(g.index(j, kk)); };

    // Three-point derivative weights on a possibly non-uniform stencil.
    const auto d1 = [](double x0, double x1, double x2, double at_x) {
        return std::array<double, 3>{(2 * at_x - x1 - x2) / ((x0 - x1) * (x0 - x2)),
                                     (2 * at_x - x0 - x2) / ((x1 - x0) * (x1 - x2)),
                                     (2 * at_x - x0 - x1) / ((x2 - x0) * (x2 - x1))};
    };
    const auto d2 = [](double x0, double x1, double x2) {
        return std::array<double, 3>{2 / ((x0 - x1) * (x0 - x2)), 2 / ((x1 - x0) * (x1 - x2)),
                                     2 / ((x2 - x0) * (x2 - x1))};
    };
    const auto stencil = [](int i, int n) { return i == 0 ? 0 : (i == n - 1 ? n - 3 : i - 1); };

    const auto wa = g.angular_weights();
    double total = 0.0;
    for (int j = 0; j < nr; ++j) {
        // Log-r cell around r_j clipped to the window.
        const double lj = std::log(r[j]);
        const double lo_l = j == 0 ? lj - 0.5 * (std::log(r[1]) - lj) : 0.5 * (std::log(r[j - 1]) + lj);
        const double hi_l = j == nr - 1 ? lj : 0.5 * (lj + std::log(r[j + 1]));
        const double lo = std::max(lo_l, std::log(std::max(r_min, 1e-300)));
        const double hi = std::min(hi_l, std::log(r_max));
        if (hi <= lo) continue;
        const double cell = hi - lo;  // dx = r^2 dphi d(ln r)
        const int sr = stencil(j, nr);
        const auto wr1 = d1(r[sr], r[sr + 1], r[sr + 2], r[j]);
        const auto wr2 = d2(r[sr], r[sr + 1], r[sr + 2]);
        for (int kk = 0; kk <= na; ++kk) {
            const int sa = stencil(kk, na + 1);
            const auto wp1 = d1(ph[sa], ph[sa + 1], ph[sa + 2], ph[kk]);
            const auto wp2 = d2(ph[sa], ph[sa + 1], ph[sa + 2]);
            const Complex v = at(j, kk);
            std::array<double, 3> orders{std::norm(v), 0.0, 0.0};
            if (k >= 1) {
                Complex ur{}, up{};
                for (int q = 0; q < 3; ++q) {
                    ur += wr1[q] * at(sr + q, kk);
                    up += wp1[q] * at(j, sa + q);
                }
                orders[1] = std::norm(ur) + std::norm(up / r[j]);
                if (k >= 2) {
                    Complex urr{}, upp{}, urp{};
                    for (int q = 0; q < 3; ++q) {
                        urr += wr2[q] * at(sr + q, kk);
                        upp += wp2[q] * at(j, sa + q);
                        for (int s = 0; s < 3; ++s) urp += wr1[q] * wp1[s] * at(sr + q, sa + s);
                    }
                    // Hessian in the polar frame, rotated to Cartesian axes.
                    const Complex hrr = urr, hrp = urp / r[j] - up / (r[j] * r[j]);
                    const Complex hpp = upp / (r[j] * r[j]) + ur / r[j];
                    const double cs = std::cos(ph[kk]), sn = std::sin(ph[kk]);
                    const Complex h11 = cs * cs * hrr - 2 * cs * sn * hrp + sn * sn * hpp;
                    const Complex h22 = sn * sn * hrr + 2 * cs * sn * hrp + cs * cs * hpp;
                    const Complex h12 = cs * sn * (hrr - hpp) + (cs * cs - sn * sn) * hrp;
                    orders[2] = std::norm(h11) + std::norm(h12) + std::norm(h22);
                }
            }
            double integrand = 0.0;
            for (int s = 0; s <= k; ++s) {
                const double wgt = flavor == NormFlavor::H
                                       ? std::pow(r[j], 2.0 * (a - k + s))
                                       : std::pow(r[j], 2.0 * a) * (std::pow(r[j], 2.0 * (s - k)) + 1.0);
                integrand += wgt * orders[s];
            }
            total += integrand * r[j] * r[j] * wa[kk] * cell;
        }
    }
    return std::sqrt(total);
}

[[nodiscard]] inline double weighted_norm(const GridSolution& sol, double a, int k, NormFlavor flavor) {
    return weighted_norm(sol.grid, sol.values, a, k, flavor);
}

}  // namespace nlpencil
