#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "nlpencil/assemble.hpp"

namespace nlpencil {

struct Rectangle {
    double re_min = 0.0;
    double re_max = 0.0;
    double im_min = 0.0;
    double im_max = 0.0;

    void validate() const {
        require(std::isfinite(re_min) && std::isfinite(re_max) && std::isfinite(im_min) &&
                    std::isfinite(im_max),
                ErrorKind::InvalidArgument, "rectangle bounds must be finite");
        require(re_min < re_max && im_min < im_max, ErrorKind::InvalidArgument,
                "rectangle needs re_min < re_max and im_min < im_max");
    }
    [[nodiscard]] Complex center() const { return {0.5 * (re_min + re_max), 0.5 * (im_min + im_max)}; }
    [[nodiscard]] double width() const { return re_max - re_min; }
    [[nodiscard]] double height() const { return im_max - im_min; }
    [[nodiscard]] bool contains(Complex z, double slack = 0.0) const {
        return z.real() >= re_min - slack && z.real() <= re_max + slack && z.imag() >= im_min - slack &&
               z.imag() <= im_max + slack;
    }
};

struct NepOptions {
    int quad_points = 128;     // Gauss-Legendre nodes per contour panel
    int probe_rank = 8;        // minimum probe columns for the moment method
    double rank_tol = 1e-8;
    double residual_tol = 1e-8;
    std::uint64_t seed = 0;
    int refine_steps = 20;
    int threads = 1;
    double basin_radius = 0.0;  // refine trust radius; 0 selects 0.25 max(1, |lambda0|)
    double contour_guard = 1e-6;
    bool check_resolution = true;

    void validate() const {
        require(quad_points > 0 && probe_rank > 0 && refine_steps > 0 && threads > 0,
                ErrorKind::InvalidArgument, "integer options must be positive");
        require(rank_tol > 0.0 && rank_tol < 1.0, ErrorKind::InvalidArgument, "rank_tol must lie in (0, 1)");
        require(residual_tol > 0.0 && basin_radius >= 0.0 && contour_guard >= 0.0,
                ErrorKind::InvalidArgument, "tolerances must be positive");
    }
};

struct EigenEstimate {
    Complex lambda;
    double sigma_min = 0.0;
    bool resolution_stable = false;
};

/// T(lambda) bound to one problem and grid.
class PencilFunction {
public:
    PencilFunction(const PencilProblem& p, const Discretization& d)
        : problem_(p), disc_(d), plan_(make_plan(p, d)) {}
    PencilFunction(const PencilProblem& p, int n_phi)
        : PencilFunction(p, Discretization::build(p, n_phi)) {}

    [[nodiscard]] CMatrix operator()(Complex lambda) const { return assemble(plan_, lambda); }
    [[nodiscard]] CMatrix derivative(Complex lambda, int s) const {
        return assemble_derivative(plan_, lambda, s);
    }
    [[nodiscard]] int size() const { return plan_.size; }
    [[nodiscard]] const PencilProblem& problem() const { return problem_; }
    [[nodiscard]] const Discretization& disc() const { return disc_; }

private:
    PencilProblem problem_;
    Discretization disc_;
    AssemblyPlan plan_;
};

namespace detail {

struct LogDerivative {
    Complex value;        // trace(T^{-1} T')
    double sigma_est = 0;  // upper estimate of sigma_min(T)
};

// Inverse power iteration on (T^H T)^{-1}; gives an upper bound for sigma_min.
inline double sigma_min_estimate(const Eigen::PartialPivLU<CMatrix>& lu, int n) {
    CVector x = CVector::Ones(n) / std::sqrt(static_cast<double>(n));
    for (int i = 0; i < n; i += 2) x(i) = Complex(0.0, 1.0) / std::sqrt(static_cast<double>(n));
    double growth = 0.0;
    for (int it = 0; it < 4; ++it) {
        const CVector y = lu.solve(x);
        const CVector z = lu.adjoint().solve(y);
        growth = z.norm();
        if (!std::isfinite(growth) || growth == 0.0) return 0.0;
        x = z / growth;
    }
    return 1.0 / std::sqrt(growth);
}

inline LogDerivative log_derivative(const PencilFunction& f, Complex z) {
    const Eigen::PartialPivLU<CMatrix> lu(f(z));
    LogDerivative out;
    out.value = lu.solve(f.derivative(z, 1)).trace();
    out.sigma_est = sigma_min_estimate(lu, f.size());
    if (!is_finite(out.value)) out.sigma_est = 0.0;
    return out;
}

// Gauss-Kronrod 7/15 on [-1, 1].
inline constexpr std::array<double, 8> kKronrodX{0.991455371120812639, 0.949107912342758525,
                                                 0.864864423359769073, 0.741531185599394440,
                                                 0.586087235467691130, 0.405845151377397167,
                                                 0.207784955007898468, 0.0};
inline constexpr std::array<double, 8> kKronrodW{0.022935322010529225, 0.063092092629978553,
                                                 0.104790010322250184, 0.140653259715525919,
                                                 0.169004726639267903, 0.190350578064785410,
                                                 0.204432940075298892, 0.209482141084727828};
inline constexpr std::array<double, 4> kGaussW{0.129484966168869693, 0.279705391489276668,
                                               0.381830050505118945, 0.417959183673469388};

struct Segment {
    Complex a, b;
};

// Adaptive Gauss-Kronrod integral of trace(T^{-1}T') along a segment. The
// subdivision depends only on function values, so it is thread-count invariant.
inline Complex integrate_log_derivative(const PencilFunction& f, Segment seg, double abs_tol,
                                        const NepOptions& opts) {
    std::vector<Segment> work{seg};
    Complex total{};
    int evaluations = 0;
    const int max_evaluations = 15 * 4000;
    while (!work.empty()) {
        const Segment s = work.back();
        work.pop_back();
        const Complex mid = 0.5 * (s.a + s.b), half = 0.5 * (s.b - s.a);
        std::array<Complex, 15> zs;
        for (int k = 0; k < 7; ++k) {
            zs[2 * k] = mid - half * kKronrodX[k];
            zs[2 * k + 1] = mid + half * kKronrodX[k];
        }
        zs[14] = mid;
        std::array<LogDerivative, 15> vals;
        parallel_for(15, opts.threads, [&](std::size_t i) { vals[i] = log_derivative(f, zs[i]); });
        evaluations += 15;
        Complex kron{}, gauss{};
        for (int k = 0; k < 7; ++k) {
            const Complex pair = vals[2 * k].value + vals[2 * k + 1].value;
            kron += kKronrodW[k] * pair;
            if (k % 2 == 1) gauss += kGaussW[k / 2] * pair;
        }
        kron += kKronrodW[7] * vals[14].value;
        gauss += kGaussW[3] * vals[14].value;
        for (const auto& v : vals) {
            require(v.sigma_est > opts.contour_guard, ErrorKind::ContourTooClose,
                    "contour passes within the guard distance of an eigenvalue");
        }
        kron *= half;
        gauss *= half;
        const double seg_len = std::abs(s.b - s.a);
        const double full_len = std::abs(seg.b - seg.a);
        if (std::abs(kron - gauss) <= abs_tol * std::max(seg_len / full_len, 1e-3) ||
            evaluations >= max_evaluations) {
            total += kron;
        } else {
            work.push_back({mid, s.b});
            work.push_back({s.a, mid});
        }
    }
    return total;
}

inline std::array<Segment, 4> rectangle_edges(const Rectangle& r) {
    const Complex z0(r.re_min, r.im_min), z1(r.re_max, r.im_min), z2(r.re_max, r.im_max),
        z3(r.re_min, r.im_max);
    return {Segment{z0, z1}, Segment{z1, z2}, Segment{z2, z3}, Segment{z3, z0}};
}

inline double winding_raw(const PencilFunction& f, const Rectangle& rect, const NepOptions& opts,
                          double* imag_part = nullptr) {
    Complex total{};
    for (const auto& e : rectangle_edges(rect))
        total += integrate_log_derivative(f, e, 1e-6, opts);
    total /= 2.0 * kPi * kI;
    if (imag_part) *imag_part = total.imag();
    return total.real();
}

inline int rounded_count(double raw, double imag) {
    const double k = std::round(raw);
    require(std::abs(raw - k) <= 0.1 && std::abs(imag) <= 0.1, ErrorKind::NonIntegerWinding,
            "winding number " + std::to_string(raw) + " is not close to an integer");
    return static_cast<int>(k);
}

}  // namespace detail

/// Algebraic eigenvalue count inside `rect` by the argument principle.
[[nodiscard]] inline int count_in_rectangle(const PencilFunction& f, const Rectangle& rect,
                                            const NepOptions& opts = {}) {
    rect.validate();
    opts.validate();
    double imag = 0.0;
    const double raw = detail::winding_raw(f, rect, opts, &imag);
    return detail::rounded_count(raw, imag);
}

[[nodiscard]] inline int count_in_rectangle(const PencilProblem& p, const Discretization& d,
                                            const Rectangle& rect, const NepOptions& opts = {}) {
    return count_in_rectangle(PencilFunction(p, d), rect, opts);
}

namespace detail {

inline double basin(const NepOptions& opts, Complex lambda0) {
    return opts.basin_radius > 0.0 ? opts.basin_radius : 0.25 * std::max(1.0, std::abs(lambda0));
}

// Multiplicity-aware centroid (1/k) * (1/2 pi i) oint z f(z) dz on a circle.
inline std::optional<std::pair<Complex, int>> circle_centroid(const PencilFunction& f, Complex c,
                                                              double radius, int threads) {
    const int n = 64;
    std::vector<Complex> vals(n);
    std::vector<bool> ok(n, true);
    parallel_for(n, threads, [&](std::size_t k) {
        const Complex z = c + radius * std::exp(kI * (2.0 * kPi * k / n));
        const Eigen::PartialPivLU<CMatrix> lu(f(z));
        vals[k] = lu.solve(f.derivative(z, 1)).trace();
        ok[k] = is_finite(vals[k]);
    });
    Complex m0{}, m1{};
    for (int k = 0; k < n; ++k) {
        if (!ok[k]) return std::nullopt;
        const Complex w = radius * std::exp(kI * (2.0 * kPi * k / n)) / static_cast<double>(n);
        m0 += w * vals[k];
        m1 += w * (radius * std::exp(kI * (2.0 * kPi * k / n))) * vals[k];
    }
    const double k = std::round(m0.real());
    if (k < 1.0 || std::abs(m0 - k) > 0.1) return std::nullopt;
    return std::make_pair(c + m1 / k, static_cast<int>(k));
}

}  // namespace detail

/// Newton iteration on 1 / trace(T^{-1} T') from lambda0, which converges
/// quadratically to zeros of det T of any order. Multiple zeros are polished
/// by a contour centroid.
[[nodiscard]] inline EigenEstimate refine(const PencilFunction& f, Complex lambda0,
                                          const NepOptions& opts = {}) {
    opts.validate();
    require_finite(lambda0, "lambda0");
    const double trust = detail::basin(opts, lambda0);
    Complex lambda = lambda0;
    bool converged = false;
    for (int it = 0; it < opts.refine_steps; ++it) {
        const Eigen::PartialPivLU<CMatrix> lu(f(lambda));
        const CMatrix x1 = lu.solve(f.derivative(lambda, 1));
        const CMatrix x2 = lu.solve(f.derivative(lambda, 2));
        const Complex g = x1.trace();
        const Complex gp = (x2 - x1 * x1).trace();
        if (!is_finite(g) || !is_finite(gp) || gp == Complex{}) {
            converged = !is_finite(g);  // exactly singular: lambda is an eigenvalue
            break;
        }
        const Complex step = g / gp;
        lambda += step;
        require(std::abs(lambda - lambda0) <= trust, ErrorKind::NoConvergence,
                "Newton left the basin around the starting point");
        if (std::abs(step) <= 1e-13 * std::max(1.0, std::abs(lambda))) {
            converged = true;
            break;
        }
    }
    // Cluster check: a multiple zero shows up as winding >= 2 on a small circle.
    const double radius = std::min(0.5 * trust, 0.05 * std::max(1.0, std::abs(lambda)));
    if (auto c = detail::circle_centroid(f, lambda, radius, opts.threads)) {
        if (c->second >= 2 || !converged) {
            lambda = c->first;
            converged = true;
        }
    }
    require(converged, ErrorKind::NoConvergence, "refinement did not converge");
    EigenEstimate est;
    est.lambda = lambda;
    est.sigma_min = sigma_min(f(lambda));
    require(est.sigma_min <= opts.residual_tol, ErrorKind::NoConvergence,
            "refined point has sigma_min " + std::to_string(est.sigma_min) + " above residual_tol");
    return est;
}

[[nodiscard]] inline EigenEstimate refine(const PencilProblem& p, const Discretization& d, Complex lambda0,
                                          const NepOptions& opts = {}) {
    return refine(PencilFunction(p, d), lambda0, opts);
}

namespace detail {

struct QuadNode {
    Complex z;
    Complex w;  // includes dz / (2 pi i)
};

// Gauss-Legendre panels of length at most the shorter rectangle side.
inline std::vector<QuadNode> contour_nodes(const Rectangle& rect, int per_panel) {
    const auto gl = gauss_legendre(per_panel);
    const double panel = std::min(rect.width(), rect.height());
    std::vector<QuadNode> out;
    for (const auto& e : rectangle_edges(rect)) {
        const int panels = std::max(1, static_cast<int>(std::ceil(std::abs(e.b - e.a) / panel - 1e-9)));
        for (int k = 0; k < panels; ++k) {
            const Complex a = e.a + (e.b - e.a) * (static_cast<double>(k) / panels);
            const Complex b = e.a + (e.b - e.a) * (static_cast<double>(k + 1) / panels);
            const Complex mid = 0.5 * (a + b), half = 0.5 * (b - a);
            for (int i = 0; i < per_panel; ++i) {
                out.push_back({mid + half * gl.nodes[i], gl.weights[i] * half / (2.0 * kPi * kI)});
            }
        }
    }
    return out;
}

inline CMatrix probe_matrix(int n, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CMatrix v(n, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < n; ++i) {
            const double r = std::sqrt(u(rng));
            const double t = 2.0 * kPi * u(rng);
            v(i, j) = std::polar(r, t);
        }
    }
    return v;
}

inline void sort_by_im_re(std::vector<EigenEstimate>& v) {
    std::sort(v.begin(), v.end(), [](const EigenEstimate& a, const EigenEstimate& b) {
        if (a.lambda.imag() != b.lambda.imag()) return a.lambda.imag() < b.lambda.imag();
        return a.lambda.real() < b.lambda.real();
    });
}

}  // namespace detail

/// Eigenvalues inside `rect` by the block-Hankel contour moment method,
/// refined and deduplicated, sorted by (Im, Re).
[[nodiscard]] inline std::vector<EigenEstimate> beyn_eigs(const PencilFunction& f, const Rectangle& rect,
                                                          const NepOptions& opts = {}) {
    opts.validate();
    const int count = count_in_rectangle(f, rect, opts);
    if (count == 0) return {};
    const int n = f.size();
    const int cols = std::min(n, std::max(opts.probe_rank, count + 2));
    const int moments = std::max(2, static_cast<int>(std::ceil(static_cast<double>(count) / cols)) + 1);
    const CMatrix v = detail::probe_matrix(n, cols, opts.seed);
    const Complex c = rect.center();
    const double rho = 0.5 * std::max(rect.width(), rect.height());

    const auto nodes = detail::contour_nodes(rect, opts.quad_points);
    std::vector<CMatrix> solved(nodes.size());
    std::vector<double> guard(nodes.size());
    parallel_for(nodes.size(), opts.threads, [&](std::size_t k) {
        const Eigen::PartialPivLU<CMatrix> lu(f(nodes[k].z));
        solved[k] = lu.solve(v);
        guard[k] = detail::sigma_min_estimate(lu, n);
    });
    for (double g : guard) {
        require(g > opts.contour_guard, ErrorKind::ContourTooClose,
                "contour passes within the guard distance of an eigenvalue");
    }
    std::vector<CMatrix> a(2 * moments, CMatrix::Zero(n, cols));
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const Complex zeta = (nodes[k].z - c) / rho;
        Complex pw = nodes[k].w;
        for (int j = 0; j < 2 * moments; ++j) {
            a[j] += pw * solved[k];
            pw *= zeta;
        }
    }
    CMatrix h0(n * moments, cols * moments), h1(n * moments, cols * moments);
    for (int i = 0; i < moments; ++i) {
        for (int j = 0; j < moments; ++j) {
            h0.block(i * n, j * cols, n, cols) = a[i + j];
            h1.block(i * n, j * cols, n, cols) = a[i + j + 1];
        }
    }
    const Eigen::BDCSVD<CMatrix> svd(h0, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RVector s = svd.singularValues();
    require(count <= s.size(), ErrorKind::RankAmbiguous, "more eigenvalues than probe directions");
    const double smax = s(0);
    const bool above = s(count - 1) >= opts.rank_tol * smax;
    const bool gap = count == s.size() || s(count) * 10.0 <= s(count - 1);
    require(above && gap, ErrorKind::RankAmbiguous,
            "moment matrix has no clear singular-value gap at the winding count");
    const CMatrix u0 = svd.matrixU().leftCols(count);
    const CMatrix w0 = svd.matrixV().leftCols(count);
    const RVector sinv = s.head(count).cwiseInverse();
    const CMatrix b = u0.adjoint() * h1 * w0 * sinv.asDiagonal();
    const Eigen::ComplexEigenSolver<CMatrix> es(b);
    std::vector<Complex> raw;
    for (int k = 0; k < count; ++k) raw.push_back(c + rho * es.eigenvalues()(k));
    std::sort(raw.begin(), raw.end(), [](Complex x, Complex y) {
        return x.imag() != y.imag() ? x.imag() < y.imag() : x.real() < y.real();
    });

    std::vector<EigenEstimate> found;
    const double slack = 1e-8 * std::max(1.0, std::abs(c) + rho);
    for (const Complex z : raw) {
        const double trust = 0.25 * std::max(1.0, std::abs(z));
        bool dup = false;
        for (const auto& e : found) dup = dup || std::abs(e.lambda - z) < 1e-4 * trust;
        if (dup) continue;
        EigenEstimate e = refine(f, z, opts);
        if (!rect.contains(e.lambda, slack)) continue;
        for (const auto& g : found) dup = dup || std::abs(g.lambda - e.lambda) <= 1e-6 * std::max(1.0, std::abs(e.lambda));
        if (!dup) found.push_back(e);
    }
    if (opts.check_resolution) {
        const PencilFunction fine(f.problem(), f.disc().n_phi() * 2);
        NepOptions o = opts;
        o.check_resolution = false;
        for (auto& e : found) {
            try {
                const EigenEstimate g = refine(fine, e.lambda, o);
                e.resolution_stable = std::abs(g.lambda - e.lambda) <= 10.0 * opts.residual_tol;
            } catch (const Error&) {
                e.resolution_stable = false;
            }
        }
    }
    detail::sort_by_im_re(found);
    return found;
}

[[nodiscard]] inline std::vector<EigenEstimate> beyn_eigs(const PencilProblem& p, const Discretization& d,
                                                          const Rectangle& rect, const NepOptions& opts = {}) {
    return beyn_eigs(PencilFunction(p, d), rect, opts);
}

struct LineVerdict {
    enum class Status { Free, EigenvalueFound, Inconclusive };
    Status status = Status::Inconclusive;
    std::optional<Complex> eigenvalue;
    int thin_count = 0;
    double min_sigma = 0.0;
    double min_sigma_at = 0.0;  // Re lambda of the smallest sample
};

[[nodiscard]] inline std::string to_string(LineVerdict::Status s) {
    switch (s) {
        case LineVerdict::Status::Free: return "free";
        case LineVerdict::Status::EigenvalueFound: return "eigenvalue_found";
        case LineVerdict::Status::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Checks the segment Im lambda = beta, |Re lambda| <= re_halfwidth by
/// sigma_min sampling and a thin-rectangle winding count.
[[nodiscard]] inline LineVerdict line_free(const PencilFunction& f, double beta, double re_halfwidth,
                                           const NepOptions& opts = {}) {
    opts.validate();
    require(std::isfinite(beta), ErrorKind::InvalidArgument, "beta must be finite");
    require(re_halfwidth > 0.0 && std::isfinite(re_halfwidth), ErrorKind::InvalidArgument,
            "re_halfwidth must be positive");
    LineVerdict out;
    const int samples = std::max(64, static_cast<int>(std::ceil(16.0 * re_halfwidth))) | 1;
    std::vector<double> sig(samples);
    parallel_for(samples, opts.threads, [&](std::size_t k) {
        const double x = -re_halfwidth + 2.0 * re_halfwidth * k / (samples - 1);
        sig[k] = sigma_min(f(Complex(x, beta)));
    });
    const auto it = std::min_element(sig.begin(), sig.end());
    const int kmin = static_cast<int>(it - sig.begin());
    out.min_sigma = *it;
    out.min_sigma_at = -re_halfwidth + 2.0 * re_halfwidth * kmin / (samples - 1);
    // Golden-section polish of the smallest sample along the line.
    {
        const double hstep = 2.0 * re_halfwidth / (samples - 1);
        double lo = std::max(-re_halfwidth, out.min_sigma_at - hstep);
        double hi = std::min(re_halfwidth, out.min_sigma_at + hstep);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        auto eval = [&](double x) { return sigma_min(f(Complex(x, beta))); };
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = eval(x1), f2 = eval(x2);
        for (int k = 0; k < 40; ++k) {
            if (f1 < f2) {
                hi = x2; x2 = x1; f2 = f1; x1 = hi - g * (hi - lo); f1 = eval(x1);
            } else {
                lo = x1; x1 = x2; f1 = f2; x2 = lo + g * (hi - lo); f2 = eval(x2);
            }
        }
        const double xm = f1 < f2 ? x1 : x2;
        const double fm = std::min(f1, f2);
        if (fm < out.min_sigma) {
            out.min_sigma = fm;
            out.min_sigma_at = xm;
        }
    }
    const bool sigma_clean = out.min_sigma > 10.0 * opts.residual_tol;

    const double eps = 1e-3;
    const Rectangle thin{-re_halfwidth, re_halfwidth, beta - eps, beta + eps};
    std::optional<int> count;
    try {
        count = count_in_rectangle(f, thin, opts);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::ContourTooClose && e.kind() != ErrorKind::NonIntegerWinding) throw;
    }
    out.thin_count = count.value_or(-1);
    if (count && *count == 0 && sigma_clean) {
        out.status = LineVerdict::Status::Free;
        return out;
    }
    if (count && *count == 0) return out;  // indicators disagree
    try {
        const EigenEstimate e = refine(f, Complex(out.min_sigma_at, beta), opts);
        if (std::abs(e.lambda.imag() - beta) <= eps && std::abs(e.lambda.real()) <= re_halfwidth + eps) {
            out.status = LineVerdict::Status::EigenvalueFound;
            out.eigenvalue = e.lambda;
        }
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoConvergence) throw;
    }
    return out;
}

[[nodiscard]] inline LineVerdict line_free(const PencilProblem& p, const Discretization& d, double beta,
                                           double re_halfwidth, const NepOptions& opts = {}) {
    return line_free(PencilFunction(p, d), beta, re_halfwidth, opts);
}

}  // namespace nlpencil
