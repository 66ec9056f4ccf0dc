#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlpencil/builtins.hpp"
#include "nlpencil/multiplicity.hpp"

namespace nlpencil {

/// Weight line Im lambda = a + 1 - l - 2m.
struct WeightLine {
    double a = 0.0;
    int l = 0;
    int m = 1;
    double beta = 0.0;

    static WeightLine make(double a, int l, int m) {
        require(std::isfinite(a), ErrorKind::InvalidArgument, "weight exponent must be finite");
        require(l >= 0, ErrorKind::InvalidArgument, "l must be >= 0");
        require(m >= 1, ErrorKind::InvalidArgument, "m must be >= 1");
        return WeightLine{a, l, m, a + 1.0 - l - 2.0 * m};
    }
};

struct Verdict {
    enum class Status { Fredholm, NotFredholm, Inconclusive };
    Status status = Status::Inconclusive;
    double beta = 0.0;
    std::vector<Complex> witnesses;
    std::vector<std::string> notes;
};

[[nodiscard]] inline std::string to_string(Verdict::Status s) {
    switch (s) {
        case Verdict::Status::Fredholm: return "fredholm";
        case Verdict::Status::NotFredholm: return "not_fredholm";
        case Verdict::Status::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// Fredholm test on a weight line: the line must carry no pencil eigenvalue.
[[nodiscard]] inline Verdict fredholm_verdict(const PencilFunction& f, const WeightLine& wl,
                                              double re_halfwidth, const NepOptions& opts = {}) {
    require(wl.m == f.problem().m, ErrorKind::InvalidArgument, "weight line m differs from the problem's m");
    Verdict v;
    v.beta = wl.beta;
    const LineVerdict lv = line_free(f, wl.beta, re_halfwidth, opts);
    switch (lv.status) {
        case LineVerdict::Status::Free:
            v.status = Verdict::Status::Fredholm;
            break;
        case LineVerdict::Status::EigenvalueFound:
            v.status = Verdict::Status::NotFredholm;
            v.witnesses.push_back(*lv.eigenvalue);
            if (f.problem().is_periodic()) v.notes.emplace_back("kernel trivial, image not closed");
            break;
        case LineVerdict::Status::Inconclusive:
            v.status = Verdict::Status::Inconclusive;
            v.notes.emplace_back("sigma_min sampling and winding count disagree");
            break;
    }
    v.notes.push_back("line truncated to |Re lambda| <= " + std::to_string(re_halfwidth));
    return v;
}

/// Pencil of the formally adjoint symbol (conjugated coefficients). Defined
/// for single-component full-circle pencils built from a second-order symbol.
[[nodiscard]] inline PencilProblem adjoint_pencil(const PencilProblem& p) {
    const bool full_circle = p.is_periodic() && p.components[0].lo == 0.0 &&
                             p.components[0].hi == 2.0 * kPi && p.m == 1;
    require(full_circle, ErrorKind::UnsupportedProblemClass,
            "adjoint pencils are defined for local full-circle problems only");
    const auto& op = p.components[0].op;
    require(op.symbol.has_value(), ErrorKind::UnsupportedProblemClass,
            "operator was not built from a symbol");
    require(op == polar_pencil_from_symbol(*op.symbol), ErrorKind::UnsupportedProblemClass,
            "operator coefficients differ from its symbol's polar pencil");
    const Symbol2 s = *op.symbol;
    return full_circle_problem(Symbol2{std::conj(s.a20), std::conj(s.a11), std::conj(s.a02)});
}

struct AdjointReport {
    std::vector<Complex> spectrum;          // of p in rect
    std::vector<Complex> adjoint_spectrum;  // of the adjoint in the mirrored rectangle
    std::vector<Complex> mapped;            // lambda -> conj(lambda) - 2i(m - 1) applied to spectrum
    Rectangle mirrored;
    double distance = 0.0;                  // Hausdorff distance between mapped and adjoint_spectrum
};

namespace detail {

inline double hausdorff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.empty() && b.empty()) return 0.0;
    if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
    const auto one_sided = [](const std::vector<Complex>& x, const std::vector<Complex>& y) {
        double worst = 0.0;
        for (const Complex u : x) {
            double best = std::numeric_limits<double>::infinity();
            for (const Complex w : y) best = std::min(best, std::abs(u - w));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

}  // namespace detail

/// Compares the spectrum of p with that of its adjoint under the reflection
/// lambda -> conj(lambda) - 2i(m - 1). The adjoint is discretized with
/// `adjoint_n_phi` nodes (0 reuses the grid size of f).
[[nodiscard]] inline AdjointReport adjoint_symmetry_check(const PencilFunction& f, const Rectangle& rect,
                                                          const NepOptions& opts = {},
                                                          int adjoint_n_phi = 0) {
    rect.validate();
    const PencilProblem adj = adjoint_pencil(f.problem());
    const double shift = 2.0 * (f.problem().m - 1);
    AdjointReport rep;
    rep.mirrored = Rectangle{rect.re_min, rect.re_max, -rect.im_max - shift, -rect.im_min - shift};
    const PencilFunction g(adj, adjoint_n_phi > 0 ? adjoint_n_phi : f.disc().n_phi());
    for (const auto& e : beyn_eigs(f, rect, opts)) rep.spectrum.push_back(e.lambda);
    for (const auto& e : beyn_eigs(g, rep.mirrored, opts)) rep.adjoint_spectrum.push_back(e.lambda);
    for (const Complex z : rep.spectrum) rep.mapped.push_back(std::conj(z) - Complex(0.0, shift));
    rep.distance = detail::hausdorff(rep.mapped, rep.adjoint_spectrum);
    return rep;
}

struct StripReport {
    double h2 = 0.0;
    double h1 = 0.0;
    double re_halfwidth = 0.0;   // the strip is truncated to |Re lambda| <= re_halfwidth
    bool upper_line_clean = true;
    double upper_edge = 0.0;     // top edge actually used for the search
    std::vector<EigenRecord> records;
};

inline constexpr double kDefaultReHalfwidth = 10.0;

/// All eigenvalues with h2 < Im lambda < h1 and |Re lambda| <= re_halfwidth,
/// with Jordan data. The lower line must be eigenvalue-free; an eigenvalue on
/// the upper line is excluded and reported through upper_line_clean.
[[nodiscard]] inline StripReport strip_scan(const PencilFunction& f, double h2, double h1,
                                            double re_halfwidth = kDefaultReHalfwidth,
                                            const NepOptions& opts = {}) {
    require(std::isfinite(h1) && std::isfinite(h2) && h2 < h1, ErrorKind::InvalidArgument,
            "strip needs h2 < h1");
    StripReport rep;
    rep.h2 = h2;
    rep.h1 = h1;
    rep.re_halfwidth = re_halfwidth;
    if (line_free(f, h2, re_halfwidth, opts).status != LineVerdict::Status::Free) {
        throw LineNotCleanError(h2);
    }
    rep.upper_line_clean = line_free(f, h1, re_halfwidth, opts).status == LineVerdict::Status::Free;
    rep.upper_edge = h1;
    if (!rep.upper_line_clean) {
        const double margin = std::min(0.05, 0.25 * (h1 - h2));
        rep.upper_edge = h1 - margin;
        // Eigenvalues between the shifted edge and the line would be missed.
        const Rectangle band{-re_halfwidth, re_halfwidth, h1 - margin, h1 - 0.2 * margin};
        int band_count = 0;
        try {
            band_count = count_in_rectangle(f, band, opts);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ContourTooClose) throw;
            band_count = 1;
        }
        if (band_count != 0) throw LineNotCleanError(h1);
    }
    const Rectangle rect{-re_halfwidth, re_halfwidth, h2, rep.upper_edge};
    for (const auto& e : beyn_eigs(f, rect, opts)) {
        EigenRecord rec = jordan_system(f, e.lambda, opts);
        rec.resolution_stable = e.resolution_stable;
        rep.records.push_back(std::move(rec));
    }
    return rep;
}

/// v(r, phi) = r^{i lambda} sum_{n=0}^{k} (i ln r)^n / n! psi^{k-n}(phi).
struct SingularFunction {
    Complex lambda;
    int chain = 0;                 // index q of the chain in its record
    int k = 0;                     // position in the chain
    std::vector<CVector> profiles;  // psi^0 .. psi^k, nodal
    GridLayout layout;
};

[[nodiscard]] inline std::vector<SingularFunction> singular_functions(const EigenRecord& rec) {
    std::vector<SingularFunction> out;
    for (std::size_t q = 0; q < rec.chains.size(); ++q) {
        const auto& c = rec.chains[q];
        for (int k = 0; k < c.rank(); ++k) {
            SingularFunction s;
            s.lambda = rec.lambda;
            s.chain = static_cast<int>(q);
            s.k = k;
            s.profiles.assign(c.vectors.begin(), c.vectors.begin() + k + 1);
            s.layout = rec.layout;
            out.push_back(std::move(s));
        }
    }
    return out;
}

/// Interpolated angular profile psi^level at phi on one component.
[[nodiscard]] inline Complex eval_profile(const SingularFunction& f, int level, double phi, int component) {
    const auto& piece = f.layout.pieces.at(component);
    const RVector row = cheb::interpolation_row(piece.nodes, piece.weights, phi);
    const CVector seg = f.profiles.at(level).segment(component * f.layout.n_phi, f.layout.n_phi);
    return row.cast<Complex>().dot(seg);
}

[[nodiscard]] inline Complex eval_singular(const SingularFunction& f, double r, double phi,
                                           std::optional<int> component = std::nullopt) {
    require(std::isfinite(r) && r > 0.0 && std::isfinite(phi), ErrorKind::OutOfDomain,
            "evaluation needs r > 0 and a finite angle");
    int comp = -1;
    if (component) {
        require(*component >= 0 && *component < static_cast<int>(f.layout.pieces.size()),
                ErrorKind::OutOfDomain, "component index out of range");
        comp = *component;
    } else {
        for (std::size_t j = 0; j < f.layout.pieces.size() && comp < 0; ++j) {
            if (phi >= f.layout.pieces[j].lo && phi <= f.layout.pieces[j].hi) comp = static_cast<int>(j);
        }
    }
    require(comp >= 0, ErrorKind::OutOfDomain, "angle outside every component interval");
    const auto& piece = f.layout.pieces[comp];
    const double tol = 1e-12 * (piece.hi - piece.lo);
    require(phi >= piece.lo - tol && phi <= piece.hi + tol, ErrorKind::OutOfDomain,
            "angle outside the component interval");
    const Complex log_term = kI * std::log(r);
    Complex sum{};
    Complex power{1.0, 0.0};
    double fact = 1.0;
    for (int n = 0; n <= f.k; ++n) {
        if (n > 0) {
            power *= log_term;
            fact *= n;
        }
        sum += power / fact * eval_profile(f, f.k - n, phi, comp);
    }
    return std::exp(kI * f.lambda * std::log(r)) * sum;
}

struct TransitionReport {
    double h_low = 0.0;
    double h_high = 0.0;
    bool transfer_holds = false;
    std::string verdict;
    StripReport strip;
    std::vector<SingularFunction> obstructions;
};

/// Regularity transfer between weights (a1, l1) and (a2, l2): the strip
/// between their lines either is eigenvalue-free or lists the singular terms
/// that obstruct the transfer.
[[nodiscard]] inline TransitionReport weight_transition_report(const PencilFunction& f, double a1, int l1,
                                                               double a2, int l2, int m,
                                                               double re_halfwidth = kDefaultReHalfwidth,
                                                               const NepOptions& opts = {}) {
    const WeightLine w1 = WeightLine::make(a1, l1, m), w2 = WeightLine::make(a2, l2, m);
    require(w1.beta != w2.beta, ErrorKind::InvalidArgument, "weight lines coincide");
    TransitionReport rep;
    rep.h_low = std::min(w1.beta, w2.beta);
    rep.h_high = std::max(w1.beta, w2.beta);
    rep.strip = strip_scan(f, rep.h_low, rep.h_high, re_halfwidth, opts);
    rep.transfer_holds = rep.strip.records.empty();
    if (rep.transfer_holds) {
        rep.verdict = "regularity transfer holds";
    } else {
        rep.verdict = "singular terms obstruct the transfer";
        for (const auto& rec : rep.strip.records)
            for (auto& s : singular_functions(rec)) rep.obstructions.push_back(std::move(s));
    }
    return rep;
}

}  // namespace nlpencil
