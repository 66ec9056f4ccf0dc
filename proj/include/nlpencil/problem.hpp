#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nlpencil/linalg.hpp"

namespace nlpencil {

struct TrigTerm {
    int harmonic = 0;
    Complex cos_amp{};
    Complex sin_amp{};

    friend bool operator==(const TrigTerm&, const TrigTerm&) = default;
};

/// sum_k cos_amp_k cos(k phi) + sin_amp_k sin(k phi)
struct TrigPoly {
    std::vector<TrigTerm> terms;

    friend bool operator==(const TrigPoly&, const TrigPoly&) = default;
};

/// Angular coefficient a(phi) of a pencil term. Callbacks are library-only;
/// problem files carry constants and trigonometric polynomials.
class CoeffFn {
public:
    using Callback = std::function<Complex(double)>;

    CoeffFn() = default;
    CoeffFn(Complex c) : rep_(c) {}  // NOLINT(google-explicit-constructor)
    CoeffFn(double c) : rep_(Complex(c, 0.0)) {}  // NOLINT(google-explicit-constructor)
    explicit CoeffFn(TrigPoly t) : rep_(std::move(t)) {}
    explicit CoeffFn(Callback f) : rep_(std::move(f)) {}

    [[nodiscard]] Complex operator()(double phi) const {
        if (const auto* c = std::get_if<Complex>(&rep_)) return *c;
        if (const auto* t = std::get_if<TrigPoly>(&rep_)) {
            Complex s{};
            for (const auto& term : t->terms) {
                s += term.cos_amp * std::cos(term.harmonic * phi) +
                     term.sin_amp * std::sin(term.harmonic * phi);
            }
            return s;
        }
        return std::get<Callback>(rep_)(phi);
    }

    [[nodiscard]] bool is_constant() const { return std::holds_alternative<Complex>(rep_); }
    [[nodiscard]] bool is_trig() const { return std::holds_alternative<TrigPoly>(rep_); }
    [[nodiscard]] bool is_callback() const { return std::holds_alternative<Callback>(rep_); }
    [[nodiscard]] Complex constant() const { return std::get<Complex>(rep_); }
    [[nodiscard]] const TrigPoly& trig() const { return std::get<TrigPoly>(rep_); }

    [[nodiscard]] TrigPoly as_trig() const {
        if (is_trig()) return trig();
        return TrigPoly{{TrigTerm{0, constant(), Complex{}}}};
    }

    /// Returns a * this for constant and trig representations; wraps callbacks.
    [[nodiscard]] CoeffFn scaled(Complex a) const {
        if (is_constant()) return CoeffFn(a * constant());
        if (is_trig()) {
            TrigPoly t = trig();
            for (auto& term : t.terms) {
                term.cos_amp *= a;
                term.sin_amp *= a;
            }
            return CoeffFn(std::move(t));
        }
        auto f = std::get<Callback>(rep_);
        return CoeffFn(Callback([f, a](double phi) { return a * f(phi); }));
    }

    friend CoeffFn operator+(const CoeffFn& a, const CoeffFn& b) {
        if (a.is_constant() && b.is_constant()) return CoeffFn(a.constant() + b.constant());
        if (!a.is_callback() && !b.is_callback()) {
            TrigPoly sum = a.as_trig();
            for (const auto& t : b.as_trig().terms) {
                auto it = std::find_if(sum.terms.begin(), sum.terms.end(),
                                       [&](const TrigTerm& u) { return u.harmonic == t.harmonic; });
                if (it == sum.terms.end()) {
                    sum.terms.push_back(t);
                } else {
                    it->cos_amp += t.cos_amp;
                    it->sin_amp += t.sin_amp;
                }
            }
            return CoeffFn(std::move(sum));
        }
        return CoeffFn(Callback([a, b](double phi) { return a(phi) + b(phi); }));
    }

    /// Callbacks never compare equal.
    friend bool operator==(const CoeffFn& a, const CoeffFn& b) {
        if (a.is_callback() || b.is_callback()) return false;
        if (a.is_constant() && b.is_constant()) return a.constant() == b.constant();
        if (a.is_trig() && b.is_trig()) return a.trig() == b.trig();
        return false;
    }

private:
    std::variant<Complex, TrigPoly, Callback> rep_{Complex{}};
};

/// Second-order constant-coefficient symbol a20 d11 + a11 d12 + a02 d22.
struct Symbol2 {
    Complex a20{};
    Complex a11{};
    Complex a02{};

    friend bool operator==(const Symbol2&, const Symbol2&) = default;
};

/// Angular pencil sum a_{k,p}(phi) d_phi^k lambda^p. Derivative powers are
/// plain d/dphi (not -i d/dphi), so -v'' + lambda^2 v is {(2,0): -1, (0,2): 1}.
struct PencilOperator {
    using Key = std::pair<int, int>;  // (dphi power, lambda power)

    int order = 0;
    std::map<Key, CoeffFn> terms;
    std::optional<Symbol2> symbol;  // provenance when built from a 2D symbol

    [[nodiscard]] int max_lambda_power() const {
        int p = 0;
        for (const auto& [key, _] : terms) p = std::max(p, key.second);
        return p;
    }

    friend bool operator==(const PencilOperator&, const PencilOperator&) = default;
};

/// Order-zero evaluation operator c * w.
[[nodiscard]] inline PencilOperator evaluation_op(Complex c = 1.0) {
    PencilOperator op;
    op.order = 0;
    op.terms[{0, 0}] = CoeffFn(c);
    return op;
}

/// One summand of a boundary row: (op w_source)(d_row + shift), scaled by the
/// homothety factor exp((i lambda - row_order) ln chi).
struct BCTerm {
    int source = 0;
    double shift = 0.0;
    double chi = 1.0;
    PencilOperator op;

    friend bool operator==(const BCTerm&, const BCTerm&) = default;
};

enum class Side { Lower, Upper };
enum class RowKind { Standard, PeriodicMatch };

struct BoundaryRow {
    int component = 0;
    Side side = Side::Lower;
    int row_order = 0;
    std::vector<BCTerm> terms;
    RowKind kind = RowKind::Standard;
    int match_order = 0;  // derivative order j0 for periodic matching rows

    friend bool operator==(const BoundaryRow&, const BoundaryRow&) = default;
};

struct Component {
    double lo = 0.0;
    double hi = 0.0;
    PencilOperator op;

    friend bool operator==(const Component&, const Component&) = default;
};

struct PencilProblem {
    int m = 1;
    std::vector<Component> components;
    std::vector<BoundaryRow> rows;

    [[nodiscard]] int n_components() const { return static_cast<int>(components.size()); }

    [[nodiscard]] double row_angle(const BoundaryRow& row) const {
        const auto& c = components.at(row.component);
        return row.side == Side::Lower ? c.lo : c.hi;
    }

    /// Single component closed on itself by matching rows.
    [[nodiscard]] bool is_periodic() const {
        if (components.size() != 1 || rows.empty()) return false;
        for (const auto& r : rows)
            if (r.kind != RowKind::PeriodicMatch) return false;
        return true;
    }

    friend bool operator==(const PencilProblem&, const PencilProblem&) = default;
};

struct Diagnostic {
    std::string invariant;
    std::string location;

    [[nodiscard]] std::string str() const { return invariant + " (" + location + ")"; }
};

namespace detail {

inline std::string row_loc(std::size_t r) { return "row " + std::to_string(r); }

inline void check_operator(const PencilOperator& op, int expected_order, const std::string& where,
                           std::vector<Diagnostic>& out) {
    if (op.order != expected_order) {
        out.push_back({"operator order mismatch", where});
    }
    for (const auto& [key, coeff] : op.terms) {
        if (key.first < 0 || key.second < 0 || key.first + key.second > op.order) {
            out.push_back({"term exceeds operator order", where});
        }
        if (coeff.is_constant() && !is_finite(coeff.constant())) {
            out.push_back({"coefficient not finite", where});
        }
        if (coeff.is_trig()) {
            std::set<int> seen;
            for (const auto& t : coeff.trig().terms) {
                if (t.harmonic < 0 || !seen.insert(t.harmonic).second) {
                    out.push_back({"trig harmonics must be distinct and nonnegative", where});
                    break;
                }
                if (!is_finite(t.cos_amp) || !is_finite(t.sin_amp)) {
                    out.push_back({"coefficient not finite", where});
                    break;
                }
            }
        }
    }
}

}  // namespace detail

/// Checks every structural invariant of a pencil problem. Empty result means
/// the problem is valid.
[[nodiscard]] inline std::vector<Diagnostic> validate_problem(const PencilProblem& p) {
    std::vector<Diagnostic> out;
    if (p.m < 1) out.push_back({"m must be >= 1", "problem"});
    if (p.components.empty()) {
        out.push_back({"no components", "problem"});
        return out;
    }
    const int n = p.n_components();
    for (int j = 0; j < n; ++j) {
        const auto& c = p.components[j];
        const std::string where = "component " + std::to_string(j);
        if (!(std::isfinite(c.lo) && std::isfinite(c.hi) && c.lo < c.hi)) {
            out.push_back({"interval must satisfy d1 < d2", where});
            continue;
        }
        detail::check_operator(c.op, 2 * p.m, where, out);
        auto principal = c.op.terms.find({2 * p.m, 0});
        if (principal == c.op.terms.end()) {
            out.push_back({"principal angular coefficient missing", where});
        } else {
            const int samples = 256;
            for (int s = 0; s <= samples; ++s) {
                const double phi = c.lo + (c.hi - c.lo) * s / samples;
                if (std::abs(principal->second(phi)) < 1e-14) {
                    out.push_back({"principal angular coefficient vanishes", where});
                    break;
                }
            }
        }
    }

    if (static_cast<int>(p.rows.size()) != 2 * p.m * n) {
        out.push_back({"row count mismatch", "expected " + std::to_string(2 * p.m * n) + ", got " +
                                                 std::to_string(p.rows.size())});
    } else {
        std::vector<int> lower(n, 0), upper(n, 0);
        for (const auto& r : p.rows) {
            if (r.component < 0 || r.component >= n) continue;
            (r.side == Side::Lower ? lower : upper)[r.component]++;
        }
        for (int j = 0; j < n; ++j) {
            if (lower[j] != p.m || upper[j] != p.m) {
                out.push_back({"each side needs exactly m rows", "component " + std::to_string(j)});
            }
        }
    }

    std::set<int> match_orders;
    for (std::size_t r = 0; r < p.rows.size(); ++r) {
        const auto& row = p.rows[r];
        const std::string where = detail::row_loc(r);
        if (row.component < 0 || row.component >= n) {
            out.push_back({"row component index out of range", where});
            continue;
        }
        if (row.kind == RowKind::PeriodicMatch) {
            if (n != 1) out.push_back({"periodic matching rows need a single component", where});
            if (row.match_order < 0 || row.match_order >= 2 * p.m ||
                !match_orders.insert(row.match_order).second) {
                out.push_back({"periodic matching orders must be distinct in [0, 2m)", where});
            }
            continue;
        }
        if (row.row_order < 0 || row.row_order >= 2 * p.m) {
            out.push_back({"row order must be < 2m", where});
        }
        if (row.terms.empty()) {
            out.push_back({"boundary row has no terms", where});
            continue;
        }
        const double base = p.row_angle(row);
        for (std::size_t t = 0; t < row.terms.size(); ++t) {
            const auto& term = row.terms[t];
            const std::string tw = where + ", term " + std::to_string(t);
            if (term.source < 0 || term.source >= n) {
                out.push_back({"term source index out of range", tw});
                continue;
            }
            if (!(std::isfinite(term.chi) && term.chi > 0.0)) {
                out.push_back({"chi must be > 0", tw});
            }
            if (!std::isfinite(term.shift)) {
                out.push_back({"shift must be finite", tw});
                continue;
            }
            detail::check_operator(term.op, row.row_order, tw, out);
            const bool local = term.source == row.component && term.shift == 0.0;
            if (local) {
                if (term.chi != 1.0) out.push_back({"local term must have chi = 1", tw});
                continue;
            }
            const auto& src = p.components[term.source];
            const double angle = base + term.shift;
            if (!(src.lo < angle && angle < src.hi)) {
                out.push_back({"shift angle not strictly interior", tw});
            }
        }
    }
    if (!match_orders.empty() && static_cast<int>(match_orders.size()) != 2 * p.m) {
        out.push_back({"periodic problems need 2m matching rows", "problem"});
    }
    return out;
}

inline void require_valid(const PencilProblem& p) {
    const auto diags = validate_problem(p);
    if (diags.empty()) return;
    std::ostringstream os;
    for (std::size_t i = 0; i < diags.size(); ++i) os << (i ? "; " : "") << diags[i].str();
    fail(ErrorKind::InvalidProblem, os.str());
}

/// Replaces lambda by lambda - c: polynomial parts are re-expanded binomially
/// and each homothety factor picks up exp(-i c ln chi).
[[nodiscard]] inline PencilOperator shift_lambda(const PencilOperator& op, Complex c) {
    PencilOperator out;
    out.order = op.order;
    for (const auto& [key, coeff] : op.terms) {
        const auto [k, pw] = key;
        // (lambda - c)^pw = sum_q binom(pw, q) lambda^q (-c)^(pw - q)
        double binom = 1.0;
        for (int q = 0; q <= pw; ++q) {
            if (q > 0) binom = binom * (pw - q + 1) / q;
            const Complex factor = binom * ipow(-c, pw - q);
            if (factor == Complex{}) continue;
            const CoeffFn piece = coeff.scaled(factor);
            auto it = out.terms.find({k, q});
            if (it == out.terms.end()) {
                out.terms.emplace(PencilOperator::Key{k, q}, piece);
            } else {
                it->second = it->second + piece;
            }
        }
    }
    return out;
}

[[nodiscard]] inline PencilProblem shift_lambda(const PencilProblem& p, Complex c) {
    PencilProblem out = p;
    for (auto& comp : out.components) comp.op = shift_lambda(comp.op, c);
    for (auto& row : out.rows) {
        for (auto& term : row.terms) {
            const Complex homothety = std::exp(-kI * c * std::log(term.chi));
            term.op = shift_lambda(term.op, c);
            for (auto& [key, coeff] : term.op.terms) coeff = coeff.scaled(homothety);
        }
    }
    return out;
}

}  // namespace nlpencil
