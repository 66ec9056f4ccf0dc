#pragma once

#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "nlpencil/builtins.hpp"
#include "nlpencil/sector_solver.hpp"

namespace nlpencil::io {

using Json = nlohmann::ordered_json;

/// Sector problem as read from a file: the numeric problem plus the names of
/// its data so it can be written back.
struct SectorSpec {
    SectorProblem2D problem;
    std::string rhs = "zero";
    std::string dirichlet = "zero";
    std::optional<std::string> manufactured;
    std::optional<PolarField> exact;
    std::optional<double> h;  // c = e^{ih} p^2 when both are given
    std::optional<double> p;
    GridSpec grid{64, 64, 0.7};
};

using ProblemFile = std::variant<PencilProblem, SectorSpec>;

namespace detail {

[[noreturn]] inline void schema(const std::string& path, const std::string& what) {
    fail(ErrorKind::Parse, path + ": " + what);
}

inline const Json& member(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) schema(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) schema(path, "missing key '" + key + "'");
    return *it;
}

inline double number(const Json& j, const std::string& path) {
    if (!j.is_number()) schema(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) schema(path, "number must be finite");
    return v;
}

inline int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) schema(path, "expected an integer");
    return j.get<int>();
}

inline std::string text(const Json& j, const std::string& path) {
    if (!j.is_string()) schema(path, "expected a string");
    return j.get<std::string>();
}

inline Complex complex(const Json& j, const std::string& path) {
    if (j.is_number()) return {number(j, path), 0.0};
    if (!j.is_array() || j.size() != 2) schema(path, "expected [re, im]");
    return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
}

inline double opt_number(const Json& j, const std::string& key, double fallback, const std::string& path) {
    auto it = j.find(key);
    return it == j.end() ? fallback : number(*it, path + "." + key);
}

inline void known_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : keys) ok = ok || it.key() == k;
        if (!ok) schema(path, "unknown key '" + it.key() + "'");
    }
}

inline Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

inline CoeffFn parse_coeff(const Json& j, const std::string& path) {
    if (j.is_object()) {
        known_keys(j, {"trig"}, path);
        const Json& terms = member(j, "trig", path);
        if (!terms.is_array() || terms.empty()) schema(path + ".trig", "expected a nonempty array");
        TrigPoly t;
        std::set<int> seen;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string tp = path + ".trig[" + std::to_string(i) + "]";
            known_keys(terms[i], {"k", "cos", "sin"}, tp);
            TrigTerm term;
            term.harmonic = integer(member(terms[i], "k", tp), tp + ".k");
            if (term.harmonic < 0) schema(tp + ".k", "harmonic must be >= 0");
            if (!seen.insert(term.harmonic).second) schema(tp + ".k", "harmonics must be distinct");
            if (auto it = terms[i].find("cos"); it != terms[i].end()) term.cos_amp = complex(*it, tp + ".cos");
            if (auto it = terms[i].find("sin"); it != terms[i].end()) term.sin_amp = complex(*it, tp + ".sin");
            t.terms.push_back(term);
        }
        return CoeffFn(std::move(t));
    }
    return CoeffFn(complex(j, path));
}

inline Json coeff_json(const CoeffFn& c) {
    require(!c.is_callback(), ErrorKind::InvalidArgument, "callback coefficients cannot be serialized");
    if (c.is_constant()) return complex_json(c.constant());
    Json terms = Json::array();
    for (const auto& t : c.trig().terms)
        terms.push_back({{"k", t.harmonic}, {"cos", complex_json(t.cos_amp)}, {"sin", complex_json(t.sin_amp)}});
    return {{"trig", terms}};
}

inline Symbol2 parse_symbol(const Json& j, const std::string& path) {
    known_keys(j, {"a20", "a11", "a02"}, path);
    return Symbol2{complex(member(j, "a20", path), path + ".a20"), complex(member(j, "a11", path), path + ".a11"),
                   complex(member(j, "a02", path), path + ".a02")};
}

inline PencilOperator parse_operator(const Json& j, const std::string& path) {
    known_keys(j, {"order", "terms", "symbol"}, path);
    std::optional<Symbol2> sym;
    if (auto it = j.find("symbol"); it != j.end()) sym = parse_symbol(*it, path + ".symbol");
    if (j.find("terms") == j.end()) {
        if (!sym) schema(path, "operator needs 'terms' or 'symbol'");
        if (auto it = j.find("order"); it != j.end() && integer(*it, path + ".order") != 2)
            schema(path + ".order", "symbol operators have order 2");
        try {
            return polar_pencil_from_symbol(*sym);
        } catch (const Error& e) {
            schema(path + ".symbol", e.what());
        }
    }
    PencilOperator op;
    op.order = integer(member(j, "order", path), path + ".order");
    op.symbol = sym;
    const Json& terms = member(j, "terms", path);
    if (!terms.is_array()) schema(path + ".terms", "expected an array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::string tp = path + ".terms[" + std::to_string(i) + "]";
        known_keys(terms[i], {"dphi", "lam", "coeff"}, tp);
        const int dphi = integer(member(terms[i], "dphi", tp), tp + ".dphi");
        const int lam = integer(member(terms[i], "lam", tp), tp + ".lam");
        if (dphi < 0 || lam < 0) schema(tp, "powers must be >= 0");
        if (op.terms.count({dphi, lam})) schema(tp, "duplicate (dphi, lam) term");
        op.terms[{dphi, lam}] = parse_coeff(member(terms[i], "coeff", tp), tp + ".coeff");
    }
    return op;
}

inline Json operator_json(const PencilOperator& op) {
    Json terms = Json::array();
    for (const auto& [key, c] : op.terms) terms.push_back({{"dphi", key.first}, {"lam", key.second}, {"coeff", coeff_json(c)}});
    Json out = {{"order", op.order}, {"terms", terms}};
    if (op.symbol) {
        out["symbol"] = {{"a20", complex_json(op.symbol->a20)},
                         {"a11", complex_json(op.symbol->a11)},
                         {"a02", complex_json(op.symbol->a02)}};
    }
    return out;
}

inline PencilProblem parse_pencil(const Json& j) {
    if (auto it = j.find("builtin"); it != j.end()) {
        known_keys(j, {"type", "builtin", "params"}, "$");
        ParamMap params;
        if (auto pit = j.find("params"); pit != j.end()) {
            if (!pit->is_object()) schema("$.params", "expected an object");
            for (auto e = pit->begin(); e != pit->end(); ++e) params[e.key()] = number(e.value(), "$.params." + e.key());
        }
        try {
            return builtin_problem(text(*it, "$.builtin"), params);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InvalidArgument) schema("$.params", e.what());
            throw;
        }
    }
    known_keys(j, {"type", "m", "components", "rows"}, "$");
    PencilProblem p;
    p.m = integer(member(j, "m", "$"), "$.m");
    const Json& comps = member(j, "components", "$");
    if (!comps.is_array() || comps.empty()) schema("$.components", "expected a nonempty array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string cp = "$.components[" + std::to_string(i) + "]";
        known_keys(comps[i], {"interval", "operator"}, cp);
        const Json& iv = member(comps[i], "interval", cp);
        if (!iv.is_array() || iv.size() != 2) schema(cp + ".interval", "expected [lo, hi]");
        Component c;
        c.lo = number(iv[0], cp + ".interval[0]");
        c.hi = number(iv[1], cp + ".interval[1]");
        c.op = parse_operator(member(comps[i], "operator", cp), cp + ".operator");
        p.components.push_back(std::move(c));
    }
    const Json& rows = member(j, "rows", "$");
    if (!rows.is_array()) schema("$.rows", "expected an array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::string rp = "$.rows[" + std::to_string(i) + "]";
        known_keys(rows[i], {"component", "side", "row_order", "kind", "match_order", "terms"}, rp);
        BoundaryRow r;
        r.component = integer(member(rows[i], "component", rp), rp + ".component");
        const std::string side = text(member(rows[i], "side", rp), rp + ".side");
        if (side != "lower" && side != "upper") schema(rp + ".side", "side must be 'lower' or 'upper'");
        r.side = side == "lower" ? Side::Lower : Side::Upper;
        r.row_order = integer(member(rows[i], "row_order", rp), rp + ".row_order");
        const std::string kind = rows[i].contains("kind") ? text(rows[i]["kind"], rp + ".kind") : "standard";
        if (kind == "periodic_match") {
            r.kind = RowKind::PeriodicMatch;
            r.match_order = integer(member(rows[i], "match_order", rp), rp + ".match_order");
        } else if (kind != "standard") {
            schema(rp + ".kind", "kind must be 'standard' or 'periodic_match'");
        }
        if (auto it = rows[i].find("terms"); it != rows[i].end()) {
            if (!it->is_array()) schema(rp + ".terms", "expected an array");
            for (std::size_t t = 0; t < it->size(); ++t) {
                const std::string tp = rp + ".terms[" + std::to_string(t) + "]";
                const Json& tj = (*it)[t];
                known_keys(tj, {"source", "shift", "chi", "op"}, tp);
                BCTerm term;
                term.source = integer(member(tj, "source", tp), tp + ".source");
                term.shift = opt_number(tj, "shift", 0.0, tp);
                term.chi = opt_number(tj, "chi", 1.0, tp);
                if (!(term.chi > 0.0)) schema(tp + ".chi", "chi must be > 0");
                term.op = parse_operator(member(tj, "op", tp), tp + ".op");
                r.terms.push_back(std::move(term));
            }
        }
        p.rows.push_back(std::move(r));
    }
    const auto diags = validate_problem(p);
    if (!diags.empty()) {
        std::string msg = "problem violates invariants:";
        for (const auto& d : diags) msg += "\n  - " + d.str();
        fail(ErrorKind::InvalidProblem, msg);
    }
    return p;
}

inline PolarField named_rhs(const std::string& name, const SectorProblem2D& sp, const std::string& path) {
    if (name == "zero") return [](double, double) { return Complex{}; };
    if (name == "bump") return bump_rhs(sp.d, sp.R);
    schema(path, "unknown rhs '" + name + "' (expected zero or bump)");
}

inline AngularData named_dirichlet(const std::string& name, const SectorProblem2D& sp, const std::string& path) {
    if (name == "zero") return [](double) { return Complex{}; };
    if (name == "one") return [](double) { return Complex(1.0, 0.0); };
    if (name == "sine") {
        const double d = sp.d;
        return [d](double phi) { return Complex(std::sin(kPi * phi / d), 0.0); };
    }
    schema(path, "unknown dirichlet data '" + name + "' (expected zero, one or sine)");
}

inline SectorSpec parse_sector(const Json& j) {
    known_keys(j, {"type", "d", "R", "r0", "c", "h", "p", "sides", "rhs", "dirichlet", "manufactured", "grid"}, "$");
    SectorSpec s;
    SectorProblem2D& sp = s.problem;
    sp.d = number(member(j, "d", "$"), "$.d");
    sp.R = opt_number(j, "R", 1.0, "$");
    sp.r0 = opt_number(j, "r0", 0.01 * sp.R, "$");
    const bool has_c = j.contains("c");
    const bool has_hp = j.contains("h") || j.contains("p");
    if (has_c && has_hp) schema("$", "give either 'c' or ('h', 'p'), not both");
    if (has_c) sp.c = complex(j["c"], "$.c");
    if (has_hp) {
        s.h = number(member(j, "h", "$"), "$.h");
        s.p = number(member(j, "p", "$"), "$.p");
        sp.c = std::polar(*s.p * *s.p, *s.h);
    }
    const Json& sides = member(j, "sides", "$");
    if (!sides.is_array() || sides.size() != 2) schema("$.sides", "expected two side entries");
    for (int i = 0; i < 2; ++i) {
        const std::string sp_path = "$.sides[" + std::to_string(i) + "]";
        known_keys(sides[i], {"alpha", "shift"}, sp_path);
        sp.sides[i].alpha = number(member(sides[i], "alpha", sp_path), sp_path + ".alpha");
        sp.sides[i].shift = number(member(sides[i], "shift", sp_path), sp_path + ".shift");
    }
    if (auto it = j.find("grid"); it != j.end()) {
        known_keys(*it, {"n_r", "n_a", "rho_g"}, "$.grid");
        if (it->contains("n_r")) s.grid.n_r = integer((*it)["n_r"], "$.grid.n_r");
        if (it->contains("n_a")) s.grid.n_a = integer((*it)["n_a"], "$.grid.n_a");
        s.grid.rho_g = opt_number(*it, "rho_g", s.grid.rho_g, "$.grid");
    }
    if (auto it = j.find("manufactured"); it != j.end()) {
        if (j.contains("rhs") || j.contains("dirichlet"))
            schema("$", "'manufactured' fixes rhs and dirichlet data");
        s.manufactured = text(*it, "$.manufactured");
        const double half = sp.d / 2;
        if (sp.sides[0].shift != half || sp.sides[1].shift != half)
            schema("$.sides", "manufactured cases use shifts d/2 on both sides");
        ManufacturedParams mp;
        mp.d = sp.d;
        mp.alpha1 = sp.sides[0].alpha;
        mp.alpha2 = sp.sides[1].alpha;
        mp.c = sp.c;
        mp.R = sp.R;
        ManufacturedCase mc;
        try {
            mc = manufactured_case(*s.manufactured, mp);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::InvalidArgument) schema("$.manufactured", e.what());
            throw;
        }
        sp.rhs = mc.problem.rhs;
        sp.dirichlet = mc.problem.dirichlet;
        s.exact = mc.exact;
        s.rhs = s.dirichlet = "manufactured";
    } else {
        if (j.contains("rhs")) s.rhs = text(j["rhs"], "$.rhs");
        if (j.contains("dirichlet")) s.dirichlet = text(j["dirichlet"], "$.dirichlet");
        sp.rhs = named_rhs(s.rhs, sp, "$.rhs");
        sp.dirichlet = named_dirichlet(s.dirichlet, sp, "$.dirichlet");
    }
    try {
        sp.validate();
    } catch (const Error& e) {
        fail(ErrorKind::InvalidProblem, e.what());
    }
    return s;
}

}  // namespace detail

[[nodiscard]] inline ProblemFile parse_problem_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::Parse, std::string("syntax error: ") + e.what());
    }
    if (!j.is_object()) detail::schema("$", "expected an object");
    std::string type = "pencil";
    if (auto it = j.find("type"); it != j.end()) {
        type = detail::text(*it, "$.type");
    } else if (j.contains("sides")) {
        type = "sector";
    }
    if (type == "pencil") return detail::parse_pencil(j);
    if (type == "sector") return detail::parse_sector(j);
    detail::schema("$.type", "type must be 'pencil' or 'sector'");
}

[[nodiscard]] inline PencilProblem parse_pencil_text(const std::string& text) {
    auto f = parse_problem_text(text);
    if (auto* p = std::get_if<PencilProblem>(&f)) return std::move(*p);
    fail(ErrorKind::Parse, "$.type: expected a pencil problem");
}

[[nodiscard]] inline SectorSpec parse_sector_text(const std::string& text) {
    auto f = parse_problem_text(text);
    if (auto* s = std::get_if<SectorSpec>(&f)) return std::move(*s);
    fail(ErrorKind::Parse, "$.type: expected a sector problem");
}

[[nodiscard]] inline Json to_json(const PencilProblem& p) {
    Json comps = Json::array();
    for (const auto& c : p.components)
        comps.push_back({{"interval", Json::array({c.lo, c.hi})}, {"operator", detail::operator_json(c.op)}});
    Json rows = Json::array();
    for (const auto& r : p.rows) {
        Json rj = {{"component", r.component},
                   {"side", r.side == Side::Lower ? "lower" : "upper"},
                   {"row_order", r.row_order},
                   {"kind", r.kind == RowKind::Standard ? "standard" : "periodic_match"}};
        if (r.kind == RowKind::PeriodicMatch) rj["match_order"] = r.match_order;
        Json terms = Json::array();
        for (const auto& t : r.terms)
            terms.push_back({{"source", t.source}, {"shift", t.shift}, {"chi", t.chi}, {"op", detail::operator_json(t.op)}});
        rj["terms"] = terms;
        rows.push_back(rj);
    }
    return {{"type", "pencil"}, {"m", p.m}, {"components", comps}, {"rows", rows}};
}

[[nodiscard]] inline Json to_json(const SectorSpec& s) {
    const auto& sp = s.problem;
    Json out = {{"type", "sector"}, {"d", sp.d}, {"R", sp.R}, {"r0", sp.r0}};
    if (s.h && s.p) {
        out["h"] = *s.h;
        out["p"] = *s.p;
    } else {
        out["c"] = detail::complex_json(sp.c);
    }
    out["sides"] = Json::array({{{"alpha", sp.sides[0].alpha}, {"shift", sp.sides[0].shift}},
                                {{"alpha", sp.sides[1].alpha}, {"shift", sp.sides[1].shift}}});
    if (s.manufactured) {
        out["manufactured"] = *s.manufactured;
    } else {
        out["rhs"] = s.rhs;
        out["dirichlet"] = s.dirichlet;
    }
    out["grid"] = {{"n_r", s.grid.n_r}, {"n_a", s.grid.n_a}, {"rho_g", s.grid.rho_g}};
    return out;
}

}  // namespace nlpencil::io
