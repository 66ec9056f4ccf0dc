#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "nlpencil/io.hpp"

using namespace nlpencil;

namespace {

std::string problems_dir() {
    const char* dir = std::getenv("NLPENCIL_PROBLEMS");
    return dir ? dir : "problems";
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void expect_same_coeff(const CoeffFn& a, const CoeffFn& b, const std::string& where) {
    ASSERT_EQ(a.is_constant(), b.is_constant()) << where;
    ASSERT_EQ(a.is_trig(), b.is_trig()) << where;
    if (a.is_constant()) {
        EXPECT_EQ(a.constant(), b.constant()) << where;
        return;
    }
    const auto& ta = a.trig().terms;
    const auto& tb = b.trig().terms;
    ASSERT_EQ(ta.size(), tb.size()) << where;
    for (std::size_t i = 0; i < ta.size(); ++i) {
        EXPECT_EQ(ta[i].harmonic, tb[i].harmonic) << where;
        EXPECT_EQ(ta[i].cos_amp, tb[i].cos_amp) << where;
        EXPECT_EQ(ta[i].sin_amp, tb[i].sin_amp) << where;
    }
}

void expect_same_operator(const PencilOperator& a, const PencilOperator& b, const std::string& where) {
    EXPECT_EQ(a.order, b.order) << where;
    ASSERT_EQ(a.terms.size(), b.terms.size()) << where;
    for (const auto& [key, c] : a.terms) {
        auto it = b.terms.find(key);
        ASSERT_NE(it, b.terms.end()) << where << " term (" << key.first << "," << key.second << ")";
        expect_same_coeff(c, it->second, where);
    }
    ASSERT_EQ(a.symbol.has_value(), b.symbol.has_value()) << where;
    if (a.symbol) {
        EXPECT_EQ(a.symbol->a20, b.symbol->a20);
        EXPECT_EQ(a.symbol->a11, b.symbol->a11);
        EXPECT_EQ(a.symbol->a02, b.symbol->a02);
    }
}

/// Field-by-field comparison; exact equality on every number.
void expect_same_problem(const PencilProblem& a, const PencilProblem& b) {
    EXPECT_EQ(a.m, b.m);
    ASSERT_EQ(a.components.size(), b.components.size());
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        EXPECT_EQ(a.components[i].lo, b.components[i].lo);
        EXPECT_EQ(a.components[i].hi, b.components[i].hi);
        expect_same_operator(a.components[i].op, b.components[i].op, "component " + std::to_string(i));
    }
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const auto& ra = a.rows[i];
        const auto& rb = b.rows[i];
        EXPECT_EQ(ra.component, rb.component);
        EXPECT_EQ(ra.side, rb.side);
        EXPECT_EQ(ra.row_order, rb.row_order);
        EXPECT_EQ(ra.kind, rb.kind);
        if (ra.kind == RowKind::PeriodicMatch) EXPECT_EQ(ra.match_order, rb.match_order);
        ASSERT_EQ(ra.terms.size(), rb.terms.size());
        for (std::size_t t = 0; t < ra.terms.size(); ++t) {
            EXPECT_EQ(ra.terms[t].source, rb.terms[t].source);
            EXPECT_EQ(ra.terms[t].shift, rb.terms[t].shift);
            EXPECT_EQ(ra.terms[t].chi, rb.terms[t].chi);
            expect_same_operator(ra.terms[t].op, rb.terms[t].op, "row " + std::to_string(i));
        }
    }
}

std::string expect_parse_error(const std::string& text) {
    try {
        (void)io::parse_problem_text(text);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Parse) << e.what();
        return e.what();
    }
    ADD_FAILURE() << "no error for " << text;
    return {};
}

const char* kDirichlet = R"({
  "m": 1,
  "components": [{"interval": [0, 1.5],
                  "operator": {"symbol": {"a20": -1, "a11": 0, "a02": -1}}}],
  "rows": [
    {"component": 0, "side": "lower", "row_order": 0,
     "terms": [{"source": 0, "shift": 0, "chi": 1, "op": {"order": 0, "terms": [{"dphi": 0, "lam": 0, "coeff": [1, 0]}]}}]},
    {"component": 0, "side": "upper", "row_order": 0,
     "terms": [{"source": 0, "shift": 0, "chi": 1, "op": {"order": 0, "terms": [{"dphi": 0, "lam": 0, "coeff": [1, 0]}]}}]}
  ]
})";

}  // namespace

TEST(ParseProblem, MinimalDirichletDocumentHasTwoRows) {
    const auto p = io::parse_pencil_text(kDirichlet);
    EXPECT_EQ(p.rows.size(), 2u);
    expect_same_problem(p, builtin_problem("dirichlet_laplace", {{"d", 1.5}}));
}

TEST(ParseProblem, NegativeChiNamesThePath) {
    std::string text = kDirichlet;
    text.replace(text.find("\"chi\": 1"), 8, "\"chi\": -1");
    const std::string msg = expect_parse_error(text);
    EXPECT_NE(msg.find("rows[0].terms[0].chi"), std::string::npos) << msg;
    EXPECT_NE(msg.find("chi must be > 0"), std::string::npos) << msg;
}

TEST(ParseProblem, SyntaxAndSchemaErrors) {
    expect_parse_error("{\"m\": 1,");
    expect_parse_error("[1, 2]");
    const std::string missing = expect_parse_error(R"({"m": 1, "rows": []})");
    EXPECT_NE(missing.find("components"), std::string::npos);
    std::string bad_side = kDirichlet;
    bad_side.replace(bad_side.find("\"lower\""), 7, "\"left\"");
    EXPECT_NE(expect_parse_error(bad_side).find("rows[0].side"), std::string::npos);
    std::string bad_coeff = kDirichlet;
    bad_coeff.replace(bad_coeff.find("[1, 0]"), 6, "[1, 0, 3]");
    EXPECT_NE(expect_parse_error(bad_coeff).find("rows[0].terms[0].op.terms[0].coeff"), std::string::npos);
    const std::string unknown = expect_parse_error(R"({"type": "sector", "d": 1, "sides": [], "bogus": 1})");
    EXPECT_NE(unknown.find("bogus"), std::string::npos);
}

TEST(ParseProblem, InvariantViolationListsDiagnostics) {
    std::string text = kDirichlet;
    // Drop the upper row: one row short for a second-order operator.
    const auto cut = text.find(",\n    {\"component\": 0, \"side\": \"upper\"");
    const auto end = text.find("]}\n  ]", cut);
    text.erase(cut, end + 2 - cut);
    try {
        (void)io::parse_problem_text(text);
        FAIL() << "accepted a problem with a missing row";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidProblem);
        EXPECT_NE(std::string(e.what()).find("\n  - "), std::string::npos) << e.what();
    }
}

TEST(ParseProblem, SymbolOnlyOperatorIsExpanded) {
    const auto p = io::parse_pencil_text(R"({
      "m": 1,
      "components": [{"interval": [0, 6.283185307179586],
                      "operator": {"symbol": {"a20": -1, "a11": [0, -0.6], "a02": -1}}}],
      "rows": [{"component": 0, "side": "lower", "row_order": 0, "kind": "periodic_match", "match_order": 0},
               {"component": 0, "side": "upper", "row_order": 1, "kind": "periodic_match", "match_order": 1}]
    })");
    expect_same_problem(p, full_circle_problem(Symbol2{-1.0, Complex(0, -0.6), -1.0}));
}

TEST(ParseProblem, BuiltinShorthand) {
    const auto p = io::parse_pencil_text(R"({"builtin": "ex21_sector", "params": {"d": 1.2, "alpha1": 0.3, "alpha2": 0.4}})");
    expect_same_problem(p, builtin_problem("ex21_sector", {{"d", 1.2}, {"alpha1", 0.3}, {"alpha2", 0.4}}));
    EXPECT_NE(expect_parse_error(R"({"builtin": "ex21_sector", "params": {"d": 1.2}})").find("alpha1"),
              std::string::npos);
}

TEST(RoundTrip, EveryBuiltinSurvivesSerialization) {
    const std::vector<std::pair<std::string, ParamMap>> cases = {
        {"dirichlet_laplace", {{"d", 1.0}}},
        {"periodic_laplace", {}},
        {"ex21_sector", {{"d", kPi / 2}, {"alpha1", 0.5}, {"alpha2", 0.5}}},
        {"ex6_quarter", {{"alpha1", 0.3}, {"alpha2", -0.7}}},
        {"ex11_orbit4", {{"alpha1", 0.2}, {"alpha2", 0.1}, {"beta1", 0.3}, {"beta2", -0.4}}},
    };
    for (const auto& [name, params] : cases) {
        SCOPED_TRACE(name);
        const auto p = builtin_problem(name, params);
        const std::string text = io::to_json(p).dump(2);
        const auto q = io::parse_pencil_text(text);
        expect_same_problem(p, q);
        EXPECT_EQ(io::to_json(q).dump(2), text);
    }
    const auto fc = full_circle_problem(Symbol2{-1.0, Complex(0, -0.6), -1.0});
    expect_same_problem(fc, io::parse_pencil_text(io::to_json(fc).dump()));
}

TEST(RoundTrip, CallbackCoefficientsAreRejected) {
    auto p = builtin_problem("dirichlet_laplace", {{"d", 1.0}});
    p.components[0].op.terms[{0, 0}] = CoeffFn(CoeffFn::Callback([](double) { return Complex(1.0, 0.0); }));
    EXPECT_THROW((void)io::to_json(p), Error);
}

TEST(ShippedFiles, Ex21MatchesBuiltin) {
    const auto p = io::parse_pencil_text(slurp(problems_dir() + "/ex21.json"));
    expect_same_problem(p, builtin_problem("ex21_sector", {{"d", kPi / 2}, {"alpha1", 0.5}, {"alpha2", 0.5}}));
}

TEST(ShippedFiles, PencilFilesMatchBuiltins) {
    expect_same_problem(io::parse_pencil_text(slurp(problems_dir() + "/periodic.json")),
                        builtin_problem("periodic_laplace", {}));
    expect_same_problem(io::parse_pencil_text(slurp(problems_dir() + "/ex21_violating.json")),
                        builtin_problem("ex21_sector", {{"d", kPi / 2}, {"alpha1", 0.75}, {"alpha2", 0.75}}));
    expect_same_problem(io::parse_pencil_text(slurp(problems_dir() + "/anisotropic.json")),
                        full_circle_problem(Symbol2{-1.0, Complex(0, -0.6), -1.0}));
}

TEST(ShippedFiles, SectorFilesParse) {
    for (const char* name : {"sector_ex21.json", "sector_dirichlet.json", "sector_compliant.json", "sector_resolvent.json"}) {
        SCOPED_TRACE(name);
        const auto s = io::parse_sector_text(slurp(problems_dir() + "/" + name));
        EXPECT_NO_THROW(s.problem.validate());
        EXPECT_EQ(io::to_json(io::parse_sector_text(io::to_json(s).dump())).dump(), io::to_json(s).dump());
    }
}

TEST(SectorSchema, NamedDataAndPolarParameter) {
    const auto s = io::parse_sector_text(R"({"d": 1.5707963267948966, "h": 0.4, "p": 10,
        "sides": [{"alpha": 0.5, "shift": 0.7853981633974483}, {"alpha": 0.5, "shift": 0.7853981633974483}],
        "rhs": "zero", "dirichlet": "sine", "grid": {"n_r": 16, "n_a": 16}})");
    EXPECT_NEAR(std::abs(s.problem.c - std::polar(100.0, 0.4)), 0.0, 1e-12);
    EXPECT_NEAR(s.problem.dirichlet(kPi / 4).real(), std::sin(kPi / 2), 1e-15);
    EXPECT_EQ(s.grid.n_r, 16);
    EXPECT_EQ(s.grid.rho_g, 0.7);
    EXPECT_NE(expect_parse_error(R"({"type": "sector", "d": 1, "sides": [{"alpha": 0, "shift": 0.5}, {"alpha": 0, "shift": 0.5}],
        "dirichlet": "cosine"})").find("$.dirichlet"), std::string::npos);
}

TEST(SectorSchema, ManufacturedCaseCarriesExactSolution) {
    const auto s = io::parse_sector_text(R"({"type": "sector", "d": 1.5707963267948966,
        "sides": [{"alpha": 0.5, "shift": 0.7853981633974483}, {"alpha": 0.5, "shift": 0.7853981633974483}],
        "manufactured": "smooth_compliant"})");
    ASSERT_TRUE(s.exact.has_value());
    EXPECT_NEAR(std::abs(s.problem.dirichlet(0.3) - (*s.exact)(1.0, 0.3)), 0.0, 1e-14);
}
