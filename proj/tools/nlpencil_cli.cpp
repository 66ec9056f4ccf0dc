#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/sha.h>

#include "nlpencil/nlpencil.hpp"

#ifndef NLPENCIL_VERSION
#define NLPENCIL_VERSION "0.0.0"
#endif

using namespace nlpencil;
using Json = io::Json;

namespace {

struct Options {
    std::string problem;
    std::string out;
    std::uint64_t seed = 0;
    int nphi = 64;
    int quad = 128;
    int threads = 1;
    std::vector<double> rect;
    std::vector<double> lambda;
    double h1 = 0.0, h2 = 0.0;
    double a = 0.0;
    int l = 0;
    double a1 = 0.0, a2 = 0.0;
    int l1 = 0, l2 = 0;
    double re_halfwidth = kDefaultReHalfwidth;
    int adjoint_nphi = 0;
    bool include_unstable = false;
    int nr = 0, na = 0;
    double rho = 0.0;
    double r_lo = 0.0, r_hi = 0.0;
    std::vector<double> p_values{10, 18, 32, 56, 100};
    std::optional<double> h;
    std::vector<int> levels{32, 64, 128};
    std::vector<double> fit_window;
    int k = 0;
    std::string flavor = "H";
    double r_min = 0.0;
    double r_max = std::numeric_limits<double>::infinity();
    std::string ring_csv, scan_csv, level_csv;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::InvalidArgument, "cannot read problem file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size(), md);
    std::string hex;
    char buf[3];
    for (unsigned char c : md) {
        std::snprintf(buf, sizeof buf, "%02x", c);
        hex += buf;
    }
    return hex;
}

/// Flags that do not influence the payload stay out of the digest.
std::string canonical_flags(const CLI::App& sub) {
    static const std::set<std::string> skip{"--help", "--threads", "--out", "--ring-csv", "--scan-csv", "--level-csv"};
    std::vector<std::string> parts;
    for (const CLI::Option* o : sub.get_options()) {
        if (o->count() == 0 || skip.count(o->get_name())) continue;
        std::string s = o->get_name() + "=";
        const auto& res = o->results();
        for (std::size_t i = 0; i < res.size(); ++i) s += (i ? "," : "") + res[i];
        parts.push_back(s);
    }
    std::sort(parts.begin(), parts.end());
    std::string out = sub.get_name();
    for (const auto& p : parts) out += "\n" + p;
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::string& path, const std::string& header, const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path + "'");
    out << header << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt(row[i]);
        out << "\n";
    }
}

Json cx(Complex z) { return Json::array({z.real(), z.imag()}); }

Json cx_list(std::vector<Complex> zs) {
    std::sort(zs.begin(), zs.end(), [](Complex x, Complex y) {
        return x.imag() != y.imag() ? x.imag() < y.imag() : x.real() < y.real();
    });
    Json out = Json::array();
    for (Complex z : zs) out.push_back(cx(z));
    return out;
}

Json record_json(const EigenRecord& rec) {
    return {{"lambda", cx(rec.lambda)},
            {"geometric_multiplicity", rec.geometric_mult},
            {"algebraic_multiplicity", rec.algebraic_mult},
            {"ranks", rec.ranks()},
            {"sigma_min", rec.sigma_min},
            {"resolution_stable", rec.resolution_stable}};
}

NepOptions nep_options(const Options& o) {
    NepOptions n;
    n.quad_points = o.quad;
    n.seed = o.seed;
    n.threads = o.threads;
    return n;
}

Rectangle rectangle(const std::vector<double>& v) {
    Rectangle r{v[0], v[1], v[2], v[3]};
    require(r.re_min < r.re_max && r.im_min < r.im_max, ErrorKind::InvalidArgument,
            "--rect expects re_min re_max im_min im_max with min < max");
    return r;
}

struct Loaded {
    std::string bytes;
    io::ProblemFile file;
};

Loaded load(const Options& o) {
    Loaded l;
    l.bytes = read_file(o.problem);
    l.file = io::parse_problem_text(l.bytes);
    return l;
}

const PencilProblem& pencil_of(const Loaded& l) {
    const auto* p = std::get_if<PencilProblem>(&l.file);
    if (!p) fail(ErrorKind::InvalidArgument, "this verb needs a pencil problem file");
    return *p;
}

const io::SectorSpec& sector_of(const Loaded& l) {
    const auto* s = std::get_if<io::SectorSpec>(&l.file);
    if (!s) fail(ErrorKind::InvalidArgument, "this verb needs a sector problem file");
    return *s;
}

Json pencil_discretization(const Options& o) {
    const NepOptions n = nep_options(o);
    return {{"n_phi", o.nphi}, {"quad_points", n.quad_points}, {"probe_rank", n.probe_rank},
            {"rank_tol", n.rank_tol}, {"residual_tol", n.residual_tol}};
}

GridSpec grid_of(const io::SectorSpec& s, const Options& o) {
    GridSpec g = s.grid;
    if (o.nr > 0) g.n_r = o.nr;
    if (o.na > 0) g.n_a = o.na;
    if (o.rho > 0.0) g.rho_g = o.rho;
    return g;
}

Json grid_json(const GridSpec& g) { return {{"n_r", g.n_r}, {"n_a", g.n_a}, {"rho_g", g.rho_g}}; }

Json diagnostics_json(const SolveDiagnostics& d) {
    return {{"residual", d.residual},
            {"rhs_norm", d.rhs_norm},
            {"condition_estimate", d.condition_estimate},
            {"nonzeros", d.nonzeros}};
}

struct Outcome {
    Json discretization;
    Json results;
};

Outcome run_eigs(const Options& o, const Loaded& l) {
    const PencilFunction f(pencil_of(l), o.nphi);
    const auto eigs = beyn_eigs(f, rectangle(o.rect), nep_options(o));
    Json list = Json::array();
    int omitted = 0;
    for (const auto& e : eigs) {
        if (!e.resolution_stable && !o.include_unstable) {
            ++omitted;
            continue;
        }
        list.push_back({{"lambda", cx(e.lambda)}, {"sigma_min", e.sigma_min}, {"resolution_stable", e.resolution_stable}});
    }
    return {pencil_discretization(o),
            {{"rect", o.rect}, {"count", static_cast<int>(eigs.size())}, {"omitted_unstable", omitted}, {"eigenvalues", list}}};
}

Json strip_json(const StripReport& rep) {
    Json recs = Json::array();
    for (const auto& r : rep.records) recs.push_back(record_json(r));
    return {{"h2", rep.h2},
            {"h1", rep.h1},
            {"re_halfwidth", rep.re_halfwidth},
            {"upper_line_clean", rep.upper_line_clean},
            {"upper_edge", rep.upper_edge},
            {"records", recs}};
}

Outcome run_strip(const Options& o, const Loaded& l) {
    const PencilFunction f(pencil_of(l), o.nphi);
    return {pencil_discretization(o), strip_json(strip_scan(f, o.h2, o.h1, o.re_halfwidth, nep_options(o)))};
}

Outcome run_jordan(const Options& o, const Loaded& l) {
    const PencilFunction f(pencil_of(l), o.nphi);
    const NepOptions opts = nep_options(o);
    Complex lambda(o.lambda[0], o.lambda[1]);
    const EigenEstimate est = refine(f, lambda, opts);
    lambda = est.lambda;
    const EigenRecord rec = jordan_system(f, lambda, opts);
    Json out = record_json(rec);
    Json res = Json::array();
    for (const auto& c : rec.chains) res.push_back(chain_residuals(f, rec.lambda, c));
    out["chain_residuals"] = res;
    return {pencil_discretization(o), out};
}

Outcome run_asym(const Options& o, const Loaded& l) {
    const PencilProblem& p = pencil_of(l);
    const PencilFunction f(p, o.nphi);
    const TransitionReport rep =
        weight_transition_report(f, o.a1, o.l1, o.a2, o.l2, p.m, o.re_halfwidth, nep_options(o));
    Json obs = Json::array();
    for (const auto& s : rep.obstructions) obs.push_back({{"lambda", cx(s.lambda)}, {"chain", s.chain}, {"k", s.k}});
    return {pencil_discretization(o),
            {{"h_low", rep.h_low},
             {"h_high", rep.h_high},
             {"transfer_holds", rep.transfer_holds},
             {"verdict", rep.verdict},
             {"strip", strip_json(rep.strip)},
             {"obstructions", obs}}};
}

Outcome run_verdict(const Options& o, const Loaded& l) {
    const PencilProblem& p = pencil_of(l);
    const PencilFunction f(p, o.nphi);
    const WeightLine wl = WeightLine::make(o.a, o.l, p.m);
    const Verdict v = fredholm_verdict(f, wl, o.re_halfwidth, nep_options(o));
    return {pencil_discretization(o),
            {{"a", wl.a},
             {"l", wl.l},
             {"m", wl.m},
             {"beta", v.beta},
             {"status", to_string(v.status)},
             {"witnesses", cx_list(v.witnesses)},
             {"notes", v.notes}}};
}

Outcome run_adjoint(const Options& o, const Loaded& l) {
    const PencilFunction f(pencil_of(l), o.nphi);
    const int adj_n = o.adjoint_nphi > 0 ? o.adjoint_nphi : 2 * o.nphi;
    const AdjointReport rep = adjoint_symmetry_check(f, rectangle(o.rect), nep_options(o), adj_n);
    Json disc = pencil_discretization(o);
    disc["adjoint_n_phi"] = adj_n;
    const Rectangle& m = rep.mirrored;
    return {disc,
            {{"rect", o.rect},
             {"mirrored_rect", Json::array({m.re_min, m.re_max, m.im_min, m.im_max})},
             {"spectrum", cx_list(rep.spectrum)},
             {"adjoint_spectrum", cx_list(rep.adjoint_spectrum)},
             {"mapped", cx_list(rep.mapped)},
             {"hausdorff_distance", rep.distance}}};
}

struct Solved {
    GridSpec grid;
    GridSolution sol;
};

Solved solve(const io::SectorSpec& s, const Options& o) {
    Solved out;
    out.grid = grid_of(s, o);
    const PolarGrid g = PolarGrid::make(s.problem, out.grid.n_r, out.grid.n_a, out.grid.rho_g);
    out.sol = solve_sector(s.problem, g);
    return out;
}

Outcome run_sector_solve(const Options& o, const Loaded& l) {
    const auto& s = sector_of(l);
    const Solved sv = solve(s, o);
    const auto& g = sv.sol.grid;
    Json res = {{"diagnostics", diagnostics_json(sv.sol.diagnostics)},
                {"l2_norm", grid_l2_norm(g, sv.sol.values)},
                {"max_abs", sv.sol.values.cwiseAbs().maxCoeff()}};
    if (s.exact) {
        const CVector err = sv.sol.values - sample(g, *s.exact);
        res["l2_error"] = grid_l2_norm(g, err);
        res["max_error"] = err.cwiseAbs().maxCoeff();
    }
    std::vector<std::vector<double>> rings;
    for (int j = 0; j < g.n_r; ++j) rings.push_back({g.r[j], sv.sol.ring_norm(j)});
    res["ring_norms"] = static_cast<int>(rings.size());
    if (!o.ring_csv.empty()) write_csv(o.ring_csv, "r,l2_ring_norm", rings);
    return {grid_json(sv.grid), res};
}

/// Leading corner exponent from the pencil of the same sector, available when
/// both side conditions use the bisector shift.
std::optional<std::pair<double, Complex>> predicted_exponent(const io::SectorSpec& s, const Options& o) {
    const auto& sp = s.problem;
    const double half = sp.d / 2;
    if (std::abs(sp.sides[0].shift - half) > 1e-12 || std::abs(sp.sides[1].shift - half) > 1e-12) return std::nullopt;
    const PencilProblem p =
        builtin_problem("ex21_sector", {{"d", sp.d}, {"alpha1", sp.sides[0].alpha}, {"alpha2", sp.sides[1].alpha}});
    const PencilFunction f(p, o.nphi);
    const auto eigs = beyn_eigs(f, Rectangle{-o.re_halfwidth, o.re_halfwidth, -3.05, -0.02}, nep_options(o));
    if (eigs.empty()) return std::nullopt;
    const auto lead = std::max_element(eigs.begin(), eigs.end(), [](const EigenEstimate& x, const EigenEstimate& y) {
        return x.lambda.imag() < y.lambda.imag();
    });
    return std::make_pair(-lead->lambda.imag(), lead->lambda);
}

Outcome run_exponent_fit(const Options& o, const Loaded& l) {
    const auto& s = sector_of(l);
    const Solved sv = solve(s, o);
    const double r_lo = o.r_lo > 0.0 ? o.r_lo : s.problem.r0;
    const double r_hi = o.r_hi > 0.0 ? o.r_hi : 0.1 * s.problem.R;
    const ExponentFit fit = fit_exponent(sv.sol, r_lo, r_hi);
    Json res = {{"window", Json::array({r_lo, r_hi})},
                {"beta", fit.beta},
                {"r2", fit.r2},
                {"rings", fit.rings},
                {"diagnostics", diagnostics_json(sv.sol.diagnostics)}};
    Json disc = grid_json(sv.grid);
    if (const auto pred = predicted_exponent(s, o)) {
        res["predicted_beta"] = pred->first;
        res["leading_eigenvalue"] = cx(pred->second);
        res["relative_deviation"] = std::abs(fit.beta - pred->first) / pred->first;
        disc["n_phi"] = o.nphi;
        disc["quad_points"] = o.quad;
    } else {
        res["predicted_beta"] = nullptr;
    }
    return {disc, res};
}

Outcome run_resolvent(const Options& o, const Loaded& l) {
    const auto& s = sector_of(l);
    const GridSpec gs = grid_of(s, o);
    const double h = o.h ? *o.h : s.h.value_or(0.0);
    const ResolventScan scan = resolvent_scan(s.problem, h, o.p_values, gs, o.threads);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < scan.p.size(); ++i) rows.push_back({scan.p[i], scan.norms[i]});
    if (!o.scan_csv.empty()) write_csv(o.scan_csv, "p,l2_norm", rows);
    return {grid_json(gs), {{"h", scan.h}, {"p", scan.p}, {"norms", scan.norms}, {"slope", scan.slope}}};
}

Outcome run_convergence(const Options& o, const Loaded& l) {
    const auto& s = sector_of(l);
    require(s.exact.has_value(), ErrorKind::InvalidArgument, "convergence needs a manufactured sector problem");
    require(o.fit_window.empty() || o.fit_window.size() == 2, ErrorKind::InvalidArgument,
            "--fit-window expects r_lo r_hi");
    const GridSpec base = grid_of(s, o);
    std::vector<GridSpec> grids;
    for (int n : o.levels) grids.push_back({n, n, base.rho_g});
    ManufacturedCase mc{*s.manufactured, s.problem, *s.exact, {}};
    std::optional<std::pair<double, double>> window;
    if (o.fit_window.size() == 2) window = std::make_pair(o.fit_window[0], o.fit_window[1]);
    const ConvergenceRecord rec = convergence_study(mc, grids, window);
    Json levels = Json::array();
    std::vector<std::vector<double>> rows;
    for (const auto& lv : rec.levels) {
        Json j = {{"n_r", lv.grid.n_r}, {"n_a", lv.grid.n_a}, {"l2_error", lv.l2_error}, {"max_error", lv.max_error}};
        if (lv.exponent) j["beta"] = lv.exponent->beta;
        levels.push_back(j);
        rows.push_back({static_cast<double>(lv.grid.n_r), lv.l2_error, lv.max_error});
    }
    if (!o.level_csv.empty()) write_csv(o.level_csv, "n,l2_error,max_error", rows);
    Json res = {{"case", rec.name}, {"levels", levels}};
    res["l2_order"] = rec.l2_order ? Json(*rec.l2_order) : Json(nullptr);
    res["max_order"] = rec.max_order ? Json(*rec.max_order) : Json(nullptr);
    return {{{"rho_g", base.rho_g}, {"levels", o.levels}}, res};
}

Outcome run_norm(const Options& o, const Loaded& l) {
    const auto& s = sector_of(l);
    const Solved sv = solve(s, o);
    require(o.flavor == "H" || o.flavor == "E", ErrorKind::InvalidArgument, "--flavor must be H or E");
    const NormFlavor fl = o.flavor == "H" ? NormFlavor::H : NormFlavor::E;
    const double v = weighted_norm(sv.sol.grid, sv.sol.values, o.a, o.k, fl, o.r_min, o.r_max);
    Json res = {{"a", o.a}, {"k", o.k}, {"flavor", o.flavor}, {"norm", v}};
    if (o.r_min > 0.0 || std::isfinite(o.r_max)) res["window"] = Json::array({o.r_min, std::isfinite(o.r_max) ? Json(o.r_max) : Json(nullptr)});
    return {grid_json(sv.grid), res};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Operator pencils of nonlocal elliptic problems and sector finite differences", "nlpencil"};
    app.set_version_flag("--version", std::string(NLPENCIL_VERSION));
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--problem", o.problem, "Problem file (JSON)")->required();
        sub->add_option("--out", o.out, "Report path (default stdout)");
        sub->add_option("--seed", o.seed, "Seed for random probe matrices");
        sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    };
    auto pencil = [&](CLI::App* sub) {
        common(sub);
        sub->add_option("--nphi", o.nphi, "Chebyshev points per component")->check(CLI::Range(4, 4096));
        sub->add_option("--quad", o.quad, "Quadrature nodes per contour panel")->check(CLI::Range(8, 4096));
    };
    auto sector = [&](CLI::App* sub) {
        common(sub);
        sub->add_option("--nr", o.nr, "Radial grid size (overrides the file)")->check(CLI::PositiveNumber);
        sub->add_option("--na", o.na, "Angular grid size (overrides the file)")->check(CLI::PositiveNumber);
        sub->add_option("--rho", o.rho, "Radial grading exponent (overrides the file)")->check(CLI::PositiveNumber);
    };
    auto halfwidth = [&](CLI::App* sub) {
        sub->add_option("--re-halfwidth", o.re_halfwidth, "Truncation |Re lambda| <= R")->check(CLI::PositiveNumber);
    };

    auto* eigs = app.add_subcommand("eigs", "Eigenvalues inside a rectangle");
    pencil(eigs);
    eigs->add_option("--rect", o.rect, "re_min re_max im_min im_max")->expected(4)->required();
    eigs->add_flag("--include-unstable", o.include_unstable, "Keep eigenvalues that move under grid refinement");

    auto* strip = app.add_subcommand("strip-check", "Eigenvalues and Jordan chains in a horizontal strip");
    pencil(strip);
    halfwidth(strip);
    strip->add_option("--h2", o.h2, "Lower line Im lambda = h2")->required();
    strip->add_option("--h1", o.h1, "Upper line Im lambda = h1")->required();

    auto* jordan = app.add_subcommand("jordan", "Jordan chains at one eigenvalue");
    pencil(jordan);
    jordan->add_option("--lambda", o.lambda, "re im")->expected(2)->required();

    auto* asym = app.add_subcommand("asym", "Regularity transfer between two weights");
    pencil(asym);
    halfwidth(asym);
    asym->add_option("--a1", o.a1, "Source weight")->required();
    asym->add_option("--l1", o.l1, "Source smoothness")->required();
    asym->add_option("--a2", o.a2, "Target weight")->required();
    asym->add_option("--l2", o.l2, "Target smoothness")->required();

    auto* verdict = app.add_subcommand("verdict", "Fredholm verdict on a weight line");
    pencil(verdict);
    halfwidth(verdict);
    verdict->add_option("--a", o.a, "Weight exponent")->required();
    verdict->add_option("--l", o.l, "Smoothness index")->required();

    auto* adjoint = app.add_subcommand("adjoint-check", "Spectrum of the pencil against its formal adjoint");
    pencil(adjoint);
    adjoint->add_option("--rect", o.rect, "re_min re_max im_min im_max")->expected(4)->required();
    adjoint->add_option("--adjoint-nphi", o.adjoint_nphi, "Grid for the adjoint (default 2 nphi)")
        ->check(CLI::Range(4, 4096));

    auto* solve_cmd = app.add_subcommand("sector-solve", "Finite-difference solve on a truncated sector");
    sector(solve_cmd);
    solve_cmd->add_option("--ring-csv", o.ring_csv, "Write r,l2_ring_norm rows");

    auto* expfit = app.add_subcommand("exponent-fit", "Corner exponent from the decay of ring norms");
    sector(expfit);
    expfit->add_option("--r-lo", o.r_lo, "Inner end of the fit window")->check(CLI::PositiveNumber);
    expfit->add_option("--r-hi", o.r_hi, "Outer end of the fit window")->check(CLI::PositiveNumber);
    expfit->add_option("--nphi", o.nphi, "Chebyshev points for the predicted exponent")->check(CLI::Range(4, 4096));
    expfit->add_option("--quad", o.quad, "Quadrature nodes per contour panel")->check(CLI::Range(8, 4096));
    halfwidth(expfit);

    auto* resolvent = app.add_subcommand("resolvent-scan", "Solution norms as the spectral parameter grows");
    resolvent->set_help_flag("--help", "Print this help message and exit");
    sector(resolvent);
    resolvent->add_option("--h", o.h, "Argument of the parameter, c = p^2 e^{ih}");
    resolvent->add_option("--p", o.p_values, "Increasing p values")->delimiter(',');
    resolvent->add_option("--scan-csv", o.scan_csv, "Write p,l2_norm rows");

    auto* conv = app.add_subcommand("convergence", "Grid convergence of a manufactured solution");
    sector(conv);
    conv->add_option("--levels", o.levels, "Grid sizes, each doubling the previous")->delimiter(',');
    conv->add_option("--fit-window", o.fit_window, "r_lo r_hi for exponent fits per level")->expected(2);
    conv->add_option("--level-csv", o.level_csv, "Write n,l2_error,max_error rows");

    auto* norm = app.add_subcommand("norm", "Weighted Sobolev norm of the solution");
    sector(norm);
    norm->add_option("--a", o.a, "Weight exponent")->required();
    norm->add_option("--k", o.k, "Derivative order")->check(CLI::Range(0, 2));
    norm->add_option("--flavor", o.flavor, "H or E")->check(CLI::IsMember({"H", "E"}));
    norm->add_option("--r-min", o.r_min, "Inner radius of the annulus");
    norm->add_option("--r-max", o.r_max, "Outer radius of the annulus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::vector<std::pair<CLI::App*, Outcome (*)(const Options&, const Loaded&)>> verbs = {
        {eigs, run_eigs},          {strip, run_strip},           {jordan, run_jordan},
        {asym, run_asym},          {verdict, run_verdict},       {adjoint, run_adjoint},
        {solve_cmd, run_sector_solve}, {expfit, run_exponent_fit}, {resolvent, run_resolvent},
        {conv, run_convergence},   {norm, run_norm},
    };

    try {
        for (const auto& [sub, fn] : verbs) {
            if (!sub->parsed()) continue;
            const Loaded loaded = load(o);
            Outcome outcome = fn(o, loaded);
            Json report;
            report["verb"] = sub->get_name();
            report["tool_version"] = NLPENCIL_VERSION;
            report["input_digest"] = "sha256:" + sha256_hex(loaded.bytes + "\n" + canonical_flags(*sub));
            report["seed"] = o.seed;
            report["discretization"] = std::move(outcome.discretization);
            report["results"] = std::move(outcome.results);
            const std::string text = report.dump(2) + "\n";
            if (o.out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(o.out, std::ios::binary);
                if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + o.out + "'");
                out << text;
            }
            return 0;
        }
    } catch (const LineNotCleanError& e) {
        std::cerr << "error: " << e.what() << " [LineNotClean, height " << fmt(e.height()) << "]\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.is_usage() ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
