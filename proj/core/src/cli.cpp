#include "bmin/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>

#include <json.hpp>

#include "bmin/flow.hpp"
#include "bmin/numerics.hpp"
#include "bmin/solvers.hpp"
#include "bmin/stability.hpp"

namespace bmin::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using geometry1d::GraphCurve;
using geometry1d::Grid1D;
using geometry1d::Perturbation;
using geometry1d::WeightField;

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kGrimDomainSlack = 1e-9;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << text;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string text;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i) text += ',';
        text += header[i];
    }
    text += '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) text += ',';
            text += fmt17(row[i]);
        }
        text += '\n';
    }
    write_text(path, text);
}

void write_result_json(const fs::path& dir, const json& doc) {
    write_text(dir / "result.json", doc.dump(2) + "\n");
}

json report_to_json(const solvers::SolveReport& report) {
    json j;
    j["status"] = solvers::to_string(report.status);
    j["iterations"] = report.iterations;
    j["final_residual"] = report.final_residual;
    j["residual_history"] = report.residual_history;
    j["step_history"] = report.step_history;
    return j;
}

double rel_err(double value, double reference) {
    return std::fabs(value - reference) / std::max(1.0, std::fabs(reference));
}

// Smooth random curves and compactly supported perturbations for the variation task.
GraphCurve random_curve(const Grid1D& grid, Rng& rng) {
    const double c0 = rng.uniform(-0.7, 0.7);
    const double c1 = rng.uniform(-0.7, 0.7);
    const double c2 = rng.uniform(-0.7, 0.7);
    const double c3 = rng.uniform(-0.7, 0.7);
    const double len = grid.b() - grid.a();
    return GraphCurve::sampled(grid, [&](double x) {
        const double s = (x - grid.a()) / len;
        return c0 + c1 * s + c2 * std::sin(std::numbers::pi * s) +
               c3 * std::cos(2.0 * std::numbers::pi * s);
    });
}

Perturbation random_perturbation(const Grid1D& grid, Rng& rng) {
    const double d1 = rng.uniform(-1.0, 1.0);
    const double d2 = rng.uniform(-1.0, 1.0);
    const double d3 = rng.uniform(-1.0, 1.0);
    const double len = grid.b() - grid.a();
    return Perturbation::sampled(grid, [&](double x) {
        const double s = (x - grid.a()) / len;
        return d1 * std::sin(std::numbers::pi * s) + d2 * std::sin(2.0 * std::numbers::pi * s) +
               d3 * std::sin(3.0 * std::numbers::pi * s);
    });
}

double fd_first_variation(const GraphCurve& c, const Perturbation& xi, const WeightField& B,
                          double t) {
    std::vector<double> plus(c.y().begin(), c.y().end());
    std::vector<double> minus(plus);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        plus[i] += t * xi.values()[i];
        minus[i] -= t * xi.values()[i];
    }
    const double ip = geometry1d::weighted_length(GraphCurve(c.grid(), plus), B);
    const double im = geometry1d::weighted_length(GraphCurve(c.grid(), minus), B);
    return (ip - im) / (2.0 * t);
}

double fd_second_variation(const GraphCurve& c, const Perturbation& xi, const WeightField& B,
                           double t) {
    std::vector<double> plus(c.y().begin(), c.y().end());
    std::vector<double> minus(plus);
    for (std::size_t i = 0; i < plus.size(); ++i) {
        plus[i] += t * xi.values()[i];
        minus[i] -= t * xi.values()[i];
    }
    const double ip = geometry1d::weighted_length(GraphCurve(c.grid(), plus), B);
    const double im = geometry1d::weighted_length(GraphCurve(c.grid(), minus), B);
    const double i0 = geometry1d::weighted_length(c, B);
    return (ip - 2.0 * i0 + im) / (t * t);
}

// ---------------------------------------------------------------------------
// Config loading
// ---------------------------------------------------------------------------

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "task",      "domain",     "n",           "m1",          "m2",
        "grid_sizes", "B",         "boundary",    "initial",     "test_function",
        "epsilon",   "m",          "t_end",       "dt",          "samples",
        "num_pairs", "tol_residual", "max_iter",  "riccati_step", "output_dir",
        "seed",      "quiet"};
    return keys;
}

[[noreturn]] void config_fail(const std::string& msg) { throw ConfigError(msg); }

double number_at(const json& j, const char* key) {
    if (!j.at(key).is_number()) config_fail(std::string("key '") + key + "' must be a number");
    return j.at(key).get<double>();
}

int int_at(const json& j, const char* key) {
    if (!j.at(key).is_number_integer()) config_fail(std::string("key '") + key + "' must be an integer");
    return j.at(key).get<int>();
}

std::string expr_string(const json& v, const char* key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number()) return fmt17(v.get<double>());
    config_fail(std::string("key '") + key + "' must be a string or number");
}

RunConfig load_fields(const json& doc, RunConfig cfg) {
    cfg.task = doc.at("task").get<std::string>();

    if (doc.contains("domain")) {
        const json& d = doc.at("domain");
        if (!d.is_array()) config_fail("'domain' must be [a, b] or [[a1, b1], [a2, b2]]");
        if (d.size() == 2 && d[0].is_number()) {
            cfg.domain1 = {d[0].get<double>(), d[1].get<double>()};
            cfg.has_domain = true;
        } else if (d.size() == 2 && d[0].is_array()) {
            if (d[0].size() != 2 || d[1].size() != 2) config_fail("'domain' axis entries need [a, b]");
            cfg.domain1 = {d[0][0].get<double>(), d[0][1].get<double>()};
            cfg.domain2 = {d[1][0].get<double>(), d[1][1].get<double>()};
            cfg.has_domain = cfg.has_domain2 = true;
        } else {
            config_fail("'domain' must be [a, b] or [[a1, b1], [a2, b2]]");
        }
    }
    if (doc.contains("n")) cfg.n = int_at(doc, "n");
    if (doc.contains("m1")) cfg.m1 = int_at(doc, "m1");
    if (doc.contains("m2")) cfg.m2 = int_at(doc, "m2");
    if (doc.contains("grid_sizes")) {
        for (const auto& v : doc.at("grid_sizes")) {
            if (!v.is_number_integer()) config_fail("'grid_sizes' must hold integers");
            cfg.grid_sizes.push_back(v.get<int>());
        }
    }
    if (doc.contains("B")) cfg.b_text = expr_string(doc.at("B"), "B");
    if (doc.contains("boundary")) {
        const json& b = doc.at("boundary");
        if (b.is_array()) {
            for (const auto& v : b) cfg.boundary.push_back(expr_string(v, "boundary"));
        } else {
            cfg.boundary.push_back(expr_string(b, "boundary"));
        }
    }
    if (doc.contains("initial")) cfg.initial = expr_string(doc.at("initial"), "initial");
    if (doc.contains("test_function"))
        cfg.test_function = expr_string(doc.at("test_function"), "test_function");
    if (doc.contains("epsilon")) cfg.epsilon = number_at(doc, "epsilon");
    if (doc.contains("m")) cfg.m = int_at(doc, "m");
    if (doc.contains("t_end")) cfg.t_end = number_at(doc, "t_end");
    if (doc.contains("dt")) cfg.dt = number_at(doc, "dt");
    if (doc.contains("samples")) cfg.samples = int_at(doc, "samples");
    if (doc.contains("num_pairs")) cfg.num_pairs = int_at(doc, "num_pairs");
    if (doc.contains("tol_residual")) cfg.tol_residual = number_at(doc, "tol_residual");
    if (doc.contains("max_iter")) cfg.max_iter = int_at(doc, "max_iter");
    if (doc.contains("riccati_step")) cfg.riccati_step = number_at(doc, "riccati_step");
    if (doc.contains("output_dir")) cfg.output_dir = doc.at("output_dir").get<std::string>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("quiet")) cfg.quiet = doc.at("quiet").get<bool>();
    return cfg;
}

}  // namespace

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_fail("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        config_fail(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) config_fail("config must be a JSON object");

    for (const auto& [key, value] : doc.items()) {
        (void)value;
        if (!known_keys().count(key)) config_fail("unknown config key '" + key + "'");
    }

    RunConfig cfg;
    if (!doc.contains("task")) config_fail("missing required key 'task'");
    try {
        return load_fields(doc, std::move(cfg));
    } catch (const json::exception& e) {
        config_fail(std::string("invalid config value: ") + e.what());
    }
}
namespace {

// ---------------------------------------------------------------------------
// Task runners. Each validates (throwing ConfigError), computes, then writes.
// ---------------------------------------------------------------------------

struct TaskIO {
    fs::path dir;
    bool quiet;
    void note(const std::string& line) const {
        if (!quiet) std::cout << line << "\n";
    }
};

void require_grim_domain(double a, double b) {
    if (std::max(std::fabs(a), std::fabs(b)) >= kHalfPi - kGrimDomainSlack)
        config_fail("domain must lie strictly inside (-pi/2, pi/2); |endpoint| < pi/2 - 1e-9");
}

expr::Expr parse_config_expr(const std::string& text, std::vector<std::string> vars,
                             const char* what) {
    try {
        return expr::parse(text, std::move(vars));
    } catch (const expr::ParseError& e) {
        config_fail(std::string("invalid ") + what + " expression: " + e.what());
    }
}

WeightField parse_weight(const std::string& text) {
    try {
        return WeightField::curve(text);
    } catch (const expr::ParseError& e) {
        config_fail(std::string("invalid B expression: ") + e.what());
    }
}

int run_verify(const RunConfig& cfg, const TaskIO& io) {
    const double a = cfg.has_domain ? cfg.domain1[0] : -1.3;
    const double b = cfg.has_domain ? cfg.domain1[1] : 1.3;
    if (!(a < b)) config_fail("verify: domain must satisfy a < b");
    require_grim_domain(a, b);
    std::vector<int> sizes = cfg.grid_sizes.empty() ? std::vector<int>{100, 200, 400}
                                                    : cfg.grid_sizes;
    for (int n : sizes)
        if (n < 4) config_fail("verify: grid sizes must be >= 4");

    const WeightField B = WeightField::curve("y");
    std::vector<double> el_sup, geo_sup;
    for (int n : sizes) {
        const Grid1D grid(a, b, n);
        const GraphCurve c = GraphCurve::sampled(grid, geometry1d::grim_reaper);
        el_sup.push_back(sup_norm(geometry1d::el_residual(c, B)));
        double gs = 0.0;
        for (const auto& v : geometry1d::bminimal_residual_geometric(c, B))
            gs = std::max(gs, std::hypot(v.x, v.y));
        geo_sup.push_back(gs);
    }

    std::vector<double> el_ratio, geo_ratio;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
        el_ratio.push_back(el_sup[i] / el_sup[i + 1]);
        geo_ratio.push_back(geo_sup[i] / geo_sup[i + 1]);
    }

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        rows.push_back({static_cast<double>(sizes[i]), el_sup[i], geo_sup[i]});
    write_csv(io.dir / "verify.csv", {"n", "el_residual_sup", "geometric_residual_sup"}, rows);

    json result;
    result["task"] = "verify";
    result["B"] = "y";
    result["domain"] = {a, b};
    result["grid_sizes"] = sizes;
    result["el_residual_sup"] = el_sup;
    result["geometric_residual_sup"] = geo_sup;
    result["el_ratio"] = el_ratio;
    result["geometric_ratio"] = geo_ratio;
    write_result_json(io.dir, result);
    io.note("verify: wrote residual sup-norms for " + std::to_string(sizes.size()) + " grids");
    return 0;
}

int run_solve1d(const RunConfig& cfg, const TaskIO& io) {
    if (!cfg.has_domain) config_fail("solve1d: missing 'domain'");
    const double a = cfg.domain1[0];
    const double b = cfg.domain1[1];
    if (!(a < b)) config_fail("solve1d: domain must satisfy a < b");
    const int n = cfg.n > 0 ? cfg.n : 200;
    if (n < 3) config_fail("solve1d: n must be >= 3");
    const WeightField B = parse_weight(cfg.b_text);
    if (cfg.boundary.size() != 2) config_fail("solve1d: 'boundary' must hold two entries");

    auto boundary_value = [&](const std::string& text, double x) {
        const expr::Expr e = parse_config_expr(text, {"x"}, "boundary");
        try {
            return e.eval(std::span<const double>(&x, 1));
        } catch (const expr::EvalError& err) {
            config_fail(std::string("boundary evaluation failed: ") + err.what());
        }
    };
    const double ya = boundary_value(cfg.boundary[0], a);
    const double yb = boundary_value(cfg.boundary[1], b);

    solvers::SolveConfig scfg;
    scfg.tol_residual = cfg.tol_residual;
    scfg.max_iter = cfg.max_iter;

    const Grid1D grid(a, b, n);
    auto [curve, report] = solvers::solve_curve_bvp(grid, ya, yb, B, scfg);
    const std::vector<double> residual = geometry1d::el_residual(curve, B);

    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= n; ++i) {
        const double r = (i >= 1 && i <= n - 1) ? residual[static_cast<std::size_t>(i) - 1] : 0.0;
        rows.push_back({grid.node(i), curve.y()[static_cast<std::size_t>(i)], r});
    }
    write_csv(io.dir / "solve1d.csv", {"x", "y", "residual"}, rows);

    json result;
    result["task"] = "solve1d";
    result["B"] = cfg.b_text;
    result["domain"] = {a, b};
    result["n"] = n;
    result["boundary_values"] = {ya, yb};
    result["report"] = report_to_json(report);
    result["recomputed_residual_sup"] = sup_norm(residual);
    result["weighted_length"] = geometry1d::weighted_length(curve, B);
    write_result_json(io.dir, result);

    io.note(std::string("solve1d: ") + solvers::to_string(report.status) + ", sup residual " +
            fmt17(report.final_residual));
    return report.status == solvers::SolveStatus::Converged ? 0 : 2;
}

int run_solve2d(const RunConfig& cfg, const TaskIO& io) {
    if (!cfg.has_domain || !cfg.has_domain2)
        config_fail("solve2d: 'domain' must be [[a1, b1], [a2, b2]]");
    if (cfg.b_text != "y") config_fail("solve2d: only B = y is supported");
    const int m1 = cfg.m1 > 0 ? cfg.m1 : 40;
    const int m2 = cfg.m2 > 0 ? cfg.m2 : 40;
    if (m1 < 3 || m2 < 3) config_fail("solve2d: m1 and m2 must be >= 3");
    if (!(cfg.domain1[0] < cfg.domain1[1]) || !(cfg.domain2[0] < cfg.domain2[1]))
        config_fail("solve2d: domain must satisfy a < b per axis");
    if (cfg.boundary.size() != 1) config_fail("solve2d: 'boundary' must hold one expression");
    const expr::Expr dirichlet = parse_config_expr(cfg.boundary[0], {"x1", "x2"}, "boundary");

    const graphic::GridND grid = graphic::GridND::rect(cfg.domain1[0], cfg.domain1[1], m1,
                                                       cfg.domain2[0], cfg.domain2[1], m2);
    solvers::SolveConfig scfg;
    scfg.tol_residual = cfg.tol_residual;
    scfg.max_iter = cfg.max_iter;

    auto [field, report] = solvers::solve_graph_pde_2d(grid, dirichlet, scfg);
    const WeightField B = WeightField::graph("y", 1);
    const graphic::GraphField residual = graphic::graphic_el_residual(field, B);

    std::vector<std::vector<double>> rows;
    double sup = 0.0;
    for (int j = 0; j <= m2; ++j) {
        for (int i = 0; i <= m1; ++i) {
            const int id = grid.index(i, j);
            const double r = grid.is_boundary(id) ? 0.0 : residual.value(id, 0);
            sup = std::max(sup, std::fabs(r));
            rows.push_back({grid.coord(0, i), grid.coord(1, j), field.value(id, 0), r});
        }
    }
    write_csv(io.dir / "solve2d.csv", {"x1", "x2", "y", "residual"}, rows);

    json result;
    result["task"] = "solve2d";
    result["B"] = "y";
    result["domain"] = {{cfg.domain1[0], cfg.domain1[1]}, {cfg.domain2[0], cfg.domain2[1]}};
    result["m1"] = m1;
    result["m2"] = m2;
    result["report"] = report_to_json(report);
    result["recomputed_residual_sup"] = sup;
    result["graphic_functional"] = graphic::graphic_functional(field, B);
    write_result_json(io.dir, result);

    io.note(std::string("solve2d: ") + solvers::to_string(report.status) + ", sup residual " +
            fmt17(report.final_residual));
    return report.status == solvers::SolveStatus::Converged ? 0 : 2;
}

int run_stability(const RunConfig& cfg, const TaskIO& io) {
    if (!(cfg.epsilon >= 0.0)) config_fail("stability: epsilon must be >= 0");
    const int m = cfg.m > 0 ? cfg.m : 2000;
    if (m < 3) config_fail("stability: m must be >= 3");
    const expr::Expr test_fn = parse_config_expr(cfg.test_function, {"x"}, "test_function");

    const stability::SmoczykProblem prob(cfg.epsilon);

    const stability::SLSystem sys = stability::assemble_sl(prob, m);
    const double lambda_min = stability::min_eigenvalue(sys.A, sys.mass);
    const stability::SLSystem sys2 = stability::assemble_sl(prob, 2 * m);
    const double lambda_min_2m = stability::min_eigenvalue(sys2.A, sys2.mass);

    const Grid1D ugrid(stability::SmoczykProblem::left(), stability::SmoczykProblem::right(), m);
    const Perturbation u_test = Perturbation::sampled(
        ugrid, [&](double x) { return test_fn.eval(std::span<const double>(&x, 1)); });
    const stability::GapResult test_gap = stability::inequality_gap(u_test, prob);

    // Random battery: polynomial times cos x, compactly supported by construction.
    Rng rng(cfg.seed);
    double gap_min = test_gap.gap;
    const int battery = 200;
    for (int t = 0; t < battery; ++t) {
        double coef[5];
        for (double& c : coef) c = rng.uniform(-1.0, 1.0);
        const Perturbation u = Perturbation::sampled(ugrid, [&](double x) {
            const double s = x / kHalfPi;
            const double poly = coef[0] + s * (coef[1] + s * (coef[2] + s * (coef[3] + s * coef[4])));
            return poly * std::cos(x);
        });
        gap_min = std::min(gap_min, stability::inequality_gap(u, prob).gap);
    }

    bool riccati_positive = false;
    double riccati_step = 0.0;
    double css_residual = std::numeric_limits<double>::quiet_NaN();
    std::optional<stability::RiccatiSolution> sol;
    if (cfg.epsilon > 0.0) {
        const double step0 = cfg.riccati_step > 0.0
                                 ? cfg.riccati_step
                                 : std::min(1e-3, cfg.epsilon / 10.0);
        if (cfg.riccati_step > 0.0)
            sol = stability::solve_riccati_v(prob, step0);
        else
            sol = stability::solve_riccati_auto(prob, step0);
        riccati_positive = sol->positive();
        riccati_step = sol->step();
        if (riccati_positive) css_residual = stability::completing_square_check(u_test, *sol, prob);
    }

    std::vector<std::vector<double>> rows;
    for (int i = 0; i <= m; ++i) {
        const double x = ugrid.node(i);
        const double v = sol && riccati_positive ? sol->v_at(x)
                                                 : std::numeric_limits<double>::quiet_NaN();
        const double phi = sol && riccati_positive ? sol->phi_at(x)
                                                   : std::numeric_limits<double>::quiet_NaN();
        rows.push_back({x, prob.p(x), prob.f(x), v, phi});
    }
    write_csv(io.dir / "stability.csv", {"x", "p", "f", "v", "phi"}, rows);
    write_csv(io.dir / "eigen.csv", {"m", "lambda_min"},
              {{static_cast<double>(m), lambda_min},
               {static_cast<double>(2 * m), lambda_min_2m}});

    json result;
    result["task"] = "stability";
    result["epsilon"] = cfg.epsilon;
    result["m"] = m;
    result["lambda_min"] = lambda_min;
    result["lambda_min_2m"] = lambda_min_2m;
    result["riccati_positive"] = riccati_positive;
    result["riccati_step"] = riccati_step;
    result["gap_battery_min"] = gap_min;
    result["gap_battery_size"] = battery;
    json tg;
    tg["u"] = cfg.test_function;
    tg["lhs"] = test_gap.lhs;
    tg["rhs"] = test_gap.rhs;
    tg["gap"] = test_gap.gap;
    result["test_gap"] = tg;
    result["completing_square_residual"] = css_residual;
    write_result_json(io.dir, result);

    io.note("stability: lambda_min " + fmt17(lambda_min) +
            (cfg.epsilon > 0.0
                 ? std::string(", riccati ") + (riccati_positive ? "positive" : "NOT positive")
                 : std::string(", riccati skipped (epsilon = 0)")));
    if (cfg.epsilon > 0.0 && !riccati_positive) return 3;
    return 0;
}

int run_flow(const RunConfig& cfg, const TaskIO& io) {
    const double a = cfg.has_domain ? cfg.domain1[0] : -1.2;
    const double b = cfg.has_domain ? cfg.domain1[1] : 1.2;
    if (!(a < b)) config_fail("flow: domain must satisfy a < b");
    const int n = cfg.n > 0 ? cfg.n : 240;
    if (n < 3) config_fail("flow: n must be >= 3");
    if (!(cfg.t_end > 0.0)) config_fail("flow: t_end must be > 0");
    if (cfg.samples < 2) config_fail("flow: samples must be >= 2");

    const std::string initial_text = cfg.initial.empty() ? "-log(cos(x))" : cfg.initial;
    if (cfg.initial.empty()) require_grim_domain(a, b);
    const expr::Expr initial_expr = parse_config_expr(initial_text, {"x"}, "initial");

    const Grid1D grid(a, b, n);
    GraphCurve initial = [&] {
        try {
            return GraphCurve::sampled(grid, [&](double x) {
                return initial_expr.eval(std::span<const double>(&x, 1));
            });
        } catch (const expr::EvalError& e) {
            config_fail(std::string("initial curve evaluation failed: ") + e.what());
        }
    }();

    std::string left_text, right_text;
    if (cfg.boundary.empty()) {
        // Co-moving default: the initial endpoint values translated at unit speed.
        left_text = fmt17(initial.y().front()) + "+t";
        right_text = fmt17(initial.y().back()) + "+t";
    } else if (cfg.boundary.size() == 2) {
        left_text = cfg.boundary[0];
        right_text = cfg.boundary[1];
    } else {
        config_fail("flow: 'boundary' must hold two expressions in t");
    }
    flow::BoundaryRule boundary{parse_config_expr(left_text, {"t"}, "boundary"),
                                parse_config_expr(right_text, {"t"}, "boundary")};

    const double h = grid.h();
    const double dt = cfg.dt > 0.0 ? cfg.dt : 0.4 * h * h;
    if (dt > 0.4 * h * h * (1.0 + 1e-12))
        config_fail("flow: dt exceeds the stability bound 0.4 h^2");

    const std::vector<flow::FlowState> trajectory =
        flow::evolve_csf(initial, cfg.t_end, dt, boundary, cfg.samples);

    std::vector<std::string> header = {"t"};
    for (int i = 0; i <= n; ++i) header.push_back(fmt17(grid.node(i)));
    std::vector<std::vector<double>> rows;
    for (const auto& state : trajectory) {
        std::vector<double> row = {state.t};
        row.insert(row.end(), state.curve.y().begin(), state.curve.y().end());
        rows.push_back(std::move(row));
    }
    write_csv(io.dir / "flow.csv", header, rows);

    json result;
    result["task"] = "flow";
    result["domain"] = {a, b};
    result["n"] = n;
    result["dt"] = dt;
    result["t_end"] = cfg.t_end;
    result["samples"] = static_cast<int>(trajectory.size());
    json times = json::array();
    for (const auto& state : trajectory) times.push_back(state.t);
    result["sample_times"] = times;
    write_result_json(io.dir, result);

    io.note("flow: evolved to t = " + fmt17(cfg.t_end) + " with dt = " + fmt17(dt));
    return 0;
}

int run_variation(const RunConfig& cfg, const TaskIO& io) {
    const double a = cfg.has_domain ? cfg.domain1[0] : -1.2;
    const double b = cfg.has_domain ? cfg.domain1[1] : 1.2;
    if (!(a < b)) config_fail("variation: domain must satisfy a < b");
    std::vector<int> sizes = cfg.grid_sizes.empty() ? std::vector<int>{100, 200} : cfg.grid_sizes;
    for (int n : sizes)
        if (n < 4) config_fail("variation: grid sizes must be >= 4");
    if (cfg.num_pairs < 1) config_fail("variation: num_pairs must be >= 1");
    const WeightField B = parse_weight(cfg.b_text);
    const bool second_defined = cfg.b_text == "y";

    std::vector<std::vector<double>> rows;
    for (int n : sizes) {
        const Grid1D grid(a, b, n);
        Rng rng(cfg.seed);
        double i_value = 0.0;
        double d1 = 0.0, d2 = 0.0;
        for (int p = 0; p < cfg.num_pairs; ++p) {
            const GraphCurve c = random_curve(grid, rng);
            const Perturbation xi = random_perturbation(grid, rng);
            if (p == 0) i_value = geometry1d::weighted_length(c, B);
            const double fv = geometry1d::first_variation(c, xi, B);
            d1 = std::max(d1, rel_err(fv, fd_first_variation(c, xi, B, 1e-6)));
            if (second_defined) {
                const double sv = geometry1d::second_variation_general(c, xi);
                d2 = std::max(d2, rel_err(sv, fd_second_variation(c, xi, B, 1e-4)));
            }
        }
        rows.push_back({static_cast<double>(n), i_value, d1,
                        second_defined ? d2 : std::numeric_limits<double>::quiet_NaN()});
    }
    write_csv(io.dir / "variation.csv", {"n", "I", "delta1_err", "delta2_err"}, rows);

    json result;
    result["task"] = "variation";
    result["B"] = cfg.b_text;
    result["domain"] = {a, b};
    result["grid_sizes"] = sizes;
    result["num_pairs"] = cfg.num_pairs;
    result["seed"] = cfg.seed;
    json table = json::array();
    for (const auto& row : rows) {
        json r;
        r["n"] = static_cast<int>(row[0]);
        r["I"] = row[1];
        r["delta1_err"] = row[2];
        r["delta2_err"] = row[3];
        table.push_back(r);
    }
    result["rows"] = table;
    write_result_json(io.dir, result);

    io.note("variation: checked " + std::to_string(cfg.num_pairs) + " pairs on " +
            std::to_string(sizes.size()) + " grids");
    return 0;
}

}  // namespace

int run(const RunConfig& config) {
    static const std::set<std::string> tasks = {"verify", "solve1d", "solve2d",
                                                "stability", "flow", "variation"};
    if (!tasks.count(config.task))
        config_fail("unknown task '" + config.task + "' (expected verify, solve1d, solve2d, "
                    "stability, flow or variation)");
    if (!(config.tol_residual > 0.0)) config_fail("tol_residual must be > 0");
    if (config.max_iter < 1) config_fail("max_iter must be >= 1");
    if (config.output_dir.empty()) config_fail("output_dir must not be empty");

    // Each runner finishes its validation (ConfigError, exit 1) before its first write,
    // so a rejected config leaves no output files behind.
    const RunConfig& cfg = config;
    TaskIO io{fs::path(cfg.output_dir), cfg.quiet};

    auto execute = [&](auto&& runner) {
        std::error_code ec;
        fs::create_directories(io.dir, ec);
        if (ec) config_fail("cannot create output directory '" + cfg.output_dir + "'");
        return runner();
    };

    try {
        if (cfg.task == "verify") return execute([&] { return run_verify(cfg, io); });
        if (cfg.task == "solve1d") return execute([&] { return run_solve1d(cfg, io); });
        if (cfg.task == "solve2d") return execute([&] { return run_solve2d(cfg, io); });
        if (cfg.task == "stability") return execute([&] { return run_stability(cfg, io); });
        if (cfg.task == "flow") return execute([&] { return run_flow(cfg, io); });
        return execute([&] { return run_variation(cfg, io); });
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace bmin::cli
