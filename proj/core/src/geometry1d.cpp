#include "bmin/geometry1d.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bmin/numerics.hpp"

namespace bmin::geometry1d {

namespace {

void require_curve_mode(const WeightField& B, const char* who) {
    if (!B.curve_mode())
        throw std::invalid_argument(std::string(who) + ": weight must be in curve mode B(x, y)");
}

}  // namespace

Grid1D::Grid1D(double a, double b, int n) : a_(a), b_(b), n_(n) {
    if (!(a < b)) throw std::invalid_argument("Grid1D: requires a < b");
    if (n < 2) throw std::invalid_argument("Grid1D: requires n >= 2");
    if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("Grid1D: bounds must be finite");
    h_ = (b - a) / n;
}

std::vector<double> Grid1D::nodes() const {
    std::vector<double> xs(static_cast<std::size_t>(n_) + 1);
    for (int i = 0; i <= n_; ++i) xs[static_cast<std::size_t>(i)] = node(i);
    return xs;
}

bool Grid1D::same_as(const Grid1D& other) const {
    return a_ == other.a_ && b_ == other.b_ && n_ == other.n_;
}

GraphCurve::GraphCurve(Grid1D grid, std::vector<double> y) : grid_(grid), y_(std::move(y)) {
    if (y_.size() != static_cast<std::size_t>(grid_.n()) + 1)
        throw std::invalid_argument("GraphCurve: value count must equal n + 1");
    for (double v : y_)
        if (!std::isfinite(v)) throw std::invalid_argument("GraphCurve: values must be finite");
    yp_ = derivative_uniform(y_, grid_.h());
    w_.resize(y_.size());
    for (std::size_t i = 0; i < y_.size(); ++i) w_[i] = std::sqrt(1.0 + yp_[i] * yp_[i]);
}

GraphCurve GraphCurve::sampled(const Grid1D& grid, const std::function<double(double)>& f) {
    std::vector<double> y(static_cast<std::size_t>(grid.n()) + 1);
    for (int i = 0; i <= grid.n(); ++i) y[static_cast<std::size_t>(i)] = f(grid.node(i));
    return GraphCurve(grid, std::move(y));
}

WeightField WeightField::curve(std::string_view b_text) {
    return curve(expr::parse(b_text, {"x", "y"}));
}

WeightField WeightField::curve(expr::Expr b) {
    const auto& vars = b.variables();
    if (vars != std::vector<std::string>{"x", "y"})
        throw std::invalid_argument("WeightField::curve: expression must declare variables {x, y}");
    WeightField f;
    f.curve_mode_ = true;
    f.k_ = 1;
    f.b_ = std::move(b);
    f.bx_ = f.b_.derivative("x");
    f.by_ = f.b_.derivative("y");
    f.byy_ = f.by_.derivative("y");
    return f;
}

WeightField WeightField::graph(std::string_view b_text, int codim) {
    if (codim < 1) throw std::invalid_argument("WeightField::graph: codim must be >= 1");
    std::vector<std::string> vars;
    vars.reserve(static_cast<std::size_t>(codim) + 1);
    for (int i = 1; i <= codim; ++i) vars.push_back("y" + std::to_string(i));
    if (codim == 1) vars.push_back("y");  // alias for y1

    WeightField f;
    f.curve_mode_ = false;
    f.k_ = codim;
    f.b_ = expr::parse(b_text, std::move(vars));

    // A component's partial sums the derivatives over every declared spelling of it.
    auto component_partial = [&](const expr::Expr& e, int alpha) {
        expr::Expr d = e.derivative("y" + std::to_string(alpha + 1));
        if (codim == 1) d = expr::make_binary(expr::BinaryOp::Add, d, e.derivative("y"));
        return d;
    };

    f.partials_.reserve(static_cast<std::size_t>(codim));
    for (int a = 0; a < codim; ++a) f.partials_.push_back(component_partial(f.b_, a));
    f.partials2_.reserve(static_cast<std::size_t>(codim) * static_cast<std::size_t>(codim));
    for (int a = 0; a < codim; ++a)
        for (int c = 0; c < codim; ++c)
            f.partials2_.push_back(component_partial(f.partials_[static_cast<std::size_t>(a)], c));
    return f;
}

double WeightField::b(double x, double y) const {
    const double v[2] = {x, y};
    return b_.eval(v);
}

double WeightField::bx(double x, double y) const {
    const double v[2] = {x, y};
    return bx_.eval(v);
}

double WeightField::by(double x, double y) const {
    const double v[2] = {x, y};
    return by_.eval(v);
}

double WeightField::byy(double x, double y) const {
    const double v[2] = {x, y};
    return byy_.eval(v);
}

double WeightField::eval_graph(const expr::Expr& e, std::span<const double> yv) const {
    if (static_cast<int>(yv.size()) != k_)
        throw std::invalid_argument("WeightField: component count mismatch");
    if (k_ == 1) {
        const double v[2] = {yv[0], yv[0]};  // y1 and its alias y
        return e.eval(v);
    }
    return e.eval(yv);
}

double WeightField::b(std::span<const double> yv) const {
    if (curve_mode_) throw std::invalid_argument("WeightField: curve-mode weight used as graph weight");
    return eval_graph(b_, yv);
}

double WeightField::by(int component, std::span<const double> yv) const {
    if (curve_mode_) throw std::invalid_argument("WeightField: curve-mode weight used as graph weight");
    return eval_graph(partials_[static_cast<std::size_t>(component)], yv);
}

double WeightField::byy(int component_i, int component_j, std::span<const double> yv) const {
    if (curve_mode_) throw std::invalid_argument("WeightField: curve-mode weight used as graph weight");
    return eval_graph(
        partials2_[static_cast<std::size_t>(component_i) * static_cast<std::size_t>(k_) +
                   static_cast<std::size_t>(component_j)],
        yv);
}

Perturbation::Perturbation(Grid1D grid, std::vector<double> xi)
    : grid_(grid), xi_(std::move(xi)) {
    if (xi_.size() != static_cast<std::size_t>(grid_.n()) + 1)
        throw std::invalid_argument("Perturbation: value count must equal n + 1");
    if (xi_.front() != 0.0 || xi_.back() != 0.0)
        throw std::invalid_argument("Perturbation: endpoint values must be exactly zero");
}

Perturbation Perturbation::sampled(const Grid1D& grid, const std::function<double(double)>& f) {
    std::vector<double> xi(static_cast<std::size_t>(grid.n()) + 1, 0.0);
    for (int i = 1; i < grid.n(); ++i) xi[static_cast<std::size_t>(i)] = f(grid.node(i));
    return Perturbation(grid, std::move(xi));
}

double grim_reaper(double x) {
    // The double nearest pi/2 still lies strictly inside the open interval, so the
    // closed double range is accepted; one ulp beyond it cos goes nonpositive.
    if (!(std::fabs(x) <= std::numbers::pi / 2))
        throw std::domain_error("grim_reaper: |x| must be < pi/2");
    return -std::log(std::cos(x));
}

double weighted_length(const GraphCurve& c, const WeightField& B) {
    require_curve_mode(B, "weighted_length");
    const auto& g = c.grid();
    std::vector<double> f(c.y().size());
    for (std::size_t i = 0; i < f.size(); ++i)
        f[i] = c.w()[i] * std::exp(B.b(g.node(static_cast<int>(i)), c.y()[i]));
    return trapezoid(f, g.h());
}

double first_variation(const GraphCurve& c, const Perturbation& xi, const WeightField& B) {
    require_curve_mode(B, "first_variation");
    const auto& g = c.grid();
    if (!xi.grid().same_as(g))
        throw std::invalid_argument("first_variation: perturbation grid mismatch");
    const std::vector<double> xip = derivative_uniform(xi.values(), g.h());
    std::vector<double> f(c.y().size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = g.node(static_cast<int>(i));
        const double y = c.y()[i];
        const double w = c.w()[i];
        f[i] = (c.yp()[i] * xip[i] / w + w * B.by(x, y) * xi.values()[i]) * std::exp(B.b(x, y));
    }
    return trapezoid(f, g.h());
}

double second_variation_general(const GraphCurve& c, const Perturbation& xi) {
    const auto& g = c.grid();
    if (!xi.grid().same_as(g))
        throw std::invalid_argument("second_variation_general: perturbation grid mismatch");
    const std::vector<double> xip = derivative_uniform(xi.values(), g.h());
    std::vector<double> f(c.y().size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double yp = c.yp()[i];
        const double w = c.w()[i];
        const double xp = xip[i];
        const double xv = xi.values()[i];
        const double integrand = xp * xp / w - yp * yp * xp * xp / (w * w * w) +
                                 2.0 * yp * xp * xv / w + w * xv * xv;
        f[i] = integrand * std::exp(c.y()[i]);
    }
    return trapezoid(f, g.h());
}

double second_variation_general(const GraphCurve& c, const Perturbation& xi,
                                const WeightField& B) {
    require_curve_mode(B, "second_variation_general");
    const auto& g = c.grid();
    for (std::size_t i = 0; i < c.y().size(); ++i) {
        const double x = g.node(static_cast<int>(i));
        const double y = c.y()[i];
        const double scale = std::max(1.0, std::fabs(y));
        if (std::fabs(B.b(x, y) - y) > 1e-12 * scale || std::fabs(B.bx(x, y)) > 1e-12 ||
            std::fabs(B.by(x, y) - 1.0) > 1e-12)
            throw std::invalid_argument("second_variation_general: defined only for B(x, y) = y");
    }
    return second_variation_general(c, xi);
}

double second_variation_critical(const GraphCurve& c, const Perturbation& xi) {
    const auto& g = c.grid();
    if (!xi.grid().same_as(g))
        throw std::invalid_argument("second_variation_critical: perturbation grid mismatch");
    const std::vector<double> xip = derivative_uniform(xi.values(), g.h());
    std::vector<double> f(c.y().size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double w = c.w()[i];
        f[i] = xip[i] * xip[i] / (w * w * w) * std::exp(c.y()[i]);
    }
    return trapezoid(f, g.h());
}

std::vector<double> el_residual(const GraphCurve& c, const WeightField& B) {
    require_curve_mode(B, "el_residual");
    const auto& g = c.grid();
    const int n = g.n();
    if (n < 3) throw std::invalid_argument("el_residual: requires n >= 3");
    const double h = g.h();
    const auto y = c.y();

    // Half-node flux F_{i+1/2} = e^{B(x_m, y_m)} * s / w(s), s the cell slope.
    auto flux = [&](int i) {
        const double xm = 0.5 * (g.node(i) + g.node(i + 1));
        const double ym = 0.5 * (y[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i) + 1]);
        const double s = (y[static_cast<std::size_t>(i) + 1] - y[static_cast<std::size_t>(i)]) / h;
        return std::exp(B.b(xm, ym)) * s / std::sqrt(1.0 + s * s);
    };

    std::vector<double> r(static_cast<std::size_t>(n) - 1);
    double f_left = flux(0);
    for (int i = 1; i < n; ++i) {
        const double f_right = flux(i);
        const double x = g.node(i);
        const double yi = y[static_cast<std::size_t>(i)];
        r[static_cast<std::size_t>(i) - 1] = -std::exp(-B.b(x, yi)) * (f_right - f_left) / h +
                                             c.w()[static_cast<std::size_t>(i)] * B.by(x, yi);
        f_left = f_right;
    }
    return r;
}

std::vector<Vec2> bminimal_residual_geometric(const GraphCurve& c, const WeightField& B) {
    require_curve_mode(B, "bminimal_residual_geometric");
    const auto& g = c.grid();
    const int n = g.n();
    if (n < 3) throw std::invalid_argument("bminimal_residual_geometric: requires n >= 3");
    const double h = g.h();
    const auto y = c.y();

    std::vector<Vec2> r(static_cast<std::size_t>(n) - 1);
    for (int i = 1; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double ypp = (y[k + 1] - 2.0 * y[k] + y[k - 1]) / (h * h);
        const double w = c.w()[k];
        const double kappa = ypp / (w * w * w);
        const double nx = -c.yp()[k] / w;
        const double ny = 1.0 / w;
        const double x = g.node(i);
        const double proj = B.bx(x, y[k]) * nx + B.by(x, y[k]) * ny;
        r[k - 1] = Vec2{(kappa - proj) * nx, (kappa - proj) * ny};
    }
    return r;
}

CurveFrame curve_frame(const GraphCurve& c) {
    const auto& g = c.grid();
    const std::vector<double> ypp = second_derivative_uniform(c.y(), g.h());
    const std::size_t m = c.y().size();
    CurveFrame f;
    f.tx.resize(m);
    f.ty.resize(m);
    f.nx.resize(m);
    f.ny.resize(m);
    f.kappa.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double w = c.w()[i];
        const double yp = c.yp()[i];
        f.tx[i] = 1.0 / w;
        f.ty[i] = yp / w;
        f.nx[i] = -yp / w;
        f.ny[i] = 1.0 / w;
        f.kappa[i] = ypp[i] / (w * w * w);
    }
    return f;
}

}  // namespace bmin::geometry1d
