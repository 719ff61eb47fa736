#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "bmin/expr.hpp"

namespace bmin::geometry1d {

/// Uniform grid x_i = a + i*h on [a, b], i = 0..n, h = (b - a)/n.
class Grid1D {
public:
    Grid1D(double a, double b, int n);
    double a() const { return a_; }
    double b() const { return b_; }
    int n() const { return n_; }
    double h() const { return h_; }
    double node(int i) const { return i == n_ ? b_ : a_ + i * h_; }
    std::vector<double> nodes() const;
    bool same_as(const Grid1D& other) const;

private:
    double a_, b_, h_;
    int n_;
};

/// Graph curve y(x) sampled on a grid, with the derived nodal slope yp (central
/// differences, second-order one-sided at the endpoints) and the length element
/// w = sqrt(1 + yp^2) >= 1.
class GraphCurve {
public:
    GraphCurve(Grid1D grid, std::vector<double> y);
    static GraphCurve sampled(const Grid1D& grid, const std::function<double(double)>& f);

    const Grid1D& grid() const { return grid_; }
    std::span<const double> y() const { return y_; }
    std::span<const double> yp() const { return yp_; }
    std::span<const double> w() const { return w_; }

private:
    Grid1D grid_;
    std::vector<double> y_, yp_, w_;
};

/// Weight function B with exact symbolic partial derivatives.
///
/// Curve mode declares B(x, y); graph mode declares B(y1..yk), with "y" accepted as an
/// alias for y1 when k = 1. Instances are immutable and safe to share across threads.
class WeightField {
public:
    static WeightField curve(std::string_view b_text);
    static WeightField curve(expr::Expr b);
    static WeightField graph(std::string_view b_text, int codim);

    bool curve_mode() const { return curve_mode_; }
    int codim() const { return k_; }

    // Curve mode.
    double b(double x, double y) const;
    double bx(double x, double y) const;
    double by(double x, double y) const;
    double byy(double x, double y) const;

    // Graph mode; yv holds the k components.
    double b(std::span<const double> yv) const;
    double by(int component, std::span<const double> yv) const;
    double byy(int component_i, int component_j, std::span<const double> yv) const;

    const expr::Expr& b_expr() const { return b_; }

private:
    WeightField() = default;
    double eval_graph(const expr::Expr& e, std::span<const double> yv) const;

    bool curve_mode_ = true;
    int k_ = 1;
    expr::Expr b_;
    expr::Expr bx_, by_, byy_;              // curve mode
    std::vector<expr::Expr> partials_;      // graph mode, one per component
    std::vector<expr::Expr> partials2_;     // graph mode, row-major k*k second partials
};

/// Grid-aligned perturbation with exactly zero endpoint values.
class Perturbation {
public:
    Perturbation(Grid1D grid, std::vector<double> xi);
    /// Samples f at interior nodes and forces the endpoints to exact zero.
    static Perturbation sampled(const Grid1D& grid, const std::function<double(double)>& f);
    const Grid1D& grid() const { return grid_; }
    std::span<const double> values() const { return xi_; }

private:
    Grid1D grid_;
    std::vector<double> xi_;
};

/// Per-node unit tangent T = (1, y')/w, unit normal N = (-y', 1)/w, and curvature
/// kappa = y''/w^3.
struct CurveFrame {
    std::vector<double> tx, ty, nx, ny, kappa;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

/// The profile -log(cos x) on (-pi/2, pi/2). Throws std::domain_error outside.
double grim_reaper(double x);

/// Composite-trapezoid value of the weighted length integral of w * e^{B(x, y)}.
double weighted_length(const GraphCurve& c, const WeightField& B);

/// Trapezoid value of the first-variation integrand
/// { y' xi' / w + w * B_y * xi } e^B, with xi' computed by the same difference scheme
/// as y'.
double first_variation(const GraphCurve& c, const Perturbation& xi, const WeightField& B);

/// Second variation for the weight B(x, y) = y:
/// trapezoid of { xi'^2/w - y'^2 xi'^2/w^3 + 2 y' xi' xi / w + w xi^2 } e^y.
double second_variation_general(const GraphCurve& c, const Perturbation& xi);

/// As above, but validates that the supplied weight equals B(x, y) = y on the curve and
/// rejects anything else.
double second_variation_general(const GraphCurve& c, const Perturbation& xi,
                                const WeightField& B);

/// Second variation at a critical point (weight B = y): trapezoid of xi'^2/w^3 * e^y.
/// Nonnegative for every input.
double second_variation_critical(const GraphCurve& c, const Perturbation& xi);

/// Discrete Euler-Lagrange residual at the interior nodes, in half-node flux form:
///   R_i = -e^{-B_i} (F_{i+1/2} - F_{i-1/2})/h + w_i B_y(x_i, y_i),
///   F_{i+1/2} = e^{B(x_{i+1/2}, (y_i+y_{i+1})/2)} (y_{i+1} - y_i) / (h w_{i+1/2}).
/// Requires n >= 3.
std::vector<double> el_residual(const GraphCurve& c, const WeightField& B);

/// Geometric residual H - (DB)^N at interior nodes, with H = kappa N, kappa = y''/w^3,
/// and (DB)^N the normal projection of (B_x, B_y). Requires n >= 3.
std::vector<Vec2> bminimal_residual_geometric(const GraphCurve& c, const WeightField& B);

CurveFrame curve_frame(const GraphCurve& c);

}  // namespace bmin::geometry1d
