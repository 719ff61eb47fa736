#include "bmin/solvers.hpp"

#include <cmath>
#include <stdexcept>

#include "bmin/numerics.hpp"

namespace bmin::solvers {

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::MaxIter: return "max_iter";
        case SolveStatus::Stalled: return "stalled";
    }
    return "unknown";
}

double quadratic_tail_constant(const SolveReport& report) {
    double c = 0.0;
    int used = 0;
    const auto& r = report.residual_history;
    for (std::size_t k = r.size(); k-- > 1 && used < 3;) {
        const std::size_t step_index = k - 1;
        if (step_index >= report.step_history.size()) continue;
        if (report.step_history[step_index] != 1.0) continue;
        const double prev = r[k - 1];
        const double next = r[k];
        // Pairs below ~1e-11 sit on the round-off floor of the residual evaluation and
        // no longer follow the quadratic model.
        if (prev > 0.1 || prev <= 0.0 || next < 1e-11) continue;
        c = std::max(c, next / (prev * prev));
        ++used;
    }
    return c;
}

bool solve_tridiagonal(std::span<double> sub, std::span<double> diag, std::span<double> super,
                       std::span<double> rhs, double pivot_tol) {
    const std::size_t n = diag.size();
    if (n == 0 || sub.size() != n || super.size() != n || rhs.size() != n)
        throw std::invalid_argument("solve_tridiagonal: size mismatch");
    for (std::size_t i = 1; i < n; ++i) {
        if (std::fabs(diag[i - 1]) < pivot_tol) return false;
        const double m = sub[i] / diag[i - 1];
        diag[i] -= m * super[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if (std::fabs(diag[n - 1]) < pivot_tol) return false;
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - super[i] * rhs[i + 1]) / diag[i];
    return true;
}

BandMatrix::BandMatrix(int n, int kb) : n_(n), kb_(kb) {
    if (n < 1 || kb < 0) throw std::invalid_argument("BandMatrix: bad dimensions");
    data_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(2 * kb + 1), 0.0);
}

bool BandMatrix::in_band(int row, int col) const {
    return row >= 0 && row < n_ && col >= 0 && col < n_ && std::abs(row - col) <= kb_;
}

double& BandMatrix::at(int row, int col) {
    if (!in_band(row, col)) throw std::out_of_range("BandMatrix: entry outside the band");
    return data_[static_cast<std::size_t>(row) * static_cast<std::size_t>(2 * kb_ + 1) +
                 static_cast<std::size_t>(col - row + kb_)];
}

double BandMatrix::at(int row, int col) const {
    if (!in_band(row, col)) return 0.0;
    return data_[static_cast<std::size_t>(row) * static_cast<std::size_t>(2 * kb_ + 1) +
                 static_cast<std::size_t>(col - row + kb_)];
}

bool BandMatrix::lu_solve(std::span<double> rhs, double pivot_tol) {
    if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("BandMatrix: rhs size");
    for (int k = 0; k < n_; ++k) {
        const double piv = at(k, k);
        if (std::fabs(piv) < pivot_tol) return false;
        const int imax = std::min(n_ - 1, k + kb_);
        const int jmax = std::min(n_ - 1, k + kb_);
        for (int i = k + 1; i <= imax; ++i) {
            const double f = at(i, k) / piv;
            if (f == 0.0) continue;
            at(i, k) = f;
            for (int j = k + 1; j <= jmax; ++j) at(i, j) -= f * at(k, j);
        }
    }
    for (int i = 0; i < n_; ++i) {
        double acc = rhs[static_cast<std::size_t>(i)];
        const int j0 = std::max(0, i - kb_);
        for (int j = j0; j < i; ++j) acc -= at(i, j) * rhs[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] = acc;
    }
    for (int i = n_ - 1; i >= 0; --i) {
        double acc = rhs[static_cast<std::size_t>(i)];
        const int j1 = std::min(n_ - 1, i + kb_);
        for (int j = i + 1; j <= j1; ++j) acc -= at(i, j) * rhs[static_cast<std::size_t>(j)];
        rhs[static_cast<std::size_t>(i)] = acc / at(i, i);
    }
    return true;
}

namespace {

using geometry1d::GraphCurve;
using geometry1d::Grid1D;
using geometry1d::WeightField;
using graphic::GraphField;
using graphic::GridND;

// Tridiagonal Jacobian of the 1D half-node-flux residual. Row i (interior node i + 1)
// holds d R_i / d y_{i}, y_{i+1}, y_{i+2} in (sub, diag, super).
void assemble_curve_jacobian(const GraphCurve& c, const WeightField& B,
                             std::span<double> sub, std::span<double> diag,
                             std::span<double> super) {
    const Grid1D& g = c.grid();
    const int n = g.n();
    const double h = g.h();
    const auto y = c.y();

    struct Face {
        double f, d_lo, d_hi;  // flux and its derivatives w.r.t. the lower/upper node
    };
    auto face = [&](int i) {
        const double xm = 0.5 * (g.node(i) + g.node(i + 1));
        const double ym = 0.5 * (y[static_cast<std::size_t>(i)] + y[static_cast<std::size_t>(i) + 1]);
        const double s = (y[static_cast<std::size_t>(i) + 1] - y[static_cast<std::size_t>(i)]) / h;
        const double w = std::sqrt(1.0 + s * s);
        const double eb = std::exp(B.b(xm, ym));
        const double by = B.by(xm, ym);
        const double f = eb * s / w;
        const double slope_term = eb / (w * w * w) / h;
        const double weight_term = 0.5 * by * f;
        return Face{f, weight_term - slope_term, weight_term + slope_term};
    };

    Face left = face(0);
    for (int i = 1; i < n; ++i) {
        const Face right = face(i);
        const std::size_t k = static_cast<std::size_t>(i);
        const double x = g.node(i);
        const double yi = y[k];
        const double e = std::exp(-B.b(x, yi));
        const double by = B.by(x, yi);
        const double w = c.w()[k];
        const double dw = c.yp()[k] / (2.0 * h * w);  // dw_i/dy_{i+1} = +dw, dy_{i-1} = -dw

        const std::size_t row = k - 1;
        sub[row] = e * left.d_lo / h - by * dw;
        super[row] = -e * right.d_hi / h + by * dw;
        diag[row] = e * by * (right.f - left.f) / h - e * (right.d_lo - left.d_hi) / h +
                    w * B.byy(x, yi);
        left = right;
    }
}

// Residual evaluation for line-search trials; a domain error from B rejects the step.
bool try_residual(const GraphCurve& c, const WeightField& B, std::vector<double>& out,
                  double& sup) {
    try {
        out = geometry1d::el_residual(c, B);
    } catch (const expr::EvalError&) {
        return false;
    }
    sup = sup_norm(out);
    return true;
}

}  // namespace

std::pair<geometry1d::GraphCurve, SolveReport> solve_curve_bvp(const Grid1D& grid, double ya,
                                                               double yb, const WeightField& B,
                                                               const SolveConfig& cfg) {
    if (!B.curve_mode()) throw std::invalid_argument("solve_curve_bvp: weight must be curve mode");
    if (!(cfg.tol_residual > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("solve_curve_bvp: bad config");
    if (!std::isfinite(ya) || !std::isfinite(yb))
        throw std::invalid_argument("solve_curve_bvp: boundary values must be finite");
    const int n = grid.n();
    if (n < 3) throw std::invalid_argument("solve_curve_bvp: requires n >= 3");

    std::vector<double> y(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double s = static_cast<double>(i) / n;
        y[static_cast<std::size_t>(i)] = (1.0 - s) * ya + s * yb;
    }

    GraphCurve curve(grid, y);
    std::vector<double> residual = geometry1d::el_residual(curve, B);
    double r = sup_norm(residual);

    SolveReport report;
    report.residual_history.push_back(r);

    const std::size_t m = static_cast<std::size_t>(n) - 1;
    std::vector<double> sub(m), diag(m), super(m), delta(m);

    while (r > cfg.tol_residual && report.iterations < cfg.max_iter) {
        assemble_curve_jacobian(curve, B, sub, diag, super);
        for (std::size_t j = 0; j < m; ++j) delta[j] = -residual[j];
        if (!solve_tridiagonal(sub, diag, super, delta)) {
            report.status = SolveStatus::Stalled;
            report.final_residual = r;
            return {std::move(curve), std::move(report)};
        }

        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= cfg.min_step) {
            std::vector<double> y_trial = y;
            for (std::size_t j = 0; j < m; ++j) y_trial[j + 1] += lambda * delta[j];
            GraphCurve trial(grid, y_trial);
            std::vector<double> res_trial;
            double r_trial = 0.0;
            if (try_residual(trial, B, res_trial, r_trial) && r_trial < r) {
                y = std::move(y_trial);
                curve = std::move(trial);
                residual = std::move(res_trial);
                r = r_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            report.status = SolveStatus::Stalled;
            report.final_residual = r;
            return {std::move(curve), std::move(report)};
        }
        ++report.iterations;
        report.residual_history.push_back(r);
        report.step_history.push_back(lambda);
    }

    report.status = r <= cfg.tol_residual ? SolveStatus::Converged : SolveStatus::MaxIter;
    report.final_residual = r;
    return {std::move(curve), std::move(report)};
}

namespace {

// 2D interior numbering: u(i, j) = (i - 1) + (m1 - 1)(j - 1).
struct Interior2D {
    int m1, m2;
    int count() const { return (m1 - 1) * (m2 - 1); }
    int id(int i, int j) const { return (i - 1) + (m1 - 1) * (j - 1); }
    bool contains(int i, int j) const { return i >= 1 && i < m1 && j >= 1 && j < m2; }
};

double interior_sup(const GraphField& r) {
    const GridND& g = r.grid();
    double s = 0.0;
    for (int id = 0; id < g.num_nodes(); ++id)
        if (!g.is_boundary(id)) s = std::max(s, std::fabs(r.value(id, 0)));
    return s;
}

// Exact Jacobian row contributions of one half-node flux (axis faces of node (i, j)),
// written into the 3x3 neighborhood of the residual node.
struct FluxDerivs {
    double f;
    // Derivatives w.r.t. the face pair (lo = node, hi = axis neighbor) and the four
    // transverse corner nodes (lo/hi crossed with -/+ transverse offset).
    double d_lo, d_hi, d_corner_minus, d_corner_plus;
};

FluxDerivs face_flux_derivs(const GraphField& y, const WeightField& B, int axis, int i, int j) {
    const GridND& g = y.grid();
    const int id = g.index(i, j);
    const int stride = axis == 0 ? 1 : g.nodes(0);
    const int tstride = axis == 0 ? g.nodes(0) : 1;
    const double h = g.h(axis);
    const double ht = g.h(axis == 0 ? 1 : 0);

    const double s = (y.value(id + stride, 0) - y.value(id, 0)) / h;
    const double t = (y.value(id + tstride, 0) + y.value(id + stride + tstride, 0) -
                      y.value(id - tstride, 0) - y.value(id + stride - tstride, 0)) /
                     (4.0 * ht);
    const double ym = 0.5 * (y.value(id, 0) + y.value(id + stride, 0));
    const double w = std::sqrt(1.0 + s * s + t * t);

    const double eb = std::exp(B.b(std::span<const double>(&ym, 1)));
    const double by = B.by(0, std::span<const double>(&ym, 1));
    const double f = eb * s / w;

    const double ds = eb * (1.0 + t * t) / (w * w * w);
    const double dt = eb * (-s * t) / (w * w * w);
    const double weight_term = 0.5 * by * f;

    FluxDerivs d;
    d.f = f;
    d.d_hi = weight_term + ds / h;
    d.d_lo = weight_term - ds / h;
    d.d_corner_plus = dt / (4.0 * ht);
    d.d_corner_minus = -dt / (4.0 * ht);
    return d;
}

}  // namespace

std::pair<graphic::GraphField, SolveReport> solve_graph_pde_2d(const GridND& grid,
                                                               const expr::Expr& dirichlet,
                                                               const SolveConfig& cfg) {
    if (grid.dim() != 2) throw std::invalid_argument("solve_graph_pde_2d: grid must be 2D");
    if (!(cfg.tol_residual > 0.0) || cfg.max_iter < 1)
        throw std::invalid_argument("solve_graph_pde_2d: bad config");
    const int m1 = grid.m(0);
    const int m2 = grid.m(1);
    if (m1 < 3 || m2 < 3) throw std::invalid_argument("solve_graph_pde_2d: requires m >= 3 per axis");

    const WeightField B = WeightField::graph("y", 1);

    auto boundary_value = [&](double x1, double x2) {
        const double v[2] = {x1, x2};
        return dirichlet.eval(v);
    };

    // Transfinite interpolant of the boundary data as the initial guess; it reproduces
    // every boundary node exactly.
    GraphField field(grid, 1);
    for (int j = 0; j <= m2; ++j) {
        for (int i = 0; i <= m1; ++i) {
            const double x1 = grid.coord(0, i);
            const double x2 = grid.coord(1, j);
            const int id = grid.index(i, j);
            if (grid.is_boundary(id)) {
                field.value(id, 0) = boundary_value(x1, x2);
                continue;
            }
            const double sx = static_cast<double>(i) / m1;
            const double sy = static_cast<double>(j) / m2;
            const double a1 = grid.a(0), b1 = grid.b(0), a2 = grid.a(1), b2 = grid.b(1);
            const double edges = (1.0 - sx) * boundary_value(a1, x2) +
                                 sx * boundary_value(b1, x2) +
                                 (1.0 - sy) * boundary_value(x1, a2) +
                                 sy * boundary_value(x1, b2);
            const double corners = (1.0 - sx) * (1.0 - sy) * boundary_value(a1, a2) +
                                   sx * (1.0 - sy) * boundary_value(b1, a2) +
                                   (1.0 - sx) * sy * boundary_value(a1, b2) +
                                   sx * sy * boundary_value(b1, b2);
            field.value(id, 0) = edges - corners;
        }
    }

    GraphField residual = graphic_el_residual(field, B);
    double r = interior_sup(residual);

    SolveReport report;
    report.residual_history.push_back(r);

    const Interior2D num{m1, m2};
    const int nu = num.count();
    const int kb = m1;  // widest coupling offset: (i +- 1, j +- 1) -> (m1 - 1) + 1

    while (r > cfg.tol_residual && report.iterations < cfg.max_iter) {
        BandMatrix jac(nu, kb);
        std::vector<double> rhs(static_cast<std::size_t>(nu));

        for (int j = 1; j < m2; ++j) {
            for (int i = 1; i < m1; ++i) {
                const int row = num.id(i, j);
                const int id = grid.index(i, j);
                rhs[static_cast<std::size_t>(row)] = -residual.value(id, 0);

                double local[3][3] = {};  // d R_{ij} / d y_{i+di, j+dj}, di/dj in -1..1
                const double yc = field.value(id, 0);
                const double e = std::exp(-B.b(std::span<const double>(&yc, 1)));
                const double by_c = B.by(0, std::span<const double>(&yc, 1));
                const double byy_c = B.byy(0, 0, std::span<const double>(&yc, 1));

                double div = 0.0;
                for (int axis = 0; axis < 2; ++axis) {
                    const double h = grid.h(axis);
                    const int di = axis == 0 ? 1 : 0;
                    const int dj = axis == 0 ? 0 : 1;
                    const int ti = axis == 0 ? 0 : 1;  // transverse direction
                    const int tj = axis == 0 ? 1 : 0;

                    const FluxDerivs hi =
                        face_flux_derivs(field, B, axis, i, j);
                    const FluxDerivs lo =
                        face_flux_derivs(field, B, axis, i - di, j - dj);
                    div += (hi.f - lo.f) / h;

                    const double c = -e / h;  // residual carries -e^{-B} (F_hi - F_lo)/h
                    // High face: pair (center, +axis), corners at both +- transverse.
                    local[1][1] += c * hi.d_lo;
                    local[1 + di][1 + dj] += c * hi.d_hi;
                    local[1 + ti][1 + tj] += c * hi.d_corner_plus;
                    local[1 - ti][1 - tj] += c * hi.d_corner_minus;
                    local[1 + di + ti][1 + dj + tj] += c * hi.d_corner_plus;
                    local[1 + di - ti][1 + dj - tj] += c * hi.d_corner_minus;
                    // Low face enters with the opposite sign; its pair is (-axis, center).
                    local[1 - di][1 - dj] -= c * lo.d_lo;
                    local[1][1] -= c * lo.d_hi;
                    local[1 + ti][1 + tj] -= c * lo.d_corner_plus;
                    local[1 - ti][1 - tj] -= c * lo.d_corner_minus;
                    local[1 - di + ti][1 - dj + tj] -= c * lo.d_corner_plus;
                    local[1 - di - ti][1 - dj - tj] -= c * lo.d_corner_minus;
                }

                // -e^{-B} depends on the center value, and so does the source w B_y.
                local[1][1] += e * by_c * div;

                const double px = (field.value(grid.index(i + 1, j), 0) -
                                   field.value(grid.index(i - 1, j), 0)) /
                                  (2.0 * grid.h(0));
                const double py = (field.value(grid.index(i, j + 1), 0) -
                                   field.value(grid.index(i, j - 1), 0)) /
                                  (2.0 * grid.h(1));
                const double w = std::sqrt(1.0 + px * px + py * py);
                local[1][1] += w * byy_c;
                local[2][1] += by_c * px / (2.0 * grid.h(0) * w);
                local[0][1] -= by_c * px / (2.0 * grid.h(0) * w);
                local[1][2] += by_c * py / (2.0 * grid.h(1) * w);
                local[1][0] -= by_c * py / (2.0 * grid.h(1) * w);

                for (int dj2 = -1; dj2 <= 1; ++dj2) {
                    for (int di2 = -1; di2 <= 1; ++di2) {
                        if (!num.contains(i + di2, j + dj2)) continue;
                        const double v = local[1 + di2][1 + dj2];
                        if (v != 0.0) jac.at(row, num.id(i + di2, j + dj2)) += v;
                    }
                }
            }
        }

        if (!jac.lu_solve(rhs)) {
            report.status = SolveStatus::Stalled;
            report.final_residual = r;
            return {std::move(field), std::move(report)};
        }

        double lambda = 1.0;
        bool accepted = false;
        while (lambda >= cfg.min_step) {
            GraphField trial = field;
            for (int j = 1; j < m2; ++j)
                for (int i = 1; i < m1; ++i)
                    trial.value(grid.index(i, j), 0) +=
                        lambda * rhs[static_cast<std::size_t>(num.id(i, j))];
            GraphField res_trial = graphic_el_residual(trial, B);
            const double r_trial = interior_sup(res_trial);
            if (r_trial < r) {
                field = std::move(trial);
                residual = std::move(res_trial);
                r = r_trial;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) {
            report.status = SolveStatus::Stalled;
            report.final_residual = r;
            return {std::move(field), std::move(report)};
        }
        ++report.iterations;
        report.residual_history.push_back(r);
        report.step_history.push_back(lambda);
    }

    report.status = r <= cfg.tol_residual ? SolveStatus::Converged : SolveStatus::MaxIter;
    report.final_residual = r;
    return {std::move(field), std::move(report)};
}

}  // namespace bmin::solvers
