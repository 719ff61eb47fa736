#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bmin/geometry1d.hpp"
#include "bmin/graphic.hpp"

namespace bmin::solvers {

struct SolveConfig {
    double tol_residual = 1e-10;  // sup-norm stopping threshold
    int max_iter = 50;
    double min_step = 0x1p-20;    // damping floor; the step starts at 1 and halves
};

enum class SolveStatus { Converged, MaxIter, Stalled };

const char* to_string(SolveStatus s);

struct SolveReport {
    SolveStatus status = SolveStatus::MaxIter;
    int iterations = 0;
    std::vector<double> residual_history;  // sup-norms, length = iterations + 1
    std::vector<double> step_history;      // accepted damping step per iteration
    double final_residual = 0.0;
};

/// Largest r_{i+1}/r_i^2 over the trailing Newton iterations taken at full step; small
/// values indicate the quadratic tail. Returns 0 when fewer than two usable iterates.
double quadratic_tail_constant(const SolveReport& report);

/// Solves the tridiagonal system in place (sub/diag/super diagonals, Thomas elimination
/// without pivoting). Returns false when a pivot falls below pivot_tol.
bool solve_tridiagonal(std::span<double> sub, std::span<double> diag, std::span<double> super,
                       std::span<double> rhs, double pivot_tol = 1e-14);

/// Square band matrix with half-bandwidth kb, LU-factored in place without pivoting.
class BandMatrix {
public:
    BandMatrix(int n, int kb);
    int size() const { return n_; }
    int bandwidth() const { return kb_; }
    double& at(int row, int col);
    double at(int row, int col) const;
    /// Factor and solve; returns false on a pivot below pivot_tol. The matrix is
    /// consumed by the factorization.
    bool lu_solve(std::span<double> rhs, double pivot_tol = 1e-14);

private:
    bool in_band(int row, int col) const;
    int n_, kb_;
    std::vector<double> data_;
};

/// Damped-Newton two-point boundary value solver for the curve Euler-Lagrange equation
/// with weight B(x, y). The initial guess is the affine interpolant of (ya, yb); the
/// Newton linearization is the exact tridiagonal Jacobian of the discrete residual.
std::pair<geometry1d::GraphCurve, SolveReport> solve_curve_bvp(
    const geometry1d::Grid1D& grid, double ya, double yb, const geometry1d::WeightField& B,
    const SolveConfig& cfg = {});

/// Damped-Newton solver for the k = 1 graphic equation with B(y) = y on a 2D grid with
/// Dirichlet data given by an expression in (x1, x2). The linear solves use a banded LU
/// of the exact discrete Jacobian.
std::pair<graphic::GraphField, SolveReport> solve_graph_pde_2d(const graphic::GridND& grid,
                                                               const expr::Expr& dirichlet,
                                                               const SolveConfig& cfg = {});

}  // namespace bmin::solvers
