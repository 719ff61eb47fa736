#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "bmin/geometry1d.hpp"

namespace bmin::stability {

/// Regularized weight data on J = (-pi/2, pi/2): p(x) = eps + cos x, the potential
/// f = (3p^2 - 1)/(4p^2), and the measure d(mu) = p dx. For eps >= 0, p > 0 on the open
/// interval and f < 3/4 everywhere.
class SmoczykProblem {
public:
    explicit SmoczykProblem(double epsilon);
    double epsilon() const { return eps_; }
    static double left();   // -pi/2
    static double right();  // +pi/2
    double p(double x) const;
    double f(double x) const;
    /// f(x) * p(x) evaluated as (3p^2 - 1)/(4p), which stays finite as p -> 0.
    double fp(double x) const;

private:
    double eps_;
};

struct GapResult {
    double lhs = 0.0;  // integral of f u^2 d(mu)
    double rhs = 0.0;  // integral of (u')^2 d(mu)
    double gap = 0.0;  // rhs - lhs
};

/// Trapezoid values of both sides of the weighted inequality for a perturbation u whose
/// grid lies inside the closed interval [-pi/2, pi/2].
GapResult inequality_gap(const geometry1d::Perturbation& u, const SmoczykProblem& prob);

struct SymTridiag {
    std::vector<double> diag;
    std::vector<double> off;  // size diag.size() - 1
};

struct SLSystem {
    SymTridiag A;              // encodes u -> integral of (u'^2 - f u^2) d(mu)
    std::vector<double> mass;  // lumped: p at the interior nodes
    double h = 0.0;
    std::vector<double> x;     // interior nodes
};

/// Dirichlet discretization on m interior nodes of (-pi/2, pi/2) with half-node p
/// averages: diag_i = (p_{i-1/2} + p_{i+1/2})/h^2 - f_i p_i, off_i = -p_{i+1/2}/h^2,
/// mass_i = p_i.
SLSystem assemble_sl(const SmoczykProblem& prob, int m);

/// Same discretization for arbitrary coefficient functions on [a, b]; used by the
/// analytic sanity oracles (p == 1, f == 0 target the Dirichlet Laplacian).
SLSystem assemble_sl(const std::function<double(double)>& p,
                     const std::function<double(double)>& f, double a, double b, int m);

/// Smallest generalized eigenvalue of A u = lambda M u (M diagonal positive), by
/// symmetric reduction and Sturm-sequence bisection to the given absolute tolerance.
double min_eigenvalue(const SymTridiag& A, std::span<const double> M, double tol = 1e-12);

/// Fundamental solution data of v'' - (sin x / p) v' + f v = 0 with v(-pi/2) = 1,
/// v'(-pi/2) = 0, integrated by the classic fourth-order one-step scheme on a uniform
/// mesh. phi = v'/v is defined where v > 0; positivity failure records the first mesh
/// point at which v <= 0.
class RiccatiSolution {
public:
    double step() const { return step_; }
    std::span<const double> v() const { return v_; }
    std::span<const double> vp() const { return vp_; }
    double mesh_node(int i) const;
    int mesh_size() const { return static_cast<int>(v_.size()); }

    bool positive() const { return !first_nonpositive_.has_value(); }
    std::optional<double> first_nonpositive() const { return first_nonpositive_; }

    // Dense cubic-Hermite evaluation (fourth order, matching the integrator).
    double v_at(double x) const;
    double vp_at(double x) const;
    double phi_at(double x) const;

private:
    friend RiccatiSolution solve_riccati_v(const SmoczykProblem&, double);
    friend RiccatiSolution solve_linear_second_order(const std::function<double(double)>&,
                                                     const std::function<double(double)>&,
                                                     double, double, double, double, double);
    double a_ = 0.0, step_ = 0.0;
    std::vector<double> v_, vp_, vpp_;
    std::optional<double> first_nonpositive_;
    int locate(double x) const;
};

/// Integrates v'' = c1(x) v' + c0(x) v from a to b with v(a) = v0, v'(a) = vp0.
RiccatiSolution solve_linear_second_order(const std::function<double(double)>& c1,
                                          const std::function<double(double)>& c0, double a,
                                          double b, double v0, double vp0, double step);

/// The problem-specific equation; requires eps > 0 (sin x / p is singular at the left
/// endpoint when eps = 0).
RiccatiSolution solve_riccati_v(const SmoczykProblem& prob, double step);

/// Halves the step until the sampled v changes by less than tol relative to
/// max(1, |v|) at the shared mesh nodes, then returns the finer solution.
RiccatiSolution solve_riccati_auto(const SmoczykProblem& prob, double initial_step = 1e-3,
                                   double tol = 1e-9, int max_halvings = 22);

/// | integral of (u' - u phi)^2 d(mu)  -  integral of (u'^2 - f u^2) d(mu) |.
/// With phi = v'/v solving the Riccati relation exactly the two integrals are equal, so
/// the returned residual is pure discretization error, O(h^2) + O(step^4). Rejects
/// solutions that lost positivity.
double completing_square_check(const geometry1d::Perturbation& u, const RiccatiSolution& sol,
                               const SmoczykProblem& prob);

}  // namespace bmin::stability
