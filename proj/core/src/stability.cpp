#include "bmin/stability.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bmin/numerics.hpp"

namespace bmin::stability {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

void require_interval_in_j(const geometry1d::Grid1D& g, const char* who) {
    const double slack = 1e-12;
    if (g.a() < -kHalfPi - slack || g.b() > kHalfPi + slack)
        throw std::invalid_argument(std::string(who) + ": grid must lie inside [-pi/2, pi/2]");
}

}  // namespace

SmoczykProblem::SmoczykProblem(double epsilon) : eps_(epsilon) {
    if (!(epsilon >= 0.0)) throw std::invalid_argument("SmoczykProblem: requires epsilon >= 0");
}

double SmoczykProblem::left() { return -kHalfPi; }
double SmoczykProblem::right() { return kHalfPi; }

double SmoczykProblem::p(double x) const { return eps_ + std::cos(x); }

double SmoczykProblem::f(double x) const {
    const double pv = p(x);
    return (3.0 * pv * pv - 1.0) / (4.0 * pv * pv);
}

double SmoczykProblem::fp(double x) const {
    const double pv = p(x);
    return (3.0 * pv * pv - 1.0) / (4.0 * pv);
}

GapResult inequality_gap(const geometry1d::Perturbation& u, const SmoczykProblem& prob) {
    const geometry1d::Grid1D& g = u.grid();
    require_interval_in_j(g, "inequality_gap");
    const std::vector<double> up = derivative_uniform(u.values(), g.h());
    const std::size_t m = u.values().size();
    std::vector<double> lhs_f(m), rhs_f(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = g.node(static_cast<int>(i));
        const double uv = u.values()[i];
        // f u^2 p written as u^2 (3p^2-1)/(4p): finite at the endpoints where p -> 0
        // and u vanishes.
        lhs_f[i] = uv * uv * prob.fp(x);
        rhs_f[i] = up[i] * up[i] * prob.p(x);
    }
    GapResult r;
    r.lhs = trapezoid(lhs_f, g.h());
    r.rhs = trapezoid(rhs_f, g.h());
    r.gap = r.rhs - r.lhs;
    return r;
}

SLSystem assemble_sl(const std::function<double(double)>& p,
                     const std::function<double(double)>& f, double a, double b, int m) {
    if (m < 3) throw std::invalid_argument("assemble_sl: requires m >= 3");
    if (!(a < b)) throw std::invalid_argument("assemble_sl: requires a < b");
    SLSystem sys;
    sys.h = (b - a) / (m + 1);
    sys.x.resize(static_cast<std::size_t>(m));
    sys.A.diag.resize(static_cast<std::size_t>(m));
    sys.A.off.resize(static_cast<std::size_t>(m) - 1);
    sys.mass.resize(static_cast<std::size_t>(m));
    const double invh2 = 1.0 / (sys.h * sys.h);
    for (int i = 0; i < m; ++i) {
        const double x = a + (i + 1) * sys.h;
        const std::size_t k = static_cast<std::size_t>(i);
        sys.x[k] = x;
        const double p_lo = p(x - 0.5 * sys.h);
        const double p_hi = p(x + 0.5 * sys.h);
        const double p_i = p(x);
        sys.A.diag[k] = (p_lo + p_hi) * invh2 - f(x) * p_i;
        if (i + 1 < m) sys.A.off[k] = -p_hi * invh2;
        sys.mass[k] = p_i;
    }
    return sys;
}

SLSystem assemble_sl(const SmoczykProblem& prob, int m) {
    if (m < 3) throw std::invalid_argument("assemble_sl: requires m >= 3");
    SLSystem sys;
    const double a = SmoczykProblem::left();
    const double b = SmoczykProblem::right();
    sys.h = (b - a) / (m + 1);
    sys.x.resize(static_cast<std::size_t>(m));
    sys.A.diag.resize(static_cast<std::size_t>(m));
    sys.A.off.resize(static_cast<std::size_t>(m) - 1);
    sys.mass.resize(static_cast<std::size_t>(m));
    const double invh2 = 1.0 / (sys.h * sys.h);
    for (int i = 0; i < m; ++i) {
        const double x = a + (i + 1) * sys.h;
        const std::size_t k = static_cast<std::size_t>(i);
        sys.x[k] = x;
        // f_i p_i taken in the fused (3p^2-1)/(4p) form.
        sys.A.diag[k] = (prob.p(x - 0.5 * sys.h) + prob.p(x + 0.5 * sys.h)) * invh2 - prob.fp(x);
        if (i + 1 < m) sys.A.off[k] = -prob.p(x + 0.5 * sys.h) * invh2;
        sys.mass[k] = prob.p(x);
    }
    return sys;
}

namespace {

// Eigenvalue count below sigma for a symmetric tridiagonal matrix, by the Sturm
// sequence of leading-principal-minor ratios.
int sturm_count(std::span<const double> d, std::span<const double> e, double sigma) {
    constexpr double kPivotFloor = 1e-290;
    int count = 0;
    double q = d[0] - sigma;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < d.size(); ++i) {
        double denom = q;
        if (std::fabs(denom) < kPivotFloor) denom = -kPivotFloor;
        q = (d[i] - sigma) - e[i - 1] * e[i - 1] / denom;
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

double min_eigenvalue(const SymTridiag& A, std::span<const double> M, double tol) {
    const std::size_t m = A.diag.size();
    if (m < 1 || A.off.size() + 1 != m || M.size() != m)
        throw std::invalid_argument("min_eigenvalue: size mismatch");
    for (double v : M)
        if (!(v > 0.0)) throw std::invalid_argument("min_eigenvalue: mass must be positive");

    // Symmetric reduction by M^{-1/2} on both sides.
    std::vector<double> d(m), e(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) d[i] = A.diag[i] / M[i];
    for (std::size_t i = 0; i + 1 < m; ++i) e[i] = A.off[i] / std::sqrt(M[i] * M[i + 1]);

    double lo = d[0], hi = d[0];
    for (std::size_t i = 0; i < m; ++i) {
        const double r = (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i + 1 < m ? std::fabs(e[i]) : 0.0);
        lo = std::min(lo, d[i] - r);
        hi = std::max(hi, d[i] + r);
    }
    lo -= 1e-6 * (1.0 + std::fabs(lo));
    hi += 1e-6 * (1.0 + std::fabs(hi));

    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(d, e, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double RiccatiSolution::mesh_node(int i) const { return a_ + step_ * i; }

int RiccatiSolution::locate(double x) const {
    const int cells = static_cast<int>(v_.size()) - 1;
    int k = static_cast<int>(std::floor((x - a_) / step_));
    if (k < 0) k = 0;
    if (k >= cells) k = cells - 1;
    return k;
}

double RiccatiSolution::v_at(double x) const {
    const int k = locate(x);
    const std::size_t q = static_cast<std::size_t>(k);
    const double t = (x - (a_ + step_ * k)) / step_;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * v_[q] + h10 * step_ * vp_[q] + h01 * v_[q + 1] + h11 * step_ * vp_[q + 1];
}

double RiccatiSolution::vp_at(double x) const {
    const int k = locate(x);
    const std::size_t q = static_cast<std::size_t>(k);
    const double t = (x - (a_ + step_ * k)) / step_;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1;
    const double h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2;
    const double h11 = t3 - t2;
    return h00 * vp_[q] + h10 * step_ * vpp_[q] + h01 * vp_[q + 1] + h11 * step_ * vpp_[q + 1];
}

double RiccatiSolution::phi_at(double x) const {
    const double v = v_at(x);
    if (v <= 0.0) throw std::domain_error("phi_at: v is not positive at the requested point");
    return vp_at(x) / v;
}

RiccatiSolution solve_linear_second_order(const std::function<double(double)>& c1,
                                          const std::function<double(double)>& c0, double a,
                                          double b, double v0, double vp0, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("solve_linear_second_order: step must be > 0");
    if (!(a < b)) throw std::invalid_argument("solve_linear_second_order: requires a < b");
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / step - 1e-12)));
    const double h = (b - a) / n;

    RiccatiSolution sol;
    sol.a_ = a;
    sol.step_ = h;
    sol.v_.resize(static_cast<std::size_t>(n) + 1);
    sol.vp_.resize(static_cast<std::size_t>(n) + 1);
    sol.vpp_.resize(static_cast<std::size_t>(n) + 1);

    auto acc = [&](double x, double v, double vp) { return c1(x) * vp + c0(x) * v; };

    double v = v0, vp = vp0;
    sol.v_[0] = v;
    sol.vp_[0] = vp;
    sol.vpp_[0] = acc(a, v, vp);
    for (int k = 0; k < n; ++k) {
        const double x = a + h * k;
        const double k1v = vp;
        const double k1p = acc(x, v, vp);
        const double k2v = vp + 0.5 * h * k1p;
        const double k2p = acc(x + 0.5 * h, v + 0.5 * h * k1v, vp + 0.5 * h * k1p);
        const double k3v = vp + 0.5 * h * k2p;
        const double k3p = acc(x + 0.5 * h, v + 0.5 * h * k2v, vp + 0.5 * h * k2p);
        const double k4v = vp + h * k3p;
        const double k4p = acc(x + h, v + h * k3v, vp + h * k3p);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        vp += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        const std::size_t q = static_cast<std::size_t>(k) + 1;
        sol.v_[q] = v;
        sol.vp_[q] = vp;
        sol.vpp_[q] = acc(a + h * (k + 1), v, vp);
    }

    for (std::size_t i = 0; i < sol.v_.size(); ++i) {
        if (sol.v_[i] <= 0.0) {
            sol.first_nonpositive_ = sol.mesh_node(static_cast<int>(i));
            break;
        }
    }
    return sol;
}

RiccatiSolution solve_riccati_v(const SmoczykProblem& prob, double step) {
    if (!(prob.epsilon() > 0.0))
        throw std::invalid_argument("solve_riccati_v: requires epsilon > 0 (sin x / p is "
                                    "singular at the left endpoint otherwise)");
    auto c1 = [&prob](double x) { return std::sin(x) / prob.p(x); };
    auto c0 = [&prob](double x) { return -prob.f(x); };
    return solve_linear_second_order(c1, c0, SmoczykProblem::left(), SmoczykProblem::right(),
                                     1.0, 0.0, step);
}

RiccatiSolution solve_riccati_auto(const SmoczykProblem& prob, double initial_step, double tol,
                                   int max_halvings) {
    RiccatiSolution coarse = solve_riccati_v(prob, initial_step);
    for (int round = 0; round < max_halvings; ++round) {
        RiccatiSolution fine = solve_riccati_v(prob, coarse.step() * 0.5);
        double change = 0.0;
        for (int i = 0; i < coarse.mesh_size(); ++i) {
            const double vc = coarse.v()[static_cast<std::size_t>(i)];
            const double vf = fine.v()[static_cast<std::size_t>(2 * i)];
            change = std::max(change, std::fabs(vf - vc) / std::max(1.0, std::fabs(vf)));
        }
        if (change < tol) return fine;
        coarse = std::move(fine);
    }
    throw std::runtime_error("solve_riccati_auto: step refinement did not reach tolerance");
}

double completing_square_check(const geometry1d::Perturbation& u, const RiccatiSolution& sol,
                               const SmoczykProblem& prob) {
    if (!sol.positive())
        throw std::invalid_argument("completing_square_check: Riccati solution lost positivity");
    const geometry1d::Grid1D& g = u.grid();
    require_interval_in_j(g, "completing_square_check");
    const std::vector<double> up = derivative_uniform(u.values(), g.h());
    const std::size_t m = u.values().size();
    std::vector<double> sq(m), form(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double x = g.node(static_cast<int>(i));
        const double pv = prob.p(x);
        const double uv = u.values()[i];
        const double phi = sol.phi_at(x);
        const double diff = up[i] - uv * phi;
        sq[i] = diff * diff * pv;
        form[i] = up[i] * up[i] * pv - uv * uv * prob.fp(x);
    }
    return std::fabs(trapezoid(sq, g.h()) - trapezoid(form, g.h()));
}

}  // namespace bmin::stability
