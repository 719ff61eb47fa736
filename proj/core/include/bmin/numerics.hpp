#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bmin {

/// Compensated (Kahan) accumulator. Terms are added in call order; summing the same
/// sequence twice yields bit-identical results.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = sum_ + y;
        c_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double c_ = 0.0;
};

/// Composite trapezoid rule for nodal samples with uniform spacing h.
double trapezoid(std::span<const double> f, double h);

/// Nodal first derivative on a uniform grid: central differences at interior nodes,
/// second-order one-sided stencils at the two endpoints.
std::vector<double> derivative_uniform(std::span<const double> y, double h);

/// Nodal second derivative on a uniform grid: three-point central stencil at interior
/// nodes, four-point one-sided stencils at the endpoints (three-point fallback when the
/// grid is too short for them).
std::vector<double> second_derivative_uniform(std::span<const double> y, double h);

double sup_norm(std::span<const double> v);

/// Deterministic uniform generator with a fixed bit-to-double mapping
/// (std::uniform_real_distribution is implementation-defined and would not reproduce).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t bits() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

}  // namespace bmin
