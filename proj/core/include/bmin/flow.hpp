#pragma once

#include <string_view>
#include <vector>

#include "bmin/geometry1d.hpp"

namespace bmin::flow {

struct FlowState {
    geometry1d::GraphCurve curve;
    double t = 0.0;
};

/// Time-dependent Dirichlet values at the two ends, as expressions in t.
struct BoundaryRule {
    expr::Expr left;
    expr::Expr right;
    static BoundaryRule from_strings(std::string_view left_text, std::string_view right_text);
    double left_at(double t) const;
    double right_at(double t) const;
};

/// Explicit-Euler graph curve-shortening flow dy/dt = y'' / (1 + y'^2) with Dirichlet
/// boundary values moving in time. Rejects dt above the stability bound 0.4 h^2. The
/// trajectory holds num_samples states including the initial and final ones.
std::vector<FlowState> evolve_csf(const geometry1d::GraphCurve& initial, double t_end, double dt,
                                  const BoundaryRule& boundary, int num_samples = 11);

}  // namespace bmin::flow
