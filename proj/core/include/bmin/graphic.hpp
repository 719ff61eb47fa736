#pragma once

#include <functional>
#include <span>
#include <vector>

#include "bmin/geometry1d.hpp"

namespace bmin::graphic {

/// Uniform tensor grid in dimension 1 or 2; axis d has m_d intervals on [a_d, b_d].
class GridND {
public:
    static GridND line(double a, double b, int m);
    static GridND rect(double a1, double b1, int m1, double a2, double b2, int m2);

    int dim() const { return dim_; }
    int m(int axis) const { return m_[check_axis(axis)]; }
    double a(int axis) const { return a_[check_axis(axis)]; }
    double b(int axis) const { return b_[check_axis(axis)]; }
    double h(int axis) const { return h_[check_axis(axis)]; }

    /// Nodes per axis = m + 1; total node count is their product.
    int nodes(int axis) const { return m_[check_axis(axis)] + 1; }
    int num_nodes() const;

    double coord(int axis, int i) const;

    // Flat node ids run with axis 0 fastest.
    int index(int i, int j = 0) const;
    int i_of(int id) const { return id % nodes(0); }
    int j_of(int id) const { return id / nodes(0); }
    bool is_boundary(int id) const;

private:
    GridND() = default;
    int check_axis(int axis) const;
    int dim_ = 1;
    double a_[2] = {0, 0}, b_[2] = {0, 0}, h_[2] = {0, 0};
    int m_[2] = {0, 0};
};

/// k-component graph map sampled on a tensor grid; values are stored node-major. The
/// Dirichlet mask is exactly the geometric grid boundary.
class GraphField {
public:
    GraphField(GridND grid, int k);
    GraphField(GridND grid, int k, std::vector<double> values);
    static GraphField sampled(const GridND& grid, int k,
                              const std::function<void(std::span<const double> point,
                                                       std::span<double> out)>& f);

    const GridND& grid() const { return grid_; }
    int k() const { return k_; }
    double value(int node, int comp) const {
        return values_[static_cast<std::size_t>(node) * static_cast<std::size_t>(k_) +
                       static_cast<std::size_t>(comp)];
    }
    double& value(int node, int comp) {
        return values_[static_cast<std::size_t>(node) * static_cast<std::size_t>(k_) +
                       static_cast<std::size_t>(comp)];
    }
    std::span<const double> values() const { return values_; }
    bool is_boundary_node(int node) const { return grid_.is_boundary(node); }

private:
    GridND grid_;
    int k_ = 1;
    std::vector<double> values_;
};

/// Per-node first fundamental form g_ij = delta_ij + D_i y . D_j y, its inverse, and
/// w = sqrt(det g). Only the n <= 2 closed forms are needed.
struct FirstFundamentalData {
    std::vector<double> g11, g12, g22;
    std::vector<double> inv11, inv12, inv22;
    std::vector<double> w;
};

/// Nodal derivatives of every component along one axis (central differences inside,
/// second-order one-sided on the axis boundary). Layout matches GraphField values.
std::vector<double> axis_derivative(const GraphField& y, int axis);

FirstFundamentalData first_fundamental(const GraphField& y);

/// Tensor-trapezoid approximation of the integral of w * e^{B(y)} over the domain.
/// B must be a graph-mode weight over the field's components.
double graphic_functional(const GraphField& y, const geometry1d::WeightField& B);

/// Exact gradient of the discrete graphic_functional with respect to the interior nodal
/// values; boundary entries are zero. Continuum form of the pairing:
///   dI(y)xi = integral of { w g^{ij} <D_i y, D_j xi> + w <D_y B, xi> } e^B.
/// (The 1/w-weighted variant of the first term fails both the n = k = 1 reduction
/// y' xi'/w and the k = 1 equation; the w-weighted form reproduces them, so it is the
/// one implemented.)
GraphField graphic_gradient(const GraphField& y, const geometry1d::WeightField& B);

/// Euler-Lagrange residual -e^{-B} D_j(e^B w g^{ij} D_i y) + w D_y B at interior nodes
/// (zero on the boundary). k = 1 uses a half-node flux stencil; k > 1 falls back to
/// graphic_gradient divided by the local quadrature weight and e^B, whose values at the
/// two layers nearest the boundary inherit the functional's one-sided stencils there.
GraphField graphic_el_residual(const GraphField& y, const geometry1d::WeightField& B);

}  // namespace bmin::graphic
