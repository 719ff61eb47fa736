#include "bmin/graphic.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "bmin/numerics.hpp"

namespace bmin::graphic {

namespace {

void require_graph_mode(const geometry1d::WeightField& B, const GraphField& y, const char* who) {
    if (B.curve_mode())
        throw std::invalid_argument(std::string(who) + ": weight must be in graph mode B(y1..yk)");
    if (B.codim() != y.k())
        throw std::invalid_argument(std::string(who) + ": weight codimension mismatch");
}

// Quadrature weight of a node: product over axes of h_d, halved on axis boundaries.
double quad_weight(const GridND& g, int id) {
    const int i = g.i_of(id);
    double cq = g.h(0) * ((i == 0 || i == g.m(0)) ? 0.5 : 1.0);
    if (g.dim() == 2) {
        const int j = g.j_of(id);
        cq *= g.h(1) * ((j == 0 || j == g.m(1)) ? 0.5 : 1.0);
    }
    return cq;
}

// Difference stencil of the axis derivative at (pos in axis), as up to three
// (node offset along the axis, weight) pairs.
struct Stencil {
    int count = 0;
    int offset[3] = {0, 0, 0};
    double weight[3] = {0, 0, 0};
};

Stencil axis_stencil(int pos, int m, double h) {
    Stencil s;
    const double inv2h = 1.0 / (2.0 * h);
    if (pos == 0) {
        s.count = 3;
        s.offset[0] = 0;
        s.offset[1] = 1;
        s.offset[2] = 2;
        s.weight[0] = -3.0 * inv2h;
        s.weight[1] = 4.0 * inv2h;
        s.weight[2] = -inv2h;
    } else if (pos == m) {
        s.count = 3;
        s.offset[0] = 0;
        s.offset[1] = -1;
        s.offset[2] = -2;
        s.weight[0] = 3.0 * inv2h;
        s.weight[1] = -4.0 * inv2h;
        s.weight[2] = inv2h;
    } else {
        s.count = 2;
        s.offset[0] = -1;
        s.offset[1] = 1;
        s.weight[0] = -inv2h;
        s.weight[1] = inv2h;
    }
    return s;
}

std::vector<double> component_buffer(const GraphField& y, int node) {
    std::vector<double> v(static_cast<std::size_t>(y.k()));
    for (int c = 0; c < y.k(); ++c) v[static_cast<std::size_t>(c)] = y.value(node, c);
    return v;
}

}  // namespace

GridND GridND::line(double a, double b, int m) {
    if (!(a < b)) throw std::invalid_argument("GridND: requires a < b");
    if (m < 2) throw std::invalid_argument("GridND: requires m >= 2");
    GridND g;
    g.dim_ = 1;
    g.a_[0] = a;
    g.b_[0] = b;
    g.m_[0] = m;
    g.h_[0] = (b - a) / m;
    return g;
}

GridND GridND::rect(double a1, double b1, int m1, double a2, double b2, int m2) {
    if (!(a1 < b1) || !(a2 < b2)) throw std::invalid_argument("GridND: requires a < b per axis");
    if (m1 < 2 || m2 < 2) throw std::invalid_argument("GridND: requires m >= 2 per axis");
    GridND g;
    g.dim_ = 2;
    g.a_[0] = a1;
    g.b_[0] = b1;
    g.m_[0] = m1;
    g.h_[0] = (b1 - a1) / m1;
    g.a_[1] = a2;
    g.b_[1] = b2;
    g.m_[1] = m2;
    g.h_[1] = (b2 - a2) / m2;
    return g;
}

int GridND::check_axis(int axis) const {
    if (axis < 0 || axis >= dim_) throw std::invalid_argument("GridND: axis out of range");
    return axis;
}

int GridND::num_nodes() const {
    int n = nodes(0);
    if (dim_ == 2) n *= nodes(1);
    return n;
}

double GridND::coord(int axis, int i) const {
    check_axis(axis);
    return i == m_[axis] ? b_[axis] : a_[axis] + i * h_[axis];
}

int GridND::index(int i, int j) const { return i + nodes(0) * j; }

bool GridND::is_boundary(int id) const {
    const int i = i_of(id);
    if (i == 0 || i == m_[0]) return true;
    if (dim_ == 2) {
        const int j = j_of(id);
        if (j == 0 || j == m_[1]) return true;
    }
    return false;
}

GraphField::GraphField(GridND grid, int k) : grid_(grid), k_(k) {
    if (k < 1) throw std::invalid_argument("GraphField: requires k >= 1");
    values_.assign(static_cast<std::size_t>(grid_.num_nodes()) * static_cast<std::size_t>(k), 0.0);
}

GraphField::GraphField(GridND grid, int k, std::vector<double> values)
    : grid_(grid), k_(k), values_(std::move(values)) {
    if (k < 1) throw std::invalid_argument("GraphField: requires k >= 1");
    if (values_.size() !=
        static_cast<std::size_t>(grid_.num_nodes()) * static_cast<std::size_t>(k))
        throw std::invalid_argument("GraphField: value count mismatch");
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("GraphField: values must be finite");
}

GraphField GraphField::sampled(const GridND& grid, int k,
                               const std::function<void(std::span<const double>,
                                                        std::span<double>)>& f) {
    GraphField out(grid, k);
    std::vector<double> pt(static_cast<std::size_t>(grid.dim()));
    std::vector<double> val(static_cast<std::size_t>(k));
    for (int id = 0; id < grid.num_nodes(); ++id) {
        pt[0] = grid.coord(0, grid.i_of(id));
        if (grid.dim() == 2) pt[1] = grid.coord(1, grid.j_of(id));
        f(pt, val);
        for (int c = 0; c < k; ++c) out.value(id, c) = val[static_cast<std::size_t>(c)];
    }
    return out;
}

std::vector<double> axis_derivative(const GraphField& y, int axis) {
    const GridND& g = y.grid();
    g.coord(axis, 0);  // axis range check
    const int stride = axis == 0 ? 1 : g.nodes(0);
    const int m = g.m(axis);
    std::vector<double> d(y.values().size());
    for (int id = 0; id < g.num_nodes(); ++id) {
        const int pos = axis == 0 ? g.i_of(id) : g.j_of(id);
        const Stencil s = axis_stencil(pos, m, g.h(axis));
        for (int c = 0; c < y.k(); ++c) {
            double acc = 0.0;
            for (int t = 0; t < s.count; ++t)
                acc += s.weight[t] * y.value(id + s.offset[t] * stride, c);
            d[static_cast<std::size_t>(id) * static_cast<std::size_t>(y.k()) +
              static_cast<std::size_t>(c)] = acc;
        }
    }
    return d;
}

FirstFundamentalData first_fundamental(const GraphField& y) {
    const GridND& g = y.grid();
    const int n_nodes = g.num_nodes();
    const int k = y.k();
    FirstFundamentalData f;
    f.g11.resize(static_cast<std::size_t>(n_nodes));
    f.inv11.resize(static_cast<std::size_t>(n_nodes));
    f.w.resize(static_cast<std::size_t>(n_nodes));

    const std::vector<double> d1 = axis_derivative(y, 0);
    std::vector<double> d2;
    if (g.dim() == 2) {
        d2 = axis_derivative(y, 1);
        f.g12.resize(static_cast<std::size_t>(n_nodes));
        f.g22.resize(static_cast<std::size_t>(n_nodes));
        f.inv12.resize(static_cast<std::size_t>(n_nodes));
        f.inv22.resize(static_cast<std::size_t>(n_nodes));
    }

    for (int id = 0; id < n_nodes; ++id) {
        const std::size_t base = static_cast<std::size_t>(id) * static_cast<std::size_t>(k);
        double s11 = 0.0, s12 = 0.0, s22 = 0.0;
        for (int c = 0; c < k; ++c) {
            const double a = d1[base + static_cast<std::size_t>(c)];
            s11 += a * a;
            if (g.dim() == 2) {
                const double b = d2[base + static_cast<std::size_t>(c)];
                s12 += a * b;
                s22 += b * b;
            }
        }
        const std::size_t q = static_cast<std::size_t>(id);
        if (g.dim() == 1) {
            f.g11[q] = 1.0 + s11;
            f.inv11[q] = 1.0 / f.g11[q];
            f.w[q] = std::sqrt(f.g11[q]);
        } else {
            f.g11[q] = 1.0 + s11;
            f.g12[q] = s12;
            f.g22[q] = 1.0 + s22;
            const double det = f.g11[q] * f.g22[q] - s12 * s12;
            f.inv11[q] = f.g22[q] / det;
            f.inv12[q] = -s12 / det;
            f.inv22[q] = f.g11[q] / det;
            f.w[q] = std::sqrt(det);
        }
    }
    return f;
}

double graphic_functional(const GraphField& y, const geometry1d::WeightField& B) {
    require_graph_mode(B, y, "graphic_functional");
    const GridND& g = y.grid();
    const FirstFundamentalData f = first_fundamental(y);
    KahanSum s;
    for (int id = 0; id < g.num_nodes(); ++id) {
        const std::vector<double> yv = component_buffer(y, id);
        s.add(quad_weight(g, id) * f.w[static_cast<std::size_t>(id)] * std::exp(B.b(yv)));
    }
    return s.value();
}

GraphField graphic_gradient(const GraphField& y, const geometry1d::WeightField& B) {
    require_graph_mode(B, y, "graphic_gradient");
    const GridND& g = y.grid();
    const int k = y.k();
    const FirstFundamentalData f = first_fundamental(y);

    std::array<std::vector<double>, 2> deriv;
    deriv[0] = axis_derivative(y, 0);
    if (g.dim() == 2) deriv[1] = axis_derivative(y, 1);

    GraphField grad(g, k);
    std::vector<double> avec(static_cast<std::size_t>(k));
    for (int id = 0; id < g.num_nodes(); ++id) {
        const std::size_t q = static_cast<std::size_t>(id);
        const std::size_t base = q * static_cast<std::size_t>(k);
        const std::vector<double> yv = component_buffer(y, id);
        const double factor = quad_weight(g, id) * std::exp(B.b(yv)) * f.w[q];

        for (int axis = 0; axis < g.dim(); ++axis) {
            // a_i = cq e^B w sum_l g^{il} D_l y, the coefficient paired with D_i xi.
            for (int c = 0; c < k; ++c) {
                double acc;
                if (g.dim() == 1) {
                    acc = f.inv11[q] * deriv[0][base + static_cast<std::size_t>(c)];
                } else if (axis == 0) {
                    acc = f.inv11[q] * deriv[0][base + static_cast<std::size_t>(c)] +
                          f.inv12[q] * deriv[1][base + static_cast<std::size_t>(c)];
                } else {
                    acc = f.inv12[q] * deriv[0][base + static_cast<std::size_t>(c)] +
                          f.inv22[q] * deriv[1][base + static_cast<std::size_t>(c)];
                }
                avec[static_cast<std::size_t>(c)] = factor * acc;
            }
            const int stride = axis == 0 ? 1 : g.nodes(0);
            const int pos = axis == 0 ? g.i_of(id) : g.j_of(id);
            const Stencil s = axis_stencil(pos, g.m(axis), g.h(axis));
            for (int t = 0; t < s.count; ++t) {
                const int target = id + s.offset[t] * stride;
                if (g.is_boundary(target)) continue;
                for (int c = 0; c < k; ++c)
                    grad.value(target, c) += avec[static_cast<std::size_t>(c)] * s.weight[t];
            }
        }

        if (!g.is_boundary(id)) {
            for (int c = 0; c < k; ++c) grad.value(id, c) += factor * B.by(c, yv);
        }
    }
    return grad;
}

namespace {

// Half-node flux along an axis for k = 1: F = e^{B(ym)} s / W at the face between node
// id and its axis neighbor, with s the face slope and W from the full face gradient.
struct FaceFlux {
    double value;
};

FaceFlux face_flux_1d(const GraphField& y, const geometry1d::WeightField& B, int i) {
    const GridND& g = y.grid();
    const double h = g.h(0);
    const double s = (y.value(i + 1, 0) - y.value(i, 0)) / h;
    const double ym = 0.5 * (y.value(i, 0) + y.value(i + 1, 0));
    const double w = std::sqrt(1.0 + s * s);
    return {std::exp(B.b(std::span<const double>(&ym, 1))) * s / w};
}

FaceFlux face_flux_2d(const GraphField& y, const geometry1d::WeightField& B, int axis, int i,
                      int j) {
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
    return {std::exp(B.b(std::span<const double>(&ym, 1))) * s / w};
}

}  // namespace

GraphField graphic_el_residual(const GraphField& y, const geometry1d::WeightField& B) {
    require_graph_mode(B, y, "graphic_el_residual");
    const GridND& g = y.grid();

    if (y.k() > 1) {
        // Weak-form residual recovered from the exact discrete gradient.
        const GraphField grad = graphic_gradient(y, B);
        GraphField r(g, y.k());
        for (int id = 0; id < g.num_nodes(); ++id) {
            if (g.is_boundary(id)) continue;
            const std::vector<double> yv = component_buffer(y, id);
            const double scale = quad_weight(g, id) * std::exp(B.b(yv));
            for (int c = 0; c < y.k(); ++c) r.value(id, c) = grad.value(id, c) / scale;
        }
        return r;
    }

    GraphField r(g, 1);
    const FirstFundamentalData f = first_fundamental(y);
    std::vector<double> yv(1);

    if (g.dim() == 1) {
        const int m = g.m(0);
        if (m < 3) throw std::invalid_argument("graphic_el_residual: requires m >= 3");
        double f_left = face_flux_1d(y, B, 0).value;
        for (int i = 1; i < m; ++i) {
            const double f_right = face_flux_1d(y, B, i).value;
            yv[0] = y.value(i, 0);
            const double div = (f_right - f_left) / g.h(0);
            r.value(i, 0) = -std::exp(-B.b(yv)) * div +
                            f.w[static_cast<std::size_t>(i)] * B.by(0, yv);
            f_left = f_right;
        }
        return r;
    }

    const int m1 = g.m(0);
    const int m2 = g.m(1);
    if (m1 < 3 || m2 < 3) throw std::invalid_argument("graphic_el_residual: requires m >= 3 per axis");
    for (int j = 1; j < m2; ++j) {
        for (int i = 1; i < m1; ++i) {
            const double div1 = (face_flux_2d(y, B, 0, i, j).value -
                                 face_flux_2d(y, B, 0, i - 1, j).value) /
                                g.h(0);
            const double div2 = (face_flux_2d(y, B, 1, i, j).value -
                                 face_flux_2d(y, B, 1, i, j - 1).value) /
                                g.h(1);
            const int id = g.index(i, j);
            yv[0] = y.value(id, 0);
            r.value(id, 0) = -std::exp(-B.b(yv)) * (div1 + div2) +
                             f.w[static_cast<std::size_t>(id)] * B.by(0, yv);
        }
    }
    return r;
}

}  // namespace bmin::graphic
