#include "bmin/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace bmin {

double trapezoid(std::span<const double> f, double h) {
    if (f.size() < 2) throw std::invalid_argument("trapezoid: need at least two samples");
    KahanSum s;
    s.add(0.5 * f.front());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s.add(f[i]);
    s.add(0.5 * f.back());
    return s.value() * h;
}

std::vector<double> derivative_uniform(std::span<const double> y, double h) {
    const std::size_t m = y.size();
    if (m < 3) throw std::invalid_argument("derivative_uniform: need at least three samples");
    std::vector<double> d(m);
    const double inv2h = 1.0 / (2.0 * h);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (y[i + 1] - y[i - 1]) * inv2h;
    d[m - 1] = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) * inv2h;
    return d;
}

std::vector<double> second_derivative_uniform(std::span<const double> y, double h) {
    const std::size_t m = y.size();
    if (m < 3) throw std::invalid_argument("second_derivative_uniform: need at least three samples");
    std::vector<double> d(m);
    const double invh2 = 1.0 / (h * h);
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) * invh2;
    if (m >= 4) {
        d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) * invh2;
        d[m - 1] = (2.0 * y[m - 1] - 5.0 * y[m - 2] + 4.0 * y[m - 3] - y[m - 4]) * invh2;
    } else {
        d[0] = d[1];
        d[m - 1] = d[1];
    }
    return d;
}

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

}  // namespace bmin
