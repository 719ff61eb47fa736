#include "bmin/flow.hpp"

#include <cmath>
#include <stdexcept>

namespace bmin::flow {

BoundaryRule BoundaryRule::from_strings(std::string_view left_text, std::string_view right_text) {
    return BoundaryRule{expr::parse(left_text, {"t"}), expr::parse(right_text, {"t"})};
}

double BoundaryRule::left_at(double t) const { return left.eval(std::span<const double>(&t, 1)); }

double BoundaryRule::right_at(double t) const { return right.eval(std::span<const double>(&t, 1)); }

std::vector<FlowState> evolve_csf(const geometry1d::GraphCurve& initial, double t_end, double dt,
                                  const BoundaryRule& boundary, int num_samples) {
    const geometry1d::Grid1D& g = initial.grid();
    const double h = g.h();
    if (!(t_end > 0.0)) throw std::invalid_argument("evolve_csf: requires t_end > 0");
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_csf: requires dt > 0");
    if (dt > 0.4 * h * h * (1.0 + 1e-12))
        throw std::invalid_argument("evolve_csf: dt violates the stability bound 0.4 h^2");
    if (num_samples < 2) throw std::invalid_argument("evolve_csf: requires num_samples >= 2");

    const long long steps = static_cast<long long>(std::ceil(t_end / dt - 1e-9));
    auto sample_step = [&](int s) {
        return static_cast<long long>(std::llround(static_cast<double>(s) * steps /
                                                   (num_samples - 1)));
    };

    std::vector<double> y(initial.y().begin(), initial.y().end());
    const std::size_t n = y.size() - 1;
    std::vector<double> rate(n + 1, 0.0);

    std::vector<FlowState> trajectory;
    trajectory.push_back(FlowState{initial, 0.0});

    double t = 0.0;
    int next_sample = 1;
    while (sample_step(next_sample) == 0 && next_sample < num_samples - 1) ++next_sample;

    for (long long step = 0; step < steps; ++step) {
        const double dt_step = std::min(dt, t_end - t);
        for (std::size_t i = 1; i < n; ++i) {
            const double ypp = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (h * h);
            const double yp = (y[i + 1] - y[i - 1]) / (2.0 * h);
            rate[i] = ypp / (1.0 + yp * yp);
        }
        for (std::size_t i = 1; i < n; ++i) y[i] += dt_step * rate[i];
        t = (step + 1 == steps) ? t_end : t + dt_step;
        y[0] = boundary.left_at(t);
        y[n] = boundary.right_at(t);

        while (next_sample < num_samples && sample_step(next_sample) == step + 1) {
            trajectory.push_back(FlowState{geometry1d::GraphCurve(g, y), t});
            ++next_sample;
        }
    }
    if (trajectory.back().t != t_end)
        trajectory.push_back(FlowState{geometry1d::GraphCurve(g, y), t_end});
    return trajectory;
}

}  // namespace bmin::flow
