#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "bmin/flow.hpp"

using namespace bmin;
using namespace bmin::flow;
using geometry1d::GraphCurve;
using geometry1d::Grid1D;
using geometry1d::grim_reaper;

namespace {

BoundaryRule comoving(double ya, double yb) {
    char left[64], right[64];
    std::snprintf(left, sizeof left, "%.17g+t", ya);
    std::snprintf(right, sizeof right, "%.17g+t", yb);
    return BoundaryRule::from_strings(left, right);
}

}  // namespace

TEST_CASE("affine curves with constant boundary are stationary") {
    const Grid1D g(0.0, 1.0, 50);
    const GraphCurve line = GraphCurve::sampled(g, [](double x) { return 0.8 * x - 0.3; });
    const auto boundary = BoundaryRule::from_strings("-0.3", "0.5");
    const double dt = 0.4 * g.h() * g.h();
    const auto traj = evolve_csf(line, 200.0 * dt, dt, boundary, 5);
    CHECK(traj.size() == 5);
    for (std::size_t i = 0; i <= 50; ++i)
        CHECK(traj.back().curve.y()[i] == doctest::Approx(line.y()[i]).epsilon(1e-13));
}

TEST_CASE("grim reaper translates at unit speed under co-moving boundaries") {
    const Grid1D g(-1.2, 1.2, 240);
    const GraphCurve initial = GraphCurve::sampled(g, grim_reaper);
    const auto boundary = comoving(grim_reaper(-1.2), grim_reaper(1.2));
    const double dt = 0.4 * g.h() * g.h();
    const auto traj = evolve_csf(initial, 0.1, dt, boundary, 11);

    CHECK(traj.front().t == 0.0);
    CHECK(traj.back().t == 0.1);
    for (std::size_t s = 1; s < traj.size(); ++s) CHECK(traj[s].t > traj[s - 1].t);

    double sup = 0.0;
    for (int i = 1; i < g.n(); ++i)
        sup = std::max(sup, std::fabs(traj.back().curve.y()[static_cast<std::size_t>(i)] -
                                      (grim_reaper(g.node(i)) + traj.back().t)));
    CHECK(sup < 1e-4);
}

TEST_CASE("translation error drops by ~4x when n doubles and dt quarters") {
    double errs[2];
    int idx = 0;
    for (int n : {240, 480}) {
        const Grid1D g(-1.2, 1.2, n);
        const GraphCurve initial = GraphCurve::sampled(g, grim_reaper);
        const auto boundary = comoving(grim_reaper(-1.2), grim_reaper(1.2));
        const double dt = 0.4 * g.h() * g.h();
        const auto traj = evolve_csf(initial, 0.1, dt, boundary, 3);
        double sup = 0.0;
        for (int i = 1; i < n; ++i)
            sup = std::max(sup, std::fabs(traj.back().curve.y()[static_cast<std::size_t>(i)] -
                                          (grim_reaper(g.node(i)) + 0.1)));
        errs[idx++] = sup;
    }
    CHECK(errs[0] / errs[1] == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("discrete soliton speed stays within O(h^2) of one") {
    const Grid1D g(-1.2, 1.2, 400);
    const GraphCurve c = GraphCurve::sampled(g, grim_reaper);
    const double h = g.h();
    double dev = 0.0;
    for (int i = 1; i < g.n(); ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        const double ypp = (c.y()[k + 1] - 2.0 * c.y()[k] + c.y()[k - 1]) / (h * h);
        const double yp = (c.y()[k + 1] - c.y()[k - 1]) / (2.0 * h);
        dev = std::max(dev, std::fabs(ypp / (1.0 + yp * yp) - 1.0));
    }
    CHECK(dev < 60.0 * h * h);
}

TEST_CASE("dt above the stability bound is rejected") {
    const Grid1D g(0.0, 1.0, 20);
    const GraphCurve line(g, std::vector<double>(21, 0.0));
    const auto boundary = BoundaryRule::from_strings("0", "0");
    const double h2 = g.h() * g.h();
    CHECK_THROWS_AS(evolve_csf(line, 1.0, h2, boundary), std::invalid_argument);
    CHECK_THROWS_AS(evolve_csf(line, 0.0, 0.1 * h2, boundary), std::invalid_argument);
    CHECK_NOTHROW(evolve_csf(line, 100.0 * 0.4 * h2, 0.4 * h2, boundary));
}

TEST_CASE("partial final step lands exactly on t_end") {
    const Grid1D g(0.0, 1.0, 20);
    const GraphCurve line(g, std::vector<double>(21, 0.0));
    const auto boundary = BoundaryRule::from_strings("0", "0");
    const double dt = 0.4 * g.h() * g.h();
    const double t_end = 10.5 * dt;  // not an integer multiple
    const auto traj = evolve_csf(line, t_end, dt, boundary, 3);
    CHECK(traj.back().t == t_end);
}
