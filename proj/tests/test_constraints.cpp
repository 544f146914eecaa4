#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "tvfwi/constraints.hpp"

using namespace tvfwi;

namespace {

std::mt19937_64 rng(20240817);

std::vector<double> random_vec(std::size_t n, double scale) {
    std::normal_distribution<double> d(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double l12(const DualPairField& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::hypot(p.dx[i], p.dz[i]);
    return s;
}

double hinge_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::max(0.0, x);
    return s;
}

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

TEST_CASE("simplex projection matches the sort-and-threshold oracle") {
    std::uniform_int_distribution<std::size_t> len(1, 40);
    std::uniform_real_distribution<double> radius(0.1, 5.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = len(rng);
        const std::vector<double> z = random_vec(n, 2.0);
        const double s = radius(rng);
        const std::vector<double> got = project_simplex(z, s);
        const std::vector<double> want = oracles::simplex_sort(z, s);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10).scale(1.0));
            CHECK(got[i] >= 0.0);
            sum += got[i];
        }
        CHECK(sum == doctest::Approx(s).epsilon(1e-10));
    }
}

TEST_CASE("hinge-ball projection matches the active-set oracle on length 4") {
    std::uniform_real_distribution<double> radius(0.05, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const std::vector<double> z = random_vec(4, 1.5);
        const double r = radius(rng);
        const std::vector<double> got = project_hinge_ball(z, r);
        const std::vector<double> want = oracles::hinge_ball_active_set(z, r);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("ball projections: idempotence, nonexpansiveness, feasibility, VI") {
    std::uniform_real_distribution<double> radius(0.1, 4.0);
    std::uniform_int_distribution<std::size_t> len(2, 30);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = len(rng);
        const double r = radius(rng);

        // l1,2 ball
        {
            DualPairField p(n);
            p.dx = random_vec(n, 1.0);
            p.dz = random_vec(n, 1.0);
            DualPairField q(n);
            q.dx = random_vec(n, 1.0);
            q.dz = random_vec(n, 1.0);

            const DualPairField pp = project_l12_ball(p, r);
            const DualPairField qq = project_l12_ball(q, r);
            CHECK(l12(pp) <= r * (1.0 + 1e-10) + 1e-12);

            const DualPairField ppp = project_l12_ball(pp, r);
            CHECK(std::sqrt(dist2(ppp.dx, pp.dx) + dist2(ppp.dz, pp.dz)) <=
                  1e-10 * (1.0 + r));

            const double d_before = dist2(p.dx, q.dx) + dist2(p.dz, q.dz);
            const double d_after = dist2(pp.dx, qq.dx) + dist2(pp.dz, qq.dz);
            CHECK(d_after <= d_before + 1e-12);

            // variational inequality <z - Pz, y - Pz> <= 0 for feasible y
            double vi = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                vi += (p.dx[i] - pp.dx[i]) * (qq.dx[i] - pp.dx[i]);
                vi += (p.dz[i] - pp.dz[i]) * (qq.dz[i] - pp.dz[i]);
            }
            CHECK(vi <= 1e-8);
        }

        // hinge ball
        {
            const std::vector<double> z = random_vec(n, 1.0);
            const std::vector<double> y = random_vec(n, 1.0);
            const std::vector<double> pz = project_hinge_ball(z, r);
            const std::vector<double> py = project_hinge_ball(y, r);
            CHECK(hinge_sum(pz) <= r * (1.0 + 1e-10) + 1e-12);

            const std::vector<double> pzz = project_hinge_ball(pz, r);
            CHECK(std::sqrt(dist2(pzz, pz)) <= 1e-10 * (1.0 + r));

            CHECK(dist2(pz, py) <= dist2(z, y) + 1e-12);

            double vi = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                vi += (z[i] - pz[i]) * (py[i] - pz[i]);
            CHECK(vi <= 1e-8);
        }
    }
}

TEST_CASE("interior points are fixed points of the ball projections") {
    DualPairField p(3);
    p.dx = {0.1, -0.05, 0.0};
    p.dz = {0.0, 0.1, 0.02};
    const DualPairField q = project_l12_ball(p, 10.0);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(q.dx[i] == p.dx[i]);
        CHECK(q.dz[i] == p.dz[i]);
    }
    const std::vector<double> z = {-1.0, 0.2, 0.1};
    const std::vector<double> pz = project_hinge_ball(z, 1.0);
    for (std::size_t i = 0; i < 3; ++i) CHECK(pz[i] == z[i]);
}

TEST_CASE("tv norms on hand-computed fields") {
    Grid g(2, 2, 1.0);
    // values: m(0,0)=0, m(1,0)=1, m(0,1)=2, m(1,1)=3 (depth-fastest)
    ModelField m(g, std::vector<double>{0.0, 1.0, 2.0, 3.0});
    // gradients: cell (0,0): dx=2, dz=1 -> sqrt(5); (1,0): dx=2 -> 2;
    // (0,1): dz=1 -> 1; (1,1): 0
    CHECK(tv_norm(m) == doctest::Approx(std::sqrt(5.0) + 3.0).epsilon(1e-14));
    // depth differences: +1 at (0,0) and (0,1)
    CHECK(asym_tv_norm(m) == doctest::Approx(2.0).epsilon(1e-14));

    ModelField down(g, std::vector<double>{3.0, 1.0, 3.0, 1.0});
    CHECK(asym_tv_norm(down) == 0.0);  // slowness decreasing with depth

    ModelField flat(g, 5.0);
    CHECK(tv_norm(flat) == 0.0);
    CHECK(asym_tv_norm(flat) == 0.0);
}

TEST_CASE("box projection clamps exactly") {
    Grid g(2, 2, 1.0);
    Bounds b(std::vector<double>(4, 1.0), std::vector<double>(4, 2.0));
    ModelField m(g, std::vector<double>{0.5, 1.5, 2.5, 2.0});
    const ModelField p = project_box(m, b);
    CHECK(p.values[0] == 1.0);
    CHECK(p.values[1] == 1.5);
    CHECK(p.values[2] == 2.0);
    CHECK(p.values[3] == 2.0);
}
