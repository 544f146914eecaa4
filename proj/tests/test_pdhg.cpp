#include <doctest.h>

#include <cmath>
#include <random>

#include "tvfwi/constraints.hpp"
#include "tvfwi/pdhg.hpp"

using namespace tvfwi;

namespace {

std::mt19937_64 rng(314159);

SubproblemSpec random_spec(const Grid& g, bool with_tau, bool with_xi) {
    std::normal_distribution<double> dn;
    std::uniform_real_distribution<double> du(0.5, 2.0);
    const std::size_t M = g.cells();

    SubproblemSpec spec;
    spec.m_n = ModelField(g, 0.0);
    for (double& v : spec.m_n.values) v = 3.2 + 0.5 * dn(rng);
    spec.bounds =
        Bounds(std::vector<double>(M, 0.2), std::vector<double>(M, 6.2));
    for (double& v : spec.m_n.values) v = std::clamp(v, 0.2, 6.2);
    spec.g.resize(M);
    spec.hdiag.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
        spec.g[i] = dn(rng);
        spec.hdiag[i] = du(rng);
    }
    spec.c = 0.1;
    if (with_tau) spec.tau = du(rng);
    if (with_xi) spec.xi = du(rng);
    return spec;
}

double objective_at(const SubproblemSpec& spec, const std::vector<double>& dm) {
    return spec.model_value(dm);
}

}  // namespace

TEST_CASE("box-only subproblem equals the separable closed form") {
    const Grid g(4, 5, 1.0);
    for (int t = 0; t < 10; ++t) {
        SubproblemSpec spec = random_spec(g, false, false);
        const SubproblemResult res = solve_subproblem(spec, default_steps(spec));
        CHECK(res.converged);
        for (std::size_t i = 0; i < g.cells(); ++i) {
            const double free = -spec.g[i] / (spec.hdiag[i] + spec.c);
            const double want =
                std::clamp(free, spec.bounds.lower[i] - spec.m_n.values[i],
                           spec.bounds.upper[i] - spec.m_n.values[i]);
            CHECK(res.delta_m[i] == doctest::Approx(want).epsilon(1e-8).scale(1.0));
        }
    }
}

TEST_CASE("iterates converge to the long-run reference under TV and hinge") {
    const Grid g(3, 3, 1.0);
    for (int t = 0; t < 8; ++t) {
        SubproblemSpec spec = random_spec(g, true, t % 2 == 0);

        PdhgParams tight = default_steps(spec);
        tight.tol = 1e-12;
        tight.max_iters = 500000;
        const SubproblemResult ref = solve_subproblem(spec, tight);
        REQUIRE(ref.converged);

        PdhgParams loose = default_steps(spec);
        loose.tol = 1e-8;
        const SubproblemResult got = solve_subproblem(spec, loose);
        CHECK(got.converged);

        const double q_ref = objective_at(spec, ref.delta_m);
        const double q_got = objective_at(spec, got.delta_m);
        CHECK(std::abs(q_got - q_ref) / (std::abs(q_ref) + 1.0) <= 1e-6);
    }
}

TEST_CASE("solutions respect all three constraint sets") {
    const Grid g(5, 6, 1.0);
    for (int t = 0; t < 6; ++t) {
        SubproblemSpec spec = random_spec(g, true, true);
        const SubproblemResult res = solve_subproblem(spec, default_steps(spec));
        ModelField out = spec.m_n;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            out.values[i] += res.delta_m[i];
            CHECK(out.values[i] >= spec.bounds.lower[i] - 1e-12);
            CHECK(out.values[i] <= spec.bounds.upper[i] + 1e-12);
        }
        CHECK(tv_norm(out) <= *spec.tau * (1.0 + 1e-6));
        CHECK(asym_tv_norm(out) <= *spec.xi * (1.0 + 1e-6));
    }
}

TEST_CASE("default steps meet the step-product bound with equality") {
    const Grid g(4, 4, 2.5);
    SubproblemSpec spec = random_spec(g, true, false);
    const PdhgParams p = default_steps(spec);
    CHECK(p.alpha * p.delta ==
          doctest::Approx(g.h * g.h / 8.0).epsilon(1e-14));
    double max_curv = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i)
        max_curv = std::max(max_curv, spec.curvature(i));
    CHECK(p.alpha == doctest::Approx(1.0 / max_curv).epsilon(1e-14));
}

TEST_CASE("multiplicative damping scales the whole curvature") {
    const Grid g(3, 3, 1.0);
    SubproblemSpec spec = random_spec(g, false, false);
    spec.damping = DampingMode::multiplicative;
    spec.c = 2.0;
    spec.nu = 0.25;
    for (std::size_t i = 0; i < g.cells(); ++i)
        CHECK(spec.curvature(i) ==
              doctest::Approx(2.0 * (spec.hdiag[i] + 0.25)).epsilon(1e-14));
}

TEST_CASE("a feasible model is its own projection") {
    const Grid g(6, 8, 1.0);
    ModelField m(g, 1.0);
    for (std::size_t i = 0; i < g.cells(); ++i)
        m.values[i] += 0.01 * std::sin(static_cast<double>(i));
    const Bounds b(std::vector<double>(g.cells(), 0.1),
                   std::vector<double>(g.cells(), 2.0));
    const double tau0 = tv_norm(m);
    bool conv = false;
    const ModelField p =
        project_intersection(m, b, 2.0 * tau0, std::nullopt, nullptr, &conv);
    CHECK(conv);
    double dist = 0.0, nrm = 0.0;
    for (std::size_t i = 0; i < g.cells(); ++i) {
        dist += (p.values[i] - m.values[i]) * (p.values[i] - m.values[i]);
        nrm += m.values[i] * m.values[i];
    }
    CHECK(std::sqrt(dist) <= 1e-8 * std::sqrt(nrm));
}

TEST_CASE("projection distance grows as the TV radius shrinks") {
    const Grid g(20, 30, 1.0);
    ModelField m = make_synthetic(SyntheticKind::layered, g);
    for (double& v : m.values) v *= 1e7;  // O(1) values for the test
    const Bounds b(std::vector<double>(g.cells(), 0.1),
                   std::vector<double>(g.cells(), 10.0));
    const double tau0 = tv_norm(m);

    double prev_dist = -1.0;
    for (const double frac : {0.9, 0.6, 0.3}) {
        bool conv = false;
        const ModelField p =
            project_intersection(m, b, frac * tau0, std::nullopt, nullptr, &conv);
        CHECK(conv);
        CHECK(tv_norm(p) <= frac * tau0 * (1.0 + 1e-6));
        double dist = 0.0;
        for (std::size_t i = 0; i < g.cells(); ++i)
            dist += (p.values[i] - m.values[i]) * (p.values[i] - m.values[i]);
        dist = std::sqrt(dist);
        CHECK(dist > prev_dist);
        prev_dist = dist;
    }
}

TEST_CASE("infeasible starting iterates are rejected") {
    const Grid g(3, 3, 1.0);
    SubproblemSpec spec = random_spec(g, false, false);
    spec.m_n.values[0] = spec.bounds.upper[0] + 1.0;
    CHECK_THROWS_AS(solve_subproblem(spec, default_steps(spec)),
                    std::invalid_argument);
}
