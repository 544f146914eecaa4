// Acceptance gate: one pass/fail line per criterion, tolerances pinned here.
// Exit status is the number of failed criteria. Runtimes are printed for
// reference; wall-clock limits depend on the host and are not gated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include "oracles.hpp"
#include "tvfwi/constraints.hpp"
#include "tvfwi/grid.hpp"
#include "tvfwi/objectives.hpp"
#include "tvfwi/pdhg.hpp"
#include "tvfwi/workflow.hpp"

using namespace tvfwi;

namespace {

int g_failures = 0;

struct Criterion {
    int id;
    std::ostringstream detail;
    bool ok = true;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit Criterion(int id_) : id(id_) {}

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.str().empty()) detail << "; ";
            detail << what;
        }
    }

    ~Criterion() {
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL");
        if (!ok) std::cout << " [" << detail.str() << "]";
        std::cout << " (" << secs << " s)" << std::endl;
        if (!ok) ++g_failures;
    }
};

// ---------- shared scene for the gradient criteria ----------

struct GradScene {
    Grid grid;
    ModelField m;
    Geometry geom;
    SamplingOperator P;
    std::vector<FreqShots> batch;

    GradScene(int nz, int nx, std::uint64_t seed) : grid(nz, nx, 50.0), P{} {
        ModelField truth = make_synthetic(SyntheticKind::layered, grid);
        geom.grid = grid;
        geom.source_positions = {{1 * grid.h, 1 * grid.h},
                                 {(nx - 2) * grid.h, 1 * grid.h}};
        for (int l = 0; l < nx; ++l)
            geom.receiver_positions.push_back({l * grid.h, 2 * grid.h});
        geom.validate();
        const DataSet data = generate_data(truth, geom, Wavelet{10.0}, {4.0, 6.0});
        P = SamplingOperator::from_geometry(geom);
        batch = slice_batch(data, {0, 1});

        m = truth;
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> jitter(0.92, 1.08);
        for (double& v : m.values) v *= jitter(rng);
    }

    double value(const std::vector<double>& vals, ObjectiveMode mode,
                 double lambda) const {
        ModelField mm(grid, vals);
        return mode == ObjectiveMode::fwi
                   ? fwi_eval(mm, batch, P).value
                   : wri_eval(mm, batch, P, WriConfig{lambda}).value;
    }
};

void criterion_1() {
    Criterion c(1);
    GradScene s(6, 6, 99);
    for (const auto mode : {ObjectiveMode::fwi, ObjectiveMode::wri}) {
        const double lambda = 10.0;
        const auto g_fd = oracles::fd_gradient(
            [&](const std::vector<double>& v) { return s.value(v, mode, lambda); },
            s.m.values);
        const ObjectiveEval e = mode == ObjectiveMode::fwi
                                    ? fwi_eval(s.m, s.batch, s.P)
                                    : wri_eval(s.m, s.batch, s.P, WriConfig{lambda});
        const double err = oracles::max_rel_err_vs(g_fd, e.gradient);
        c.require(err <= 1e-5,
                  (mode == ObjectiveMode::fwi ? std::string("fwi")
                                              : std::string("wri")) +
                      " gradient err " + std::to_string(err));
    }
}

void criterion_2() {
    Criterion c(2);
    GradScene s(8, 10, 7);
    const ObjectiveEval f = fwi_eval(s.m, s.batch, s.P);
    double f_nrm = 0.0;
    for (double v : f.gradient) f_nrm += v * v;
    f_nrm = std::sqrt(f_nrm);

    double prev = std::numeric_limits<double>::infinity();
    double last = prev;
    for (const double lambda : {1e1, 1e2, 1e3, 1e4}) {
        const ObjectiveEval w = wri_eval(s.m, s.batch, s.P, WriConfig{lambda});
        double num = 0.0;
        for (std::size_t i = 0; i < f.gradient.size(); ++i)
            num += (w.gradient[i] - f.gradient[i]) * (w.gradient[i] - f.gradient[i]);
        const double rel = std::sqrt(num) / f_nrm;
        c.require(rel < prev, "discrepancy not strictly decreasing at lambda=" +
                                  std::to_string(lambda));
        prev = rel;
        last = rel;
    }
    c.require(last <= 1e-3,
              "discrepancy " + std::to_string(last) + " at lambda=1e4");
}

void criterion_3() {
    Criterion c(3);
    std::mt19937_64 rng(606060);
    std::normal_distribution<double> dn;
    std::uniform_int_distribution<std::size_t> len(1, 40);
    std::uniform_real_distribution<double> radius(0.05, 5.0);

    auto randv = [&](std::size_t n, double scale) {
        std::vector<double> v(n);
        for (double& x : v) x = scale * dn(rng);
        return v;
    };

    for (int t = 0; t < 1000 && c.ok; ++t) {
        const std::size_t n = len(rng);
        const auto z = randv(n, 2.0);
        const double s = radius(rng);
        const auto got = project_simplex(z, s);
        const auto want = oracles::simplex_sort(z, s);
        for (std::size_t i = 0; i < n; ++i)
            c.require(std::abs(got[i] - want[i]) <= 1e-10 * (1.0 + std::abs(want[i])),
                      "simplex mismatch at trial " + std::to_string(t));
    }

    auto l12 = [](const DualPairField& p) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            s += std::hypot(p.dx[i], p.dz[i]);
        return s;
    };
    auto hinge = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += std::max(0.0, x);
        return s;
    };

    for (int t = 0; t < 500 && c.ok; ++t) {
        const std::size_t n = 2 + (t % 20);
        const double r = radius(rng);
        const std::string at = " at trial " + std::to_string(t);

        DualPairField p(n), q(n);
        p.dx = randv(n, 1.0);
        p.dz = randv(n, 1.0);
        q.dx = randv(n, 1.0);
        q.dz = randv(n, 1.0);
        const DualPairField pp = project_l12_ball(p, r);
        const DualPairField qq = project_l12_ball(q, r);
        c.require(l12(pp) <= r * (1.0 + 1e-10) + 1e-12, "l12 infeasible" + at);
        const DualPairField ppp = project_l12_ball(pp, r);
        double idem = 0.0, d_in = 0.0, d_out = 0.0, vi = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            idem += std::pow(ppp.dx[i] - pp.dx[i], 2) +
                    std::pow(ppp.dz[i] - pp.dz[i], 2);
            d_in += std::pow(p.dx[i] - q.dx[i], 2) + std::pow(p.dz[i] - q.dz[i], 2);
            d_out +=
                std::pow(pp.dx[i] - qq.dx[i], 2) + std::pow(pp.dz[i] - qq.dz[i], 2);
            vi += (p.dx[i] - pp.dx[i]) * (qq.dx[i] - pp.dx[i]) +
                  (p.dz[i] - pp.dz[i]) * (qq.dz[i] - pp.dz[i]);
        }
        c.require(std::sqrt(idem) <= 1e-10 * (1.0 + r), "l12 not idempotent" + at);
        c.require(d_out <= d_in + 1e-12, "l12 expansive" + at);
        c.require(vi <= 1e-8, "l12 variational inequality" + at);

        const auto z = randv(n, 1.0);
        const auto y = randv(n, 1.0);
        const auto pz = project_hinge_ball(z, r);
        const auto py = project_hinge_ball(y, r);
        c.require(hinge(pz) <= r * (1.0 + 1e-10) + 1e-12, "hinge infeasible" + at);
        const auto pzz = project_hinge_ball(pz, r);
        double idem_h = 0.0, din_h = 0.0, dout_h = 0.0, vi_h = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            idem_h += std::pow(pzz[i] - pz[i], 2);
            din_h += std::pow(z[i] - y[i], 2);
            dout_h += std::pow(pz[i] - py[i], 2);
            vi_h += (z[i] - pz[i]) * (py[i] - pz[i]);
        }
        c.require(std::sqrt(idem_h) <= 1e-10 * (1.0 + r), "hinge not idempotent" + at);
        c.require(dout_h <= din_h + 1e-12, "hinge expansive" + at);
        c.require(vi_h <= 1e-8, "hinge variational inequality" + at);
    }

    for (int t = 0; t < 500 && c.ok; ++t) {
        const auto z = randv(4, 1.5);
        const double r = radius(rng);
        const auto got = project_hinge_ball(z, r);
        const auto want = oracles::hinge_ball_active_set(z, r);
        for (std::size_t i = 0; i < 4; ++i)
            c.require(std::abs(got[i] - want[i]) <= 1e-8 * (1.0 + std::abs(want[i])),
                      "hinge QP oracle mismatch at trial " + std::to_string(t));
    }
}

void criterion_4() {
    Criterion c(4);
    std::mt19937_64 rng(424242);
    std::normal_distribution<double> dn;
    std::uniform_real_distribution<double> du(0.5, 2.0);
    const Grid g(3, 3, 1.0);
    const std::size_t M = g.cells();

    for (int t = 0; t < 20; ++t) {
        SubproblemSpec spec;
        spec.m_n = ModelField(g, 3.2);
        spec.bounds =
            Bounds(std::vector<double>(M, 0.2), std::vector<double>(M, 6.2));
        spec.g.resize(M);
        spec.hdiag.resize(M);
        for (std::size_t i = 0; i < M; ++i) {
            spec.g[i] = dn(rng);
            spec.hdiag[i] = du(rng);
        }
        spec.c = 0.1;
        spec.tau = du(rng);

        PdhgParams tight = default_steps(spec);
        tight.tol = 1e-12;
        tight.max_iters = 2000000;
        const SubproblemResult ref = solve_subproblem(spec, tight);
        c.require(ref.converged, "reference run did not converge");

        PdhgParams loose = default_steps(spec);
        loose.tol = 1e-8;  // pinned: the 1e-6 objective-gap target needs a
                           // tighter dual/primal stop than the inner-loop 1e-4
        const SubproblemResult got = solve_subproblem(spec, loose);
        c.require(got.converged, "candidate run did not converge");

        const double q_ref = spec.model_value(ref.delta_m);
        const double q_got = spec.model_value(got.delta_m);
        const double gap = std::abs(q_got - q_ref) / (std::abs(q_ref) + 1.0);
        c.require(gap <= 1e-6, "objective gap " + std::to_string(gap) +
                                   " at instance " + std::to_string(t));

        // box-only path: closed form
        SubproblemSpec box = spec;
        box.tau.reset();
        const SubproblemResult bres = solve_subproblem(box, default_steps(box));
        for (std::size_t i = 0; i < M; ++i) {
            const double want = std::clamp(-box.g[i] / (box.hdiag[i] + box.c),
                                           0.2 - 3.2, 6.2 - 3.2);
            c.require(std::abs(bres.delta_m[i] - want) <= 1e-8,
                      "box closed form mismatch");
        }
    }
}

void criterion_5() {
    Criterion c(5);
    const Grid g(60, 120, 20.0);
    ModelField m = make_synthetic(SyntheticKind::salt_toy, g);
    const Bounds b = Bounds::from_velocity_range(g, 1400.0, 5000.0);
    const double tau0 = tv_norm(m);

    double prev_dist = -1.0;
    for (const double frac : {0.9, 0.6, 0.3}) {
        bool conv = false;
        const ModelField p =
            project_intersection(m, b, frac * tau0, std::nullopt, nullptr, &conv);
        c.require(conv, "projection did not converge at frac " + std::to_string(frac));
        c.require(tv_norm(p) <= frac * tau0 * (1.0 + 1e-6),
                  "TV radius violated at frac " + std::to_string(frac));
        bool in_box = true;
        double dist = 0.0;
        for (std::size_t i = 0; i < g.cells(); ++i) {
            in_box = in_box && p.values[i] >= b.lower[i] && p.values[i] <= b.upper[i];
            dist += std::pow(p.values[i] - m.values[i], 2);
        }
        c.require(in_box, "bounds violated at frac " + std::to_string(frac));
        dist = std::sqrt(dist);
        c.require(dist > prev_dist,
                  "distance not increasing at frac " + std::to_string(frac));
        prev_dist = dist;
    }
}

// ---------- the desk-scale experiment (criteria 6-9) ----------

struct DeskScene {
    Grid grid{60, 120, 20.0};
    ModelField truth;
    ModelField m0;
    DataSet data;
    double tau_true = 0.0;
    double xi_true = 0.0;

    DeskScene() : truth(make_synthetic(SyntheticKind::salt_toy, grid)), m0(grid, 0.0) {
        // poor start: the background gradient only, no salt, no slow zone
        for (int k = 0; k < grid.nz; ++k) {
            const double v =
                1500.0 + (3000.0 - 1500.0) * k / static_cast<double>(grid.nz - 1);
            for (int l = 0; l < grid.nx; ++l)
                m0.at(k, l) = velocity_to_slowness_sq(v);
        }
        const Geometry geom = Geometry::surface_default(grid);
        std::vector<double> freqs;
        for (int f = 3; f <= 10; ++f) freqs.push_back(f);
        data = generate_data(truth, geom, Wavelet{10.0}, freqs);
        tau_true = tv_norm(truth);
        xi_true = asym_tv_norm(truth);
    }

    InversionPlan base_plan() const {
        InversionPlan p;
        p.mode = ObjectiveMode::wri;
        p.wri.lambda = 10.0;
        p.frequencies = data.frequencies;
        p.v_min = 1400.0;
        p.v_max = 5000.0;
        p.encoding.enabled = true;
        p.encoding.n_super = 2;
        p.encoding.seed = 1234;
        p.reference_model = truth;
        return p;
    }
};

struct RunOutcome {
    InversionResult res;
    double final_error = 0.0;
};

RunOutcome run_with_passes(const DeskScene& scene, InversionPlan plan) {
    const auto t0 = std::chrono::steady_clock::now();
    auto progress = [&](int pass, int batch, const ModelField&) {
        std::cout << "    pass " << pass << " batch " << batch << " ("
                  << std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   t0)
                         .count()
                  << " s)" << std::endl;
    };
    RunOutcome out{run_inversion(plan, scene.data, scene.m0, &scene.truth, progress),
                   0.0};
    out.final_error = model_error(out.res.model, scene.truth);
    long inner = 0;
    for (const auto& r : out.res.log.rows) inner += r.inner_iters;
    std::cout << "    accepted steps " << out.res.log.rows.size()
              << ", inner iterations " << inner << std::endl;
    return out;
}

std::vector<PassSpec> xi_schedule(double tau_true, double xi_true) {
    std::vector<PassSpec> passes;
    for (const double f : {0.01, 0.05, 0.10, 0.15, 0.20, 0.25, 0.40, 0.90}) {
        PassSpec p;
        p.tau = 0.9 * tau_true;
        p.xi = f * xi_true;
        passes.push_back(p);
    }
    return passes;
}

void check_sgp_contract(Criterion& c, const RunLog& log, const std::string& run) {
    for (std::size_t b = 0; b < log.batch_traces.size(); ++b) {
        const SgpTrace& tr = log.batch_traces[b];
        c.require(tr.max_consecutive_rejections() <= 60,
                  run + ": >60 consecutive rejections");
        for (const SgpStep& s : tr.steps) {
            if (!s.accepted) continue;
            // sufficient decrease, as evaluated under one weight draw
            c.require(s.f_after - s.f_before <=
                          0.1 * s.model_decrease + 1e-12 * std::abs(s.f_before),
                      run + ": acceptance inequality violated");
            // non-increasing up to the same roundoff slack the acceptance
            // rule itself grants near a minimizer
            c.require(s.f_after <= s.f_before + 1e-14 * (std::abs(s.f_before) +
                                                         std::abs(s.f_after)),
                      run + ": accepted step increased f");
        }
    }
}

void criteria_6_to_9() {
    std::cout << "building desk scene..." << std::flush;
    DeskScene scene;
    std::cout << " done" << std::endl;

    auto timed = [](const char* name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        auto r = fn();
        std::cout << "  run " << name << ": error " << r.final_error << " ("
                  << std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                   t0)
                         .count()
                  << " s)" << std::endl;
        return r;
    };

    // Run A: bounds only.
    InversionPlan plan_a = scene.base_plan();
    plan_a.passes = {PassSpec{}, PassSpec{}};
    const RunOutcome a = timed("A", [&] { return run_with_passes(scene, plan_a); });

    // Run B: bounds + TV.
    InversionPlan plan_b = scene.base_plan();
    {
        PassSpec p;
        p.tau = 0.9 * scene.tau_true;
        plan_b.passes = {p, p};
    }
    const RunOutcome b = timed("B", [&] { return run_with_passes(scene, plan_b); });

    // Run C: bounds + TV + one-sided TV continuation over 8 passes.
    InversionPlan plan_c = scene.base_plan();
    plan_c.passes = xi_schedule(scene.tau_true, scene.xi_true);
    const RunOutcome cr = timed("C", [&] { return run_with_passes(scene, plan_c); });

    // Run C in FWI mode with multiplicative damping.
    InversionPlan plan_f = plan_c;
    plan_f.mode = ObjectiveMode::fwi;
    plan_f.sgp.damping = DampingMode::multiplicative;
    RunOutcome fw;
    bool fwi_completed = true;
    std::string fwi_error_msg;
    try {
        fw = timed("C-fwi", [&] { return run_with_passes(scene, plan_f); });
    } catch (const std::exception& e) {
        fwi_completed = false;
        fwi_error_msg = e.what();
    }

    {
        Criterion c(6);
        check_sgp_contract(c, a.res.log, "A");
        check_sgp_contract(c, b.res.log, "B");
        check_sgp_contract(c, cr.res.log, "C");
        if (fwi_completed) check_sgp_contract(c, fw.res.log, "C-fwi");
    }
    {
        Criterion c(7);
        c.require(cr.final_error < b.final_error,
                  "error(C) !< error(B): " + std::to_string(cr.final_error) +
                      " vs " + std::to_string(b.final_error));
        c.require(b.final_error < a.final_error,
                  "error(B) !< error(A): " + std::to_string(b.final_error) +
                      " vs " + std::to_string(a.final_error));
        c.require(cr.final_error <= 0.8 * a.final_error,
                  "C is not a >=20% reduction over A");
        const auto& pe = cr.res.log.pass_final_errors;
        c.require(pe.size() == 8, "run C did not log 8 passes");
        for (std::size_t i = 1; i < pe.size(); ++i)
            c.require(pe[i] <= pe[i - 1] * (1.0 + 1e-12),
                      "run C pass error increased at pass " + std::to_string(i));
    }
    {
        Criterion c(8);
        c.require(fwi_completed, "FWI run aborted: " + fwi_error_msg);
        if (fwi_completed)
            c.require(fw.final_error <= 1.5 * cr.final_error,
                      "FWI error " + std::to_string(fw.final_error) +
                          " exceeds 1.5x WRI error " +
                          std::to_string(cr.final_error));
    }
    {
        Criterion c(9);
        const RunOutcome rerun =
            timed("C-rerun", [&] { return run_with_passes(scene, plan_c); });
        c.require(rerun.res.log.rows.size() == cr.res.log.rows.size(),
                  "rerun produced a different number of accepted steps");
        if (rerun.res.log.rows.size() == cr.res.log.rows.size())
            for (std::size_t i = 0; i < cr.res.log.rows.size(); ++i)
                c.require(std::memcmp(&rerun.res.log.rows[i].objective,
                                      &cr.res.log.rows[i].objective,
                                      sizeof(double)) == 0,
                          "objective column differs at row " + std::to_string(i));
    }
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criteria_6_to_9();
    std::cout << (g_failures == 0 ? "all criteria passed"
                                  : std::to_string(g_failures) + " criteria failed")
              << "\n";
    return g_failures;
}
