#include "tvfwi/sgp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace tvfwi {

int SgpTrace::accepted_count() const {
    int n = 0;
    for (const auto& s : steps) n += s.accepted ? 1 : 0;
    return n;
}

int SgpTrace::max_consecutive_rejections() const {
    int worst = 0, run = 0;
    for (const auto& s : steps) {
        run = s.accepted ? 0 : run + 1;
        worst = std::max(worst, run);
    }
    return worst;
}

namespace {

// Algorithm-1 style eigenvalue bracket for the diagonal Hessian: clamp into
// [rho, 1e12 * median] (median floored at rho to keep the bracket valid).
std::vector<double> bracket_hessian(const std::vector<double>& hdiag, double rho) {
    std::vector<double> sorted = hdiag;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = std::max(sorted[sorted.size() / 2], rho);
    const double hi = 1e12 * median;
    std::vector<double> out = hdiag;
    for (double& v : out) v = std::clamp(v, rho, hi);
    return out;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

}  // namespace

SgpResult sgp_minimize(ObjectiveOracle& objective, const ConstraintSet& constraints,
                       const ModelField& m0, const SgpParams& params) {
    using clock = std::chrono::steady_clock;
    if (!(params.sigma > 0.0 && params.sigma <= 1.0))
        throw std::invalid_argument("sgp: sigma must be in (0, 1]");
    if (!(params.xi1 > 1.0 && params.xi2 > 1.0))
        throw std::invalid_argument("sgp: xi1 and xi2 must exceed 1");

    SgpResult out{m0, {}};
    ModelField& m = out.model;

    ObjectiveEval eval = objective.full(m);
    std::vector<double> hdiag = bracket_hessian(eval.hessian_diag, params.rho);
    double lambda_h_min = *std::min_element(hdiag.begin(), hdiag.end());

    const double max_h0 = *std::max_element(hdiag.begin(), hdiag.end());
    double c = params.c0;
    if (c < 0.0)
        c = params.damping == DampingMode::additive ? 1e-2 * max_h0 : 1.0;
    const double c_ceiling = 1e12 * std::max(c, 1e-300);

    DualWarmStart warm;
    bool have_warm = false;
    // Multiplicative damping rescales the quadratic model whenever c moves,
    // so duals carried over certify the previous scaling and stall the next
    // solve near its starting point. Warm starts are additive-only.
    const bool use_warm = params.warm_start_duals;
    int accepted = 0;

    while (accepted < params.max_outer) {
        const auto t0 = clock::now();

        SubproblemSpec spec;
        spec.g = eval.gradient;
        spec.hdiag = hdiag;
        spec.c = c;
        spec.m_n = m;
        spec.bounds = constraints.bounds;
        spec.tau = constraints.tau;
        spec.xi = constraints.xi;
        spec.damping = params.damping;
        spec.nu = params.nu_frac * *std::max_element(hdiag.begin(), hdiag.end());

        PdhgParams pp = params.pdhg;
        if (!(pp.alpha > 0.0) || !(pp.delta > 0.0)) {
            const PdhgParams def = default_steps(spec);
            pp.alpha = def.alpha;
            pp.delta = def.delta;
        }
        const SubproblemResult sub =
            solve_subproblem(spec, pp, (use_warm && have_warm) ? &warm : nullptr);

        SgpStep step;
        step.c_n = c;
        step.inner_iters = sub.iters;
        step.inner_converged = sub.converged;
        step.f_before = eval.value;
        step.step_norm = norm2(sub.delta_m);
        step.model_decrease = spec.model_value(sub.delta_m);

        // A capped-out inner solve still yields a candidate step; the
        // sufficient-decrease test decides its fate. Steps whose quadratic
        // model predicts an increase carry no decrease guarantee: reject.
        bool reject = step.model_decrease > 0.0;
        ModelField trial = m;
        if (!reject) {
            for (std::size_t i = 0; i < trial.values.size(); ++i)
                trial.values[i] += sub.delta_m[i];
            // the subproblem is box-feasible up to one rounding; keep the
            // iterate inside the box exactly
            project_box_inplace(trial.values, constraints.bounds);
            step.f_after = objective.value(trial);
            // roundoff slack so noise-level differences near a minimizer do
            // not reject forever
            const double slack =
                1e-14 * (std::abs(step.f_before) + std::abs(step.f_after));
            reject = (step.f_after - step.f_before) >
                     params.sigma * step.model_decrease + slack;
        }

        if (reject) {
            c *= params.xi2;
            if (c > c_ceiling)
                throw std::runtime_error("sgp: damping grew unboundedly (stagnation)");
            step.accepted = false;
            step.seconds = std::chrono::duration<double>(clock::now() - t0).count();
            out.trace.steps.push_back(step);
            continue;
        }

        const double m_norm = norm2(trial.values);
        step.rel_model_change = m_norm > 0.0 ? step.step_norm / m_norm : step.step_norm;
        step.accepted = true;

        m = trial;
        objective.on_accept(m);
        eval = objective.full(m);
        hdiag = bracket_hessian(eval.hessian_diag, params.rho);
        lambda_h_min = *std::min_element(hdiag.begin(), hdiag.end());
        if (c / params.xi1 > std::max(0.0, params.rho - lambda_h_min))
            c /= params.xi1;
        // In multiplicative mode c scales the whole curvature model; letting
        // it fall below 1 would trust steps longer than the undamped
        // Gauss-Newton step, so it relaxes to 1, not to 0.
        if (params.damping == DampingMode::multiplicative) c = std::max(c, 1.0);
        warm.p1 = sub.p1;
        warm.p2 = sub.p2;
        have_warm = true;
        ++accepted;

        step.seconds = std::chrono::duration<double>(clock::now() - t0).count();
        out.trace.steps.push_back(step);

        if (step.rel_model_change <= params.eps) break;
        if (step.step_norm == 0.0) break;  // stationary point of the model
    }
    return out;
}

}  // namespace tvfwi
