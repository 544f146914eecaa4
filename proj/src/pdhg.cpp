#include "tvfwi/pdhg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvfwi/kernels.hpp"

namespace tvfwi {

double SubproblemSpec::model_value(const std::vector<double>& dm) const {
    double lin = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < dm.size(); ++i) {
        lin += dm[i] * g[i];
        quad += dm[i] * curvature(i) * dm[i];
    }
    return lin + 0.5 * quad;
}

PdhgParams default_steps(const std::vector<double>& hdiag, double c, double h) {
    double max_curv = 0.0;
    for (double hd : hdiag) max_curv = std::max(max_curv, hd + c);
    if (!(max_curv > 0.0)) throw std::invalid_argument("default_steps: zero curvature");
    PdhgParams p;
    p.alpha = 1.0 / max_curv;
    p.delta = h * h * max_curv / 8.0;
    return p;
}

PdhgParams default_steps(const SubproblemSpec& spec) {
    // Scale the step split by the damped curvature, floored at the undamped
    // one: multiplicative damping with c << 1 would otherwise shrink the dual
    // step towards zero and freeze the duals.
    double max_curv = 0.0;
    for (std::size_t i = 0; i < spec.hdiag.size(); ++i)
        max_curv = std::max({max_curv, spec.curvature(i), spec.hdiag[i] + spec.nu});
    if (!(max_curv > 0.0)) throw std::invalid_argument("default_steps: zero curvature");
    PdhgParams p;
    p.alpha = 1.0 / max_curv;
    p.delta = spec.m_n.grid.h * spec.m_n.grid.h * max_curv / 8.0;
    return p;
}

namespace {

double rel_change(double diff_sq, double norm_sq) {
    const double diff = std::sqrt(diff_sq);
    const double nrm = std::sqrt(norm_sq);
    return nrm > 0.0 ? diff / nrm : diff;
}

// Restores TV/hinge feasibility after the iteration stops by moving toward a
// feasible anchor along the segment (both constraints are convex, the box is
// preserved since both endpoints satisfy it exactly).
void enforce_radii(const SubproblemSpec& spec, std::vector<double>& dm) {
    const Grid& grid = spec.m_n.grid;
    constexpr double kSlack = 1e-6;

    auto field_of = [&](const std::vector<double>& step) {
        ModelField f(grid, spec.m_n.values);
        for (std::size_t i = 0; i < step.size(); ++i) f.values[i] += step[i];
        return f;
    };

    ModelField x = field_of(dm);
    const double tv_x = spec.tau ? tv_norm(x) : 0.0;
    const double hinge_x = spec.xi ? asym_tv_norm(x) : 0.0;
    const bool tv_ok = !spec.tau || tv_x <= *spec.tau * (1.0 + kSlack);
    const bool hinge_ok = !spec.xi || hinge_x <= *spec.xi * (1.0 + kSlack);
    if (tv_ok && hinge_ok) return;

    // Anchor: the current iterate when it is itself feasible, otherwise the
    // clamped constant field (zero TV, zero hinge).
    ModelField anchor = spec.m_n;
    bool anchor_ok = (!spec.tau || tv_norm(anchor) <= *spec.tau) &&
                     (!spec.xi || asym_tv_norm(anchor) <= *spec.xi);
    if (!anchor_ok) {
        double mean = 0.0;
        for (double v : spec.m_n.values) mean += v;
        mean /= static_cast<double>(spec.m_n.values.size());
        anchor = ModelField(grid, mean);
        project_box_inplace(anchor.values, spec.bounds);
    }

    const double tv_a = spec.tau ? tv_norm(anchor) : 0.0;
    const double hinge_a = spec.xi ? asym_tv_norm(anchor) : 0.0;
    double theta = 1.0;
    if (spec.tau && tv_x > tv_a)
        theta = std::min(theta, (*spec.tau - tv_a) / (tv_x - tv_a));
    if (spec.xi && hinge_x > hinge_a)
        theta = std::min(theta, (*spec.xi - hinge_a) / (hinge_x - hinge_a));
    theta = std::clamp(theta, 0.0, 1.0);

    for (std::size_t i = 0; i < dm.size(); ++i) {
        const double xi_val = anchor.values[i] + theta * (x.values[i] - anchor.values[i]);
        dm[i] = xi_val - spec.m_n.values[i];
    }
}

}  // namespace

SubproblemResult solve_subproblem(const SubproblemSpec& spec, const PdhgParams& params,
                                  const DualWarmStart* warm) {
    const Grid& grid = spec.m_n.grid;
    const std::size_t M = grid.cells();
    if (spec.g.size() != M || spec.hdiag.size() != M)
        throw std::invalid_argument("solve_subproblem: size mismatch");
    for (std::size_t i = 0; i < M; ++i)
        if (!(spec.curvature(i) > 0.0))
            throw std::invalid_argument("solve_subproblem: curvature must be positive");

    const bool use_tv = spec.tau.has_value();
    const bool use_hinge = spec.xi.has_value();
    const DiffOperator D(grid);

    SubproblemResult res;
    res.delta_m.assign(M, 0.0);

    // Without the TV duals the problem is separable with an exact solution:
    // a clamped scaled-gradient step per cell.
    if (!use_tv && !use_hinge) {
        for (std::size_t i = 0; i < M; ++i) {
            const double lo_i = spec.bounds.lower[i] - spec.m_n.values[i];
            const double hi_i = spec.bounds.upper[i] - spec.m_n.values[i];
            if (lo_i > 0.0 || hi_i < 0.0)
                throw std::invalid_argument("solve_subproblem: m_n violates bounds");
            res.delta_m[i] = std::clamp(-spec.g[i] / spec.curvature(i), lo_i, hi_i);
        }
        res.iters = 1;
        res.converged = true;
        return res;
    }

    res.p1 = DualPairField(use_tv ? M : 0);
    if (use_hinge) res.p2.assign(M, 0.0);
    if (warm) {
        if (use_tv && warm->p1.size() == M) res.p1 = warm->p1;
        if (use_hinge && warm->p2.size() == M) res.p2 = warm->p2;
    }

    // Fixed per-cell pieces of the primal step.
    std::vector<double> diag(M), lo(M), hi(M);
    for (std::size_t i = 0; i < M; ++i) {
        diag[i] = spec.curvature(i) + 1.0 / params.alpha;
        lo[i] = spec.bounds.lower[i] - spec.m_n.values[i];
        hi[i] = spec.bounds.upper[i] - spec.m_n.values[i];
        if (lo[i] > 0.0 || hi[i] < 0.0)
            throw std::invalid_argument("solve_subproblem: m_n violates bounds");
    }

    std::vector<double> model(M), dm_new(M), rhs(M), dual_term(M);
    DualPairField p1_new;
    std::vector<double> p2_new, z2;

    for (int it = 0; it < params.max_iters; ++it) {
        for (std::size_t i = 0; i < M; ++i)
            model[i] = spec.m_n.values[i] + res.delta_m[i];

        double dual_diff_sq = 0.0, dual_norm_sq = 0.0;
        std::fill(rhs.begin(), rhs.end(), 0.0);

        if (use_tv) {
            DualPairField z1 = D.apply(model);
            for (std::size_t i = 0; i < M; ++i) {
                z1.dx[i] = res.p1.dx[i] + params.delta * z1.dx[i];
                z1.dz[i] = res.p1.dz[i] + params.delta * z1.dz[i];
            }
            p1_new = project_l12_ball(z1, *spec.tau * params.delta);
            DualPairField extrap(M);
            for (std::size_t i = 0; i < M; ++i) {
                p1_new.dx[i] = z1.dx[i] - p1_new.dx[i];
                p1_new.dz[i] = z1.dz[i] - p1_new.dz[i];
                extrap.dx[i] = 2.0 * p1_new.dx[i] - res.p1.dx[i];
                extrap.dz[i] = 2.0 * p1_new.dz[i] - res.p1.dz[i];
                const double ddx = p1_new.dx[i] - res.p1.dx[i];
                const double ddz = p1_new.dz[i] - res.p1.dz[i];
                dual_diff_sq += ddx * ddx + ddz * ddz;
                dual_norm_sq += p1_new.dx[i] * p1_new.dx[i] + p1_new.dz[i] * p1_new.dz[i];
            }
            const std::vector<double> dt = D.apply_adjoint(extrap);
            for (std::size_t i = 0; i < M; ++i) rhs[i] -= dt[i];
        }

        if (use_hinge) {
            z2 = D.apply_z(model);
            for (std::size_t i = 0; i < M; ++i)
                z2[i] = res.p2[i] + params.delta * z2[i];
            p2_new = project_hinge_ball(z2, *spec.xi * params.delta);
            std::vector<double> extrap(M);
            for (std::size_t i = 0; i < M; ++i) {
                p2_new[i] = z2[i] - p2_new[i];
                extrap[i] = 2.0 * p2_new[i] - res.p2[i];
                const double dd = p2_new[i] - res.p2[i];
                dual_diff_sq += dd * dd;
                dual_norm_sq += p2_new[i] * p2_new[i];
            }
            const std::vector<double> dzt = D.apply_z_adjoint(extrap);
            for (std::size_t i = 0; i < M; ++i) rhs[i] -= dzt[i];
        }

        for (std::size_t i = 0; i < M; ++i)
            rhs[i] += -spec.g[i] + res.delta_m[i] / params.alpha;
        kernels::primal_update(rhs, diag, lo, hi, dm_new);

        double primal_diff_sq = 0.0, primal_norm_sq = 0.0;
        for (std::size_t i = 0; i < M; ++i) {
            const double dd = dm_new[i] - res.delta_m[i];
            primal_diff_sq += dd * dd;
            primal_norm_sq += dm_new[i] * dm_new[i];
        }

        res.delta_m = dm_new;
        if (use_tv) res.p1 = p1_new;
        if (use_hinge) res.p2 = p2_new;
        res.iters = it + 1;
        res.rel_change_dual = rel_change(dual_diff_sq, dual_norm_sq);
        res.rel_change_primal = rel_change(primal_diff_sq, primal_norm_sq);

        if (std::max(res.rel_change_dual, res.rel_change_primal) <= params.tol) {
            res.converged = true;
            break;
        }
    }

    enforce_radii(spec, res.delta_m);
    return res;
}

ModelField project_intersection(const ModelField& m0, const Bounds& bounds,
                                std::optional<double> tau, std::optional<double> xi,
                                const PdhgParams* params, bool* converged) {
    SubproblemSpec spec;
    spec.g.assign(m0.grid.cells(), 0.0);
    spec.hdiag.assign(m0.grid.cells(), 1.0);
    spec.c = 0.0;
    spec.m_n = project_box(m0, bounds);  // iterate must satisfy the box
    spec.bounds = bounds;
    spec.tau = tau;
    spec.xi = xi;

    // Projecting m0: minimize 1/2 ||m - m0||^2 = 1/2 ||dm + (m_n - m0)||^2,
    // i.e. a unit-curvature subproblem with g = m_n - m0.
    for (std::size_t i = 0; i < spec.g.size(); ++i)
        spec.g[i] = spec.m_n.values[i] - m0.values[i];

    PdhgParams p = params ? *params : default_steps(spec);
    if (!params) p.max_iters = 200000;
    SubproblemResult res = solve_subproblem(spec, p);
    if (converged) *converged = res.converged;

    ModelField out = spec.m_n;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] += res.delta_m[i];
    project_box_inplace(out.values, bounds);  // exact up to the last rounding
    return out;
}

}  // namespace tvfwi
