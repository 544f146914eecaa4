#pragma once

#include <optional>
#include <vector>

#include "tvfwi/constraints.hpp"
#include "tvfwi/grid.hpp"

namespace tvfwi {

enum class DampingMode { additive, multiplicative };

// Constrained convex quadratic around the current outer iterate:
//   min_dm  dm'g + 1/2 dm' Heff dm   s.t.  m_n + dm in box, TV <= tau,
//   one-sided TV <= xi,
// where Heff is H + cI (additive) or c(H + nu I) (multiplicative).
struct SubproblemSpec {
    std::vector<double> g;
    std::vector<double> hdiag;
    double c = 0.0;
    ModelField m_n;
    Bounds bounds;
    std::optional<double> tau;
    std::optional<double> xi;
    DampingMode damping = DampingMode::additive;
    double nu = 0.0;  // multiplicative-mode curvature floor

    double curvature(std::size_t i) const {
        return damping == DampingMode::additive ? hdiag[i] + c
                                                : c * (hdiag[i] + nu);
    }
    // Quadratic model value at a step, with the damped curvature.
    double model_value(const std::vector<double>& dm) const;
};

struct PdhgParams {
    double alpha = 0.0;  // primal step
    double delta = 0.0;  // dual step
    double tol = 1e-4;
    int max_iters = 20000;
};

// alpha = 1/max(curvature), delta = h^2 max(curvature)/8; the product meets
// the alpha*delta <= h^2/8 convergence bound with equality.
PdhgParams default_steps(const std::vector<double>& hdiag, double c, double h);
PdhgParams default_steps(const SubproblemSpec& spec);

struct SubproblemResult {
    std::vector<double> delta_m;
    DualPairField p1;
    std::vector<double> p2;  // empty when xi is absent
    int iters = 0;
    bool converged = false;
    double rel_change_dual = 0.0;
    double rel_change_primal = 0.0;
};

struct DualWarmStart {
    DualPairField p1;
    std::vector<double> p2;
};

SubproblemResult solve_subproblem(const SubproblemSpec& spec, const PdhgParams& params,
                                  const DualWarmStart* warm = nullptr);

// Euclidean projection onto box + TV(+ asymmetric TV): the subproblem with
// g = 0, hdiag = 1, c = 0 started at m0.
ModelField project_intersection(const ModelField& m0, const Bounds& bounds,
                                std::optional<double> tau, std::optional<double> xi,
                                const PdhgParams* params = nullptr,
                                bool* converged = nullptr);

}  // namespace tvfwi
