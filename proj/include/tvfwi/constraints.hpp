#pragma once

#include <optional>
#include <vector>

#include "tvfwi/grid.hpp"

namespace tvfwi {

// Pair of dual components per cell: horizontal and vertical gradient duals.
struct DualPairField {
    std::vector<double> dx;
    std::vector<double> dz;

    DualPairField() = default;
    explicit DualPairField(std::size_t n) : dx(n, 0.0), dz(n, 0.0) {}
    std::size_t size() const { return dx.size(); }
};

// Forward-difference gradient operator on a grid, scaled by 1/h, with the
// last row/column differences structurally zero.
struct DiffOperator {
    Grid grid;

    explicit DiffOperator(Grid g) : grid(g) {}

    DualPairField apply(const std::vector<double>& m) const;
    std::vector<double> apply_adjoint(const DualPairField& p) const;

    // Depth-only difference D_z and its adjoint.
    std::vector<double> apply_z(const std::vector<double>& m) const;
    std::vector<double> apply_z_adjoint(const std::vector<double>& p) const;
};

// Sum of per-cell Euclidean norms of the discrete gradient.
double tv_norm(const ModelField& m);
// One-sided depth variation: sum of positive depth differences.
double asym_tv_norm(const ModelField& m);

// Elementwise clamp to [lower, upper].
ModelField project_box(const ModelField& m, const Bounds& bounds);
void project_box_inplace(std::vector<double>& v, const Bounds& bounds);

// Euclidean projection onto {x : x >= 0, sum(x) = s}, s > 0, via bisection
// on the threshold a with sum(max(0, z_i - a)) = s.
std::vector<double> project_simplex(const std::vector<double>& z, double s);

// Projection onto {p : sum_i ||(dx_i, dz_i)|| <= r}.
DualPairField project_l12_ball(const DualPairField& p, double r);

// Projection onto {z : ||max(0, z)||_1 <= r}: negative components pass
// through, positive mass is redistributed by a simplex projection.
std::vector<double> project_hinge_ball(const std::vector<double>& z, double r);

// Describes the constraint intersection handed to the subproblem solver.
struct ConstraintSet {
    Bounds bounds;
    std::optional<double> tau;  // TV radius; absent = unconstrained
    std::optional<double> xi;   // asymmetric-TV radius; absent = unconstrained
};

}  // namespace tvfwi
