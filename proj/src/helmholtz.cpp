#include "tvfwi/helmholtz.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace tvfwi {

HelmholtzOperator assemble(const ModelField& m, double omega, bool radiation_imag) {
    if (!(omega > 0.0)) throw std::invalid_argument("assemble: omega must be positive");
    m.validate_positive();
    const Grid& g = m.grid;
    const std::size_t M = g.cells();
    const double inv_h2 = 1.0 / (g.h * g.h);

    HelmholtzOperator op;
    op.omega = omega;
    op.grid = g;
    op.m_snapshot = m.values;
    op.boundary_mask.resize(M);
    for (std::size_t i = 0; i < M; ++i)
        op.boundary_mask[i] = is_boundary_cell(g, i) ? 0.0 : 1.0;

    const Complex iota = radiation_imag ? Complex(0.0, 1.0) : Complex(1.0, 0.0);

    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(5 * M);
    for (int l = 0; l < g.nx; ++l) {
        for (int k = 0; k < g.nz; ++k) {
            const std::size_t i = g.flatten(k, l);
            int neighbors = 0;
            auto couple = [&](int kk, int ll) {
                if (kk < 0 || kk >= g.nz || ll < 0 || ll >= g.nx) return;
                ++neighbors;
                trip.emplace_back(static_cast<int>(i),
                                  static_cast<int>(g.flatten(kk, ll)),
                                  Complex(inv_h2, 0.0));
            };
            couple(k - 1, l);
            couple(k + 1, l);
            couple(k, l - 1);
            couple(k, l + 1);

            // Neumann closure: dropped out-of-domain neighbors also leave
            // the diagonal, keeping zero row sums for the Laplacian part.
            Complex diag = Complex(-neighbors * inv_h2, 0.0);
            const double b = op.boundary_mask[i];
            diag += omega * omega * b * m.values[i];
            diag -= iota * (omega * (1.0 - b) * std::sqrt(m.values[i]));
            trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
        }
    }

    op.matrix.resize(static_cast<int>(M), static_cast<int>(M));
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    op.matrix.makeCompressed();
    return op;
}

Factorization::Factorization(const HelmholtzOperator& op)
    : omega_(op.omega), matrix_(op.matrix),
      lu_(std::make_shared<Eigen::SparseLU<CSparse>>()) {
    lu_->compute(matrix_);
    if (lu_->info() != Eigen::Success)
        throw std::runtime_error("factorize: singular or degenerate operator");
}

CVec Factorization::solve_forward(const CVec& q) const {
    CVec x = lu_->solve(q);
    CVec r = q - matrix_ * x;
    x += lu_->solve(r);
    return x;
}

CVec Factorization::solve_adjoint(const CVec& r) const {
    const auto adj = matrix_.adjoint();
    CVec x = lu_->adjoint().solve(r);
    CVec res = r - adj * x;
    x += lu_->adjoint().solve(res);
    return x;
}

Complex jacobian_scalar(const ModelField& m, double omega, std::size_t cell,
                        Complex u_value, bool radiation_imag) {
    const double mk = m.values[cell];
    if (!(mk > 0.0)) throw std::domain_error("jacobian_scalar: m must be positive");
    if (u_value == Complex(0.0, 0.0)) return {0.0, 0.0};
    if (!is_boundary_cell(m.grid, cell)) return omega * omega * u_value;
    const Complex iota = radiation_imag ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
    return -iota * (0.5 * omega / std::sqrt(mk)) * u_value;
}

}  // namespace tvfwi
