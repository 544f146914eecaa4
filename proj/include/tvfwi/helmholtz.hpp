#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tvfwi/grid.hpp"

namespace tvfwi {

using Complex = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CSparse = Eigen::SparseMatrix<Complex>;

// True on the outermost ring of cells, where the radiation term replaces the
// mass term.
inline bool is_boundary_cell(const Grid& g, std::size_t i) {
    const auto [k, l] = g.unflatten(i);
    return k == 0 || k == g.nz - 1 || l == 0 || l == g.nx - 1;
}

// Assembled 5-point frequency-domain operator
//   A = w^2 diag(b) diag(m) - i w diag(1-b) diag(m^{1/2}) + L,
// with b the interior mask and L the Laplacian with Neumann closure.
struct HelmholtzOperator {
    double omega = 0.0;
    Grid grid;
    std::vector<double> boundary_mask;  // 1 interior, 0 on the boundary ring
    CSparse matrix;
    std::vector<double> m_snapshot;
};

// radiation_imag selects the damping convention for the boundary term: true
// multiplies it by the imaginary unit (matching the continuous radiation
// condition), false keeps it real.
HelmholtzOperator assemble(const ModelField& m, double omega,
                           bool radiation_imag = true);

// Direct sparse factorization of one operator, reusable for forward and
// adjoint solves across all right-hand sides of a frequency.
class Factorization {
  public:
    explicit Factorization(const HelmholtzOperator& op);

    double omega() const { return omega_; }
    const CSparse& matrix() const { return matrix_; }

    // Solves A x = q with one step of iterative refinement.
    CVec solve_forward(const CVec& q) const;
    // Solves A^H x = r.
    CVec solve_adjoint(const CVec& r) const;

  private:
    double omega_;
    CSparse matrix_;
    std::shared_ptr<Eigen::SparseLU<CSparse>> lu_;
};

inline Factorization factorize(const HelmholtzOperator& op) {
    return Factorization(op);
}

// The single nonzero of G_k u, where G_k = dA/dm_k is diagonal with one
// entry at (k, k).
Complex jacobian_scalar(const ModelField& m, double omega, std::size_t cell,
                        Complex u_value, bool radiation_imag = true);

}  // namespace tvfwi
