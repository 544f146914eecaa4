#pragma once

#include <cstddef>
#include <span>

// Data-parallel inner kernels of the PDHG iteration and the difference
// operators. Each kernel has an OpenMP version (used by the solvers) and a
// serial reference version kept for testing and benchmarking. Elementwise
// kernels are bitwise identical between the two; reductions use a fixed
// serial accumulation order in both so results stay reproducible.
namespace tvfwi::kernels {

// Forward differences of a depth-fastest field, scaled by 1/h.
// dx_i = (m[k, l+1] - m[k, l]) / h  (zero in the last column)
// dz_i = (m[k+1, l] - m[k, l]) / h  (zero in the last row)
void apply_D(std::span<const double> m, int nz, int nx, double h,
             std::span<double> dx, std::span<double> dz);
// Exact adjoint of apply_D.
void apply_Dt(std::span<const double> dx, std::span<const double> dz,
              int nz, int nx, double h, std::span<double> out);
// Depth-only difference and its adjoint.
void apply_Dz(std::span<const double> m, int nz, int nx, double h,
              std::span<double> dz);
void apply_Dzt(std::span<const double> dz, int nz, int nx, double h,
               std::span<double> out);

// One PDHG primal step: out_i = clamp(rhs_i / diag_i, lo_i, hi_i).
void primal_update(std::span<const double> rhs, std::span<const double> diag,
                   std::span<const double> lo, std::span<const double> hi,
                   std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);

namespace serial {
void apply_D(std::span<const double> m, int nz, int nx, double h,
             std::span<double> dx, std::span<double> dz);
void apply_Dt(std::span<const double> dx, std::span<const double> dz,
              int nz, int nx, double h, std::span<double> out);
void apply_Dz(std::span<const double> m, int nz, int nx, double h,
              std::span<double> dz);
void apply_Dzt(std::span<const double> dz, int nz, int nx, double h,
               std::span<double> out);
void primal_update(std::span<const double> rhs, std::span<const double> diag,
                   std::span<const double> lo, std::span<const double> hi,
                   std::span<double> out);
double dot(std::span<const double> a, std::span<const double> b);
double nrm2(std::span<const double> a);
}  // namespace serial

}  // namespace tvfwi::kernels
