#include "tvfwi/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tvfwi::kernels {

namespace {
constexpr std::size_t kBlock = 4096;

// Deterministic blocked reduction: per-block partial sums accumulated in
// block order, independent of the thread count.
template <typename F>
double blocked_sum(std::size_t n, F&& term, bool parallel) {
    const std::size_t nblocks = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(nblocks, 0.0);
#pragma omp parallel for schedule(static) if (parallel)
    for (long long b = 0; b < static_cast<long long>(nblocks); ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
        const std::size_t hi = std::min(lo + kBlock, n);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<std::size_t>(b)] = s;
    }
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

void apply_D_impl(std::span<const double> m, int nz, int nx, double h,
                  std::span<double> dx, std::span<double> dz, bool parallel) {
    const double inv_h = 1.0 / h;
#pragma omp parallel for schedule(static) if (parallel)
    for (int l = 0; l < nx; ++l) {
        const std::size_t col = static_cast<std::size_t>(l) * nz;
        for (int k = 0; k < nz; ++k) {
            const std::size_t i = col + k;
            dx[i] = (l + 1 < nx) ? (m[i + nz] - m[i]) * inv_h : 0.0;
            dz[i] = (k + 1 < nz) ? (m[i + 1] - m[i]) * inv_h : 0.0;
        }
    }
}

void apply_Dt_impl(std::span<const double> dx, std::span<const double> dz,
                   int nz, int nx, double h, std::span<double> out, bool parallel) {
    const double inv_h = 1.0 / h;
    // out = -div: out_i = (dx[i - nz] - dx[i] + dz[i - 1] - dz[i]) / h with
    // out-of-range terms dropped (and last-row/column forward differences are
    // structurally zero, so their dx/dz entries never contribute).
#pragma omp parallel for schedule(static) if (parallel)
    for (int l = 0; l < nx; ++l) {
        const std::size_t col = static_cast<std::size_t>(l) * nz;
        for (int k = 0; k < nz; ++k) {
            const std::size_t i = col + k;
            double acc = 0.0;
            if (l + 1 < nx) acc -= dx[i];
            if (l > 0) acc += dx[i - nz];
            if (k + 1 < nz) acc -= dz[i];
            if (k > 0) acc += dz[i - 1];
            out[i] = acc * inv_h;
        }
    }
}

void apply_Dz_impl(std::span<const double> m, int nz, int nx, double h,
                   std::span<double> dz, bool parallel) {
    const double inv_h = 1.0 / h;
#pragma omp parallel for schedule(static) if (parallel)
    for (int l = 0; l < nx; ++l) {
        const std::size_t col = static_cast<std::size_t>(l) * nz;
        for (int k = 0; k < nz; ++k) {
            const std::size_t i = col + k;
            dz[i] = (k + 1 < nz) ? (m[i + 1] - m[i]) * inv_h : 0.0;
        }
    }
}

void apply_Dzt_impl(std::span<const double> dz, int nz, int nx, double h,
                    std::span<double> out, bool parallel) {
    const double inv_h = 1.0 / h;
#pragma omp parallel for schedule(static) if (parallel)
    for (int l = 0; l < nx; ++l) {
        const std::size_t col = static_cast<std::size_t>(l) * nz;
        for (int k = 0; k < nz; ++k) {
            const std::size_t i = col + k;
            double acc = 0.0;
            if (k + 1 < nz) acc -= dz[i];
            if (k > 0) acc += dz[i - 1];
            out[i] = acc * inv_h;
        }
    }
}

void primal_update_impl(std::span<const double> rhs, std::span<const double> diag,
                        std::span<const double> lo, std::span<const double> hi,
                        std::span<double> out, bool parallel) {
    const long long n = static_cast<long long>(rhs.size());
#pragma omp parallel for schedule(static) if (parallel)
    for (long long i = 0; i < n; ++i) {
        const std::size_t j = static_cast<std::size_t>(i);
        out[j] = std::clamp(rhs[j] / diag[j], lo[j], hi[j]);
    }
}

}  // namespace

void apply_D(std::span<const double> m, int nz, int nx, double h,
             std::span<double> dx, std::span<double> dz) {
    apply_D_impl(m, nz, nx, h, dx, dz, true);
}
void apply_Dt(std::span<const double> dx, std::span<const double> dz,
              int nz, int nx, double h, std::span<double> out) {
    apply_Dt_impl(dx, dz, nz, nx, h, out, true);
}
void apply_Dz(std::span<const double> m, int nz, int nx, double h,
              std::span<double> dz) {
    apply_Dz_impl(m, nz, nx, h, dz, true);
}
void apply_Dzt(std::span<const double> dz, int nz, int nx, double h,
               std::span<double> out) {
    apply_Dzt_impl(dz, nz, nx, h, out, true);
}
void primal_update(std::span<const double> rhs, std::span<const double> diag,
                   std::span<const double> lo, std::span<const double> hi,
                   std::span<double> out) {
    primal_update_impl(rhs, diag, lo, hi, out, true);
}
double dot(std::span<const double> a, std::span<const double> b) {
    return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; }, true);
}
double nrm2(std::span<const double> a) {
    return std::sqrt(blocked_sum(a.size(), [&](std::size_t i) { return a[i] * a[i]; }, true));
}

namespace serial {
void apply_D(std::span<const double> m, int nz, int nx, double h,
             std::span<double> dx, std::span<double> dz) {
    apply_D_impl(m, nz, nx, h, dx, dz, false);
}
void apply_Dt(std::span<const double> dx, std::span<const double> dz,
              int nz, int nx, double h, std::span<double> out) {
    apply_Dt_impl(dx, dz, nz, nx, h, out, false);
}
void apply_Dz(std::span<const double> m, int nz, int nx, double h,
              std::span<double> dz) {
    apply_Dz_impl(m, nz, nx, h, dz, false);
}
void apply_Dzt(std::span<const double> dz, int nz, int nx, double h,
               std::span<double> out) {
    apply_Dzt_impl(dz, nz, nx, h, out, false);
}
void primal_update(std::span<const double> rhs, std::span<const double> diag,
                   std::span<const double> lo, std::span<const double> hi,
                   std::span<double> out) {
    primal_update_impl(rhs, diag, lo, hi, out, false);
}
double dot(std::span<const double> a, std::span<const double> b) {
    return blocked_sum(a.size(), [&](std::size_t i) { return a[i] * b[i]; }, false);
}
double nrm2(std::span<const double> a) {
    return std::sqrt(blocked_sum(a.size(), [&](std::size_t i) { return a[i] * a[i]; }, false));
}
}  // namespace serial

}  // namespace tvfwi::kernels
