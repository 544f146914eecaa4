#include "tvfwi/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tvfwi/kernels.hpp"

namespace tvfwi {

DualPairField DiffOperator::apply(const std::vector<double>& m) const {
    DualPairField p(grid.cells());
    kernels::apply_D(m, grid.nz, grid.nx, grid.h, p.dx, p.dz);
    return p;
}

std::vector<double> DiffOperator::apply_adjoint(const DualPairField& p) const {
    std::vector<double> out(grid.cells());
    kernels::apply_Dt(p.dx, p.dz, grid.nz, grid.nx, grid.h, out);
    return out;
}

std::vector<double> DiffOperator::apply_z(const std::vector<double>& m) const {
    std::vector<double> out(grid.cells());
    kernels::apply_Dz(m, grid.nz, grid.nx, grid.h, out);
    return out;
}

std::vector<double> DiffOperator::apply_z_adjoint(const std::vector<double>& p) const {
    std::vector<double> out(grid.cells());
    kernels::apply_Dzt(p, grid.nz, grid.nx, grid.h, out);
    return out;
}

double tv_norm(const ModelField& m) {
    DiffOperator D(m.grid);
    DualPairField p = D.apply(m.values);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        sum += std::hypot(p.dx[i], p.dz[i]);
    return sum;
}

double asym_tv_norm(const ModelField& m) {
    DiffOperator D(m.grid);
    std::vector<double> dz = D.apply_z(m.values);
    double sum = 0.0;
    for (double d : dz) sum += std::max(0.0, d);
    return sum;
}

void project_box_inplace(std::vector<double>& v, const Bounds& bounds) {
    if (v.size() != bounds.lower.size())
        throw std::invalid_argument("project_box: size mismatch");
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = std::clamp(v[i], bounds.lower[i], bounds.upper[i]);
}

ModelField project_box(const ModelField& m, const Bounds& bounds) {
    ModelField out = m;
    project_box_inplace(out.values, bounds);
    return out;
}

std::vector<double> project_simplex(const std::vector<double>& z, double s) {
    if (z.empty()) throw std::invalid_argument("project_simplex: empty input");
    if (!(s > 0.0)) throw std::invalid_argument("project_simplex: radius must be > 0");

    // Michelot's method: shrink the active set until the threshold is
    // consistent, exact in finitely many sweeps.
    std::vector<double> active = z;
    double sum = 0.0;
    for (double zi : active) sum += zi;
    double a = (sum - s) / static_cast<double>(active.size());
    for (;;) {
        std::size_t kept = 0;
        double kept_sum = 0.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (active[i] > a) {
                active[kept++] = active[i];
                kept_sum += active[i];
            }
        }
        if (kept == active.size() || kept == 0) break;
        active.resize(kept);
        a = (kept_sum - s) / static_cast<double>(kept);
    }

    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::max(0.0, z[i] - a);
    return out;
}

DualPairField project_l12_ball(const DualPairField& p, double r) {
    if (r < 0.0) throw std::invalid_argument("project_l12_ball: radius must be >= 0");
    std::vector<double> norms(p.size());
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        norms[i] = std::hypot(p.dx[i], p.dz[i]);
        total += norms[i];
    }
    if (total <= r) return p;

    DualPairField out(p.size());
    if (r == 0.0) return out;

    std::vector<double> t = project_simplex(norms, r);
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (norms[i] > 0.0) {
            const double scale = t[i] / norms[i];
            out.dx[i] = p.dx[i] * scale;
            out.dz[i] = p.dz[i] * scale;
        }
    }
    return out;
}

std::vector<double> project_hinge_ball(const std::vector<double>& z, double r) {
    if (r < 0.0) throw std::invalid_argument("project_hinge_ball: radius must be >= 0");
    double pos = 0.0;
    for (double zi : z) pos += std::max(0.0, zi);
    if (pos <= r) return z;

    std::vector<double> out(z.size());
    if (r == 0.0) {
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::min(0.0, z[i]);
        return out;
    }
    std::vector<double> zpos(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) zpos[i] = std::max(0.0, z[i]);
    std::vector<double> t = project_simplex(zpos, r);
    for (std::size_t i = 0; i < z.size(); ++i)
        out[i] = (z[i] <= 0.0) ? z[i] : t[i];
    return out;
}

}  // namespace tvfwi
