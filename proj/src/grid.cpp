#include "tvfwi/grid.hpp"

#include <algorithm>
#include <cmath>

namespace tvfwi {

Grid::Grid(int nz_, int nx_, double h_) : nz(nz_), nx(nx_), h(h_) {
    if (nz < 2 || nx < 2) throw std::invalid_argument("grid: nz and nx must be >= 2");
    if (!(h > 0.0)) throw std::invalid_argument("grid: spacing h must be positive");
}

ModelField::ModelField(Grid g, double fill) : grid(g), values(g.cells(), fill) {}

ModelField::ModelField(Grid g, std::vector<double> vals)
    : grid(g), values(std::move(vals)) {
    if (values.size() != grid.cells())
        throw std::invalid_argument("model: value count does not match grid");
}

void ModelField::validate_positive() const {
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::domain_error("model: values must be finite and positive");
    }
}

Bounds::Bounds(std::vector<double> lo, std::vector<double> hi)
    : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size())
        throw std::invalid_argument("bounds: size mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] > 0.0) || !(lower[i] <= upper[i]))
            throw std::invalid_argument("bounds: need 0 < lower <= upper");
    }
}

Bounds Bounds::from_velocity_range(const Grid& g, double v_min, double v_max) {
    const double lo = velocity_to_slowness_sq(v_max);
    const double hi = velocity_to_slowness_sq(v_min);
    return Bounds(std::vector<double>(g.cells(), lo), std::vector<double>(g.cells(), hi));
}

double velocity_to_slowness_sq(double v) {
    if (!(v > 0.0)) throw std::domain_error("velocity must be positive");
    return 1.0 / (v * v);
}

double slowness_sq_to_velocity(double m) {
    if (!(m > 0.0)) throw std::domain_error("slowness squared must be positive");
    return 1.0 / std::sqrt(m);
}

namespace {

double velocity_rms_ratio(const ModelField& m, const ModelField& m_true,
                          bool in_velocity) {
    if (m.grid != m_true.grid)
        throw std::invalid_argument("model_error: grid mismatch");
    m.validate_positive();
    m_true.validate_positive();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        const double a = in_velocity ? slowness_sq_to_velocity(m.values[i]) : m.values[i];
        const double b = in_velocity ? slowness_sq_to_velocity(m_true.values[i]) : m_true.values[i];
        num += (a - b) * (a - b);
        den += b * b;
    }
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace

double model_error(const ModelField& m, const ModelField& m_true) {
    return velocity_rms_ratio(m, m_true, true);
}

double model_error_slowness_sq(const ModelField& m, const ModelField& m_true) {
    return velocity_rms_ratio(m, m_true, false);
}

ModelField make_synthetic(SyntheticKind kind, const Grid& g,
                          const SyntheticParams& params) {
    ModelField m(g, 0.0);
    auto clamp_v = [](double v) { return std::clamp(v, 1400.0, 5000.0); };

    if (kind == SyntheticKind::layered) {
        const auto& vels = params.layer_velocities;
        const int n_layers = static_cast<int>(vels.size());
        for (int k = 0; k < g.nz; ++k) {
            int layer = std::min(n_layers - 1, k * n_layers / g.nz);
            const double v = clamp_v(vels[layer]);
            for (int l = 0; l < g.nx; ++l) m.at(k, l) = velocity_to_slowness_sq(v);
        }
        return m;
    }

    // salt_toy: depth-increasing background, a rounded high-velocity body in
    // the middle depths, and a slow anomaly directly beneath it.
    for (int l = 0; l < g.nx; ++l) {
        for (int k = 0; k < g.nz; ++k) {
            const double t = static_cast<double>(k) / (g.nz - 1);
            double v = params.v_top + (params.v_bottom - params.v_top) * t;

            // Salt body: ellipse centered at 45% depth, 50% lateral.
            const double zc = 0.45 * (g.nz - 1), xc = 0.5 * (g.nx - 1);
            const double rz = params.salt_rz_frac * g.nz, rx = params.salt_rx_frac * g.nx;
            const double ez = (k - zc) / rz, ex = (l - xc) / rx;
            if (ez * ez + ex * ex <= 1.0) v = params.v_salt;

            // Over-pressured zone beneath the salt: slower than surroundings.
            const double zl = 0.72 * (g.nz - 1);
            const double lz = (k - zl) / (0.07 * g.nz), lx = (l - xc) / (0.14 * g.nx);
            if (lz * lz + lx * lx <= 1.0)
                v = params.subsalt_factor *
                    (params.v_top + (params.v_bottom - params.v_top) * t);

            m.at(k, l) = velocity_to_slowness_sq(clamp_v(v));
        }
    }
    return m;
}

ModelField smooth(const ModelField& m, double radius) {
    if (radius < 0.0) throw std::invalid_argument("smooth: radius must be >= 0");
    if (radius == 0.0) return m;
    const Grid& g = m.grid;
    const double sigma = radius / g.h;
    const int half = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * half + 1);
    double sum = 0.0;
    for (int j = -half; j <= half; ++j) {
        kernel[j + half] = std::exp(-0.5 * (j / sigma) * (j / sigma));
        sum += kernel[j + half];
    }
    for (double& w : kernel) w /= sum;

    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) {
            if (i < 0) i = -i - 1;
            if (i >= n) i = 2 * n - 1 - i;
        }
        return i;
    };

    // Separable pass: depth then lateral.
    ModelField tmp(g, 0.0), out(g, 0.0);
    for (int l = 0; l < g.nx; ++l)
        for (int k = 0; k < g.nz; ++k) {
            double acc = 0.0;
            for (int j = -half; j <= half; ++j)
                acc += kernel[j + half] * m.at(reflect(k + j, g.nz), l);
            tmp.at(k, l) = acc;
        }
    for (int l = 0; l < g.nx; ++l)
        for (int k = 0; k < g.nz; ++k) {
            double acc = 0.0;
            for (int j = -half; j <= half; ++j)
                acc += kernel[j + half] * tmp.at(k, reflect(l + j, g.nx));
            out.at(k, l) = acc;
        }
    return out;
}

}  // namespace tvfwi
