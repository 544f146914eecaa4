#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvfwi {

// Regular 2D grid, uniform spacing h (meters) in both directions.
// Cell values are stored depth-fastest: flat index i = k + l*nz for
// depth index k and lateral index l (0-based).
struct Grid {
    int nz = 0;
    int nx = 0;
    double h = 0.0;

    Grid() = default;
    Grid(int nz_, int nx_, double h_);

    std::size_t cells() const { return static_cast<std::size_t>(nz) * nx; }
    std::size_t flatten(int k, int l) const {
        return static_cast<std::size_t>(k) + static_cast<std::size_t>(l) * nz;
    }
    std::pair<int, int> unflatten(std::size_t i) const {
        return {static_cast<int>(i % nz), static_cast<int>(i / nz)};
    }
    double depth_extent() const { return (nz - 1) * h; }
    double lateral_extent() const { return (nx - 1) * h; }

    bool operator==(const Grid&) const = default;
};

// Slowness-squared model on a grid. Values must stay finite and strictly
// positive (the Helmholtz discretization needs m^{1/2} and m^{-1/2}).
struct ModelField {
    Grid grid;
    std::vector<double> values;

    ModelField() = default;
    ModelField(Grid g, double fill);
    ModelField(Grid g, std::vector<double> vals);

    double& at(int k, int l) { return values[grid.flatten(k, l)]; }
    double at(int k, int l) const { return values[grid.flatten(k, l)]; }

    void validate_positive() const;
};

// Per-cell box constraint in slowness squared, 0 < lower <= upper.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    Bounds() = default;
    Bounds(std::vector<double> lo, std::vector<double> hi);

    // Uniform bounds from a velocity range [v_min, v_max] (note the
    // inversion: v_max gives the lower slowness-squared bound).
    static Bounds from_velocity_range(const Grid& g, double v_min, double v_max);
};

double velocity_to_slowness_sq(double v);
double slowness_sq_to_velocity(double m);

// Normalized RMS misfit in velocity units: ||v - v_true|| / ||v_true||.
double model_error(const ModelField& m, const ModelField& m_true);
// Same metric evaluated directly on slowness squared.
double model_error_slowness_sq(const ModelField& m, const ModelField& m_true);

enum class SyntheticKind { layered, salt_toy };

struct SyntheticParams {
    // layered: interface depths are spaced evenly unless given.
    std::vector<double> layer_velocities = {1500.0, 2500.0, 3500.0};
    // salt_toy: background gradient plus a high-velocity inclusion with a
    // velocity-low beneath it.
    double v_top = 1500.0;
    double v_bottom = 3000.0;
    double v_salt = 4500.0;
    // salt ellipse half-axes as grid fractions and the sub-salt slowdown
    double salt_rz_frac = 0.16;
    double salt_rx_frac = 0.22;
    double subsalt_factor = 0.75;
};

ModelField make_synthetic(SyntheticKind kind, const Grid& g,
                          const SyntheticParams& params = {});

// Truncated Gaussian smoothing with reflective boundaries; radius in meters.
ModelField smooth(const ModelField& m, double radius);

}  // namespace tvfwi
