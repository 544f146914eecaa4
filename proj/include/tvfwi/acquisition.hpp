#pragma once

#include <cstdint>
#include <vector>

#include "tvfwi/grid.hpp"
#include "tvfwi/helmholtz.hpp"

namespace tvfwi {

struct Position {
    double x = 0.0;
    double z = 0.0;
    bool operator==(const Position&) const = default;
};

// Source/receiver layout in physical coordinates; points snap to the
// nearest grid node when injected or sampled.
struct Geometry {
    Grid grid;
    std::vector<Position> source_positions;
    std::vector<Position> receiver_positions;

    std::size_t nearest_cell(const Position& p) const;
    void validate() const;

    // Desk-scale default mirroring the paper's proportions: sources every 4
    // cells at 2-cell depth, receivers every 2 cells at 3-cell depth.
    static Geometry surface_default(const Grid& g);
};

// Measurement operator P: gathers wavefield values at receiver cells.
struct SamplingOperator {
    std::vector<std::size_t> receiver_cells;

    static SamplingOperator from_geometry(const Geometry& geom);

    CVec sample(const CVec& u) const;
    CVec adjoint(const CVec& y, std::size_t field_size) const;
    std::size_t n_rec() const { return receiver_cells.size(); }
};

struct Wavelet {
    double peak_frequency = 15.0;
};

// Ricker magnitude spectrum (2/sqrt(pi)) * f^2/fp^3 * exp(-f^2/fp^2),
// zero phase.
double ricker_amplitude(double f, double f_p);

// Receiver measurements per (frequency, source, receiver) plus the source
// description they were modeled from.
struct DataSet {
    Geometry geometry;
    Wavelet wavelet;
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<Complex> values;      // [freq][source][receiver]

    std::size_t n_freq() const { return frequencies.size(); }
    std::size_t n_src() const { return geometry.source_positions.size(); }
    std::size_t n_rec() const { return geometry.receiver_positions.size(); }

    Complex& at(std::size_t f, std::size_t j, std::size_t r) {
        return values[(f * n_src() + j) * n_rec() + r];
    }
    Complex at(std::size_t f, std::size_t j, std::size_t r) const {
        return values[(f * n_src() + j) * n_rec() + r];
    }
    // Dense source term q_j at a frequency: wavelet amplitude at the source
    // node (unit nearest-node injection, no density scaling).
    CVec source_term(std::size_t f, std::size_t j) const;
};

DataSet generate_data(const ModelField& m_true, const Geometry& geom,
                      const Wavelet& wavelet, const std::vector<double>& freqs,
                      bool radiation_imag = true);

// Standard-normal encoding weights, reproducible from (seed, draw_index).
struct EncodingWeights {
    std::size_t n_super = 0;
    std::size_t n_src = 0;
    std::vector<double> w;  // row-major n_super x n_src
    std::uint64_t seed = 0;
    std::uint64_t draw_index = 0;

    static EncodingWeights draw(std::size_t n_super, std::size_t n_src,
                                std::uint64_t seed, std::uint64_t draw_index);
    double at(std::size_t i, std::size_t j) const { return w[i * n_src + j]; }
};

// All shots of one frequency in dense form, the unit the objectives consume.
struct FreqShots {
    double freq_hz = 0.0;
    std::vector<CVec> q;  // source terms, length M each
    std::vector<CVec> d;  // data, length N_r each

    double omega() const;
};

// Dense per-frequency slice of a data set for the given frequency indices.
std::vector<FreqShots> slice_batch(const DataSet& data,
                                   const std::vector<std::size_t>& freq_indices);

// Applies the same weights to data and source terms, producing n_super
// supershots per frequency.
std::vector<FreqShots> encode(const std::vector<FreqShots>& batch,
                              const EncodingWeights& weights);

}  // namespace tvfwi
