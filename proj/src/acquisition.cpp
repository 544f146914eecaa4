#include "tvfwi/acquisition.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace tvfwi {

std::size_t Geometry::nearest_cell(const Position& p) const {
    const int k = std::clamp(static_cast<int>(std::lround(p.z / grid.h)), 0, grid.nz - 1);
    const int l = std::clamp(static_cast<int>(std::lround(p.x / grid.h)), 0, grid.nx - 1);
    return grid.flatten(k, l);
}

void Geometry::validate() const {
    auto inside = [&](const Position& p) {
        return p.x >= 0.0 && p.x <= grid.lateral_extent() && p.z >= 0.0 &&
               p.z <= grid.depth_extent();
    };
    for (const auto& p : source_positions)
        if (!inside(p)) throw std::invalid_argument("geometry: source outside grid extent");
    for (const auto& p : receiver_positions)
        if (!inside(p)) throw std::invalid_argument("geometry: receiver outside grid extent");
}

Geometry Geometry::surface_default(const Grid& g) {
    Geometry geom;
    geom.grid = g;
    const double h = g.h;
    for (int l = 2; l < g.nx - 2; l += 4)
        geom.source_positions.push_back({l * h, 2 * h});
    for (int l = 1; l < g.nx - 1; l += 2)
        geom.receiver_positions.push_back({l * h, 3 * h});
    geom.validate();
    return geom;
}

SamplingOperator SamplingOperator::from_geometry(const Geometry& geom) {
    SamplingOperator P;
    P.receiver_cells.reserve(geom.receiver_positions.size());
    for (const auto& p : geom.receiver_positions)
        P.receiver_cells.push_back(geom.nearest_cell(p));
    return P;
}

CVec SamplingOperator::sample(const CVec& u) const {
    CVec out(static_cast<Eigen::Index>(receiver_cells.size()));
    for (std::size_t r = 0; r < receiver_cells.size(); ++r)
        out[static_cast<Eigen::Index>(r)] = u[static_cast<Eigen::Index>(receiver_cells[r])];
    return out;
}

CVec SamplingOperator::adjoint(const CVec& y, std::size_t field_size) const {
    CVec out = CVec::Zero(static_cast<Eigen::Index>(field_size));
    for (std::size_t r = 0; r < receiver_cells.size(); ++r)
        out[static_cast<Eigen::Index>(receiver_cells[r])] += y[static_cast<Eigen::Index>(r)];
    return out;
}

double ricker_amplitude(double f, double f_p) {
    if (f < 0.0 || !(f_p > 0.0))
        throw std::invalid_argument("ricker_amplitude: need f >= 0 and f_p > 0");
    const double ratio = (f * f) / (f_p * f_p);
    return (2.0 / std::sqrt(std::numbers::pi)) * (ratio / f_p) * std::exp(-ratio);
}

CVec DataSet::source_term(std::size_t f, std::size_t j) const {
    CVec q = CVec::Zero(static_cast<Eigen::Index>(geometry.grid.cells()));
    const std::size_t cell = geometry.nearest_cell(geometry.source_positions[j]);
    q[static_cast<Eigen::Index>(cell)] =
        ricker_amplitude(frequencies[f], wavelet.peak_frequency);
    return q;
}

DataSet generate_data(const ModelField& m_true, const Geometry& geom,
                      const Wavelet& wavelet, const std::vector<double>& freqs,
                      bool radiation_imag) {
    geom.validate();
    DataSet data;
    data.geometry = geom;
    data.wavelet = wavelet;
    data.frequencies = freqs;
    const std::size_t n_src = data.n_src(), n_rec = data.n_rec();
    data.values.assign(freqs.size() * n_src * n_rec, Complex(0.0, 0.0));

    const SamplingOperator P = SamplingOperator::from_geometry(geom);
    for (std::size_t f = 0; f < freqs.size(); ++f) {
        const double omega = 2.0 * std::numbers::pi * freqs[f];
        const Factorization fact = factorize(assemble(m_true, omega, radiation_imag));
        for (std::size_t j = 0; j < n_src; ++j) {
            const CVec u = fact.solve_forward(data.source_term(f, j));
            const CVec trace = P.sample(u);
            for (std::size_t r = 0; r < n_rec; ++r)
                data.at(f, j, r) = trace[static_cast<Eigen::Index>(r)];
        }
    }
    return data;
}

EncodingWeights EncodingWeights::draw(std::size_t n_super, std::size_t n_src,
                                      std::uint64_t seed, std::uint64_t draw_index) {
    EncodingWeights ew;
    ew.n_super = n_super;
    ew.n_src = n_src;
    ew.seed = seed;
    ew.draw_index = draw_index;
    ew.w.resize(n_super * n_src);
    // splitmix-style mix of (seed, draw_index) so each draw is independent.
    std::uint64_t s = seed ^ (draw_index * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull);
    s ^= s >> 30;
    s *= 0xBF58476D1CE4E5B9ull;
    s ^= s >> 27;
    std::mt19937_64 rng(s);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (double& x : ew.w) x = normal(rng);
    return ew;
}

double FreqShots::omega() const { return 2.0 * std::numbers::pi * freq_hz; }

std::vector<FreqShots> slice_batch(const DataSet& data,
                                   const std::vector<std::size_t>& freq_indices) {
    std::vector<FreqShots> batch;
    batch.reserve(freq_indices.size());
    for (std::size_t f : freq_indices) {
        if (f >= data.n_freq()) throw std::out_of_range("slice_batch: frequency index");
        FreqShots shots;
        shots.freq_hz = data.frequencies[f];
        for (std::size_t j = 0; j < data.n_src(); ++j) {
            shots.q.push_back(data.source_term(f, j));
            CVec d(static_cast<Eigen::Index>(data.n_rec()));
            for (std::size_t r = 0; r < data.n_rec(); ++r)
                d[static_cast<Eigen::Index>(r)] = data.at(f, j, r);
            shots.d.push_back(std::move(d));
        }
        batch.push_back(std::move(shots));
    }
    return batch;
}

std::vector<FreqShots> encode(const std::vector<FreqShots>& batch,
                              const EncodingWeights& weights) {
    std::vector<FreqShots> out;
    out.reserve(batch.size());
    for (const FreqShots& shots : batch) {
        if (shots.q.size() != weights.n_src)
            throw std::invalid_argument("encode: weight columns do not match source count");
        FreqShots enc;
        enc.freq_hz = shots.freq_hz;
        for (std::size_t i = 0; i < weights.n_super; ++i) {
            CVec q = CVec::Zero(shots.q.front().size());
            CVec d = CVec::Zero(shots.d.front().size());
            for (std::size_t j = 0; j < weights.n_src; ++j) {
                q += weights.at(i, j) * shots.q[j];
                d += weights.at(i, j) * shots.d[j];
            }
            enc.q.push_back(std::move(q));
            enc.d.push_back(std::move(d));
        }
        out.push_back(std::move(enc));
    }
    return out;
}

}  // namespace tvfwi
