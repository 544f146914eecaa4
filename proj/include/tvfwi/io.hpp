#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tvfwi/acquisition.hpp"
#include "tvfwi/grid.hpp"
#include "tvfwi/workflow.hpp"

namespace tvfwi {

// Malformed or truncated input files; the CLI maps this to exit code 2.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum class ModelUnit : std::uint8_t { slowness_sq = 0, velocity = 1 };

// A model as stored on disk, which may be in either unit.
struct StoredModel {
    Grid grid;
    ModelUnit unit = ModelUnit::slowness_sq;
    std::vector<double> values;

    ModelField as_slowness_sq() const;
    ModelField as_velocity() const;
};

void write_model(const std::string& path, const ModelField& m, ModelUnit unit);
StoredModel read_model(const std::string& path);

// Data files store frequencies, geometry positions, and the complex receiver
// values; the grid and wavelet travel in the config, so the caller attaches
// them after reading.
void write_data(const std::string& path, const DataSet& data);
DataSet read_data(const std::string& path, const Grid& grid = Grid{});

// Flat "key = value" configuration with '#' comments and bracketed sections.
// Unknown sections or keys are a hard error.
struct Config {
    // [grid]
    int nz = 0;
    int nx = 0;
    double h = 0.0;

    // [acquisition] (spacings and depths in cells)
    int source_spacing = 4;
    int source_depth = 2;
    int receiver_spacing = 2;
    int receiver_depth = 3;
    double peak_frequency = 15.0;

    // [objective]
    ObjectiveMode mode = ObjectiveMode::wri;
    WriConfig wri;
    EvalOptions eval_opts;

    // [constraints]
    double v_min = 1400.0;
    double v_max = 5000.0;

    // [sgp] and [pdhg]
    SgpParams sgp;

    // [schedule]
    std::vector<double> frequencies;
    std::vector<PassSpec> passes = {PassSpec{}};
    EncodingSpec encoding;

    Grid grid() const { return Grid(nz, nx, h); }
    Geometry geometry(const Grid& g) const;
    InversionPlan plan() const;
};

Config parse_config(std::istream& in);
Config load_config(const std::string& path);
std::string serialize_config(const Config& cfg);

}  // namespace tvfwi
