#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "tvfwi/acquisition.hpp"
#include "tvfwi/grid.hpp"
#include "tvfwi/objectives.hpp"
#include "tvfwi/sgp.hpp"

namespace tvfwi {

// Constraint radii for one pass through the frequency batches; fractional
// radii are resolved against a reference model (benchmark protocol).
struct PassSpec {
    std::optional<double> tau;
    std::optional<double> tau_frac;
    std::optional<double> xi;
    std::optional<double> xi_frac;

    bool tv_enabled() const { return tau || tau_frac; }
    bool hinge_enabled() const { return xi || xi_frac; }
};

struct EncodingSpec {
    bool enabled = false;
    std::size_t n_super = 2;
    std::uint64_t seed = 0;
};

struct InversionPlan {
    ObjectiveMode mode = ObjectiveMode::wri;
    WriConfig wri;
    std::vector<double> frequencies;  // Hz, strictly increasing
    std::vector<PassSpec> passes;
    EncodingSpec encoding;
    double v_min = 1400.0;
    double v_max = 5000.0;
    SgpParams sgp;
    EvalOptions eval_opts;
    // Reference for tau_frac/xi_frac (the ground-truth model in benchmark
    // mode); required when any pass uses fractional radii.
    std::optional<ModelField> reference_model;

    void validate() const;
};

struct RunLogRow {
    int pass = 0;
    int batch = 0;
    int outer = 0;
    double objective = 0.0;
    double c_n = 0.0;
    int inner_iters = 0;
    double model_error = 0.0;  // NaN without a ground truth
    double seconds = 0.0;
};

struct RunLog {
    std::vector<RunLogRow> rows;              // accepted steps only
    std::vector<std::pair<int, int>> batch_ids;
    std::vector<SgpTrace> batch_traces;       // full per-batch traces
    std::vector<double> pass_final_errors;    // per pass, when truth given

    void write_csv(std::ostream& os) const;
};

// Overlapping batches of two: [f1..fn] -> [(f1,f2), (f2,f3), ...].
std::vector<std::pair<double, double>> make_batches(const std::vector<double>& freqs);

using SnapshotHook = std::function<void(int pass, int batch, const ModelField&)>;

ModelField run_pass(const InversionPlan& plan, int pass_index, const DataSet& data,
                    const ModelField& m_in, RunLog& log,
                    const ModelField* m_true = nullptr,
                    const SnapshotHook& snapshot = {},
                    std::uint64_t* draw_counter = nullptr);

struct InversionResult {
    ModelField model;
    RunLog log;
};

InversionResult run_inversion(const InversionPlan& plan, const DataSet& data,
                              const ModelField& m0, const ModelField* m_true = nullptr,
                              const SnapshotHook& snapshot = {});

}  // namespace tvfwi
