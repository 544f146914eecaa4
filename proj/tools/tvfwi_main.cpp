#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvfwi/acquisition.hpp"
#include "tvfwi/constraints.hpp"
#include "tvfwi/grid.hpp"
#include "tvfwi/io.hpp"
#include "tvfwi/objectives.hpp"
#include "tvfwi/pdhg.hpp"
#include "tvfwi/threads.hpp"
#include "tvfwi/workflow.hpp"

namespace {

using namespace tvfwi;

constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;

double elapsed_s(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

int cmd_forward(const std::string& model_path, const std::string& config_path,
                const std::string& out_path) {
    const auto t0 = std::chrono::steady_clock::now();
    const Config cfg = load_config(config_path);
    const ModelField m = read_model(model_path).as_slowness_sq();
    if (cfg.frequencies.empty())
        throw IoError("config: [schedule] frequencies is required for forward");

    const Geometry geom = cfg.geometry(m.grid);
    const Wavelet wavelet{cfg.peak_frequency};
    const DataSet data = generate_data(m, geom, wavelet, cfg.frequencies,
                                       cfg.eval_opts.radiation_imag);
    write_data(out_path, data);
    std::cout << "forward: n_freq=" << data.n_freq() << " n_src=" << data.n_src()
              << " n_rec=" << data.n_rec() << " elapsed=" << elapsed_s(t0)
              << "s\n";
    return 0;
}

int cmd_invert(const std::string& data_path, const std::string& init_path,
               const std::string& config_path, const std::string& outdir,
               const std::string& truth_path) {
    const Config cfg = load_config(config_path);
    const ModelField m0 = read_model(init_path).as_slowness_sq();

    std::optional<ModelField> truth;
    if (!truth_path.empty()) truth = read_model(truth_path).as_slowness_sq();

    DataSet data = read_data(data_path, m0.grid);
    data.wavelet.peak_frequency = cfg.peak_frequency;
    data.geometry.validate();

    InversionPlan plan = cfg.plan();
    if (plan.frequencies.empty()) plan.frequencies = data.frequencies;
    plan.reference_model = truth;
    plan.validate();

    std::filesystem::create_directories(outdir);
    const auto out = [&](const std::string& name) { return outdir + "/" + name; };

    RunLog log;
    ModelField m = m0;
    bool aborted = false;
    std::string abort_reason;
    const auto snapshot = [&](int pass, int batch, const ModelField& snap) {
        write_model(out("pass" + std::to_string(pass) + "_batch" +
                        std::to_string(batch) + ".model"),
                    snap, ModelUnit::slowness_sq);
    };

    std::uint64_t draw_counter = 0;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        for (int p = 0; p < static_cast<int>(plan.passes.size()); ++p)
            m = run_pass(plan, p, data, m, log, truth ? &*truth : nullptr,
                         snapshot, &draw_counter);
    } catch (const std::exception& e) {
        aborted = true;
        abort_reason = e.what();
    }

    // Partial outputs are retained even when the inversion aborts.
    write_model(out("final.model"), m, ModelUnit::slowness_sq);
    {
        std::ofstream csv(out("runlog.csv"));
        log.write_csv(csv);
    }
    {
        std::ofstream sum(out("summary.txt"));
        sum.precision(17);
        sum << "status = " << (aborted ? "aborted" : "ok") << "\n";
        if (aborted) sum << "reason = " << abort_reason << "\n";
        sum << "passes_completed = " << log.pass_final_errors.size() << "\n";
        sum << "accepted_steps = " << log.rows.size() << "\n";
        if (!log.rows.empty())
            sum << "final_objective = " << log.rows.back().objective << "\n";
        if (truth) {
            sum << "final_model_error = " << model_error(m, *truth) << "\n";
            for (std::size_t i = 0; i < log.pass_final_errors.size(); ++i)
                sum << "pass" << i << "_model_error = " << log.pass_final_errors[i]
                    << "\n";
        }
        sum << "elapsed_seconds = " << elapsed_s(t0) << "\n";
    }

    if (aborted) {
        std::cerr << "invert: aborted: " << abort_reason << "\n";
        return kExitSolver;
    }
    std::cout << "invert: accepted=" << log.rows.size()
              << " elapsed=" << elapsed_s(t0) << "s\n";
    return 0;
}

int cmd_project(const std::string& model_path, double tau,
                std::optional<double> xi, const std::string& config_path,
                const std::string& out_path) {
    const Config cfg = load_config(config_path);
    const ModelField m0 = read_model(model_path).as_slowness_sq();
    const Bounds bounds = Bounds::from_velocity_range(m0.grid, cfg.v_min, cfg.v_max);

    bool converged = false;
    const ModelField proj = project_intersection(m0, bounds, tau, xi, nullptr,
                                                 &converged);
    if (!converged) {
        std::cerr << "project: iteration did not converge\n";
        return kExitSolver;
    }
    write_model(out_path, proj, ModelUnit::slowness_sq);

    double dist = 0.0;
    for (std::size_t i = 0; i < proj.values.size(); ++i) {
        const double d = proj.values[i] - m0.values[i];
        dist += d * d;
    }
    std::cout.precision(12);
    std::cout << "tv = " << tv_norm(proj) << "\n"
              << "asym_tv = " << asym_tv_norm(proj) << "\n"
              << "distance = " << std::sqrt(dist) << "\n";
    return 0;
}

int cmd_render(const std::string& model_path, const std::string& out_path,
               std::optional<double> vmin, std::optional<double> vmax,
               std::optional<int> slice_col) {
    const StoredModel sm = read_model(model_path);
    const ModelField v = sm.as_velocity();
    const Grid& g = v.grid;

    double lo = vmin ? *vmin
                     : *std::min_element(v.values.begin(), v.values.end());
    double hi = vmax ? *vmax
                     : *std::max_element(v.values.begin(), v.values.end());
    if (!(hi > lo)) throw IoError("render: degenerate value range");

    std::ofstream pgm(out_path, std::ios::binary | std::ios::trunc);
    if (!pgm) throw IoError("cannot create file: " + out_path);
    pgm << "P5\n" << g.nx << " " << g.nz << "\n255\n";
    for (int k = 0; k < g.nz; ++k) {
        for (int l = 0; l < g.nx; ++l) {
            const double t = (v.at(k, l) - lo) / (hi - lo);
            const int px = static_cast<int>(std::lround(255.0 * std::clamp(t, 0.0, 1.0)));
            pgm.put(static_cast<char>(px));
        }
    }
    if (!pgm) throw IoError("write failed: " + out_path);

    const int col = slice_col ? *slice_col : g.nx / 2;
    if (col < 0 || col >= g.nx) throw IoError("render: slice column out of range");
    std::ofstream csv(out_path + ".csv");
    csv.precision(12);
    csv << "depth_m,velocity\n";
    for (int k = 0; k < g.nz; ++k)
        csv << k * g.h << ',' << v.at(k, col) << '\n';
    return 0;
}

// Central finite differences against the adjoint gradient on a fixed small
// scene; the relative step keeps truncation and roundoff balanced for the
// 1e-7-scale slowness-squared values.
double fd_max_rel_err(ObjectiveMode mode, const Config& cfg) {
    const Grid grid(6, 6, 50.0);
    ModelField m = make_synthetic(SyntheticKind::layered, grid);

    Geometry geom;
    geom.grid = grid;
    geom.source_positions = {{1 * grid.h, 1 * grid.h}, {4 * grid.h, 1 * grid.h}};
    for (int l = 0; l < grid.nx; ++l)
        geom.receiver_positions.push_back({l * grid.h, 2 * grid.h});
    geom.validate();

    const std::vector<double> freqs = {4.0, 6.0};
    const DataSet data = generate_data(m, geom, Wavelet{10.0}, freqs,
                                       cfg.eval_opts.radiation_imag);
    // Perturb away from the data-generating model so the misfit is nonzero.
    for (std::size_t i = 0; i < m.values.size(); ++i)
        m.values[i] *= 1.0 + 0.05 * std::sin(2.0 + 3.0 * static_cast<double>(i));

    const SamplingOperator P = SamplingOperator::from_geometry(geom);
    const std::vector<FreqShots> batch = slice_batch(data, {0, 1});
    const WriConfig wri{10.0};

    auto value = [&](const ModelField& mm) {
        return mode == ObjectiveMode::fwi
                   ? fwi_eval(mm, batch, P, cfg.eval_opts).value
                   : wri_eval(mm, batch, P, wri, cfg.eval_opts).value;
    };
    const ObjectiveEval eval = mode == ObjectiveMode::fwi
                                   ? fwi_eval(m, batch, P, cfg.eval_opts)
                                   : wri_eval(m, batch, P, wri, cfg.eval_opts);

    std::vector<double> g_fd(m.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i) {
        const double step = 1e-6 * std::max(std::abs(m.values[i]), 1e-8);
        ModelField mp = m, mm2 = m;
        mp.values[i] += step;
        mm2.values[i] -= step;
        g_fd[i] = (value(mp) - value(mm2)) / (2.0 * step);
    }

    double scale = 0.0;
    for (double v : g_fd) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t i = 0; i < g_fd.size(); ++i)
        worst = std::max(worst, std::abs(g_fd[i] - eval.gradient[i]) / scale);
    return worst;
}

int cmd_gradcheck(const std::string& config_path) {
    const Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    const double tol = 1e-5;
    bool ok = true;
    std::cout.precision(6);
    for (const auto mode : {ObjectiveMode::fwi, ObjectiveMode::wri}) {
        const double err = fd_max_rel_err(mode, cfg);
        std::cout << (mode == ObjectiveMode::fwi ? "fwi" : "wri") << ","
                  << std::scientific << err << "\n";
        ok = ok && err <= tol;
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    tvfwi::apply_thread_cap();

    CLI::App app{"constrained frequency-domain waveform inversion toolkit"};
    app.require_subcommand(1);

    std::string model_path, config_path, out_path, data_path, init_path, outdir,
        truth_path;
    double tau = 0.0;
    std::optional<double> xi, vmin, vmax;
    std::optional<int> slice_col;

    auto* fwd = app.add_subcommand("forward", "model synthetic receiver data");
    fwd->add_option("--model", model_path, "true model file")->required();
    fwd->add_option("--config", config_path, "configuration file")->required();
    fwd->add_option("--out", out_path, "output data file")->required();

    auto* inv = app.add_subcommand("invert", "run the constrained inversion");
    inv->add_option("--data", data_path, "observed data file")->required();
    inv->add_option("--init", init_path, "initial model file")->required();
    inv->add_option("--config", config_path, "configuration file")->required();
    inv->add_option("--outdir", outdir, "output directory")->required();
    inv->add_option("--truth", truth_path, "ground-truth model for error tracking");

    auto* prj = app.add_subcommand("project", "project a model onto the constraints");
    prj->add_option("--model", model_path, "input model file")->required();
    prj->add_option("--tau", tau, "total-variation radius")->required();
    prj->add_option("--xi", xi, "one-sided TV radius");
    prj->add_option("--config", config_path, "configuration file")->required();
    prj->add_option("--out", out_path, "output model file")->required();

    auto* rnd = app.add_subcommand("render", "write a PGM image and slice CSV");
    rnd->add_option("--model", model_path, "model file")->required();
    rnd->add_option("--out", out_path, "output PGM file")->required();
    rnd->add_option("--vmin", vmin, "velocity mapped to black");
    rnd->add_option("--vmax", vmax, "velocity mapped to white");
    rnd->add_option("--slice", slice_col, "lateral column for the CSV slice");

    auto* gck = app.add_subcommand("gradcheck", "finite-difference gradient check");
    gck->add_option("--config", config_path, "configuration file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitParse;
    }

    try {
        if (fwd->parsed()) return cmd_forward(model_path, config_path, out_path);
        if (inv->parsed())
            return cmd_invert(data_path, init_path, config_path, outdir, truth_path);
        if (prj->parsed())
            return cmd_project(model_path, tau, xi, config_path, out_path);
        if (rnd->parsed())
            return cmd_render(model_path, out_path, vmin, vmax, slice_col);
        if (gck->parsed()) return cmd_gradcheck(config_path);
    } catch (const tvfwi::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return 0;
}
