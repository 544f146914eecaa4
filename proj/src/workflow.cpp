#include "tvfwi/workflow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tvfwi/constraints.hpp"
#include "tvfwi/pdhg.hpp"

namespace tvfwi {

void InversionPlan::validate() const {
    if (frequencies.size() < 2)
        throw std::invalid_argument("plan: need at least two frequencies");
    for (std::size_t i = 1; i < frequencies.size(); ++i)
        if (!(frequencies[i] > frequencies[i - 1]))
            throw std::invalid_argument("plan: frequencies must be strictly increasing");
    if (passes.empty()) throw std::invalid_argument("plan: need at least one pass");
    for (const PassSpec& p : passes) {
        if ((p.tau_frac || p.xi_frac) && !reference_model)
            throw std::invalid_argument("plan: fractional radii need a reference model");
        if (p.tau && !(*p.tau > 0.0)) throw std::invalid_argument("plan: tau must be > 0");
        if (p.tau_frac && !(*p.tau_frac > 0.0))
            throw std::invalid_argument("plan: tau_frac must be > 0");
        if (p.xi && *p.xi < 0.0) throw std::invalid_argument("plan: xi must be >= 0");
        if (p.xi_frac && !(*p.xi_frac > 0.0))
            throw std::invalid_argument("plan: xi_frac must be > 0");
    }
    if (!(v_min > 0.0) || !(v_max > v_min))
        throw std::invalid_argument("plan: invalid velocity bounds");
    if (mode == ObjectiveMode::wri && !(wri.lambda > 0.0))
        throw std::invalid_argument("plan: wri lambda must be positive");
}

std::vector<std::pair<double, double>> make_batches(const std::vector<double>& freqs) {
    if (freqs.size() < 2)
        throw std::invalid_argument("make_batches: need at least two frequencies");
    std::vector<std::pair<double, double>> batches;
    for (std::size_t i = 0; i + 1 < freqs.size(); ++i)
        batches.emplace_back(freqs[i], freqs[i + 1]);
    return batches;
}

void RunLog::write_csv(std::ostream& os) const {
    os << "pass,batch,outer,objective,c_n,inner_iters,model_error,seconds\n";
    const auto old_precision = os.precision(17);
    for (const RunLogRow& r : rows) {
        os << r.pass << ',' << r.batch << ',' << r.outer << ',' << r.objective << ','
           << r.c_n << ',' << r.inner_iters << ',' << r.model_error << ','
           << r.seconds << '\n';
    }
    os.precision(old_precision);
}

namespace {

// Redraws supershot weights at every accepted model update; rejected trial
// steps reuse the current draw.
class EncodedOracle : public ObjectiveOracle {
  public:
    EncodedOracle(ObjectiveMode mode, SamplingOperator P, WriConfig wri,
                  EvalOptions opts, std::vector<FreqShots> raw,
                  const EncodingSpec& enc, std::uint64_t* draw_counter,
                  std::function<void(const ModelField&)> accept_hook = {})
        : obj_(mode, std::move(P), wri, opts), raw_(std::move(raw)), enc_(enc),
          counter_(draw_counter), accept_hook_(std::move(accept_hook)) {
        refresh();
    }

    double value(const ModelField& m) override { return obj_.value(m); }
    ObjectiveEval full(const ModelField& m) override { return obj_.full(m); }
    void on_accept(const ModelField& m) override {
        if (accept_hook_) accept_hook_(m);
        if (enc_.enabled) refresh();
    }

  private:
    void refresh() {
        if (!enc_.enabled) {
            obj_.set_batch(raw_);
            return;
        }
        const std::size_t n_src = raw_.front().q.size();
        const EncodingWeights w =
            EncodingWeights::draw(enc_.n_super, n_src, enc_.seed, (*counter_)++);
        obj_.set_batch(encode(raw_, w));
    }

    BatchObjective obj_;
    std::vector<FreqShots> raw_;
    EncodingSpec enc_;
    std::uint64_t* counter_;
    std::function<void(const ModelField&)> accept_hook_;
};

ConstraintSet pass_constraints(const InversionPlan& plan, const PassSpec& pass,
                               const Grid& grid) {
    ConstraintSet cs;
    cs.bounds = Bounds::from_velocity_range(grid, plan.v_min, plan.v_max);
    if (pass.tau)
        cs.tau = *pass.tau;
    else if (pass.tau_frac)
        cs.tau = *pass.tau_frac * tv_norm(*plan.reference_model);
    if (pass.xi)
        cs.xi = *pass.xi;
    else if (pass.xi_frac)
        cs.xi = *pass.xi_frac * asym_tv_norm(*plan.reference_model);
    return cs;
}

ModelField ensure_feasible(const ModelField& m, const ConstraintSet& cs) {
    constexpr double slack = 1e-6;
    bool box_ok = true;
    for (std::size_t i = 0; i < m.values.size(); ++i)
        if (m.values[i] < cs.bounds.lower[i] || m.values[i] > cs.bounds.upper[i])
            box_ok = false;
    const bool tv_ok = !cs.tau || tv_norm(m) <= *cs.tau * (1.0 + slack);
    const bool hinge_ok = !cs.xi || asym_tv_norm(m) <= *cs.xi * (1.0 + slack);
    if (box_ok && tv_ok && hinge_ok) return m;
    if (box_ok && !cs.tau && !cs.xi) return m;
    if (!cs.tau && !cs.xi) return project_box(m, cs.bounds);
    return project_intersection(m, cs.bounds, cs.tau, cs.xi);
}

}  // namespace

ModelField run_pass(const InversionPlan& plan, int pass_index, const DataSet& data,
                    const ModelField& m_in, RunLog& log, const ModelField* m_true,
                    const SnapshotHook& snapshot, std::uint64_t* draw_counter) {
    plan.validate();
    const PassSpec& pass = plan.passes.at(static_cast<std::size_t>(pass_index));
    const ConstraintSet cs = pass_constraints(plan, pass, m_in.grid);
    const SamplingOperator P = SamplingOperator::from_geometry(data.geometry);

    std::uint64_t local_counter = 0;
    if (!draw_counter) draw_counter = &local_counter;

    ModelField m = ensure_feasible(m_in, cs);
    const auto nan = std::numeric_limits<double>::quiet_NaN();

    for (std::size_t b = 0; b + 1 < plan.frequencies.size(); ++b) {
        // Match the plan's frequencies against the data set.
        auto index_of = [&](double f) {
            for (std::size_t i = 0; i < data.frequencies.size(); ++i)
                if (data.frequencies[i] == f) return i;
            throw std::invalid_argument("run_pass: plan frequency missing from data");
        };
        const std::vector<std::size_t> idx = {index_of(plan.frequencies[b]),
                                              index_of(plan.frequencies[b + 1])};
        std::vector<FreqShots> raw = slice_batch(data, idx);

        std::vector<double> step_errors;
        auto accept_hook = [&](const ModelField& accepted) {
            step_errors.push_back(m_true ? model_error(accepted, *m_true) : nan);
        };
        EncodedOracle oracle(plan.mode, P, plan.wri, plan.eval_opts, std::move(raw),
                             plan.encoding, draw_counter, accept_hook);
        SgpResult res = sgp_minimize(oracle, cs, m, plan.sgp);
        m = std::move(res.model);

        int outer = 0;
        for (const SgpStep& s : res.trace.steps) {
            if (!s.accepted) continue;
            RunLogRow row;
            row.pass = pass_index;
            row.batch = static_cast<int>(b);
            row.outer = outer;
            row.objective = s.f_after;
            row.c_n = s.c_n;
            row.inner_iters = s.inner_iters;
            row.model_error = step_errors.at(static_cast<std::size_t>(outer));
            row.seconds = s.seconds;
            log.rows.push_back(row);
            ++outer;
        }
        log.batch_ids.emplace_back(pass_index, static_cast<int>(b));
        log.batch_traces.push_back(std::move(res.trace));
        if (snapshot) snapshot(pass_index, static_cast<int>(b), m);
    }
    if (m_true) log.pass_final_errors.push_back(model_error(m, *m_true));
    return m;
}

InversionResult run_inversion(const InversionPlan& plan, const DataSet& data,
                              const ModelField& m0, const ModelField* m_true,
                              const SnapshotHook& snapshot) {
    plan.validate();
    InversionResult out{m0, {}};
    std::uint64_t draw_counter = 0;
    for (int p = 0; p < static_cast<int>(plan.passes.size()); ++p)
        out.model = run_pass(plan, p, data, out.model, out.log, m_true, snapshot,
                             &draw_counter);
    return out;
}

}  // namespace tvfwi
