#pragma once

#include <functional>
#include <vector>

#include "tvfwi/constraints.hpp"
#include "tvfwi/grid.hpp"
#include "tvfwi/objectives.hpp"
#include "tvfwi/pdhg.hpp"

namespace tvfwi {

// What the outer loop needs from an objective. on_accept lets the caller
// react to model updates (source-encoding weights are redrawn there);
// rejected trial steps never trigger it, so each sufficient-decrease test
// compares values under one set of weights.
class ObjectiveOracle {
  public:
    virtual ~ObjectiveOracle() = default;
    virtual double value(const ModelField& m) = 0;
    virtual ObjectiveEval full(const ModelField& m) = 0;
    virtual void on_accept(const ModelField& /*m*/) {}
};

struct SgpParams {
    double sigma = 0.1;  // sufficient-decrease fraction
    double xi1 = 2.0;    // damping decrease factor
    double xi2 = 2.0;    // damping increase factor
    double rho = 1e-12;  // curvature floor
    double eps = 1e-4;   // relative-model-change stop
    double c0 = -1.0;    // < 0: scale automatically from the initial Hessian
    int max_outer = 25;
    DampingMode damping = DampingMode::additive;
    double nu_frac = 1e-3;  // multiplicative-mode floor, fraction of max(hdiag)
    bool warm_start_duals = true;  // carry TV/hinge duals across outer iterations
    PdhgParams pdhg;        // alpha/delta <= 0 means use default_steps
};

struct SgpStep {
    bool accepted = false;
    double f_before = 0.0;
    double f_after = 0.0;   // trial value under the same weights as f_before
    double model_decrease = 0.0;  // quadratic model value of the step
    double c_n = 0.0;
    double step_norm = 0.0;
    double rel_model_change = 0.0;
    int inner_iters = 0;
    bool inner_converged = false;
    double seconds = 0.0;
};

struct SgpTrace {
    std::vector<SgpStep> steps;
    int accepted_count() const;
    int max_consecutive_rejections() const;
};

struct SgpResult {
    ModelField model;
    SgpTrace trace;
};

SgpResult sgp_minimize(ObjectiveOracle& objective, const ConstraintSet& constraints,
                       const ModelField& m0, const SgpParams& params);

// Adapter for test objectives given as plain callables returning
// (value, gradient, hessian_diag).
class FunctionOracle : public ObjectiveOracle {
  public:
    explicit FunctionOracle(std::function<ObjectiveEval(const ModelField&)> fn)
        : fn_(std::move(fn)) {}
    double value(const ModelField& m) override { return fn_(m).value; }
    ObjectiveEval full(const ModelField& m) override { return fn_(m); }

  private:
    std::function<ObjectiveEval(const ModelField&)> fn_;
};

}  // namespace tvfwi
