#include "tvfwi/objectives.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tvfwi {

namespace {

Eigen::Index ei(std::size_t i) { return static_cast<Eigen::Index>(i); }

// The PDE residual in the penalty is measured against the h^2-scaled
// operator (the O(1) stencil), which makes the useful range of lambda
// independent of the grid spacing. Equivalent to replacing lambda by
// lambda * h^2 against the raw operator.
double effective_lambda(double lambda, const Grid& g) { return lambda * g.h * g.h; }

// N = A^H A + lambda^{-2} P^T P; P^T P is diagonal with receiver counts.
CSparse normal_matrix(const CSparse& A, const SamplingOperator& P, double lambda) {
    CSparse N = (A.adjoint() * A).pruned();
    const double w = 1.0 / (lambda * lambda);
    CSparse Dp(A.rows(), A.cols());
    std::vector<Eigen::Triplet<Complex>> trip;
    trip.reserve(P.receiver_cells.size());
    for (std::size_t cell : P.receiver_cells)
        trip.emplace_back(static_cast<int>(cell), static_cast<int>(cell), Complex(w, 0.0));
    Dp.setFromTriplets(trip.begin(), trip.end());
    N += Dp;
    N.makeCompressed();
    return N;
}

using NormalLLT = Eigen::SimplicialLLT<CSparse, Eigen::Lower>;

CVec normal_solve(const NormalLLT& llt, const CSparse& N, const CVec& rhs) {
    CVec u = llt.solve(rhs);
    // Two refinement sweeps: the normal system squares the conditioning of A.
    for (int sweep = 0; sweep < 2; ++sweep) {
        CVec r = rhs - N * u;
        u += llt.solve(r);
    }
    return u;
}

struct ShotContribution {
    double value = 0.0;
    std::vector<double> gradient;      // empty when not requested
    std::vector<double> hessian_diag;  // empty when not requested
};

// One (frequency, source) term of the FWI objective.
ShotContribution fwi_shot(const ModelField& m, double omega, const Factorization& fact,
                          const SamplingOperator& P, const CVec& q, const CVec& d,
                          bool want_gradient, const EvalOptions& opts) {
    ShotContribution out;
    const CVec u = fact.solve_forward(q);
    const CVec r = P.sample(u) - d;
    out.value = 0.5 * r.squaredNorm();
    if (!want_gradient) return out;

    const std::size_t M = m.grid.cells();
    const CVec v = fact.solve_adjoint(P.adjoint(r, M));
    out.gradient.assign(M, 0.0);
    out.hessian_diag.assign(M, 0.0);
    for (std::size_t k = 0; k < M; ++k) {
        const Complex gk = jacobian_scalar(m, omega, k, u[ei(k)], opts.radiation_imag);
        out.gradient[k] = -std::real(std::conj(gk) * v[ei(k)]);
        out.hessian_diag[k] = std::norm(gk);
    }
    return out;
}

ShotContribution wri_shot(const ModelField& m, double omega, const CSparse& A,
                          const NormalLLT& llt, const CSparse& N,
                          const SamplingOperator& P, const CVec& q, const CVec& d,
                          double lambda, bool want_gradient, const EvalOptions& opts) {
    ShotContribution out;
    const double inv_l2 = 1.0 / (lambda * lambda);
    const CVec rhs = A.adjoint() * q + inv_l2 * P.adjoint(d, static_cast<std::size_t>(A.rows()));
    const CVec u = normal_solve(llt, N, rhs);
    const CVec pde_res = A * u - q;
    const CVec data_res = P.sample(u) - d;
    out.value = 0.5 * data_res.squaredNorm() +
                0.5 * lambda * lambda * pde_res.squaredNorm();
    if (!want_gradient) return out;

    const std::size_t M = m.grid.cells();
    const CVec v = lambda * lambda * pde_res;
    out.gradient.assign(M, 0.0);
    out.hessian_diag.assign(M, 0.0);
    for (std::size_t k = 0; k < M; ++k) {
        const Complex gk = jacobian_scalar(m, omega, k, u[ei(k)], opts.radiation_imag);
        out.gradient[k] = std::real(std::conj(gk) * v[ei(k)]);
        out.hessian_diag[k] = lambda * lambda * std::norm(gk);
    }
    return out;
}

// Fixed (frequency, source)-ordered accumulation keeps results reproducible
// regardless of how the per-shot work was scheduled.
ObjectiveEval reduce(std::vector<std::vector<ShotContribution>>& per_freq,
                     std::size_t M, bool want_gradient, const EvalOptions& opts) {
    ObjectiveEval eval;
    if (want_gradient) {
        eval.gradient.assign(M, 0.0);
        eval.hessian_diag.assign(M, 0.0);
    }
    for (auto& shots : per_freq) {
        for (auto& c : shots) {
            eval.value += c.value;
            if (!want_gradient) continue;
            for (std::size_t k = 0; k < M; ++k) {
                eval.gradient[k] += c.gradient[k];
                eval.hessian_diag[k] += c.hessian_diag[k];
            }
        }
    }
    if (want_gradient && opts.flip_gradient_sign)
        for (double& g : eval.gradient) g = -g;
    return eval;
}

}  // namespace

ObjectiveEval fwi_eval(const ModelField& m, const std::vector<FreqShots>& batch,
                       const SamplingOperator& P, const EvalOptions& opts) {
    m.validate_positive();
    const std::size_t M = m.grid.cells();
    std::vector<std::vector<ShotContribution>> per_freq(batch.size());
    for (std::size_t f = 0; f < batch.size(); ++f) {
        const FreqShots& shots = batch[f];
        const Factorization fact =
            factorize(assemble(m, shots.omega(), opts.radiation_imag));
        per_freq[f].resize(shots.q.size());
        const long long n = static_cast<long long>(shots.q.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < n; ++j) {
            per_freq[f][static_cast<std::size_t>(j)] =
                fwi_shot(m, shots.omega(), fact, P, shots.q[static_cast<std::size_t>(j)],
                         shots.d[static_cast<std::size_t>(j)], true, opts);
        }
    }
    return reduce(per_freq, M, true, opts);
}

CVec wri_augmented_solve(const ModelField& m, double omega, const CVec& q,
                         const CVec& d, const SamplingOperator& P, double lambda,
                         bool radiation_imag) {
    if (!(lambda > 0.0)) throw std::invalid_argument("wri: lambda must be positive");
    const HelmholtzOperator op = assemble(m, omega, radiation_imag);
    const double lam = effective_lambda(lambda, m.grid);
    const CSparse N = normal_matrix(op.matrix, P, lam);
    NormalLLT llt;
    llt.compute(N);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("wri: normal system factorization failed");
    const double inv_l2 = 1.0 / (lam * lam);
    const CVec rhs =
        op.matrix.adjoint() * q + inv_l2 * P.adjoint(d, static_cast<std::size_t>(op.matrix.rows()));
    return normal_solve(llt, N, rhs);
}

ObjectiveEval wri_eval(const ModelField& m, const std::vector<FreqShots>& batch,
                       const SamplingOperator& P, const WriConfig& cfg,
                       const EvalOptions& opts) {
    if (!(cfg.lambda > 0.0)) throw std::invalid_argument("wri: lambda must be positive");
    m.validate_positive();
    const std::size_t M = m.grid.cells();
    std::vector<std::vector<ShotContribution>> per_freq(batch.size());
    for (std::size_t f = 0; f < batch.size(); ++f) {
        const FreqShots& shots = batch[f];
        const HelmholtzOperator op = assemble(m, shots.omega(), opts.radiation_imag);
        const double lam = effective_lambda(cfg.lambda, m.grid);
        const CSparse N = normal_matrix(op.matrix, P, lam);
        NormalLLT llt;
        llt.compute(N);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("wri: normal system factorization failed");
        per_freq[f].resize(shots.q.size());
        const long long n = static_cast<long long>(shots.q.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < n; ++j) {
            per_freq[f][static_cast<std::size_t>(j)] =
                wri_shot(m, shots.omega(), op.matrix, llt, N, P,
                         shots.q[static_cast<std::size_t>(j)],
                         shots.d[static_cast<std::size_t>(j)], lam, true, opts);
        }
    }
    return reduce(per_freq, M, true, opts);
}

// --- caching evaluator ---------------------------------------------------

struct BatchObjective::FreqState {
    double freq_hz = 0.0;
    std::unique_ptr<Factorization> fact;  // FWI path
    CSparse A;                            // WRI path
    CSparse N;
    std::unique_ptr<NormalLLT> llt;
};

BatchObjective::BatchObjective(ObjectiveMode mode, SamplingOperator P,
                               WriConfig wri_cfg, EvalOptions opts)
    : mode_(mode), P_(std::move(P)), wri_cfg_(wri_cfg), opts_(opts) {}

BatchObjective::~BatchObjective() = default;

void BatchObjective::set_batch(std::vector<FreqShots> batch) {
    batch_ = std::move(batch);
    ++batch_version_;
    state_valid_ = false;
}

void BatchObjective::ensure_state(const ModelField& m) {
    if (cached_m_ != m.values) {
        state_.clear();
        cached_m_ = m.values;
        state_valid_ = false;
    }
    if (state_.size() == batch_.size()) {
        bool same = true;
        for (std::size_t f = 0; f < batch_.size(); ++f)
            if (state_[f]->freq_hz != batch_[f].freq_hz) same = false;
        if (same) return;
    }
    state_.clear();
    state_valid_ = false;
    for (const FreqShots& shots : batch_) {
        auto st = std::make_unique<FreqState>();
        st->freq_hz = shots.freq_hz;
        const HelmholtzOperator op = assemble(m, shots.omega(), opts_.radiation_imag);
        if (mode_ == ObjectiveMode::fwi) {
            st->fact = std::make_unique<Factorization>(op);
        } else {
            st->A = op.matrix;
            st->N = normal_matrix(op.matrix, P_,
                                  effective_lambda(wri_cfg_.lambda, m.grid));
            st->llt = std::make_unique<NormalLLT>();
            st->llt->compute(st->N);
            if (st->llt->info() != Eigen::Success)
                throw std::runtime_error("wri: normal system factorization failed");
        }
        state_.push_back(std::move(st));
    }
}

double BatchObjective::value(const ModelField& m) {
    ensure_state(m);
    if (state_valid_ && state_batch_version_ == batch_version_) return cached_value_;
    double total = 0.0;
    for (std::size_t f = 0; f < batch_.size(); ++f) {
        const FreqShots& shots = batch_[f];
        const FreqState& st = *state_[f];
        std::vector<double> vals(shots.q.size(), 0.0);
        const long long n = static_cast<long long>(shots.q.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < n; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (mode_ == ObjectiveMode::fwi)
                vals[js] = fwi_shot(m, shots.omega(), *st.fact, P_, shots.q[js],
                                    shots.d[js], false, opts_).value;
            else
                vals[js] = wri_shot(m, shots.omega(), st.A, *st.llt, st.N, P_,
                                    shots.q[js], shots.d[js],
                                    effective_lambda(wri_cfg_.lambda, m.grid),
                                    false, opts_).value;
        }
        for (double v : vals) total += v;
    }
    cached_value_ = total;
    state_valid_ = true;
    state_batch_version_ = batch_version_;
    return total;
}

ObjectiveEval BatchObjective::full(const ModelField& m) {
    ensure_state(m);
    const std::size_t M = m.grid.cells();
    std::vector<std::vector<ShotContribution>> per_freq(batch_.size());
    for (std::size_t f = 0; f < batch_.size(); ++f) {
        const FreqShots& shots = batch_[f];
        const FreqState& st = *state_[f];
        per_freq[f].resize(shots.q.size());
        const long long n = static_cast<long long>(shots.q.size());
#pragma omp parallel for schedule(dynamic)
        for (long long j = 0; j < n; ++j) {
            const std::size_t js = static_cast<std::size_t>(j);
            if (mode_ == ObjectiveMode::fwi)
                per_freq[f][js] = fwi_shot(m, shots.omega(), *st.fact, P_, shots.q[js],
                                           shots.d[js], true, opts_);
            else
                per_freq[f][js] = wri_shot(m, shots.omega(), st.A, *st.llt, st.N, P_,
                                           shots.q[js], shots.d[js],
                                           effective_lambda(wri_cfg_.lambda, m.grid),
                                           true, opts_);
        }
    }
    ObjectiveEval eval = reduce(per_freq, M, true, opts_);
    cached_value_ = eval.value;
    state_valid_ = true;
    state_batch_version_ = batch_version_;
    return eval;
}

}  // namespace tvfwi
