// Timing comparison of the parallel kernels against the serial reference
// implementations, plus a bitwise-agreement check on each output.

#include <chrono>
#include <cstring>
#include <iostream>
#include <random>
#include <vector>

#include "tvfwi/grid.hpp"
#include "tvfwi/kernels.hpp"
#include "tvfwi/threads.hpp"

namespace {

using clock_t_ = std::chrono::steady_clock;

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_t_::now();
        f();
        best = std::min(best,
                        std::chrono::duration<double>(clock_t_::now() - t0).count());
    }
    return best;
}

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

int main() {
    tvfwi::apply_thread_cap();
    std::cout << "threads: " << tvfwi::max_threads() << "\n";

    const tvfwi::Grid grid(600, 1200, 10.0);
    const std::size_t M = grid.cells();
    std::mt19937_64 rng(7);
    std::normal_distribution<double> dist;
    std::vector<double> x(M), y(M), diag(M), lo(M), hi(M);
    for (std::size_t i = 0; i < M; ++i) {
        x[i] = dist(rng);
        y[i] = dist(rng);
        diag[i] = 1.0 + std::abs(dist(rng));
        lo[i] = -2.0;
        hi[i] = 2.0;
    }

    const int reps = 20;
    std::vector<double> dx_s(M), dz_s(M), dx_p(M), dz_p(M), out_s(M), out_p(M);

    struct Row {
        const char* name;
        double serial_s;
        double parallel_s;
        bool identical;
    };
    std::vector<Row> rows;

    const int nz = grid.nz, nx = grid.nx;
    const double h = grid.h;
    {
        const double ts = time_best_of(reps, [&] {
            tvfwi::kernels::serial::apply_D(x, nz, nx, h, dx_s, dz_s);
        });
        const double tp = time_best_of(
            reps, [&] { tvfwi::kernels::apply_D(x, nz, nx, h, dx_p, dz_p); });
        rows.push_back({"apply_D", ts, tp,
                        bitwise_equal(dx_s, dx_p) && bitwise_equal(dz_s, dz_p)});
    }
    {
        const double ts = time_best_of(reps, [&] {
            tvfwi::kernels::serial::apply_Dt(dx_s, dz_s, nz, nx, h, out_s);
        });
        const double tp = time_best_of(
            reps, [&] { tvfwi::kernels::apply_Dt(dx_s, dz_s, nz, nx, h, out_p); });
        rows.push_back({"apply_Dt", ts, tp, bitwise_equal(out_s, out_p)});
    }
    {
        const double ts = time_best_of(
            reps, [&] { tvfwi::kernels::serial::apply_Dz(x, nz, nx, h, out_s); });
        const double tp = time_best_of(
            reps, [&] { tvfwi::kernels::apply_Dz(x, nz, nx, h, out_p); });
        rows.push_back({"apply_Dz", ts, tp, bitwise_equal(out_s, out_p)});
    }
    {
        const double ts = time_best_of(
            reps, [&] { tvfwi::kernels::serial::apply_Dzt(x, nz, nx, h, out_s); });
        const double tp = time_best_of(
            reps, [&] { tvfwi::kernels::apply_Dzt(x, nz, nx, h, out_p); });
        rows.push_back({"apply_Dzt", ts, tp, bitwise_equal(out_s, out_p)});
    }
    {
        const double ts = time_best_of(reps, [&] {
            tvfwi::kernels::serial::primal_update(x, diag, lo, hi, out_s);
        });
        const double tp = time_best_of(
            reps, [&] { tvfwi::kernels::primal_update(x, diag, lo, hi, out_p); });
        rows.push_back({"primal_update", ts, tp, bitwise_equal(out_s, out_p)});
    }
    {
        double vs = 0.0, vp = 0.0;
        const double ts =
            time_best_of(reps, [&] { vs = tvfwi::kernels::serial::dot(x, y); });
        const double tp = time_best_of(reps, [&] { vp = tvfwi::kernels::dot(x, y); });
        rows.push_back({"dot", ts, tp, vs == vp});
    }
    {
        double vs = 0.0, vp = 0.0;
        const double ts =
            time_best_of(reps, [&] { vs = tvfwi::kernels::serial::nrm2(x); });
        const double tp = time_best_of(reps, [&] { vp = tvfwi::kernels::nrm2(x); });
        rows.push_back({"nrm2", ts, tp, vs == vp});
    }

    std::cout << "grid " << grid.nz << "x" << grid.nx << ", best of " << reps
              << " reps\n";
    std::cout.precision(3);
    bool all_ok = true;
    for (const Row& r : rows) {
        std::cout << r.name << ": serial " << r.serial_s * 1e3 << " ms, parallel "
                  << r.parallel_s * 1e3 << " ms, speedup "
                  << r.serial_s / r.parallel_s
                  << (r.identical ? "" : "  MISMATCH") << "\n";
        all_ok = all_ok && r.identical;
    }
    return all_ok ? 0 : 1;
}
