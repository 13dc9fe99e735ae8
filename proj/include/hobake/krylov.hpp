#pragma once

#include <chrono>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hobake/assembly.hpp"
#include "hobake/errors.hpp"
#include "hobake/parallel.hpp"
#include "hobake/tensor.hpp"

namespace hobake {

/// Element-local operator: apply on 1 or 3 components, plus its element diagonals.
template <class Op>
concept LocalOperator = requires(const Op& op, std::span<const double> u, std::span<double> w) {
    { op.local_size() } -> std::convertible_to<std::size_t>;
    op.apply(u, w, static_cast<WorkerPool*>(nullptr), static_cast<FlopByteCounters*>(nullptr));
    { op.element_diagonal() } -> std::convertible_to<std::vector<double>>;
};

/// Assembled, masked diagonal in local form, replicated over `components`.
template <LocalOperator Op>
std::vector<double> compute_diagonal(const Op& op, const GatherScatter& gs, std::size_t components = 1,
                                     WorkerPool* pool = nullptr) {
    std::vector<double> d = op.element_diagonal();
    gs.apply(d, pool);
    gs.apply_mask(d);
    if (components == 1)
        return d;
    std::vector<double> out;
    out.reserve(components * d.size());
    for (std::size_t c = 0; c < components; ++c)
        out.insert(out.end(), d.begin(), d.end());
    return out;
}

/// Jacobi preconditioner; masked (zero) diagonal entries map to zero.
inline std::vector<double> invert_diagonal(std::span<const double> d) {
    std::vector<double> inv(d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        inv[i] = d[i] != 0.0 ? 1.0 / d[i] : 0.0;
    return inv;
}

enum class PcgMode {
    Benchmark, // exactly max_iters iterations
    Verify     // stop at relative preconditioned residual <= rtol
};

struct PcgOptions {
    int max_iters = 100;
    PcgMode mode = PcgMode::Benchmark;
    double rtol = 1e-10;
    bool record_energy = false;
    WorkerPool* pool = nullptr;
};

struct PcgTimings {
    double op = 0.0;
    double gather_scatter = 0.0;
    double dots = 0.0;
    double axpys = 0.0;

    double total() const noexcept { return op + gather_scatter + dots + axpys; }
};

struct PcgRun {
    int iterations = 0;
    /// sqrt(r^T M^-1 r), starting with the initial residual.
    std::vector<double> residual_history;
    /// 1/2 x^T A x - x^T b, starting with 0 at x = 0 (only with record_energy).
    std::vector<double> quadratic_history;
    PcgTimings timings;
    std::size_t reductions = 0;
    ExchangeStats exchange;
    bool converged = false;
};

struct PcgResult {
    std::vector<double> x;
    /// Recurred residual after the last iteration.
    std::vector<double> r;
    PcgRun run;
};

namespace detail {

class PhaseTimer {
public:
    explicit PhaseTimer(double& slot) : slot_(slot), start_(std::chrono::steady_clock::now()) {}
    ~PhaseTimer() { slot_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    double& slot_;
    std::chrono::steady_clock::time_point start_;
};

template <class F>
void parallel_update(WorkerPool* pool, std::size_t n, F&& f) {
    parallel_chunks(pool, n, 8192, [&](std::size_t b, std::size_t e, std::size_t) {
        for (std::size_t i = b; i < e; ++i)
            f(i);
    });
}

} // namespace detail

/// Diagonally preconditioned CG on mask . QQ^T . A_L, x0 = 0. `b` must be continuous and masked.
/// Each iteration performs exactly two counted reductions (plus one before the loop).
template <LocalOperator Op>
PcgResult pcg(const Op& op, const GatherScatter& gs, std::span<const double> b, std::span<const double> inv_diag,
              const PcgOptions& opt = {}) {
    const std::size_t n = b.size();
    if (n == 0 || n % op.local_size() != 0 || inv_diag.size() != n)
        throw DimensionError("pcg: right-hand side / preconditioner length mismatch");
    WorkerPool* pool = opt.pool;
    PcgResult res;
    PcgRun& run = res.run;
    auto& x = res.x;
    x.assign(n, 0.0);
    std::vector<double> r(b.begin(), b.end()), z(n), p(n, 0.0), w(n);

    auto dot = [&](std::span<const double> u, std::span<const double> v, bool counted) {
        detail::PhaseTimer t(run.timings.dots);
        if (counted)
            ++run.reductions;
        return gs.dot(u, v, pool);
    };
    auto check = [](double v, const char* what) {
        if (!std::isfinite(v))
            throw DivergenceError(std::string("non-finite ") + what + " in PCG");
    };

    {
        detail::PhaseTimer t(run.timings.axpys);
        detail::parallel_update(pool, n, [&](std::size_t i) { z[i] = inv_diag[i] * r[i]; });
    }
    double rz = dot(r, z, true);
    check(rz, "initial residual");
    const double rz0 = rz;
    run.residual_history.push_back(std::sqrt(std::max(rz, 0.0)));
    if (opt.record_energy)
        run.quadratic_history.push_back(0.0);

    double rz_prev = 1.0;
    for (int it = 0; it < opt.max_iters; ++it) {
        if (rz == 0.0) {
            run.converged = true;
            break;
        }
        const double beta = it == 0 ? 0.0 : rz / rz_prev;
        {
            detail::PhaseTimer t(run.timings.axpys);
            detail::parallel_update(pool, n, [&](std::size_t i) { p[i] = z[i] + beta * p[i]; });
        }
        {
            detail::PhaseTimer t(run.timings.op);
            op.apply(p, w, pool, nullptr);
        }
        {
            detail::PhaseTimer t(run.timings.gather_scatter);
            gs.apply(w, pool, &run.exchange);
            gs.apply_mask(w);
        }
        const double pap = dot(p, w, true);
        check(pap, "curvature p^T A p");
        if (pap <= 0.0)
            throw DivergenceError("operator is not positive definite on the search direction");
        const double alpha = rz / pap;
        {
            detail::PhaseTimer t(run.timings.axpys);
            detail::parallel_update(pool, n, [&](std::size_t i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * w[i];
                z[i] = inv_diag[i] * r[i];
            });
        }
        rz_prev = rz;
        rz = dot(r, z, true);
        check(rz, "residual");
        run.iterations = it + 1;
        run.residual_history.push_back(std::sqrt(std::max(rz, 0.0)));
        if (opt.record_energy) {
            // x^T A x = x^T (b - r)  =>  f = -1/2 x^T (b + r)
            std::vector<double> br(n);
            for (std::size_t i = 0; i < n; ++i)
                br[i] = b[i] + r[i];
            run.quadratic_history.push_back(-0.5 * dot(x, br, false));
        }
        if (opt.mode == PcgMode::Verify && rz0 > 0.0 && std::sqrt(rz / rz0) <= opt.rtol) {
            run.converged = true;
            break;
        }
    }
    res.r = std::move(r);
    return res;
}

template <LocalOperator Op>
PcgResult pcg(const Op& op, const GatherScatter& gs, std::span<const double> b, const PcgOptions& opt = {}) {
    const std::size_t comps = b.size() / op.local_size();
    const auto inv = invert_diagonal(compute_diagonal(op, gs, comps, opt.pool));
    return pcg(op, gs, b, inv, opt);
}

} // namespace hobake
