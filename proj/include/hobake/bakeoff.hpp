#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "hobake/assembly.hpp"
#include "hobake/basis.hpp"
#include "hobake/errors.hpp"
#include "hobake/krylov.hpp"
#include "hobake/mesh.hpp"
#include "hobake/operators.hpp"
#include "hobake/parallel.hpp"

namespace hobake {

/// One bake-off problem: system, component count, boundary condition, quadrature.
struct BPSpec {
    int id = 5;
    OperatorKind system = OperatorKind::Stiffness;
    std::size_t components = 1;
    BoundaryCondition bc = BoundaryCondition::Dirichlet;
    QuadKind quad = QuadKind::GLL;

    /// GL uses q = p + 2, GLL the collocated q = p + 1.
    int q_for(int p) const noexcept { return quad == QuadKind::GL ? p + 2 : p + 1; }
};

inline BPSpec bp_spec(int id) {
    if (id < 1 || id > 6)
        throw ConfigError("bp must be 1..6 (got " + std::to_string(id) + ")");
    BPSpec s;
    s.id = id;
    s.components = id % 2 == 0 ? 3 : 1;
    if (id <= 2) {
        s.system = OperatorKind::Mass;
        s.bc = BoundaryCondition::Neumann;
        s.quad = QuadKind::GL;
    } else {
        s.system = OperatorKind::Stiffness;
        s.bc = BoundaryCondition::Dirichlet;
        s.quad = id <= 4 ? QuadKind::GL : QuadKind::GLL;
    }
    return s;
}

enum class RunMode {
    BK, // repeated local applies, no gather-scatter or mask
    BP  // full diagonally preconditioned CG
};

inline const char* to_string(RunMode m) { return m == RunMode::BK ? "bk" : "bp"; }

inline RunMode parse_mode(const std::string& s) {
    if (s == "bk")
        return RunMode::BK;
    if (s == "bp")
        return RunMode::BP;
    throw ConfigError("mode must be bk or bp (got '" + s + "')");
}

struct RunConfig {
    int bp = 5;
    RunMode mode = RunMode::BP;
    int p = 7;
    int k = 6;
    std::size_t ranks = 1;
    int iterations = 100;
    Strategy strategy = Strategy::SumFactorized;
    std::size_t block = 4;
    std::size_t threads = 0; // 0: WorkerPool::default_threads()
    bool deterministic = true;
    bool instrument = false;
    int trials = 3;
    int warmup = 1;
    Box domain{};
    Deformation deformation{};
    double max_memory_mb = 8192.0;
};

inline void validate(const RunConfig& c) {
    bp_spec(c.bp);
    if (c.p < 1 || c.p > max_order)
        throw ConfigError("p must be 1.." + std::to_string(max_order) + " (got " + std::to_string(c.p) + ")");
    if (c.k < 0 || c.k > max_element_exponent)
        throw ConfigError("k must be 0.." + std::to_string(max_element_exponent) + " (got " + std::to_string(c.k) + ")");
    const std::size_t E = std::size_t{1} << c.k;
    if (c.ranks < 1 || c.ranks > E)
        throw ConfigError("ranks must satisfy 1 <= ranks <= E: E = 2^" + std::to_string(c.k) + " = " +
                          std::to_string(E) + " elements cannot cover " + std::to_string(c.ranks) + " ranks");
    if (c.iterations < 1)
        throw ConfigError("iterations must be positive");
    if (c.block != 4 && c.block != 8)
        throw ConfigError("block must be 4 or 8");
    if (c.trials < 1 || c.warmup < 0)
        throw ConfigError("trials must be >= 1 and warmup >= 0");
    if (!(c.max_memory_mb > 0.0))
        throw ConfigError("max_memory_mb must be positive");
}

/// Work rate: iterations * n / (ranks * seconds).
inline double dofs_rate(int iterations, std::size_t n, std::size_t ranks, double seconds) {
    return static_cast<double>(iterations) * static_cast<double>(n) / (static_cast<double>(ranks) * seconds);
}

struct RunResult {
    RunConfig config;
    int q = 0;
    std::size_t E = 0;
    std::size_t n = 0;        // p^3 E points, independent of the component count
    double n_per_rank = 0.0;
    double wall_seconds = 0.0; // median over trials
    double seconds_per_iter = 0.0;
    double dofs_rate = 0.0;
    std::size_t threads = 1;
    std::size_t flops_measured = 0; // operator flops over all iterations of one trial
    std::size_t words_measured = 0;
    std::size_t messages = 0;
    std::size_t reductions = 0;
    std::vector<double> trial_seconds;
    std::optional<PcgRun> solver;
};

/// Bytes held by one run: geometric factors, coordinates, solver vectors, numbering.
inline double estimated_memory_mb(const RunConfig& c) {
    const BPSpec s = bp_spec(c.bp);
    const double E = std::ldexp(1.0, c.k), p1 = c.p + 1, q = s.q_for(c.p);
    const double words = E * (8 * q * q * q + (3 + 8.0 * s.components + 4) * p1 * p1 * p1);
    return words * 8.0 / (1024.0 * 1024.0);
}

/// sin(pi x) sin(pi y) sin(pi z) at every local node.
inline std::vector<double> forcing_field(const BoxMesh& mesh) {
    const std::size_t np = mesh.nodes_per_element();
    std::vector<double> f(mesh.E * np);
    for (std::size_t e = 0; e < mesh.E; ++e)
        for (std::size_t i = 0; i < np; ++i) {
            double v = 1.0;
            for (int d = 0; d < 3; ++d) {
                const double lo = mesh.domain.lo[d], hi = mesh.domain.hi[d];
                v *= std::sin(std::numbers::pi * (mesh.element_coords(e, d)[i] - lo) / (hi - lo));
            }
            f[e * np + i] = v;
        }
    return f;
}

/// b = mask QQ^T B f, component c scaled by (1 + c).
inline std::vector<double> benchmark_rhs(const BoxMesh& mesh, const Basis1D& basis,
                                         const std::shared_ptr<const GeomFactors>& geom, const GatherScatter& gs,
                                         std::size_t components, WorkerPool* pool = nullptr) {
    const auto f = forcing_field(mesh);
    std::vector<double> b1(f.size());
    MassOperator(basis, geom).apply(f, b1, pool);
    gs.apply(b1, pool);
    gs.apply_mask(b1);
    std::vector<double> b(components * b1.size());
    for (std::size_t c = 0; c < components; ++c)
        for (std::size_t i = 0; i < b1.size(); ++i)
            b[c * b1.size() + i] = (1.0 + static_cast<double>(c)) * b1[i];
    return b;
}

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class Op>
void execute(const Op& op, const GatherScatter& gs, const std::vector<double>& b, const RunConfig& c,
             WorkerPool* pool, RunResult& out) {
    using clock = std::chrono::steady_clock;
    FlopByteCounters counts;
    {
        std::vector<double> w(b.size());
        op.apply(b, w, nullptr, &counts);
    }
    out.flops_measured = counts.flops() * static_cast<std::size_t>(c.iterations);
    out.words_measured = counts.words() * static_cast<std::size_t>(c.iterations);

    if (c.mode == RunMode::BK) {
        std::vector<double> w(b.size());
        auto trial = [&] {
            const auto t0 = clock::now();
            for (int it = 0; it < c.iterations; ++it)
                op.apply(b, w, pool, nullptr);
            return std::chrono::duration<double>(clock::now() - t0).count();
        };
        for (int i = 0; i < c.warmup; ++i)
            trial();
        for (int i = 0; i < c.trials; ++i)
            out.trial_seconds.push_back(trial());
        return;
    }

    // diagonal setup is not part of the timed iterations
    const auto inv = invert_diagonal(compute_diagonal(op, gs, b.size() / op.local_size(), pool));
    PcgOptions opt;
    opt.max_iters = c.iterations;
    opt.mode = PcgMode::Benchmark;
    opt.pool = pool;
    auto trial = [&] {
        const auto t0 = clock::now();
        auto res = pcg(op, gs, b, inv, opt);
        const double s = std::chrono::duration<double>(clock::now() - t0).count();
        out.solver = std::move(res.run);
        return s;
    };
    for (int i = 0; i < c.warmup; ++i)
        trial();
    for (int i = 0; i < c.trials; ++i)
        out.trial_seconds.push_back(trial());
    out.messages = out.solver->exchange.messages;
    out.reductions = out.solver->reductions;
}

} // namespace detail

/// Builds the problem, times `trials` repetitions after `warmup`, keeps the median.
inline RunResult run(const RunConfig& c) {
    validate(c);
    const BPSpec spec = bp_spec(c.bp);
    const double need = estimated_memory_mb(c);
    if (need > c.max_memory_mb) {
        char msg[128];
        std::snprintf(msg, sizeof msg, "out of memory: run needs about %.3g MB, budget is %.3g MB", need,
                      c.max_memory_mb);
        throw ResourceError(msg);
    }

    RunResult out;
    out.config = c;
    out.q = spec.q_for(c.p);
    out.threads = c.threads ? c.threads : WorkerPool::default_threads();
    WorkerPool pool(out.threads);
    WorkerPool* pp = out.threads > 1 ? &pool : nullptr;

    const BoxMesh mesh = build_box_mesh(c.k, c.p, c.domain, c.deformation);
    const Basis1D basis = make_basis(c.p, spec.quad, out.q);
    auto geom = std::make_shared<const GeomFactors>(compute_geometric_factors(mesh, basis, pp));
    const GatherScatter gs(mesh, spec.bc, c.ranks, c.deterministic);
    const auto b = benchmark_rhs(mesh, basis, geom, gs, spec.components, pp);

    out.E = mesh.E;
    out.n = reported_points(c.p, c.k);
    out.n_per_rank = static_cast<double>(out.n) / static_cast<double>(c.ranks);

    if (spec.system == OperatorKind::Mass)
        detail::execute(MassOperator(basis, geom, c.strategy, 1.0, c.block), gs, b, c, pp, out);
    else
        detail::execute(StiffnessOperator(basis, geom, c.strategy, c.block), gs, b, c, pp, out);

    out.wall_seconds = detail::median(out.trial_seconds);
    out.seconds_per_iter = out.wall_seconds / c.iterations;
    out.dofs_rate = dofs_rate(c.iterations, out.n, c.ranks, out.wall_seconds);
    return out;
}

struct SweepIssue {
    int p = 0;
    int k = 0;
    std::size_t ranks = 0;
    std::string message;
};

struct SweepResult {
    std::vector<RunResult> rows; // sorted by n_per_rank
    std::vector<SweepIssue> skipped;  // invalid combinations (E < ranks, ...)
    std::vector<SweepIssue> failures; // runs that started and threw
};

/// Runs every valid (p, k, ranks) combination sequentially; a failing run does not stop the sweep.
inline SweepResult sweep(const RunConfig& base, const std::vector<int>& p_list, const std::vector<int>& k_list,
                         const std::vector<std::size_t>& ranks_list = {1}) {
    SweepResult out;
    for (int p : p_list)
        for (int k : k_list)
            for (std::size_t r : ranks_list) {
                RunConfig c = base;
                c.p = p;
                c.k = k;
                c.ranks = r;
                try {
                    validate(c);
                } catch (const ConfigError& e) {
                    out.skipped.push_back({p, k, r, e.what()});
                    continue;
                }
                try {
                    out.rows.push_back(run(c));
                } catch (const std::exception& e) {
                    out.failures.push_back({p, k, r, e.what()});
                }
            }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const RunResult& a, const RunResult& b) { return a.n_per_rank < b.n_per_rank; });
    return out;
}

} // namespace hobake
