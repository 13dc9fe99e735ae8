#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hobake/basis.hpp"
#include "hobake/errors.hpp"
#include "hobake/mesh.hpp"
#include "hobake/parallel.hpp"
#include "hobake/tensor.hpp"

namespace hobake {

enum class Strategy { SumFactorized, InterpFirst, EvenOdd, BlockedElements };

inline const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::SumFactorized: return "sumfact";
    case Strategy::InterpFirst: return "interpfirst";
    case Strategy::EvenOdd: return "evenodd";
    case Strategy::BlockedElements: return "blocked";
    }
    return "?";
}

inline Strategy parse_strategy(const std::string& name) {
    if (name == "sumfact")
        return Strategy::SumFactorized;
    if (name == "interpfirst")
        return Strategy::InterpFirst;
    if (name == "evenodd")
        return Strategy::EvenOdd;
    if (name == "blocked")
        return Strategy::BlockedElements;
    throw ConfigError("unknown strategy '" + name + "' (expected sumfact, interpfirst, evenodd or blocked)");
}

inline constexpr std::array<Strategy, 4> all_strategies{Strategy::SumFactorized, Strategy::InterpFirst,
                                                        Strategy::EvenOdd, Strategy::BlockedElements};

namespace detail {

template <class Contract>
struct OperatorScratch {
    Contract contract;
    std::vector<double> buffer;
    FlopByteCounters counts;

    double* reserve(std::size_t words) {
        if (buffer.size() < words)
            buffer.assign(words, 0.0);
        return buffer.data();
    }
};

/// Carves consecutive sub-buffers out of one allocation.
class Carver {
public:
    explicit Carver(double* base) : next_(base) {}
    double* take(std::size_t n) {
        double* p = next_;
        next_ += n;
        return p;
    }

private:
    double* next_;
};

/// Shared element-block driver: body(scratch, first_element, active_lanes).
template <class Contract, class Body>
void for_each_block(std::size_t elements, std::size_t scratch_words, WorkerPool* pool, FlopByteCounters* counts,
                    Body&& body) {
    constexpr std::size_t L = Contract::lanes;
    const std::size_t blocks = (elements + L - 1) / L;
    std::vector<OperatorScratch<Contract>> scratch(pool ? pool->size() : 1);
    const std::size_t chunk = std::max<std::size_t>(1, 16 / L);
    parallel_chunks(pool, blocks, chunk, [&](std::size_t b0, std::size_t b1, std::size_t worker) {
        auto& s = scratch[worker];
        s.reserve(scratch_words);
        for (std::size_t blk = b0; blk < b1; ++blk) {
            const std::size_t e0 = blk * L;
            body(s, e0, std::min(L, elements - e0), counts ? &s.counts : nullptr);
        }
    });
    if (counts)
        for (const auto& s : scratch)
            *counts += s.counts;
}

/// Copies `active` elements of each component into lane-interleaved form.
template <std::size_t L>
void gather_lanes(const double* u, std::size_t np, std::size_t e0, std::size_t active, double* out) {
    for (std::size_t n = 0; n < np; ++n)
        for (std::size_t l = 0; l < L; ++l)
            out[n * L + l] = l < active ? u[(e0 + l) * np + n] : 0.0;
}

template <std::size_t L>
void scatter_lanes(const double* in, std::size_t np, std::size_t e0, std::size_t active, double* w) {
    for (std::size_t n = 0; n < np; ++n)
        for (std::size_t l = 0; l < active; ++l)
            w[(e0 + l) * np + n] = in[n * L + l];
}

} // namespace detail

/// Matrix-free local stiffness operator w^e = D^T G^e D u^e, per element (unassembled).
///
/// Accepts one or three components; the vector form loads each G entry once per
/// point for all components and is bitwise equal to three scalar applies.
class StiffnessOperator {
public:
    StiffnessOperator(Basis1D basis, std::shared_ptr<const GeomFactors> geom,
                      Strategy strategy = Strategy::SumFactorized, std::size_t block = 4)
        : basis_(std::move(basis)), geom_(std::move(geom)), strategy_(strategy), block_(block) {
        if (!geom_ || geom_->q != static_cast<std::size_t>(basis_.q))
            throw ConfigError("geometric factors do not match the basis quadrature");
        if (block_ != 4 && block_ != 8)
            throw ConfigError("element block size must be 4 or 8");
        build_diagonal_factors();
    }

    const Basis1D& basis() const noexcept { return basis_; }
    const GeomFactors& geom() const noexcept { return *geom_; }
    Strategy strategy() const noexcept { return strategy_; }
    std::size_t block() const noexcept { return block_; }
    std::size_t elements() const noexcept { return geom_->E; }
    std::size_t nodes_per_element() const noexcept { return static_cast<std::size_t>(basis_.p1) * basis_.p1 * basis_.p1; }
    /// Per-component local length E (p+1)^3.
    std::size_t local_size() const noexcept { return elements() * nodes_per_element(); }

    void apply(std::span<const double> u, std::span<double> w, WorkerPool* pool = nullptr,
               FlopByteCounters* counts = nullptr) const {
        const std::size_t comps = check_components(u, w);
        if (comps == 1)
            dispatch<1>(u.data(), w.data(), pool, counts);
        else
            dispatch<3>(u.data(), w.data(), pool, counts);
    }

    /// Diagonal of each A^e in local form (not assembled).
    std::vector<double> element_diagonal() const {
        const std::size_t p1 = basis_.p1, q = basis_.q, np = nodes_per_element();
        std::vector<double> diag(local_size(), 0.0);
        std::vector<double> t1(q * q * p1), t0(q * p1 * p1), d(np);
        const DenseContraction<1> contract;
        for (std::size_t e = 0; e < elements(); ++e) {
            double* out = diag.data() + e * np;
            for (int m = 0; m < 3; ++m)
                for (int n = m; n < 3; ++n) {
                    const double coef = m == n ? 1.0 : 2.0;
                    const double* g = geom_->G(e, g_entry(m, n));
                    auto pick = [&](int axis) -> const Operator1D& {
                        return hadamard_[(axis == m) + (axis == n)];
                    };
                    contract(pick(2), 2, {q, q, q}, g, t1.data(), false);
                    contract(pick(1), 1, {q, q, p1}, t1.data(), t0.data(), false);
                    contract(pick(0), 0, {q, p1, p1}, t0.data(), d.data(), false);
                    for (std::size_t i = 0; i < np; ++i)
                        out[i] += coef * d[i];
                }
        }
        return diag;
    }

    static GEntry g_entry(int m, int n) {
        if (m > n)
            std::swap(m, n);
        static constexpr GEntry table[3][3] = {{G11, G12, G13}, {G12, G22, G23}, {G13, G23, G33}};
        return table[m][n];
    }

private:
    std::size_t check_components(std::span<const double> u, std::span<double> w) const {
        const std::size_t n = local_size();
        if (u.size() != w.size() || u.size() % n != 0 || (u.size() / n != 1 && u.size() / n != 3))
            throw DimensionError("stiffness apply expects 1 or 3 components of length " + std::to_string(n) +
                                 ", got " + std::to_string(u.size()) + " -> " + std::to_string(w.size()));
        return u.size() / n;
    }

    void build_diagonal_factors() {
        const DenseMatrix& J = basis_.interp.dense;
        const DenseMatrix& D = basis_.deriv.dense;
        std::array<DenseMatrix, 3> h{DenseMatrix(J.rows(), J.cols()), DenseMatrix(J.rows(), J.cols()),
                                     DenseMatrix(J.rows(), J.cols())};
        for (std::size_t r = 0; r < J.rows(); ++r)
            for (std::size_t c = 0; c < J.cols(); ++c) {
                h[0](r, c) = J(r, c) * J(r, c);
                h[1](r, c) = J(r, c) * D(r, c);
                h[2](r, c) = D(r, c) * D(r, c);
            }
        for (int i = 0; i < 3; ++i)
            hadamard_[i] = Operator1D::dense_only(h[i].transposed());
    }

    template <std::size_t NC>
    void dispatch(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        switch (strategy_) {
        case Strategy::SumFactorized:
            return run_sumfact<NC, DenseContraction<1>>(u, w, pool, counts);
        case Strategy::EvenOdd:
            return run_sumfact<NC, EvenOddContraction>(u, w, pool, counts);
        case Strategy::BlockedElements:
            if (block_ == 8)
                return run_sumfact<NC, DenseContraction<8>>(u, w, pool, counts);
            return run_sumfact<NC, DenseContraction<4>>(u, w, pool, counts);
        case Strategy::InterpFirst:
            return run_interp_first<NC>(u, w, pool, counts);
        }
    }

    /// wr, ws, wt <- G (ur, us, ut) at every point of every active lane.
    template <std::size_t NC, std::size_t L>
    void apply_metric(std::size_t e0, std::size_t active, double* const* ur, double* const* us, double* const* ut,
                      FlopByteCounters* counts) const {
        const std::size_t nq = geom_->points();
        for (std::size_t l = 0; l < active; ++l) {
            const GeomFactors& g = *geom_;
            const std::size_t e = e0 + l;
            const double* g11 = g.G(e, G11);
            const double* g12 = g.G(e, G12);
            const double* g13 = g.G(e, G13);
            const double* g22 = g.G(e, G22);
            const double* g23 = g.G(e, G23);
            const double* g33 = g.G(e, G33);
            for (std::size_t pt = 0; pt < nq; ++pt) {
                const double a = g11[pt], b = g12[pt], c = g13[pt], d = g22[pt], f = g23[pt], h = g33[pt];
                const std::size_t i = pt * L + l;
                for (std::size_t comp = 0; comp < NC; ++comp) {
                    const double r = ur[comp][i], s = us[comp][i], t = ut[comp][i];
                    ur[comp][i] = a * r + b * s + c * t;
                    us[comp][i] = b * r + d * s + f * t;
                    ut[comp][i] = c * r + f * s + h * t;
                }
            }
        }
        if (counts) {
            counts->mul += 3 * NC * nq * active;
            counts->fma += 6 * NC * nq * active;
            counts->g_reads += 6 * nq * active;
        }
    }

    template <std::size_t NC, class Contract>
    void run_sumfact(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        constexpr std::size_t L = Contract::lanes;
        const std::size_t p1 = basis_.p1, q = basis_.q, np = nodes_per_element(), nq = q * q * q, N = local_size();
        const std::size_t words = L * (2 * NC * np + 3 * NC * nq + 2 * q * p1 * p1 + 3 * q * q * p1);
        detail::for_each_block<Contract>(
            elements(), words, pool, counts,
            [&](detail::OperatorScratch<Contract>& s, std::size_t e0, std::size_t active, FlopByteCounters* cnt) {
                detail::Carver carve(s.buffer.data());
                std::array<const double*, NC> uin;
                std::array<double*, NC> wout, ur, us, ut;
                for (std::size_t c = 0; c < NC; ++c) {
                    double* ub = carve.take(L * np);
                    double* wb = carve.take(L * np);
                    if constexpr (L == 1) {
                        uin[c] = u + c * N + e0 * np;
                        wout[c] = w + c * N + e0 * np;
                    } else {
                        detail::gather_lanes<L>(u + c * N, np, e0, active, ub);
                        uin[c] = ub;
                        wout[c] = wb;
                    }
                    ur[c] = carve.take(L * nq);
                    us[c] = carve.take(L * nq);
                    ut[c] = carve.take(L * nq);
                }
                double* t0 = carve.take(L * q * p1 * p1);
                double* t1 = carve.take(L * q * p1 * p1);
                double* t2 = carve.take(L * q * q * p1);
                double* t3 = carve.take(L * q * q * p1);
                double* t4 = carve.take(L * q * q * p1);
                for (std::size_t c = 0; c < NC; ++c)
                    reference_gradient(s.contract, basis_, uin[c], ur[c], us[c], ut[c], t0, t1, t2, t3, t4, cnt,
                                       active);
                apply_metric<NC, L>(e0, active, ur.data(), us.data(), ut.data(), cnt);
                for (std::size_t c = 0; c < NC; ++c) {
                    reference_gradient_transpose(s.contract, basis_, ur[c], us[c], ut[c], wout[c], t0, t1, t2, t3,
                                                 t4, cnt, active);
                    if constexpr (L > 1)
                        detail::scatter_lanes<L>(wout[c], np, e0, active, w + c * N);
                }
                if (cnt) {
                    cnt->field_reads += NC * np * active;
                    cnt->field_writes += NC * np * active;
                }
            });
    }

    template <std::size_t NC>
    void run_interp_first(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        using Contract = DenseContraction<1>;
        const std::size_t p1 = basis_.p1, q = basis_.q, np = nodes_per_element(), nq = q * q * q, N = local_size();
        const std::size_t words = 3 * NC * nq + nq + q * p1 * p1 + q * q * p1;
        const Dims3 cube{q, q, q};
        detail::for_each_block<Contract>(
            elements(), words, pool, counts,
            [&](detail::OperatorScratch<Contract>& s, std::size_t e, std::size_t, FlopByteCounters* cnt) {
                detail::Carver carve(s.buffer.data());
                std::array<double*, NC> ur, us, ut;
                for (std::size_t c = 0; c < NC; ++c) {
                    ur[c] = carve.take(nq);
                    us[c] = carve.take(nq);
                    ut[c] = carve.take(nq);
                }
                double* uq = carve.take(nq);
                double* t0 = carve.take(q * p1 * p1);
                double* t1 = carve.take(q * q * p1);
                for (std::size_t c = 0; c < NC; ++c) {
                    interpolate_to_quadrature(s.contract, basis_, u + c * N + e * np, uq, t0, t1, cnt);
                    s.contract(basis_.quad_deriv, 0, cube, uq, ur[c], false, cnt);
                    s.contract(basis_.quad_deriv, 1, cube, uq, us[c], false, cnt);
                    s.contract(basis_.quad_deriv, 2, cube, uq, ut[c], false, cnt);
                }
                apply_metric<NC, 1>(e, 1, ur.data(), us.data(), ut.data(), cnt);
                for (std::size_t c = 0; c < NC; ++c) {
                    s.contract(basis_.quad_deriv_t, 0, cube, ur[c], uq, false, cnt);
                    s.contract(basis_.quad_deriv_t, 1, cube, us[c], uq, true, cnt);
                    s.contract(basis_.quad_deriv_t, 2, cube, ut[c], uq, true, cnt);
                    interpolate_transpose(s.contract, basis_, uq, w + c * N + e * np, t0, t1, cnt);
                }
                if (cnt) {
                    cnt->field_reads += NC * np;
                    cnt->field_writes += NC * np;
                }
            });
    }

    Basis1D basis_;
    std::shared_ptr<const GeomFactors> geom_;
    Strategy strategy_;
    std::size_t block_;
    std::array<Operator1D, 3> hadamard_; // (J o J)^T, (J o D)^T, (D o D)^T
};

/// Matrix-free local mass operator w^e = J^T diag(beta rho J^e) J u^e.
class MassOperator {
public:
    MassOperator(Basis1D basis, std::shared_ptr<const GeomFactors> geom, Strategy strategy = Strategy::SumFactorized,
                 double beta = 1.0, std::size_t block = 4)
        : basis_(std::move(basis)), geom_(std::move(geom)), strategy_(strategy), beta_(beta), block_(block) {
        if (!geom_ || geom_->q != static_cast<std::size_t>(basis_.q))
            throw ConfigError("geometric factors do not match the basis quadrature");
        if (block_ != 4 && block_ != 8)
            throw ConfigError("element block size must be 4 or 8");
        DenseMatrix jj(basis_.interp.rows(), basis_.interp.cols());
        for (std::size_t r = 0; r < jj.rows(); ++r)
            for (std::size_t c = 0; c < jj.cols(); ++c)
                jj(r, c) = basis_.interp.dense(r, c) * basis_.interp.dense(r, c);
        interp_sq_t_ = Operator1D::dense_only(jj.transposed());
    }

    const Basis1D& basis() const noexcept { return basis_; }
    const GeomFactors& geom() const noexcept { return *geom_; }
    Strategy strategy() const noexcept { return strategy_; }
    double beta() const noexcept { return beta_; }
    bool collocated() const noexcept { return basis_.collocated(); }
    std::size_t elements() const noexcept { return geom_->E; }
    std::size_t nodes_per_element() const noexcept { return static_cast<std::size_t>(basis_.p1) * basis_.p1 * basis_.p1; }
    std::size_t local_size() const noexcept { return elements() * nodes_per_element(); }

    void apply(std::span<const double> u, std::span<double> w, WorkerPool* pool = nullptr,
               FlopByteCounters* counts = nullptr) const {
        const std::size_t n = local_size();
        if (u.size() != w.size() || u.size() % n != 0 || (u.size() / n != 1 && u.size() / n != 3))
            throw DimensionError("mass apply expects 1 or 3 components of length " + std::to_string(n));
        const std::size_t comps = u.size() / n;
        if (collocated())
            return comps == 1 ? run_diagonal<1>(u.data(), w.data(), pool, counts)
                              : run_diagonal<3>(u.data(), w.data(), pool, counts);
        if (comps == 1)
            dispatch<1>(u.data(), w.data(), pool, counts);
        else
            dispatch<3>(u.data(), w.data(), pool, counts);
    }

    std::vector<double> element_diagonal() const {
        const std::size_t p1 = basis_.p1, q = basis_.q, np = nodes_per_element(), nq = q * q * q;
        std::vector<double> diag(local_size());
        if (collocated()) {
            for (std::size_t e = 0; e < elements(); ++e)
                for (std::size_t i = 0; i < np; ++i)
                    diag[e * np + i] = scaled(geom_->mass_diag(e)[i]);
            return diag;
        }
        std::vector<double> b(nq), t1(q * q * p1), t0(q * p1 * p1);
        const DenseContraction<1> contract;
        for (std::size_t e = 0; e < elements(); ++e) {
            for (std::size_t i = 0; i < nq; ++i)
                b[i] = scaled(geom_->mass_diag(e)[i]);
            contract(interp_sq_t_, 2, {q, q, q}, b.data(), t1.data(), false);
            contract(interp_sq_t_, 1, {q, q, p1}, t1.data(), t0.data(), false);
            contract(interp_sq_t_, 0, {q, p1, p1}, t0.data(), diag.data() + e * np, false);
        }
        return diag;
    }

private:
    double scaled(double m) const noexcept { return beta_ == 1.0 ? m : beta_ * m; }

    template <std::size_t NC>
    void dispatch(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        switch (strategy_) {
        case Strategy::SumFactorized:
        case Strategy::InterpFirst:
            return run<NC, DenseContraction<1>>(u, w, pool, counts);
        case Strategy::EvenOdd:
            return run<NC, EvenOddContraction>(u, w, pool, counts);
        case Strategy::BlockedElements:
            if (block_ == 8)
                return run<NC, DenseContraction<8>>(u, w, pool, counts);
            return run<NC, DenseContraction<4>>(u, w, pool, counts);
        }
    }

    template <std::size_t NC>
    void run_diagonal(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        const std::size_t np = nodes_per_element(), N = local_size();
        detail::for_each_block<DenseContraction<1>>(
            elements(), 0, pool, counts,
            [&](detail::OperatorScratch<DenseContraction<1>>&, std::size_t e, std::size_t, FlopByteCounters* cnt) {
                const double* md = geom_->mass_diag(e);
                for (std::size_t i = 0; i < np; ++i) {
                    const double m = scaled(md[i]);
                    for (std::size_t c = 0; c < NC; ++c)
                        w[c * N + e * np + i] = m * u[c * N + e * np + i];
                }
                if (cnt) {
                    cnt->mul += NC * np;
                    cnt->g_reads += np;
                    cnt->field_reads += NC * np;
                    cnt->field_writes += NC * np;
                }
            });
    }

    template <std::size_t NC, class Contract>
    void run(const double* u, double* w, WorkerPool* pool, FlopByteCounters* counts) const {
        constexpr std::size_t L = Contract::lanes;
        const std::size_t p1 = basis_.p1, q = basis_.q, np = nodes_per_element(), nq = q * q * q, N = local_size();
        const std::size_t words = L * (2 * NC * np + NC * nq + q * p1 * p1 + q * q * p1);
        detail::for_each_block<Contract>(
            elements(), words, pool, counts,
            [&](detail::OperatorScratch<Contract>& s, std::size_t e0, std::size_t active, FlopByteCounters* cnt) {
                detail::Carver carve(s.buffer.data());
                std::array<const double*, NC> uin;
                std::array<double*, NC> wout, uq;
                for (std::size_t c = 0; c < NC; ++c) {
                    double* ub = carve.take(L * np);
                    double* wb = carve.take(L * np);
                    if constexpr (L == 1) {
                        uin[c] = u + c * N + e0 * np;
                        wout[c] = w + c * N + e0 * np;
                    } else {
                        detail::gather_lanes<L>(u + c * N, np, e0, active, ub);
                        uin[c] = ub;
                        wout[c] = wb;
                    }
                    uq[c] = carve.take(L * nq);
                }
                double* t0 = carve.take(L * q * p1 * p1);
                double* t1 = carve.take(L * q * q * p1);
                for (std::size_t c = 0; c < NC; ++c)
                    interpolate_to_quadrature(s.contract, basis_, uin[c], uq[c], t0, t1, cnt, active);
                for (std::size_t l = 0; l < active; ++l) {
                    const double* md = geom_->mass_diag(e0 + l);
                    for (std::size_t pt = 0; pt < nq; ++pt) {
                        const double m = scaled(md[pt]);
                        for (std::size_t c = 0; c < NC; ++c)
                            uq[c][pt * L + l] *= m;
                    }
                }
                for (std::size_t c = 0; c < NC; ++c) {
                    interpolate_transpose(s.contract, basis_, uq[c], wout[c], t0, t1, cnt, active);
                    if constexpr (L > 1)
                        detail::scatter_lanes<L>(wout[c], np, e0, active, w + c * N);
                }
                if (cnt) {
                    cnt->mul += NC * nq * active;
                    cnt->g_reads += nq * active;
                    cnt->field_reads += NC * np * active;
                    cnt->field_writes += NC * np * active;
                }
            });
    }

    Basis1D basis_;
    std::shared_ptr<const GeomFactors> geom_;
    Strategy strategy_;
    double beta_;
    std::size_t block_;
    Operator1D interp_sq_t_;
};

inline void apply_stiffness_local(const StiffnessOperator& op, std::span<const double> u, std::span<double> w,
                                  WorkerPool* pool = nullptr, FlopByteCounters* counts = nullptr) {
    op.apply(u, w, pool, counts);
}

inline void apply_mass_local(const MassOperator& op, std::span<const double> u, std::span<double> w,
                             WorkerPool* pool = nullptr, FlopByteCounters* counts = nullptr) {
    op.apply(u, w, pool, counts);
}

/// Three-component apply; components are stored one after another.
template <class Op>
void apply_vector_operator(const Op& op, std::span<const double> u, std::span<double> w, WorkerPool* pool = nullptr,
                           FlopByteCounters* counts = nullptr) {
    if (u.size() != 3 * op.local_size() || w.size() != u.size())
        throw DimensionError("vector operator expects exactly 3 components");
    op.apply(u, w, pool, counts);
}

// ---------------------------------------------------------------------------
// Work and traffic models, per element.

/// Dense stiffness apply, sum factorized with the shared J-interpolant:
/// 4 p1^4 (3 g^3 + 3 g^2 + 2 g) + 15 g^3 p1^3, g = q / p1.
inline double work_sum_factorized(int p1, int q) {
    const double g = static_cast<double>(q) / p1, P = p1;
    return 4.0 * P * P * P * P * (3 * g * g * g + 3 * g * g + 2 * g) + 15.0 * g * g * g * P * P * P;
}

/// Interpolate to quadrature points first, then differentiate there:
/// 4 p1^4 (3 g^4 + g^3 + g^2 + g) + 15 g^3 p1^3.
inline double work_interp_first(int p1, int q) {
    const double g = static_cast<double>(q) / p1, P = p1;
    return 4.0 * P * P * P * P * (3 * g * g * g * g + g * g * g + g * g + g) + 15.0 * g * g * g * P * P * P;
}

/// One 1D-directional gradient contraction chain: 2 (q p1^3 + q^2 p1^2 + q^3 p1).
inline double work_gradient_component(int p1, int q) {
    const double P = p1, Q = q;
    return 2.0 * (Q * P * P * P + Q * Q * P * P + Q * Q * Q * P);
}

namespace detail {

/// Per-fiber (fma, add) of an even-odd apply of an R x C operator.
inline std::array<std::size_t, 2> even_odd_fiber_cost(std::size_t R, std::size_t C, int sign, bool accumulate) {
    const std::size_t hr = R / 2, hc = C / 2, cr = R - hr, cc = C - hc;
    const std::size_t fma = sign > 0 ? cr * cc + hr * hc : hr * cc + cr * hc;
    return {fma, 2 * hc + 2 * hr + (accumulate ? R : 0)};
}

} // namespace detail

/// Exact operation count of the even-odd stiffness kernel (same structure as sum factorized).
inline double work_even_odd(int p1_, int q_) {
    const std::size_t p1 = p1_, q = q_;
    std::size_t fma = 0, add = 0;
    auto stage = [&](std::size_t R, std::size_t C, int sign, bool acc, std::size_t fibers) {
        const auto [f, a] = detail::even_odd_fiber_cost(R, C, sign, acc);
        fma += f * fibers;
        add += a * fibers;
    };
    // forward: D, J along i; J, D, J along j; J, J, D along k
    stage(q, p1, -1, false, p1 * p1);
    stage(q, p1, +1, false, p1 * p1);
    stage(q, p1, +1, false, q * p1);
    stage(q, p1, -1, false, q * p1);
    stage(q, p1, +1, false, q * p1);
    stage(q, p1, +1, false, q * q);
    stage(q, p1, +1, false, q * q);
    stage(q, p1, -1, false, q * q);
    // transpose
    stage(p1, q, +1, false, q * q);
    stage(p1, q, +1, false, q * q);
    stage(p1, q, -1, false, q * q);
    stage(p1, q, +1, false, q * p1);
    stage(p1, q, -1, false, q * p1);
    stage(p1, q, +1, true, q * p1);
    stage(p1, q, -1, false, p1 * p1);
    stage(p1, q, +1, true, p1 * p1);
    const double nq = static_cast<double>(q * q * q);
    return 2.0 * fma + add + 15.0 * nq;
}

/// Flop model W per element for a stiffness strategy.
inline double flop_model(Strategy s, int p, int q) {
    switch (s) {
    case Strategy::SumFactorized:
    case Strategy::BlockedElements:
        return work_sum_factorized(p + 1, q);
    case Strategy::InterpFirst:
        return work_interp_first(p + 1, q);
    case Strategy::EvenOdd:
        return work_even_odd(p + 1, q);
    }
    throw ConfigError("unknown strategy");
}

/// Mass apply: 4 p1^4 (g^3 + g^2 + g) + q^3, or p1^3 when collocated.
inline double mass_flop_model(int p, int q, bool collocated) {
    const double P = p + 1;
    if (collocated)
        return P * P * P;
    const double g = q / P;
    return 4.0 * P * P * P * P * (g * g * g + g * g + g) + static_cast<double>(q) * q * q;
}

struct TrafficModel {
    std::size_t reads = 0;
    std::size_t writes = 0;
    std::size_t total() const noexcept { return reads + writes; }
};

enum class OperatorKind { Mass, Stiffness };

/// Words per element; J_hat and D_hat are amortized over elements and not counted.
inline TrafficModel bytes_model(OperatorKind kind, int p, int q, std::size_t components = 1) {
    const std::size_t p1 = p + 1, n = p1 * p1 * p1, nq = static_cast<std::size_t>(q) * q * q;
    if (kind == OperatorKind::Stiffness)
        return {6 * nq + components * n, components * n};
    return {nq + components * n, components * n};
}

} // namespace hobake
