#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "hobake/basis.hpp"

namespace hobake {

/// Instrumented operation and memory-reference counts.
struct FlopByteCounters {
    std::size_t fma = 0;
    std::size_t add = 0;
    std::size_t mul = 0;
    std::size_t g_reads = 0;      // geometric-factor words loaded
    std::size_t field_reads = 0;  // input field words
    std::size_t field_writes = 0; // output field words

    /// One FMA is two flops.
    std::size_t flops() const noexcept { return 2 * fma + add + mul; }
    std::size_t words() const noexcept { return g_reads + field_reads + field_writes; }

    FlopByteCounters& operator+=(const FlopByteCounters& o) noexcept {
        fma += o.fma;
        add += o.add;
        mul += o.mul;
        g_reads += o.g_reads;
        field_reads += o.field_reads;
        field_writes += o.field_writes;
        return *this;
    }
    bool operator==(const FlopByteCounters&) const = default;
};

/// Extents of a 3D tensor, first index fastest.
using Dims3 = std::array<std::size_t, 3>;

namespace detail {

struct AxisLayout {
    std::size_t outer;
    std::size_t inner; // includes lanes
    std::size_t inner_nodes;
};

inline AxisLayout axis_layout(int axis, const Dims3& dims, std::size_t lanes) {
    std::size_t inner = 1, outer = 1;
    for (int d = 0; d < axis; ++d)
        inner *= dims[d];
    for (int d = axis + 1; d < 3; ++d)
        outer *= dims[d];
    return {outer, inner * lanes, inner};
}

} // namespace detail

/// Dense 1D contraction along one axis, L element lanes interleaved innermost.
///
/// out[.., r, ..] (+)= sum_c M(r, c) in[.., c, ..]; every output is summed in ascending c,
/// so any L gives bitwise the same per-lane result.
template <int L>
struct DenseContraction {
    static constexpr int lanes = L;

    void operator()(const Operator1D& op, int axis, const Dims3& in_dims, const double* in, double* out,
                    bool accumulate, FlopByteCounters* counts = nullptr, std::size_t active_lanes = L) const {
        const DenseMatrix& M = op.dense;
        const std::size_t R = M.rows(), C = M.cols();
        const auto lay = detail::axis_layout(axis, in_dims, L);
        const std::size_t inner = lay.inner;
        for (std::size_t o = 0; o < lay.outer; ++o) {
            const double* x0 = in + o * C * inner;
            for (std::size_t r = 0; r < R; ++r) {
                double* y = out + (o * R + r) * inner;
                const double* mrow = M.data() + r * C;
                if (inner == 1) {
                    double s = accumulate ? y[0] : 0.0;
                    for (std::size_t c = 0; c < C; ++c)
                        s += mrow[c] * x0[c];
                    y[0] = s;
                    continue;
                }
                if (!accumulate)
                    for (std::size_t t = 0; t < inner; ++t)
                        y[t] = 0.0;
                for (std::size_t c = 0; c < C; ++c) {
                    const double m = mrow[c];
                    const double* x = x0 + c * inner;
                    for (std::size_t t = 0; t < inner; ++t)
                        y[t] += m * x[t];
                }
            }
        }
        if (counts)
            counts->fma += R * C * lay.outer * lay.inner_nodes * active_lanes;
    }
};

/// Even-odd 1D contraction along one axis (one lane).
class EvenOddContraction {
public:
    static constexpr int lanes = 1;

    void operator()(const Operator1D& op, int axis, const Dims3& in_dims, const double* in, double* out,
                    bool accumulate, FlopByteCounters* counts = nullptr, std::size_t active_lanes = 1) const {
        const EvenOddFactor& f = op.even_odd;
        const std::size_t R = f.rows, C = f.cols;
        const std::size_t half_c = C / 2, half_r = R / 2;
        const auto lay = detail::axis_layout(axis, in_dims, 1);
        const std::size_t inner = lay.inner;
        const std::size_t np = f.s_plus.cols(), nm = f.s_minus.cols();
        const std::size_t rp = f.s_plus.rows(), rm = f.s_minus.rows();
        scratch_.resize((np + nm + rp + rm) * inner);
        double* up = scratch_.data();
        double* um = up + np * inner;
        double* vp = um + nm * inner;
        double* vm = vp + rp * inner;

        for (std::size_t o = 0; o < lay.outer; ++o) {
            const double* x = in + o * C * inner;
            for (std::size_t c = 0; c < half_c; ++c) {
                const double* a = x + c * inner;
                const double* b = x + (C - 1 - c) * inner;
                for (std::size_t t = 0; t < inner; ++t) {
                    up[c * inner + t] = a[t] + b[t];
                    um[c * inner + t] = a[t] - b[t];
                }
            }
            if (C % 2)
                for (std::size_t t = 0; t < inner; ++t)
                    up[half_c * inner + t] = x[half_c * inner + t];

            small_gemm(f.s_plus, up, vp, inner);
            small_gemm(f.s_minus, um, vm, inner);

            double* y = out + o * R * inner;
            auto put = [&](std::size_t row, std::size_t t, double v) {
                if (accumulate)
                    y[row * inner + t] += v;
                else
                    y[row * inner + t] = v;
            };
            for (std::size_t r = 0; r < half_r; ++r) {
                for (std::size_t t = 0; t < inner; ++t) {
                    const double p = vp[r * inner + t], m = vm[r * inner + t];
                    put(r, t, p + m);
                    put(R - 1 - r, t, f.sign > 0 ? p - m : m - p);
                }
            }
            if (R % 2)
                for (std::size_t t = 0; t < inner; ++t)
                    put(half_r, t, f.sign > 0 ? vp[half_r * inner + t] : vm[half_r * inner + t]);
        }
        if (counts) {
            const std::size_t fibers = lay.outer * lay.inner_nodes * active_lanes;
            counts->fma += f.fma_per_apply() * fibers;
            counts->add += (f.add_per_apply() + (accumulate ? R : 0)) * fibers;
        }
    }

private:
    static void small_gemm(const DenseMatrix& S, const double* x, double* y, std::size_t inner) {
        const std::size_t rows = S.rows(), cols = S.cols();
        for (std::size_t r = 0; r < rows; ++r) {
            double* yr = y + r * inner;
            for (std::size_t t = 0; t < inner; ++t)
                yr[t] = 0.0;
            for (std::size_t c = 0; c < cols; ++c) {
                const double s = S(r, c);
                const double* xc = x + c * inner;
                for (std::size_t t = 0; t < inner; ++t)
                    yr[t] += s * xc[t];
            }
        }
    }

    mutable std::vector<double> scratch_;
};

/// Reference-coordinate gradient of a nodal field at the quadrature points,
/// sharing the (I x I x J) u intermediate between the s and t derivatives.
///
/// Scratch buffers t0, t1 need q*p1*p1*L words; t2, t3, t4 need q*q*p1*L.
template <class Contract>
void reference_gradient(const Contract& contract, const Basis1D& b, const double* u, double* ur, double* us,
                        double* ut, double* t0, double* t1, double* t2, double* t3, double* t4,
                        FlopByteCounters* counts = nullptr, std::size_t active = Contract::lanes) {
    const std::size_t p1 = b.p1, q = b.q;
    contract(b.deriv, 0, {p1, p1, p1}, u, t0, false, counts, active);  // D_i u
    contract(b.interp, 0, {p1, p1, p1}, u, t1, false, counts, active); // J_i u
    contract(b.interp, 1, {q, p1, p1}, t0, t2, false, counts, active);
    contract(b.deriv, 1, {q, p1, p1}, t1, t3, false, counts, active);
    contract(b.interp, 1, {q, p1, p1}, t1, t4, false, counts, active);
    contract(b.interp, 2, {q, q, p1}, t2, ur, false, counts, active);
    contract(b.interp, 2, {q, q, p1}, t3, us, false, counts, active);
    contract(b.deriv, 2, {q, q, p1}, t4, ut, false, counts, active);
}

/// Transpose of reference_gradient: w = D1^T wr + D2^T ws + D3^T wt.
template <class Contract>
void reference_gradient_transpose(const Contract& contract, const Basis1D& b, const double* wr, const double* ws,
                                  const double* wt, double* w, double* t0, double* t1, double* t2, double* t3,
                                  double* t4, FlopByteCounters* counts = nullptr,
                                  std::size_t active = Contract::lanes) {
    const std::size_t p1 = b.p1, q = b.q;
    contract(b.interp_t, 2, {q, q, q}, wr, t2, false, counts, active);
    contract(b.interp_t, 2, {q, q, q}, ws, t3, false, counts, active);
    contract(b.deriv_t, 2, {q, q, q}, wt, t4, false, counts, active);
    contract(b.interp_t, 1, {q, q, p1}, t2, t0, false, counts, active);
    contract(b.deriv_t, 1, {q, q, p1}, t3, t1, false, counts, active);
    contract(b.interp_t, 1, {q, q, p1}, t4, t1, true, counts, active);
    contract(b.deriv_t, 0, {q, p1, p1}, t0, w, false, counts, active);
    contract(b.interp_t, 0, {q, p1, p1}, t1, w, true, counts, active);
}

/// (J x J x J) u: nodes to quadrature points. Scratch t0: q*p1*p1*L, t1: q*q*p1*L.
template <class Contract>
void interpolate_to_quadrature(const Contract& contract, const Basis1D& b, const double* u, double* uq, double* t0,
                               double* t1, FlopByteCounters* counts = nullptr, std::size_t active = Contract::lanes) {
    const std::size_t p1 = b.p1, q = b.q;
    contract(b.interp, 0, {p1, p1, p1}, u, t0, false, counts, active);
    contract(b.interp, 1, {q, p1, p1}, t0, t1, false, counts, active);
    contract(b.interp, 2, {q, q, p1}, t1, uq, false, counts, active);
}

template <class Contract>
void interpolate_transpose(const Contract& contract, const Basis1D& b, const double* wq, double* w, double* t0,
                           double* t1, FlopByteCounters* counts = nullptr, std::size_t active = Contract::lanes) {
    const std::size_t p1 = b.p1, q = b.q;
    contract(b.interp_t, 2, {q, q, q}, wq, t1, false, counts, active);
    contract(b.interp_t, 1, {q, q, p1}, t1, t0, false, counts, active);
    contract(b.interp_t, 0, {q, p1, p1}, t0, w, false, counts, active);
}

} // namespace hobake
