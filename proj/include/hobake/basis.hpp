#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hobake/errors.hpp"
#include "hobake/quadrature.hpp"

namespace hobake {

/// Dense row-major matrix for the small 1D operators.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    const double* data() const noexcept { return data_.data(); }
    double* data() noexcept { return data_.data(); }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                t(c, r) = (*this)(r, c);
        return t;
    }

    std::vector<double> multiply(std::span<const double> x) const {
        if (x.size() != cols_)
            throw DimensionError("matrix-vector size mismatch");
        std::vector<double> y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                y[r] += (*this)(r, c) * x[c];
        return y;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

namespace detail {

inline std::vector<double> barycentric_weights(std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            const double diff = nodes[i] - nodes[j];
            if (diff == 0.0)
                throw BasisError("duplicate interpolation node at index " + std::to_string(j));
            w[i] /= diff;
        }
    }
    return w;
}

inline void check_targets(std::span<const double> targets) {
    for (double t : targets)
        if (!(t >= -1.0 && t <= 1.0))
            throw BasisError("interpolation target outside [-1, 1]");
}

inline std::ptrdiff_t coincident_node(std::span<const double> nodes, double t) {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i] == t)
            return static_cast<std::ptrdiff_t>(i);
    return -1;
}

} // namespace detail

/// Entry (j, i) = h_i(targets[j]) for the Lagrange cardinal functions on `nodes`.
inline DenseMatrix lagrange_interp_matrix(std::span<const double> nodes, std::span<const double> targets) {
    const auto w = detail::barycentric_weights(nodes);
    detail::check_targets(targets);
    const std::size_t n = nodes.size();
    DenseMatrix m(targets.size(), n);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const double t = targets[j];
        if (const auto hit = detail::coincident_node(nodes, t); hit >= 0) {
            m(j, static_cast<std::size_t>(hit)) = 1.0;
            continue;
        }
        double denom = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            denom += w[i] / (t - nodes[i]);
        for (std::size_t i = 0; i < n; ++i)
            m(j, i) = (w[i] / (t - nodes[i])) / denom;
    }
    return m;
}

/// Entry (j, i) = h_i'(targets[j]).
inline DenseMatrix lagrange_deriv_matrix(std::span<const double> nodes, std::span<const double> targets) {
    const auto w = detail::barycentric_weights(nodes);
    detail::check_targets(targets);
    const std::size_t n = nodes.size();
    DenseMatrix m(targets.size(), n);
    const DenseMatrix h = lagrange_interp_matrix(nodes, targets);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const double t = targets[j];
        if (const auto hit = detail::coincident_node(nodes, t); hit >= 0) {
            const auto mi = static_cast<std::size_t>(hit);
            double diag = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (i == mi)
                    continue;
                m(j, i) = (w[i] / w[mi]) / (t - nodes[i]);
                diag -= m(j, i);
            }
            m(j, mi) = diag;
            continue;
        }
        // h_i'(t) = h_i(t) * sum_{k != i} 1 / (t - x_k)
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                if (k != i)
                    s += 1.0 / (t - nodes[k]);
            m(j, i) = h(j, i) * s;
        }
    }
    return m;
}

/// Counts accumulated by the even-odd and dense 1D kernels.
struct KernelCounts {
    std::size_t fma = 0;
    std::size_t add = 0;
};

/// Even-odd factorization of a q x p1 matrix with M(r, c) = sign * M(q-1-r, p1-1-c).
///
/// Row r < q/2 of the output is v+_r + v-_r and its mirror row is sign * (v+_r - v-_r).
/// For sign = +1 a centre row (q odd) belongs to the even part; for sign = -1 it is
/// odd, and the centre column (p1 odd) stays with the even part in both cases.
/// Hence S_plus is ceil(q/2) x ceil(p1/2) for interpolation-type operators and
/// floor(q/2) x ceil(p1/2) for derivative-type ones (and S_minus complementary).
struct EvenOddFactor {
    std::size_t rows = 0; // q
    std::size_t cols = 0; // p1
    int sign = 1;
    DenseMatrix s_plus;
    DenseMatrix s_minus;

    std::size_t stored_entries() const noexcept { return s_plus.size() + s_minus.size(); }
    std::size_t fma_per_apply() const noexcept { return stored_entries(); }
    /// Butterfly additions/subtractions on input and output.
    std::size_t add_per_apply() const noexcept { return 2 * (cols / 2) + 2 * (rows / 2); }
};

/// Distinct entries of a centre-symmetric q x p1 matrix.
inline constexpr std::size_t symmetric_distinct_entries(std::size_t q, std::size_t p1) {
    return ((q + 1) / 2) * ((p1 + 1) / 2) + (q / 2) * (p1 / 2);
}

inline EvenOddFactor even_odd_split(const DenseMatrix& m, int sign, double tolerance = 1e-12) {
    if (sign != 1 && sign != -1)
        throw NotFactorizableError("even-odd sign must be +1 or -1");
    const std::size_t R = m.rows(), C = m.cols();
    const double scale = std::max(1.0, m.max_abs());
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t c = 0; c < C; ++c)
            if (std::abs(m(r, c) - sign * m(R - 1 - r, C - 1 - c)) > tolerance * scale)
                throw NotFactorizableError("matrix violates centre symmetry at (" + std::to_string(r) + ", " +
                                           std::to_string(c) + ")");

    const std::size_t half_r = R / 2, half_c = C / 2;
    const bool mid_r = R % 2, mid_c = C % 2;
    const std::size_t plus_rows = sign > 0 ? half_r + mid_r : half_r;
    const std::size_t minus_rows = sign > 0 ? half_r : half_r + mid_r;

    EvenOddFactor f{R, C, sign, DenseMatrix(plus_rows, half_c + mid_c), DenseMatrix(minus_rows, half_c)};
    for (std::size_t r = 0; r < plus_rows; ++r) {
        for (std::size_t c = 0; c < half_c; ++c)
            f.s_plus(r, c) = 0.5 * (m(r, c) + m(r, C - 1 - c));
        if (mid_c)
            f.s_plus(r, half_c) = m(r, half_c);
    }
    for (std::size_t r = 0; r < minus_rows; ++r)
        for (std::size_t c = 0; c < half_c; ++c)
            f.s_minus(r, c) = 0.5 * (m(r, c) - m(r, C - 1 - c));
    return f;
}

/// v = M u through the even-odd factors.
inline std::vector<double> even_odd_apply(const EvenOddFactor& f, std::span<const double> u,
                                          KernelCounts* counts = nullptr) {
    if (u.size() != f.cols)
        throw DimensionError("even-odd apply: input length " + std::to_string(u.size()) + " != " +
                             std::to_string(f.cols));
    const std::size_t C = f.cols, R = f.rows, half_c = C / 2, half_r = R / 2;
    std::vector<double> up(f.s_plus.cols()), um(f.s_minus.cols());
    for (std::size_t c = 0; c < half_c; ++c) {
        up[c] = u[c] + u[C - 1 - c];
        um[c] = u[c] - u[C - 1 - c];
    }
    if (C % 2)
        up[half_c] = u[half_c];
    std::vector<double> vp(f.s_plus.rows(), 0.0), vm(f.s_minus.rows(), 0.0);
    for (std::size_t r = 0; r < vp.size(); ++r)
        for (std::size_t c = 0; c < up.size(); ++c)
            vp[r] += f.s_plus(r, c) * up[c];
    for (std::size_t r = 0; r < vm.size(); ++r)
        for (std::size_t c = 0; c < um.size(); ++c)
            vm[r] += f.s_minus(r, c) * um[c];

    std::vector<double> v(R);
    for (std::size_t r = 0; r < half_r; ++r) {
        v[r] = vp[r] + vm[r];
        v[R - 1 - r] = f.sign > 0 ? vp[r] - vm[r] : vm[r] - vp[r];
    }
    if (R % 2)
        v[half_r] = f.sign > 0 ? vp[half_r] : vm[half_r];
    if (counts) {
        counts->fma += f.fma_per_apply();
        counts->add += f.add_per_apply();
    }
    return v;
}

/// Dense matrix recovered from its factors (column-by-column apply).
inline DenseMatrix reconstruct(const EvenOddFactor& f) {
    DenseMatrix m(f.rows, f.cols);
    std::vector<double> e(f.cols, 0.0);
    for (std::size_t c = 0; c < f.cols; ++c) {
        e[c] = 1.0;
        const auto col = even_odd_apply(f, e);
        for (std::size_t r = 0; r < f.rows; ++r)
            m(r, c) = col[r];
        e[c] = 0.0;
    }
    return m;
}

/// A 1D operator in both dense and even-odd form.
struct Operator1D {
    DenseMatrix dense;
    EvenOddFactor even_odd;

    Operator1D() = default;
    Operator1D(DenseMatrix m, int sign) : dense(std::move(m)), even_odd(even_odd_split(dense, sign)) {}

    /// Dense form only; usable with DenseContraction.
    static Operator1D dense_only(DenseMatrix m) {
        Operator1D op;
        op.dense = std::move(m);
        return op;
    }

    std::size_t rows() const noexcept { return dense.rows(); }
    std::size_t cols() const noexcept { return dense.cols(); }
};

/// Nodal GLL basis of order p with its operators onto a quadrature rule.
struct Basis1D {
    int p = 0;
    int p1 = 0;
    int q = 0;
    std::vector<double> nodes;
    QuadRule1D quad;
    Operator1D interp;        // J_hat, q x p1
    Operator1D deriv;         // D_hat, q x p1
    Operator1D interp_t;      // J_hat^T
    Operator1D deriv_t;       // D_hat^T
    Operator1D quad_deriv;    // D_tilde, q x q on the quadrature points
    Operator1D quad_deriv_t;

    bool collocated() const noexcept { return quad.kind == QuadKind::GLL && q == p1; }
};

inline constexpr int max_order = 15;

inline Basis1D make_basis(int p, QuadKind kind, int q) {
    if (p < 1 || p > max_order)
        throw ConfigError("polynomial order " + std::to_string(p) + " outside [1, " + std::to_string(max_order) +
                          "]");
    Basis1D b;
    b.p = p;
    b.p1 = p + 1;
    b.q = q;
    b.nodes = gauss_lobatto_legendre(p + 1).points;
    b.quad = make_quadrature(kind, q);
    auto J = lagrange_interp_matrix(b.nodes, b.quad.points);
    auto D = lagrange_deriv_matrix(b.nodes, b.quad.points);
    auto Dq = lagrange_deriv_matrix(b.quad.points, b.quad.points);
    b.interp_t = Operator1D(J.transposed(), 1);
    b.deriv_t = Operator1D(D.transposed(), -1);
    b.quad_deriv_t = Operator1D(Dq.transposed(), -1);
    b.interp = Operator1D(std::move(J), 1);
    b.deriv = Operator1D(std::move(D), -1);
    b.quad_deriv = Operator1D(std::move(Dq), -1);
    return b;
}

/// q = p + 2 Gauss-Legendre or q = p + 1 Gauss-Lobatto-Legendre.
inline Basis1D make_basis(int p, QuadKind kind) { return make_basis(p, kind, kind == QuadKind::GL ? p + 2 : p + 1); }

} // namespace hobake
