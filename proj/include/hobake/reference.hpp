#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hobake/assembly.hpp"
#include "hobake/errors.hpp"
#include "hobake/operators.hpp"

namespace hobake {

/// Compressed sparse row matrix over global ids.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;

    std::size_t nnz() const noexcept { return vals.size(); }
    std::size_t row_nnz(std::size_t r) const noexcept { return row_ptr[r + 1] - row_ptr[r]; }

    std::vector<double> multiply(std::span<const double> x) const {
        if (x.size() != n)
            throw DimensionError("CSR matvec length mismatch");
        std::vector<double> y(n, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                s += vals[k] * x[cols[k]];
            y[r] = s;
        }
        return y;
    }

    double at(std::size_t r, std::size_t c) const {
        const auto b = cols.begin() + row_ptr[r], e = cols.begin() + row_ptr[r + 1];
        const auto it = std::lower_bound(b, e, c);
        return (it != e && *it == c) ? vals[it - cols.begin()] : 0.0;
    }

    std::vector<double> diagonal() const {
        std::vector<double> d(n);
        for (std::size_t r = 0; r < n; ++r)
            d[r] = at(r, r);
        return d;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : vals)
            m = std::max(m, std::abs(v));
        return m;
    }

    double max_asymmetry() const {
        double m = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
                m = std::max(m, std::abs(vals[k] - at(cols[k], r)));
        return m;
    }
};

inline constexpr std::size_t reference_size_limit = 50000;

namespace detail {

/// Explicit Kronecker evaluation of A^e (or B^e) from the 1D matrices; O(q^3 p1^6).
inline std::vector<double> dense_element_matrix(const Basis1D& b, const GeomFactors& g, std::size_t e,
                                                OperatorKind kind, double beta) {
    const std::size_t p1 = b.p1, q = b.q, np = p1 * p1 * p1;
    const DenseMatrix& J = b.interp.dense;
    const DenseMatrix& D = b.deriv.dense;
    std::vector<double> A(np * np, 0.0);
    std::array<std::vector<double>, 3> dm;
    for (auto& v : dm)
        v.resize(np);
    std::vector<double> phi(np), gv(np);
    for (std::size_t c = 0; c < q; ++c)
        for (std::size_t bb = 0; bb < q; ++bb)
            for (std::size_t a = 0; a < q; ++a) {
                const std::size_t pt = a + q * (bb + q * c);
                for (std::size_t k = 0; k < p1; ++k)
                    for (std::size_t j = 0; j < p1; ++j)
                        for (std::size_t i = 0; i < p1; ++i) {
                            const std::size_t n = i + p1 * (j + p1 * k);
                            phi[n] = J(a, i) * J(bb, j) * J(c, k);
                            dm[0][n] = D(a, i) * J(bb, j) * J(c, k);
                            dm[1][n] = J(a, i) * D(bb, j) * J(c, k);
                            dm[2][n] = J(a, i) * J(bb, j) * D(c, k);
                        }
                if (kind == OperatorKind::Mass) {
                    const double w = beta * g.mass_diag(e)[pt];
                    for (std::size_t n = 0; n < np; ++n) {
                        const double s = w * phi[n];
                        for (std::size_t m = 0; m < np; ++m)
                            A[n * np + m] += s * phi[m];
                    }
                    continue;
                }
                double G[3][3];
                for (int m = 0; m < 3; ++m)
                    for (int n = 0; n < 3; ++n)
                        G[m][n] = g.G(e, StiffnessOperator::g_entry(m, n))[pt];
                for (int m = 0; m < 3; ++m) {
                    for (std::size_t n = 0; n < np; ++n)
                        gv[n] = G[m][0] * dm[0][n] + G[m][1] * dm[1][n] + G[m][2] * dm[2][n];
                    for (std::size_t n = 0; n < np; ++n) {
                        const double s = dm[m][n];
                        if (s == 0.0)
                            continue;
                        for (std::size_t k = 0; k < np; ++k)
                            A[n * np + k] += s * gv[k];
                    }
                }
            }
    return A;
}

inline CsrMatrix assemble_csr(const Basis1D& b, const GeomFactors& g, const GatherScatter& gs, OperatorKind kind,
                              double beta) {
    const GlobalNumbering& num = gs.numbering();
    if (num.n_global > reference_size_limit)
        throw ConfigError("reference CSR assembly limited to " + std::to_string(reference_size_limit) +
                          " global nodes, mesh has " + std::to_string(num.n_global));
    const std::size_t np = gs.nodes_per_element();
    std::vector<double> global_mask(num.n_global, 1.0);
    for (std::size_t l = 0; l < num.local_size(); ++l)
        global_mask[num.local_to_global[l]] = gs.mask()[l];

    std::vector<std::vector<std::pair<std::size_t, double>>> rows(num.n_global);
    for (std::size_t e = 0; e < g.E; ++e) {
        const auto Ae = dense_element_matrix(b, g, e, kind, beta);
        for (std::size_t n = 0; n < np; ++n) {
            const auto gr = static_cast<std::size_t>(num.local_to_global[e * np + n]);
            for (std::size_t m = 0; m < np; ++m) {
                const auto gc = static_cast<std::size_t>(num.local_to_global[e * np + m]);
                rows[gr].emplace_back(gc, Ae[n * np + m] * global_mask[gr] * global_mask[gc]);
            }
        }
    }
    CsrMatrix csr;
    csr.n = num.n_global;
    csr.row_ptr.assign(csr.n + 1, 0);
    for (std::size_t r = 0; r < csr.n; ++r) {
        auto& row = rows[r];
        std::stable_sort(row.begin(), row.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
        for (std::size_t i = 0; i < row.size();) {
            std::size_t j = i;
            double s = 0.0;
            while (j < row.size() && row[j].first == row[i].first)
                s += row[j++].second;
            csr.cols.push_back(row[i].first);
            csr.vals.push_back(s);
            i = j;
        }
        csr.row_ptr[r + 1] = csr.cols.size();
        row.clear();
        row.shrink_to_fit();
    }
    return csr;
}

} // namespace detail

/// Assembled A = Q^T A_L Q with masked rows and columns (oracle only).
inline CsrMatrix assemble_reference_csr(const StiffnessOperator& op, const GatherScatter& gs) {
    return detail::assemble_csr(op.basis(), op.geom(), gs, OperatorKind::Stiffness, 1.0);
}

inline CsrMatrix assemble_reference_csr(const MassOperator& op, const GatherScatter& gs) {
    return detail::assemble_csr(op.basis(), op.geom(), gs, OperatorKind::Mass, op.beta());
}

} // namespace hobake
