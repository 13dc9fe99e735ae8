#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "hobake/basis.hpp"
#include "hobake/errors.hpp"
#include "hobake/parallel.hpp"
#include "hobake/tensor.hpp"

namespace hobake {

struct Box {
    std::array<double, 3> lo{0.0, 0.0, 0.0};
    std::array<double, 3> hi{1.0, 1.0, 1.0};
};

/// "none" or "sine": x += a * L * sin(pi xi) sin(pi eta) sin(pi zeta) on every coordinate,
/// with (xi, eta, zeta) the position normalised to [0, 1]^3 and L the box extent.
struct Deformation {
    std::string name = "sine";
    double amplitude = 0.05;
};

inline constexpr int max_element_exponent = 21;

/// Hexahedral box mesh of E = 2^k elements, stored element by element.
struct BoxMesh {
    int k = 0;
    std::size_t E = 1;
    std::array<std::size_t, 3> dims{1, 1, 1};
    int p = 1;
    Box domain;
    Deformation deformation;
    /// (p+1)^3 nodes per element, x then y then z blocks: coords[(e*3 + d) * p1^3 + node].
    std::vector<double> coords;

    std::size_t p1() const noexcept { return static_cast<std::size_t>(p) + 1; }
    std::size_t nodes_per_element() const noexcept { return p1() * p1() * p1(); }
    std::size_t local_size() const noexcept { return E * nodes_per_element(); }

    /// Coincident node count (p Ex + 1)(p Ey + 1)(p Ez + 1).
    std::size_t unique_nodes() const noexcept {
        std::size_t n = 1;
        for (auto d : dims)
            n *= d * static_cast<std::size_t>(p) + 1;
        return n;
    }

    std::array<std::size_t, 3> element_index(std::size_t e) const noexcept {
        return {e % dims[0], (e / dims[0]) % dims[1], e / (dims[0] * dims[1])};
    }

    const double* element_coords(std::size_t e, int d) const noexcept {
        return coords.data() + (e * 3 + d) * nodes_per_element();
    }
    double* element_coords(std::size_t e, int d) noexcept { return coords.data() + (e * 3 + d) * nodes_per_element(); }
};

/// Reporting size n = p^3 E.
inline std::uint64_t reported_points(int p, int k) {
    const std::uint64_t p3 = static_cast<std::uint64_t>(p) * p * p;
    return p3 << k;
}

/// Three powers of two with product 2^k whose exponents differ by at most one.
inline std::array<std::size_t, 3> balanced_dims(int k) {
    const int base = k / 3, rem = k % 3;
    const std::array<int, 3> ex{base + (rem >= 1), base, base + (rem >= 2)};
    return {std::size_t{1} << ex[0], std::size_t{1} << ex[1], std::size_t{1} << ex[2]};
}

inline BoxMesh build_box_mesh(int k, int p, const Box& domain = {}, const Deformation& deformation = {}) {
    if (k < 0 || k > max_element_exponent)
        throw ConfigError("element exponent k=" + std::to_string(k) + " outside [0, " +
                          std::to_string(max_element_exponent) + "]");
    if (p < 1 || p > max_order)
        throw ConfigError("polynomial order p=" + std::to_string(p) + " outside [1, " + std::to_string(max_order) +
                          "]");
    if (deformation.name != "none" && deformation.name != "sine")
        throw ConfigError("unknown deformation '" + deformation.name + "' (expected none or sine)");
    for (int d = 0; d < 3; ++d)
        if (!(domain.hi[d] > domain.lo[d]))
            throw ConfigError("degenerate domain extent");

    BoxMesh m;
    m.k = k;
    m.E = std::size_t{1} << k;
    m.dims = balanced_dims(k);
    m.p = p;
    m.domain = domain;
    m.deformation = deformation;

    const std::size_t p1 = m.p1(), np = m.nodes_per_element();
    const auto gll = gauss_lobatto_legendre(p + 1).points;

    // One 1D lattice per direction, so shared face nodes are bitwise identical.
    std::array<std::vector<double>, 3> lattice;
    std::array<std::vector<double>, 3> unit;
    for (int d = 0; d < 3; ++d) {
        const std::size_t n = m.dims[d] * p + 1;
        lattice[d].resize(n);
        unit[d].resize(n);
        const double extent = domain.hi[d] - domain.lo[d];
        for (std::size_t el = 0; el < m.dims[d]; ++el)
            for (std::size_t i = 0; i <= static_cast<std::size_t>(p); ++i) {
                const double s = (el + 0.5 * (gll[i] + 1.0)) / static_cast<double>(m.dims[d]);
                const std::size_t g = el * p + i;
                const double ss = (i == 0) ? static_cast<double>(el) / m.dims[d]
                                  : (i == static_cast<std::size_t>(p)) ? static_cast<double>(el + 1) / m.dims[d]
                                                                       : s;
                unit[d][g] = ss;
                lattice[d][g] = domain.lo[d] + extent * ss;
            }
    }

    const bool sine = deformation.name == "sine" && deformation.amplitude != 0.0;
    m.coords.resize(m.E * 3 * np);
    for (std::size_t e = 0; e < m.E; ++e) {
        const auto ei = m.element_index(e);
        for (std::size_t kk = 0; kk < p1; ++kk)
            for (std::size_t j = 0; j < p1; ++j)
                for (std::size_t i = 0; i < p1; ++i) {
                    const std::array<std::size_t, 3> g{ei[0] * p + i, ei[1] * p + j, ei[2] * p + kk};
                    const std::size_t node = i + p1 * (j + p1 * kk);
                    double bump = 0.0;
                    if (sine)
                        bump = deformation.amplitude * std::sin(std::numbers::pi * unit[0][g[0]]) *
                               std::sin(std::numbers::pi * unit[1][g[1]]) * std::sin(std::numbers::pi * unit[2][g[2]]);
                    for (int d = 0; d < 3; ++d)
                        m.element_coords(e, d)[node] = lattice[d][g[d]] + bump * (domain.hi[d] - domain.lo[d]);
                }
    }
    return m;
}

/// Applies x -> R x (R row-major 3x3) to every node.
inline void transform_mesh(BoxMesh& m, const std::array<double, 9>& R) {
    const std::size_t np = m.nodes_per_element();
    for (std::size_t e = 0; e < m.E; ++e) {
        double* x = m.element_coords(e, 0);
        double* y = m.element_coords(e, 1);
        double* z = m.element_coords(e, 2);
        for (std::size_t n = 0; n < np; ++n) {
            const double a = x[n], b = y[n], c = z[n];
            x[n] = R[0] * a + R[1] * b + R[2] * c;
            y[n] = R[3] * a + R[4] * b + R[5] * c;
            z[n] = R[6] * a + R[7] * b + R[8] * c;
        }
    }
}

/// Index of the six symmetric G entries.
enum GEntry : std::size_t { G11 = 0, G12, G13, G22, G23, G33 };

/// Per-element, per-quadrature-point geometric factors: 6 G entries, mass diagonal
/// and Jacobian determinant, i.e. 8 q^3 words per element.
struct GeomFactors {
    static constexpr std::size_t fields = 8;
    static constexpr std::size_t mass_field = 6;
    static constexpr std::size_t jac_field = 7;

    std::size_t E = 0;
    std::size_t q = 0;
    std::vector<double> data;

    std::size_t points() const noexcept { return q * q * q; }

    const double* field(std::size_t e, std::size_t f) const noexcept { return data.data() + (e * fields + f) * points(); }
    double* field(std::size_t e, std::size_t f) noexcept { return data.data() + (e * fields + f) * points(); }

    const double* G(std::size_t e, GEntry entry) const noexcept { return field(e, entry); }
    const double* mass_diag(std::size_t e) const noexcept { return field(e, mass_field); }
    const double* jac_det(std::size_t e) const noexcept { return field(e, jac_field); }
};

/// Determinant-scaled metric tensor from the 3x3 Jacobian dx_l/dr_m (row l, column m).
struct PointMetric {
    double det;
    std::array<double, 6> g; // sum_l (dr_m/dx_l)(dr_m'/dx_l) * det
};

/// `scale` is a length scale of the Jacobian entries for the singularity test.
inline PointMetric point_metric(const std::array<double, 9>& J, double scale) {
    // adjugate: inv = adj / det, adj(m, l) = cofactor(l, m)
    const double a = J[0], b = J[1], c = J[2], d = J[3], e = J[4], f = J[5], g = J[6], h = J[7], i = J[8];
    const std::array<double, 9> adj{e * i - f * h, c * h - b * i, b * f - c * e,
                                    f * g - d * i, a * i - c * g, c * d - a * f,
                                    d * h - e * g, b * g - a * h, a * e - b * d};
    const double det = a * adj[0] + b * adj[3] + c * adj[6];
    PointMetric pm{det, {}};
    if (!(det > 1e-14 * scale * scale * scale))
        return pm;
    // inv(m, l) = adj[m*3 + l] / det;  G_mm' = sum_l adj(m,l) adj(m',l) / det
    auto dot = [&](int m, int n) {
        return (adj[m * 3] * adj[n * 3] + adj[m * 3 + 1] * adj[n * 3 + 1] + adj[m * 3 + 2] * adj[n * 3 + 2]) / det;
    };
    pm.g = {dot(0, 0), dot(0, 1), dot(0, 2), dot(1, 1), dot(1, 2), dot(2, 2)};
    return pm;
}

inline GeomFactors compute_geometric_factors(const BoxMesh& mesh, const Basis1D& basis, WorkerPool* pool = nullptr) {
    if (basis.p != mesh.p)
        throw ConfigError("basis order " + std::to_string(basis.p) + " does not match mesh geometry order " +
                          std::to_string(mesh.p));
    const std::size_t p1 = basis.p1, q = basis.q, nq = q * q * q;
    GeomFactors gf;
    gf.E = mesh.E;
    gf.q = q;
    gf.data.assign(mesh.E * GeomFactors::fields * nq, 0.0);

    struct Scratch {
        std::vector<double> grad, tmp;
    };
    std::vector<Scratch> scratch(pool ? pool->size() : 1);

    parallel_chunks(pool, mesh.E, 16, [&](std::size_t begin, std::size_t end, std::size_t worker) {
        auto& s = scratch[worker];
        s.grad.resize(9 * nq);
        s.tmp.resize(2 * q * p1 * p1 + 3 * q * q * p1);
        double* t0 = s.tmp.data();
        double* t1 = t0 + q * p1 * p1;
        double* t2 = t1 + q * p1 * p1;
        double* t3 = t2 + q * q * p1;
        double* t4 = t3 + q * q * p1;
        const DenseContraction<1> contract;
        for (std::size_t e = begin; e < end; ++e) {
            double scale = 0.0;
            for (int d = 0; d < 3; ++d) {
                const double* x = mesh.element_coords(e, d);
                const auto [lo, hi] = std::minmax_element(x, x + mesh.nodes_per_element());
                scale = std::max(scale, 0.5 * (*hi - *lo));
                double* g = s.grad.data() + 3 * d * nq;
                reference_gradient(contract, basis, x, g, g + nq, g + 2 * nq, t0, t1, t2, t3, t4);
            }
            for (std::size_t c = 0; c < q; ++c)
                for (std::size_t b = 0; b < q; ++b)
                    for (std::size_t a = 0; a < q; ++a) {
                        const std::size_t pt = a + q * (b + q * c);
                        std::array<double, 9> J;
                        for (int l = 0; l < 3; ++l)
                            for (int m = 0; m < 3; ++m)
                                J[l * 3 + m] = s.grad[(3 * l + m) * nq + pt];
                        const PointMetric pm = point_metric(J, scale);
                        if (!(pm.det > 1e-14 * scale * scale * scale))
                            throw InvertedElementError(e, pt, pm.det);
                        const double w = basis.quad.weights[a] * basis.quad.weights[b] * basis.quad.weights[c];
                        for (std::size_t f = 0; f < 6; ++f)
                            gf.field(e, f)[pt] = pm.g[f] * w;
                        gf.field(e, GeomFactors::mass_field)[pt] = pm.det * w;
                        gf.field(e, GeomFactors::jac_field)[pt] = pm.det;
                    }
        }
    });
    return gf;
}

} // namespace hobake
