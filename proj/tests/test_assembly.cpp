#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hobake/assembly.hpp"

using namespace hobake;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = dist(rng);
    return v;
}

// Dense Boolean Q (local x global) built straight from the numbering.
std::vector<std::vector<int>> dense_q(const GlobalNumbering& num) {
    std::vector<std::vector<int>> q(num.local_size(), std::vector<int>(num.n_global, 0));
    for (std::size_t l = 0; l < num.local_size(); ++l)
        q[l][num.local_to_global[l]] = 1;
    return q;
}

} // namespace

TEST(Numbering, SingleElementIsIdentity) {
    auto m = build_box_mesh(0, 3);
    auto num = build_numbering(m);
    ASSERT_EQ(num.n_global, 64u);
    for (std::size_t l = 0; l < num.local_size(); ++l) {
        EXPECT_EQ(num.local_to_global[l], static_cast<GlobalId>(l));
        EXPECT_EQ(num.multiplicity[l], 1u);
    }
}

TEST(Numbering, TwoLinearElementsShareFourNodes) {
    auto m = build_box_mesh(1, 1);
    ASSERT_EQ(m.dims, (std::array<std::size_t, 3>{2, 1, 1}));
    auto num = build_numbering(m);
    EXPECT_EQ(num.n_global, 12u);
    EXPECT_EQ(std::count(num.multiplicity.begin(), num.multiplicity.end(), 2u), 4);
    EXPECT_EQ(std::count(num.multiplicity.begin(), num.multiplicity.end(), 1u), 8);
}

TEST(Numbering, InteriorLatticeNodeMultiplicityEight) {
    auto m = build_box_mesh(3, 2); // 2 x 2 x 2
    auto num = build_numbering(m);
    const auto [nx, ny, nz] = num.lattice;
    EXPECT_EQ(num.multiplicity[2 + nx * (2 + ny * 2)], 8u);
    (void)nz;
}

TEST(GatherScatter, QtQIsMultiplicityAndQQtMatchesDenseOracle) {
    auto m = build_box_mesh(2, 2); // 2 x 1 x 2
    GatherScatter gs(m, BoundaryCondition::Neumann);
    const auto& num = gs.numbering();
    const auto q = dense_q(num);
    for (std::size_t a = 0; a < num.n_global; ++a)
        for (std::size_t b = 0; b < num.n_global; ++b) {
            int s = 0;
            for (std::size_t l = 0; l < num.local_size(); ++l)
                s += q[l][a] * q[l][b];
            ASSERT_EQ(s, a == b ? static_cast<int>(num.multiplicity[a]) : 0);
        }
    const auto u = random_vector(num.local_size(), 7);
    std::vector<double> expect(u.size(), 0.0);
    for (std::size_t r = 0; r < u.size(); ++r)
        for (std::size_t c = 0; c < u.size(); ++c) {
            int qqt = 0;
            for (std::size_t g = 0; g < num.n_global; ++g)
                qqt += q[r][g] * q[c][g];
            expect[r] += qqt * u[c];
        }
    auto w = u;
    gs.apply(w);
    for (std::size_t i = 0; i < w.size(); ++i)
        EXPECT_NEAR(w[i], expect[i], 1e-14);
}

TEST(GatherScatter, SingleElementIsIdentity) {
    auto m = build_box_mesh(0, 4);
    GatherScatter gs(m, BoundaryCondition::Neumann);
    auto u = random_vector(gs.local_size(), 3);
    auto w = u;
    gs.apply(w);
    EXPECT_EQ(w, u);
}

TEST(GatherScatter, Linear) {
    auto m = build_box_mesh(4, 3);
    GatherScatter gs(m, BoundaryCondition::Neumann, 4);
    auto u = random_vector(gs.local_size(), 1), v = random_vector(gs.local_size(), 2);
    const double a = 0.75, b = -1.5;
    std::vector<double> comb(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        comb[i] = a * u[i] + b * v[i];
    gs.apply(u);
    gs.apply(v);
    gs.apply(comb);
    for (std::size_t i = 0; i < u.size(); ++i)
        EXPECT_NEAR(comb[i], a * u[i] + b * v[i], 1e-13);
}

TEST(GatherScatter, ScatterOfGlobalIsGsOfItsRestriction) {
    auto m = build_box_mesh(3, 2);
    GatherScatter gs(m, BoundaryCondition::Neumann);
    const auto ug = random_vector(gs.numbering().n_global, 11);
    auto ul = gs.scatter(ug);
    auto back = gs.assemble(ul);
    for (std::size_t g = 0; g < ug.size(); ++g)
        EXPECT_NEAR(back[g], ug[g], 1e-15);
    gs.apply(ul);
    for (std::size_t l = 0; l < ul.size(); ++l) {
        const auto g = gs.numbering().local_to_global[l];
        EXPECT_NEAR(ul[l], gs.numbering().multiplicity[g] * ug[g], 1e-14);
    }
}

TEST(GatherScatter, LocalDotEqualsGlobalDot) {
    auto m = build_box_mesh(5, 3);
    GatherScatter gs(m, BoundaryCondition::Neumann, 8);
    const std::size_t ng = gs.numbering().n_global;
    const auto ug = random_vector(ng, 5), vg = random_vector(ng, 6);
    double expect = 0.0;
    for (std::size_t g = 0; g < ng; ++g)
        expect += ug[g] * vg[g];
    const auto ul = gs.scatter(ug), vl = gs.scatter(vg);
    EXPECT_NEAR(local_dot(gs, ul, vl), expect, 1e-13 * std::abs(expect) + 1e-13);
    EXPECT_NEAR(assembled_dot(gs, ul, vl), expect, 1e-13 * std::abs(expect) + 1e-13);
}

TEST(GatherScatter, SingleElementDotIsPlainDot) {
    auto m = build_box_mesh(0, 2);
    GatherScatter gs(m, BoundaryCondition::Neumann);
    const auto u = random_vector(27, 8), v = random_vector(27, 9);
    double plain = 0.0;
    for (std::size_t i = 0; i < 27; ++i)
        plain += u[i] * v[i];
    EXPECT_DOUBLE_EQ(local_dot(gs, u, v), plain);
}

TEST(GatherScatter, MaskIsIdempotentAndZeroesBoundary) {
    auto m = build_box_mesh(3, 3);
    GatherScatter gs(m, BoundaryCondition::Dirichlet);
    const auto [nx, ny, nz] = gs.numbering().lattice;
    auto u = random_vector(gs.local_size(), 4);
    apply_mask(gs, u);
    auto twice = u;
    apply_mask(gs, twice);
    EXPECT_EQ(u, twice);
    for (std::size_t l = 0; l < u.size(); ++l) {
        const auto g = static_cast<std::size_t>(gs.numbering().local_to_global[l]);
        const std::size_t gx = g % nx, gy = (g / nx) % ny, gz = g / (nx * ny);
        const bool boundary = gx == 0 || gy == 0 || gz == 0 || gx == nx - 1 || gy == ny - 1 || gz == nz - 1;
        if (boundary)
            EXPECT_EQ(u[l], 0.0);
        else
            EXPECT_NE(u[l], 0.0);
    }
}

TEST(GatherScatter, NeumannMaskIsIdentity) {
    auto m = build_box_mesh(3, 2);
    GatherScatter gs(m, BoundaryCondition::Neumann);
    auto u = random_vector(gs.local_size(), 12);
    auto w = u;
    apply_mask(gs, w);
    EXPECT_EQ(w, u);
}

TEST(GatherScatter, VectorComponentsAreIndependent) {
    auto m = build_box_mesh(3, 2);
    GatherScatter gs(m, BoundaryCondition::Neumann, 2);
    const std::size_t n = gs.local_size();
    auto u3 = random_vector(3 * n, 13);
    std::vector<std::vector<double>> parts;
    for (int c = 0; c < 3; ++c)
        parts.emplace_back(u3.begin() + c * n, u3.begin() + (c + 1) * n);
    ExchangeStats st;
    gs.apply(u3, nullptr, &st);
    EXPECT_EQ(st.calls, 1u);
    for (int c = 0; c < 3; ++c) {
        gs.apply(parts[c]);
        EXPECT_TRUE(std::equal(parts[c].begin(), parts[c].end(), u3.begin() + c * n));
    }
    std::vector<double> wrong(n + 1);
    EXPECT_THROW(gs.apply(wrong), DimensionError);
}

TEST(GatherScatter, DeterministicModeIsThreadIndependent) {
    auto m = build_box_mesh(7, 3);
    GatherScatter gs(m, BoundaryCondition::Dirichlet, 8, true);
    const auto u = random_vector(gs.local_size(), 21);
    auto serial = u;
    gs.apply(serial);
    const double d0 = gs.dot(serial, u);
    for (std::size_t threads : {1u, 2u, 3u, 4u}) {
        WorkerPool pool(threads);
        auto w = u;
        gs.apply(w, &pool);
        EXPECT_EQ(w, serial) << threads << " threads";
        EXPECT_EQ(gs.dot(w, u, &pool), d0) << threads << " threads";
    }
}

TEST(GatherScatter, FastModeAgreesToRoundoff) {
    auto m = build_box_mesh(6, 2);
    GatherScatter det(m, BoundaryCondition::Neumann, 4, true), fast(m, BoundaryCondition::Neumann, 4, false);
    const auto u = random_vector(det.local_size(), 22);
    auto a = u, b = u;
    WorkerPool pool(3);
    det.apply(a, &pool);
    fast.apply(b, &pool);
    for (std::size_t i = 0; i < a.size(); ++i)
        EXPECT_NEAR(a[i], b[i], 1e-14);
}

TEST(GatherScatter, OneElementPerRankNeighborCounts) {
    auto m = build_box_mesh(6, 1); // 4 x 4 x 4
    GatherScatter gs(m, BoundaryCondition::Neumann, 64);
    EXPECT_EQ(gs.neighbor_count(1 + 4 * (1 + 4 * 1)), 26u);
    EXPECT_EQ(gs.neighbor_count(0), 7u);
    std::size_t total = 0;
    for (std::size_t r = 0; r < 64; ++r)
        total += gs.neighbor_count(r);
    EXPECT_EQ(total, 2 * gs.adjacent_pairs());
    ExchangeStats st;
    std::vector<double> u(gs.local_size(), 1.0);
    gs.apply(u, nullptr, &st);
    EXPECT_EQ(st.messages, gs.adjacent_pairs());
}

TEST(GatherScatter, RejectsBadRankCounts) {
    auto m = build_box_mesh(2, 1);
    EXPECT_THROW(GatherScatter(m, BoundaryCondition::Neumann, 0), ConfigError);
    EXPECT_THROW(GatherScatter(m, BoundaryCondition::Neumann, 5), ConfigError);
}
