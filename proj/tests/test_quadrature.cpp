#include <gtest/gtest.h>

#include <cmath>

#include "hobake/quadrature.hpp"

using namespace hobake;

namespace {

double exact_monomial(int m) { return m % 2 ? 0.0 : 2.0 / (m + 1); }

double apply_rule(const QuadRule1D& r, int m) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        s += r.weights[i] * std::pow(r.points[i], m);
    return s;
}

/// Composite trapezoid with Richardson extrapolation, independent of the rules.
double trapezoid_monomial(int m) {
    auto trap = [m](int n) {
        const double h = 2.0 / n;
        double s = 0.5 * (std::pow(-1.0, m) + 1.0);
        for (int i = 1; i < n; ++i)
            s += std::pow(-1.0 + i * h, m);
        return s * h;
    };
    const double t1 = trap(20000), t2 = trap(40000);
    return (4.0 * t2 - t1) / 3.0;
}

void check_invariants(const QuadRule1D& r) {
    const std::size_t q = r.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < q; ++i) {
        if (i + 1 < q) {
            EXPECT_LT(r.points[i], r.points[i + 1]);
        }
        EXPECT_NEAR(r.points[i], -r.points[q - 1 - i], 1e-14);
        EXPECT_NEAR(r.weights[i], r.weights[q - 1 - i], 1e-14);
        EXPECT_GT(r.weights[i], 0.0);
        EXPECT_GE(r.points[i], -1.0);
        EXPECT_LE(r.points[i], 1.0);
        sum += r.weights[i];
    }
    EXPECT_NEAR(sum, 2.0, 1e-13);
}

} // namespace

TEST(Legendre, Examples) {
    auto [v0, d0] = legendre_eval(0, 0.3);
    EXPECT_EQ(v0, 1.0);
    EXPECT_EQ(d0, 0.0);
    auto [v1, d1] = legendre_eval(1, 0.3);
    EXPECT_EQ(v1, 0.3);
    EXPECT_EQ(d1, 1.0);
    auto [v2, d2] = legendre_eval(2, 0.5);
    EXPECT_NEAR(v2, -0.125, 1e-15);
    EXPECT_NEAR(d2, 1.5, 1e-15);
}

TEST(Legendre, MatchesClosedFormP3) {
    for (double x = -1.0; x <= 1.0; x += 0.125) {
        auto [v, d] = legendre_eval(3, x);
        EXPECT_NEAR(v, 0.5 * (5 * x * x * x - 3 * x), 1e-14);
        EXPECT_NEAR(d, 0.5 * (15 * x * x - 3), 1e-14);
    }
}

TEST(GaussLegendre, SmallRules) {
    auto r1 = gauss_legendre(1);
    ASSERT_EQ(r1.size(), 1u);
    EXPECT_EQ(r1.points[0], 0.0);
    EXPECT_EQ(r1.weights[0], 2.0);

    auto r2 = gauss_legendre(2);
    EXPECT_NEAR(r2.points[0], -0.57735026919, 1e-11);
    EXPECT_NEAR(r2.points[1], 0.57735026919, 1e-11);
    EXPECT_NEAR(r2.weights[0], 1.0, 1e-14);
    EXPECT_NEAR(r2.weights[1], 1.0, 1e-14);

    auto r3 = gauss_legendre(3);
    EXPECT_NEAR(r3.points[0], -std::sqrt(0.6), 1e-15);
    EXPECT_EQ(r3.points[1], 0.0);
    EXPECT_NEAR(r3.points[2], std::sqrt(0.6), 1e-15);
    EXPECT_NEAR(r3.weights[0], 5.0 / 9.0, 1e-15);
    EXPECT_NEAR(r3.weights[1], 8.0 / 9.0, 1e-15);
    EXPECT_NEAR(r3.weights[2], 5.0 / 9.0, 1e-15);
}

TEST(GaussLobatto, SmallRules) {
    auto r2 = gauss_lobatto_legendre(2);
    EXPECT_EQ(r2.points[0], -1.0);
    EXPECT_EQ(r2.points[1], 1.0);
    EXPECT_EQ(r2.weights[0], 1.0);
    EXPECT_EQ(r2.weights[1], 1.0);

    auto r3 = gauss_lobatto_legendre(3);
    EXPECT_EQ(r3.points[1], 0.0);
    EXPECT_NEAR(r3.weights[0], 1.0 / 3.0, 1e-14);
    EXPECT_NEAR(r3.weights[1], 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(r3.weights[2], 1.0 / 3.0, 1e-14);

    auto r4 = gauss_lobatto_legendre(4);
    EXPECT_NEAR(r4.points[1], -1.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(r4.points[2], 1.0 / std::sqrt(5.0), 1e-15);
    EXPECT_NEAR(r4.weights[0], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(r4.weights[1], 5.0 / 6.0, 1e-15);
}

TEST(Quadrature, ExactnessAllSupportedSizes) {
    for (int q = 1; q <= max_quadrature_points; ++q) {
        auto gl = gauss_legendre(q);
        check_invariants(gl);
        for (int m = 0; m <= 2 * q - 1; ++m)
            EXPECT_NEAR(apply_rule(gl, m), exact_monomial(m), 1e-12) << "GL q=" << q << " m=" << m;
    }
    for (int q = 2; q <= max_quadrature_points; ++q) {
        auto gll = gauss_lobatto_legendre(q);
        check_invariants(gll);
        EXPECT_EQ(gll.points.front(), -1.0);
        EXPECT_EQ(gll.points.back(), 1.0);
        for (int m = 0; m <= 2 * q - 3; ++m)
            EXPECT_NEAR(apply_rule(gll, m), exact_monomial(m), 1e-12) << "GLL q=" << q << " m=" << m;
    }
}

TEST(Quadrature, GaussLegendreNotExactBeyondDegree) {
    // x^(2q) is the first monomial the rule misses
    for (int q = 1; q <= 8; ++q)
        EXPECT_GT(std::abs(apply_rule(gauss_legendre(q), 2 * q) - exact_monomial(2 * q)), 1e-6);
}

TEST(Quadrature, AgreesWithBruteForceTrapezoid) {
    for (int q : {2, 5, 9, 17}) {
        auto gl = gauss_legendre(q);
        auto gll = gauss_lobatto_legendre(q);
        for (int m = 0; m <= std::min(2 * q - 3, 12); ++m) {
            const double brute = trapezoid_monomial(m);
            EXPECT_NEAR(apply_rule(gl, m), brute, 1e-9);
            EXPECT_NEAR(apply_rule(gll, m), brute, 1e-9);
        }
    }
}

TEST(Quadrature, Deterministic) {
    auto a = gauss_legendre(13), b = gauss_legendre(13);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.weights, b.weights);
    auto c = gauss_lobatto_legendre(11), d = gauss_lobatto_legendre(11);
    EXPECT_EQ(c.points, d.points);
    EXPECT_EQ(c.weights, d.weights);
}

TEST(Quadrature, RejectsUnsupportedSizes) {
    EXPECT_THROW(gauss_legendre(0), ConfigError);
    EXPECT_THROW(gauss_legendre(18), ConfigError);
    EXPECT_THROW(gauss_lobatto_legendre(1), ConfigError);
    EXPECT_THROW(gauss_lobatto_legendre(18), ConfigError);
}
