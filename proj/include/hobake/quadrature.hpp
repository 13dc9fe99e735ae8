#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hobake/errors.hpp"

namespace hobake {

enum class QuadKind { GL, GLL };

inline const char* to_string(QuadKind kind) { return kind == QuadKind::GL ? "GL" : "GLL"; }

/// Quadrature rule on [-1, 1] with ascending points.
struct QuadRule1D {
    QuadKind kind = QuadKind::GL;
    std::vector<double> points;
    std::vector<double> weights;

    std::size_t size() const noexcept { return points.size(); }
};

inline constexpr int max_quadrature_points = 17;

/// (P_p(x), P'_p(x)) by the three-term recurrence.
inline std::pair<double, double> legendre_eval(int p, double x) {
    if (p == 0)
        return {1.0, 0.0};
    double pm1 = 1.0, pn = x;
    double dm1 = 0.0, dn = 1.0;
    for (int n = 1; n < p; ++n) {
        const double pn1 = ((2 * n + 1) * x * pn - n * pm1) / (n + 1);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n
        const double dn1 = dm1 + (2 * n + 1) * pn;
        pm1 = pn;
        pn = pn1;
        dm1 = dn;
        dn = dn1;
    }
    return {pn, dn};
}

namespace detail {

inline constexpr double newton_tolerance = 1e-15;
inline constexpr int newton_max_iterations = 100;

template <class Step>
double newton_root(double x, Step step, const char* what) {
    for (int it = 0; it < newton_max_iterations; ++it) {
        const double dx = step(x);
        x -= dx;
        if (std::abs(dx) <= newton_tolerance)
            return x;
    }
    throw ConvergenceError(std::string("Newton iteration for ") + what + " did not converge");
}

inline void check_point_count(int q, int min_q) {
    if (q < min_q || q > max_quadrature_points)
        throw ConfigError("quadrature point count " + std::to_string(q) + " outside [" + std::to_string(min_q) +
                          ", " + std::to_string(max_quadrature_points) + "]");
}

} // namespace detail

/// Gauss-Legendre rule: roots of P_q, exact for degree 2q-1.
inline QuadRule1D gauss_legendre(int q) {
    detail::check_point_count(q, 1);
    QuadRule1D rule{QuadKind::GL, std::vector<double>(q), std::vector<double>(q)};
    // Solve the negative half and mirror, so the rule is bitwise symmetric.
    for (int i = 0; i < q / 2; ++i) {
        const double guess = -std::cos((2 * i + 1) * std::numbers::pi / (2 * q));
        const double x = detail::newton_root(
            guess,
            [q](double t) {
                const auto [v, d] = legendre_eval(q, t);
                return v / d;
            },
            "Gauss-Legendre points");
        const double d = legendre_eval(q, x).second;
        const double w = 2.0 / ((1.0 - x * x) * d * d);
        rule.points[i] = x;
        rule.points[q - 1 - i] = -x;
        rule.weights[i] = rule.weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) {
        const double d = legendre_eval(q, 0.0).second;
        rule.points[q / 2] = 0.0;
        rule.weights[q / 2] = 2.0 / (d * d);
    }
    return rule;
}

/// Gauss-Lobatto-Legendre rule: ±1 plus the roots of P'_{q-1}, exact for degree 2q-3.
inline QuadRule1D gauss_lobatto_legendre(int q) {
    detail::check_point_count(q, 2);
    const int n = q - 1;
    QuadRule1D rule{QuadKind::GLL, std::vector<double>(q), std::vector<double>(q)};
    const double end_weight = 2.0 / (q * n);
    rule.points.front() = -1.0;
    rule.points.back() = 1.0;
    rule.weights.front() = rule.weights.back() = end_weight;
    for (int i = 1; i < q / 2; ++i) {
        const double guess = -std::cos(std::numbers::pi * i / n);
        const double x = detail::newton_root(
            guess,
            [n](double t) {
                const auto [v, d] = legendre_eval(n, t);
                // P''_n from the Legendre ODE
                const double d2 = (2.0 * t * d - n * (n + 1.0) * v) / (1.0 - t * t);
                return d / d2;
            },
            "Gauss-Lobatto-Legendre points");
        const double v = legendre_eval(n, x).first;
        const double w = 2.0 / (q * n * v * v);
        rule.points[i] = x;
        rule.points[q - 1 - i] = -x;
        rule.weights[i] = rule.weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) {
        const double v = legendre_eval(n, 0.0).first;
        rule.points[q / 2] = 0.0;
        rule.weights[q / 2] = 2.0 / (q * n * v * v);
    }
    return rule;
}

inline QuadRule1D make_quadrature(QuadKind kind, int q) {
    return kind == QuadKind::GL ? gauss_legendre(q) : gauss_lobatto_legendre(q);
}

} // namespace hobake
