#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hobake/assembly.hpp"
#include "hobake/basis.hpp"
#include "hobake/errors.hpp"
#include "hobake/mesh.hpp"
#include "hobake/operators.hpp"
#include "hobake/quadrature.hpp"
#include "hobake/reference.hpp"

namespace hobake {

struct VerifyOptions {
    int p = 3;
    int k = 3;
    std::size_t threads = 1;
    bool deterministic = true;
    /// Test hook: relative perturbation of one G entry seen only by the matrix-free operator.
    double fault_g = 0.0;
};

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

inline std::vector<double> verify_random(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v)
        x = dist(rng);
    return v;
}

inline double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return s > 0.0 ? d / s : d;
}

inline std::string sci(double v) {
    std::ostringstream o;
    o.precision(3);
    o << std::scientific << v;
    return o.str();
}

inline CheckResult check_quadrature(const VerifyOptions&) {
    double worst = 0.0;
    for (int q = 1; q <= max_quadrature_points; ++q)
        for (auto kind : {QuadKind::GL, QuadKind::GLL}) {
            if (kind == QuadKind::GLL && q < 2)
                continue;
            const auto rule = make_quadrature(kind, q);
            const int degree = kind == QuadKind::GL ? 2 * q - 1 : 2 * q - 3;
            for (int m = 0; m <= degree; ++m) {
                double s = 0.0;
                for (int i = 0; i < q; ++i)
                    s += rule.weights[i] * std::pow(rule.points[i], m);
                worst = std::max(worst, std::abs(s - (m % 2 ? 0.0 : 2.0 / (m + 1))));
            }
        }
    return {"quadrature", worst <= 1e-12, "max moment error " + sci(worst), 0.0};
}

inline CheckResult check_even_odd(const VerifyOptions&) {
    double worst = 0.0;
    for (int p = 1; p <= max_order; ++p)
        for (auto kind : {QuadKind::GL, QuadKind::GLL}) {
            const auto b = make_basis(p, kind);
            for (const Operator1D* op : {&b.interp, &b.deriv, &b.interp_t, &b.deriv_t}) {
                const DenseMatrix r = reconstruct(op->even_odd);
                for (std::size_t i = 0; i < r.rows(); ++i)
                    for (std::size_t j = 0; j < r.cols(); ++j)
                        worst = std::max(worst, std::abs(r(i, j) - op->dense(i, j)));
            }
        }
    return {"even-odd", worst <= 1e-12, "max reconstruction error " + sci(worst), 0.0};
}

inline CheckResult check_qtq(const VerifyOptions& o) {
    const BoxMesh mesh = build_box_mesh(o.k, o.p);
    const GatherScatter gs(mesh, BoundaryCondition::Neumann, 1, o.deterministic);
    const auto& num = gs.numbering();
    // Q^T Q: column sums of the Boolean Q
    std::vector<std::size_t> counts(num.n_global, 0);
    for (auto g : num.local_to_global)
        ++counts[g];
    bool ok = true;
    for (std::size_t g = 0; g < num.n_global; ++g)
        ok = ok && counts[g] == num.multiplicity[g];
    // QQ^T u: every copy receives the sum over copies of its global node
    const auto u = verify_random(num.local_size(), 5);
    std::vector<double> sums(num.n_global, 0.0);
    for (std::size_t l = 0; l < u.size(); ++l)
        sums[num.local_to_global[l]] += u[l];
    std::vector<double> expect(u.size()), w = u;
    for (std::size_t l = 0; l < u.size(); ++l)
        expect[l] = sums[num.local_to_global[l]];
    gs.apply(w);
    const double err = rel_diff(w, expect);
    ok = ok && err <= 1e-14;
    return {"qtq-multiplicity", ok, "QQ^T error " + sci(err), 0.0};
}

inline CheckResult check_csr(const VerifyOptions& o) {
    const BoxMesh mesh = build_box_mesh(o.k, o.p);
    double worst = 0.0;
    for (auto [kind, q] : {std::pair{QuadKind::GLL, o.p + 1}, std::pair{QuadKind::GL, o.p + 2}}) {
        const Basis1D basis = make_basis(o.p, kind, q);
        auto exact = std::make_shared<const GeomFactors>(compute_geometric_factors(mesh, basis));
        auto seen = std::make_shared<GeomFactors>(*exact);
        if (o.fault_g != 0.0)
            seen->field(0, G11)[0] *= 1.0 + o.fault_g;
        for (auto bc : {BoundaryCondition::Neumann, BoundaryCondition::Dirichlet}) {
            const GatherScatter gs(mesh, bc, 1, o.deterministic);
            const auto x = verify_random(gs.numbering().n_global, 11);
            auto compare = [&](const auto& mf, const auto& ref_op) {
                auto u = gs.scatter(x);
                gs.apply_mask(u);
                std::vector<double> w(u.size());
                mf.apply(u, w);
                gs.apply(w);
                gs.apply_mask(w);
                const auto ref = assemble_reference_csr(ref_op, gs).multiply(x);
                std::vector<double> mfg(ref.size(), 0.0);
                for (std::size_t l = 0; l < w.size(); ++l)
                    mfg[gs.numbering().local_to_global[l]] = w[l];
                worst = std::max(worst, rel_diff(mfg, ref));
            };
            compare(StiffnessOperator(basis, seen), StiffnessOperator(basis, exact));
            compare(MassOperator(basis, seen), MassOperator(basis, exact));
        }
    }
    return {"csr-equivalence", worst <= 1e-12, "max relative difference " + sci(worst), 0.0};
}

inline CheckResult check_strategies(const VerifyOptions& o) {
    const BoxMesh mesh = build_box_mesh(o.k, o.p);
    double worst = 0.0;
    for (auto [kind, q] : {std::pair{QuadKind::GLL, o.p + 1}, std::pair{QuadKind::GL, o.p + 2}}) {
        const Basis1D basis = make_basis(o.p, kind, q);
        auto geom = std::make_shared<const GeomFactors>(compute_geometric_factors(mesh, basis));
        const StiffnessOperator ref(basis, geom);
        for (unsigned t = 0; t < 5; ++t) {
            const auto u = verify_random(ref.local_size(), 20 + t);
            std::vector<double> w0(u.size()), w(u.size());
            ref.apply(u, w0);
            for (auto s : all_strategies) {
                StiffnessOperator(basis, geom, s).apply(u, w);
                worst = std::max(worst, rel_diff(w, w0));
            }
        }
    }
    return {"strategy-equivalence", worst <= 1e-12, "max relative difference " + sci(worst), 0.0};
}

inline CheckResult check_flop_model(const VerifyOptions& o) {
    const BoxMesh mesh = build_box_mesh(std::min(o.k, 2), o.p);
    double worst = 0.0;
    for (auto [kind, q] : {std::pair{QuadKind::GLL, o.p + 1}, std::pair{QuadKind::GL, o.p + 2}}) {
        const Basis1D basis = make_basis(o.p, kind, q);
        auto geom = std::make_shared<const GeomFactors>(compute_geometric_factors(mesh, basis));
        for (auto s : all_strategies) {
            const StiffnessOperator op(basis, geom, s);
            std::vector<double> u(op.local_size(), 1.0), w(u.size());
            FlopByteCounters c;
            op.apply(u, w, nullptr, &c);
            const double model = flop_model(s, o.p, q);
            worst = std::max(worst, std::abs(static_cast<double>(c.flops()) / mesh.E - model) / model);
        }
    }
    return {"flop-model", worst <= 0.05, "max relative deviation " + sci(worst), 0.0};
}

} // namespace detail

struct NamedCheck {
    std::string name;
    std::function<CheckResult(const VerifyOptions&)> run;
};

inline const std::vector<NamedCheck>& verify_checks() {
    static const std::vector<NamedCheck> checks{
        {"quadrature", detail::check_quadrature},
        {"even-odd", detail::check_even_odd},
        {"qtq-multiplicity", detail::check_qtq},
        {"csr-equivalence", detail::check_csr},
        {"strategy-equivalence", detail::check_strategies},
        {"flop-model", detail::check_flop_model},
    };
    return checks;
}

/// Runs the named checks (all when `names` is empty); unknown names throw ConfigError.
inline std::vector<CheckResult> run_checks(const std::vector<std::string>& names, const VerifyOptions& o) {
    if (o.p < 1 || o.p > max_order)
        throw ConfigError("verify: p must be 1.." + std::to_string(max_order));
    if (o.k < 0 || o.k > 9)
        throw ConfigError("verify: k must be 0..9 (reference assembly is size limited)");
    std::vector<const NamedCheck*> todo;
    if (names.empty()) {
        for (const auto& c : verify_checks())
            todo.push_back(&c);
    } else {
        for (const auto& n : names) {
            const NamedCheck* hit = nullptr;
            for (const auto& c : verify_checks())
                if (c.name == n)
                    hit = &c;
            if (!hit) {
                std::string known;
                for (const auto& c : verify_checks())
                    known += (known.empty() ? "" : ", ") + c.name;
                throw ConfigError("unknown check '" + n + "' (known: " + known + ")");
            }
            todo.push_back(hit);
        }
    }
    std::vector<CheckResult> out;
    for (const NamedCheck* c : todo) {
        const auto t0 = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = c->run(o);
        } catch (const std::exception& e) {
            r = {c->name, false, std::string("threw: ") + e.what(), 0.0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace hobake
