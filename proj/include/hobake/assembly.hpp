#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hobake/errors.hpp"
#include "hobake/mesh.hpp"
#include "hobake/parallel.hpp"

namespace hobake {

using GlobalId = std::int64_t;

enum class BoundaryCondition { Neumann, Dirichlet };

/// Local-to-global map of the conforming box mesh (the Boolean Q).
struct GlobalNumbering {
    std::vector<GlobalId> local_to_global;
    std::size_t n_global = 0;
    std::vector<std::uint32_t> multiplicity;
    std::array<std::size_t, 3> lattice{1, 1, 1};

    std::size_t local_size() const noexcept { return local_to_global.size(); }
};

/// Lexicographic ids over the global (p Ex + 1) x (p Ey + 1) x (p Ez + 1) lattice.
inline GlobalNumbering build_numbering(const BoxMesh& mesh) {
    GlobalNumbering num;
    const std::size_t p = mesh.p, p1 = mesh.p1(), np = mesh.nodes_per_element();
    for (int d = 0; d < 3; ++d)
        num.lattice[d] = mesh.dims[d] * p + 1;
    const auto [nx, ny, nz] = num.lattice;
    num.n_global = nx * ny * nz;
    num.local_to_global.resize(mesh.E * np);
    num.multiplicity.assign(num.n_global, 0);
    for (std::size_t e = 0; e < mesh.E; ++e) {
        const auto ei = mesh.element_index(e);
        for (std::size_t k = 0; k < p1; ++k)
            for (std::size_t j = 0; j < p1; ++j)
                for (std::size_t i = 0; i < p1; ++i) {
                    const std::size_t gx = ei[0] * p + i, gy = ei[1] * p + j, gz = ei[2] * p + k;
                    const auto g = static_cast<GlobalId>(gx + nx * (gy + ny * gz));
                    num.local_to_global[e * np + i + p1 * (j + p1 * k)] = g;
                    ++num.multiplicity[g];
                }
    }
    return num;
}

/// Message and call counts of gather-scatter exchanges.
struct ExchangeStats {
    std::size_t calls = 0;
    std::size_t messages = 0;
};

/// Direct-stiffness summation QQ^T in local form, split into simulated-rank partitions
/// (contiguous element blocks). Deterministic mode sums every shared node in a fixed
/// order: local copies ascending within each partition, then partitions ascending.
class GatherScatter {
public:
    GatherScatter() = default;

    GatherScatter(const BoxMesh& mesh, BoundaryCondition bc, std::size_t ranks = 1, bool deterministic = true)
        : numbering_(build_numbering(mesh)), bc_(bc), deterministic_(deterministic),
          nodes_per_element_(mesh.nodes_per_element()) {
        if (ranks == 0 || ranks > mesh.E)
            throw ConfigError("rank count " + std::to_string(ranks) + " must be in [1, E=" + std::to_string(mesh.E) +
                              "]");
        const std::size_t n = numbering_.local_size();
        weight_.resize(n);
        mask_.assign(n, 1.0);
        const auto [nx, ny, nz] = numbering_.lattice;
        for (std::size_t l = 0; l < n; ++l) {
            const GlobalId g = numbering_.local_to_global[l];
            weight_[l] = 1.0 / numbering_.multiplicity[g];
            if (bc == BoundaryCondition::Dirichlet) {
                const std::size_t gx = g % nx, gy = (g / nx) % ny, gz = g / (nx * ny);
                if (gx == 0 || gx == nx - 1 || gy == 0 || gy == ny - 1 || gz == 0 || gz == nz - 1)
                    mask_[l] = 0.0;
            }
        }

        element_offsets_.resize(ranks + 1);
        for (std::size_t r = 0; r <= ranks; ++r)
            element_offsets_[r] = r * mesh.E / ranks;

        // Shared nodes: CSR of ascending local indices per global id.
        std::vector<std::size_t> count(numbering_.n_global, 0);
        for (GlobalId g : numbering_.local_to_global)
            ++count[g];
        std::vector<std::size_t> gid_slot(numbering_.n_global, SIZE_MAX);
        for (std::size_t g = 0; g < numbering_.n_global; ++g)
            if (numbering_.multiplicity[g] > 1) {
                gid_slot[g] = shared_gids_.size();
                shared_gids_.push_back(static_cast<GlobalId>(g));
            }
        shared_offsets_.assign(shared_gids_.size() + 1, 0);
        for (std::size_t s = 0; s < shared_gids_.size(); ++s)
            shared_offsets_[s + 1] = shared_offsets_[s] + count[shared_gids_[s]];
        shared_locals_.resize(shared_offsets_.back());
        std::vector<std::size_t> fill(shared_offsets_.begin(), shared_offsets_.end() - 1);
        for (std::size_t l = 0; l < n; ++l) {
            const std::size_t s = gid_slot[numbering_.local_to_global[l]];
            if (s != SIZE_MAX)
                shared_locals_[fill[s]++] = l;
        }

        // Segments: the run of a shared node's copies that lies in one partition.
        segment_offsets_.assign(shared_gids_.size() + 1, 0);
        partition_segments_.resize(ranks);
        std::set<std::pair<std::size_t, std::size_t>> pairs;
        for (std::size_t s = 0; s < shared_gids_.size(); ++s) {
            std::size_t last_part = SIZE_MAX;
            std::vector<std::size_t> parts;
            for (std::size_t i = shared_offsets_[s]; i < shared_offsets_[s + 1]; ++i) {
                const std::size_t part = partition_of_local(shared_locals_[i]);
                if (part != last_part) {
                    partition_segments_[part].push_back(segment_begin_.size());
                    segment_begin_.push_back(i);
                    parts.push_back(part);
                    last_part = part;
                }
            }
            segment_offsets_[s + 1] = segment_begin_.size();
            for (std::size_t a = 0; a < parts.size(); ++a)
                for (std::size_t b = a + 1; b < parts.size(); ++b)
                    pairs.emplace(parts[a], parts[b]);
        }
        segment_begin_.push_back(shared_locals_.size());
        neighbor_counts_.assign(ranks, 0);
        for (auto [a, b] : pairs) {
            ++neighbor_counts_[a];
            ++neighbor_counts_[b];
        }
        adjacent_pairs_ = pairs.size();
    }

    const GlobalNumbering& numbering() const noexcept { return numbering_; }
    BoundaryCondition bc() const noexcept { return bc_; }
    bool deterministic() const noexcept { return deterministic_; }
    void set_deterministic(bool on) noexcept { deterministic_ = on; }

    std::size_t local_size() const noexcept { return numbering_.local_size(); }
    std::size_t nodes_per_element() const noexcept { return nodes_per_element_; }
    std::size_t ranks() const noexcept { return element_offsets_.size() - 1; }
    std::span<const std::size_t> element_offsets() const noexcept { return element_offsets_; }
    std::span<const double> mask() const noexcept { return mask_; }
    std::span<const double> weight() const noexcept { return weight_; }

    /// Unordered partition pairs that share at least one node; one exchange each per call.
    std::size_t adjacent_pairs() const noexcept { return adjacent_pairs_; }
    std::size_t neighbor_count(std::size_t rank) const { return neighbor_counts_.at(rank); }

    std::size_t partition_of_local(std::size_t l) const noexcept {
        const std::size_t e = l / nodes_per_element_;
        const auto it = std::upper_bound(element_offsets_.begin(), element_offsets_.end(), e);
        return static_cast<std::size_t>(it - element_offsets_.begin()) - 1;
    }

    std::size_t components_of(std::span<const double> u) const {
        const std::size_t n = local_size();
        if (n == 0 || u.size() % n != 0 || u.size() / n == 0 || u.size() / n > 3)
            throw DimensionError("local vector length " + std::to_string(u.size()) +
                                 " is not 1..3 components of " + std::to_string(n));
        return u.size() / n;
    }

    /// u_L <- Q Q^T u_L for each component in place.
    void apply(std::span<double> u, WorkerPool* pool = nullptr, ExchangeStats* stats = nullptr) const {
        const std::size_t comps = components_of(u), n = local_size();
        for (std::size_t c = 0; c < comps; ++c) {
            double* uc = u.data() + c * n;
            if (deterministic_)
                two_phase(uc, pool);
            else
                single_phase(uc, pool);
        }
        if (stats) {
            ++stats->calls;
            stats->messages += adjacent_pairs_;
        }
    }

    void apply_mask(std::span<double> u) const {
        const std::size_t comps = components_of(u), n = local_size();
        for (std::size_t c = 0; c < comps; ++c)
            for (std::size_t i = 0; i < n; ++i)
                u[c * n + i] *= mask_[i];
    }

    /// Multiplicity-weighted dot of continuous local fields; equals the global u^T v.
    double dot(std::span<const double> u, std::span<const double> v, WorkerPool* pool = nullptr) const {
        if (u.size() != v.size())
            throw DimensionError("local_dot length mismatch");
        components_of(u);
        const std::size_t n = local_size();
        return parallel_sum(pool, u.size(), deterministic_,
                            [&](std::size_t i) { return weight_[i % n] * u[i] * v[i]; });
    }

    /// Q u: copies of a global vector into local form.
    std::vector<double> scatter(std::span<const double> u_global) const {
        if (u_global.size() != numbering_.n_global)
            throw DimensionError("global vector length mismatch");
        std::vector<double> u(local_size());
        for (std::size_t l = 0; l < u.size(); ++l)
            u[l] = u_global[numbering_.local_to_global[l]];
        return u;
    }

    /// Global values of a continuous local field (multiplicity-weighted Q^T).
    std::vector<double> assemble(std::span<const double> u_local) const {
        if (u_local.size() != local_size())
            throw DimensionError("local vector length mismatch");
        std::vector<double> g(numbering_.n_global, 0.0);
        for (std::size_t l = 0; l < u_local.size(); ++l)
            g[numbering_.local_to_global[l]] += weight_[l] * u_local[l];
        return g;
    }

private:
    void single_phase(double* u, WorkerPool* pool) const {
        parallel_chunks(pool, shared_gids_.size(), 1024, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t s = b; s < e; ++s) {
                double sum = 0.0;
                for (std::size_t i = shared_offsets_[s]; i < shared_offsets_[s + 1]; ++i)
                    sum += u[shared_locals_[i]];
                for (std::size_t i = shared_offsets_[s]; i < shared_offsets_[s + 1]; ++i)
                    u[shared_locals_[i]] = sum;
            }
        });
    }

    void two_phase(double* u, WorkerPool* pool) const {
        std::vector<double> partial(segment_begin_.size() - 1);
        // Condense within each partition.
        parallel_chunks(pool, ranks(), 1, [&](std::size_t r, std::size_t, std::size_t) {
            for (std::size_t seg : partition_segments_[r]) {
                double sum = 0.0;
                for (std::size_t i = segment_begin_[seg]; i < segment_end(seg); ++i)
                    sum += u[shared_locals_[i]];
                partial[seg] = sum;
            }
        });
        // Pairwise exchange and sum across partitions.
        parallel_chunks(pool, shared_gids_.size(), 1024, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t s = b; s < e; ++s) {
                double sum = 0.0;
                for (std::size_t seg = segment_offsets_[s]; seg < segment_offsets_[s + 1]; ++seg)
                    sum += partial[seg];
                for (std::size_t i = shared_offsets_[s]; i < shared_offsets_[s + 1]; ++i)
                    u[shared_locals_[i]] = sum;
            }
        });
    }

    // Segments tile shared_locals_ in order; a sentinel closes the last one.
    std::size_t segment_end(std::size_t seg) const noexcept { return segment_begin_[seg + 1]; }

    GlobalNumbering numbering_;
    BoundaryCondition bc_ = BoundaryCondition::Neumann;
    bool deterministic_ = true;
    std::size_t nodes_per_element_ = 1;
    std::vector<double> weight_;
    std::vector<double> mask_;
    std::vector<std::size_t> element_offsets_{0, 0};
    std::vector<GlobalId> shared_gids_;
    std::vector<std::size_t> shared_offsets_;
    std::vector<std::size_t> shared_locals_;
    std::vector<std::size_t> segment_offsets_;
    std::vector<std::size_t> segment_begin_;
    std::vector<std::vector<std::size_t>> partition_segments_;
    std::vector<std::size_t> neighbor_counts_;
    std::size_t adjacent_pairs_ = 0;
};

inline void gather_scatter(const GatherScatter& gs, std::span<double> u, WorkerPool* pool = nullptr,
                           ExchangeStats* stats = nullptr) {
    gs.apply(u, pool, stats);
}

inline void apply_mask(const GatherScatter& gs, std::span<double> u) { gs.apply_mask(u); }

inline double local_dot(const GatherScatter& gs, std::span<const double> u, std::span<const double> v,
                        WorkerPool* pool = nullptr) {
    return gs.dot(u, v, pool);
}

/// Dot product through assembled global vectors (alternative to the weighted local form).
inline double assembled_dot(const GatherScatter& gs, std::span<const double> u, std::span<const double> v) {
    const auto a = gs.assemble(u), b = gs.assemble(v);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

} // namespace hobake
