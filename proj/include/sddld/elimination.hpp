#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

// One column of the partial LDL^T factor: the eliminated vertex, its pivot,
// and the incident (vertex, weight) pairs at elimination time.
struct ElimStep {
    Index vertex;
    double pivot;
    std::vector<std::pair<Index, double>> neighbors;
};

struct PartialCholesky {
    std::vector<ElimStep> steps;      // elimination order
    SymmetricSparse remaining;        // Laplacian on surviving vertices
    std::vector<Index> vertex_map;    // old -> new (-1 when eliminated)
    std::vector<Index> kept;          // new -> old
    double sum_log_pivots = 0.0;
    Index n_original = 0;
    std::size_t forced = 0;           // vertices removed by the min-degree fallback

    Index remaining_dim() const { return static_cast<Index>(kept.size()); }

    // Forward substitution through the factor columns (original indexing).
    void apply_forward(std::span<double> t) const {
        for (const auto& s : steps) {
            const double z = t[static_cast<std::size_t>(s.vertex)];
            for (const auto& [u, w] : s.neighbors) t[static_cast<std::size_t>(u)] += (w / s.pivot) * z;
        }
    }

    void apply_pivot_inverse(std::span<double> t) const {
        for (const auto& s : steps) t[static_cast<std::size_t>(s.vertex)] /= s.pivot;
    }

    void apply_backward(std::span<double> t) const {
        for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
            double acc = t[static_cast<std::size_t>(it->vertex)];
            for (const auto& [u, w] : it->neighbors) acc += (w / it->pivot) * t[static_cast<std::size_t>(u)];
            t[static_cast<std::size_t>(it->vertex)] = acc;
        }
    }
};

namespace detail {

// Eliminate `v` from a mutable weighted adjacency, adding the Schur-complement
// clique among its current neighbors. Degree-1 adds nothing; degree-2 merges
// the two incident edges into one of conductance w1*w2/(w1+w2).
inline ElimStep eliminate_vertex(std::vector<std::map<Index, double>>& adj, Index v) {
    ElimStep step;
    step.vertex = v;
    auto& nbrs = adj[static_cast<std::size_t>(v)];
    double pivot = 0.0;
    step.neighbors.assign(nbrs.begin(), nbrs.end());
    for (const auto& [u, w] : step.neighbors) pivot += w;
    step.pivot = pivot;
    for (const auto& [u, w] : step.neighbors) adj[static_cast<std::size_t>(u)].erase(v);
    for (std::size_t a = 0; a < step.neighbors.size(); ++a)
        for (std::size_t b = a + 1; b < step.neighbors.size(); ++b) {
            const auto [ua, wa] = step.neighbors[a];
            const auto [ub, wb] = step.neighbors[b];
            const double w = wa * wb / pivot;
            adj[static_cast<std::size_t>(ua)][ub] += w;
            adj[static_cast<std::size_t>(ub)][ua] += w;
        }
    nbrs.clear();
    return step;
}

} // namespace detail

// Partial Cholesky of a connected Laplacian: repeatedly pivot out vertices of
// degree 1 and 2 until the minimum degree is >= 3 or at most one vertex is
// left. `protect`, when given, is never eliminated (it carries the grounding
// downstream) and is relabeled last in the remaining matrix. With
// `force_progress`, a stalled elimination falls back to removing min-degree
// vertices (with their Schur clique) until degree-1/2 elimination restarts,
// bounded to a quarter of the vertices.
inline PartialCholesky greedy_eliminate(const SymmetricSparse& l,
                                        std::optional<Index> protect = std::nullopt,
                                        bool force_progress = false) {
    const WeightedGraph g = graph_of(l); // throws NotALaplacian
    const Index n = g.vertex_count();

    std::vector<std::map<Index, double>> adj(static_cast<std::size_t>(n));
    for (const auto& e : g.edges()) {
        adj[static_cast<std::size_t>(e.u)][e.v] = e.weight;
        adj[static_cast<std::size_t>(e.v)][e.u] = e.weight;
    }

    PartialCholesky pc;
    pc.n_original = n;
    Index alive = n;
    std::vector<char> dead(static_cast<std::size_t>(n), 0);
    const auto eliminable = [&](Index v) {
        if (dead[static_cast<std::size_t>(v)]) return false;
        if (protect && v == *protect) return false;
        const auto d = adj[static_cast<std::size_t>(v)].size();
        return d >= 1 && d <= 2;
    };

    std::set<Index> candidates;
    for (Index v = 0; v < n; ++v)
        if (eliminable(v)) candidates.insert(v);

    std::size_t force_budget = force_progress ? std::max<std::size_t>(1, static_cast<std::size_t>(n) / 4) : 0;

    while (alive > 1) {
        if (candidates.empty()) {
            if (force_budget == 0) break;
            // Min-degree fallback: one general sparse elimination step.
            Index best = -1;
            std::size_t best_deg = static_cast<std::size_t>(-1);
            for (Index v = 0; v < n; ++v) {
                if (dead[static_cast<std::size_t>(v)]) continue;
                if (protect && v == *protect) continue;
                const auto d = adj[static_cast<std::size_t>(v)].size();
                if (d >= 1 && d < best_deg) {
                    best_deg = d;
                    best = v;
                }
            }
            if (best < 0) break;
            auto step = detail::eliminate_vertex(adj, best);
            dead[static_cast<std::size_t>(best)] = 1;
            --alive;
            --force_budget;
            ++pc.forced;
            pc.sum_log_pivots += std::log(step.pivot);
            for (const auto& [u, w] : step.neighbors)
                if (eliminable(u)) candidates.insert(u);
            pc.steps.push_back(std::move(step));
            continue;
        }
        const Index v = *candidates.begin();
        candidates.erase(candidates.begin());
        if (!eliminable(v)) continue;
        auto step = detail::eliminate_vertex(adj, v);
        dead[static_cast<std::size_t>(v)] = 1;
        --alive;
        pc.sum_log_pivots += std::log(step.pivot);
        for (const auto& [u, w] : step.neighbors) {
            if (eliminable(u)) candidates.insert(u);
            else candidates.erase(u);
        }
        pc.steps.push_back(std::move(step));
    }

    // Relabel survivors; the protected vertex goes last.
    pc.vertex_map.assign(static_cast<std::size_t>(n), -1);
    for (Index v = 0; v < n; ++v) {
        if (dead[static_cast<std::size_t>(v)]) continue;
        if (protect && v == *protect) continue;
        pc.vertex_map[static_cast<std::size_t>(v)] = static_cast<Index>(pc.kept.size());
        pc.kept.push_back(v);
    }
    if (protect && !dead[static_cast<std::size_t>(*protect)]) {
        pc.vertex_map[static_cast<std::size_t>(*protect)] = static_cast<Index>(pc.kept.size());
        pc.kept.push_back(*protect);
    }

    std::vector<Triplet> ts;
    std::vector<double> diag(pc.kept.size(), 0.0);
    for (Index v = 0; v < n; ++v) {
        if (dead[static_cast<std::size_t>(v)]) continue;
        const Index nv = pc.vertex_map[static_cast<std::size_t>(v)];
        for (const auto& [u, w] : adj[static_cast<std::size_t>(v)]) {
            const Index nu = pc.vertex_map[static_cast<std::size_t>(u)];
            if (nv < nu) {
                ts.push_back({nv, nu, -w});
                diag[static_cast<std::size_t>(nv)] += w;
                diag[static_cast<std::size_t>(nu)] += w;
            }
        }
    }
    for (std::size_t i = 0; i < diag.size(); ++i)
        if (diag[i] != 0.0) ts.push_back({static_cast<Index>(i), static_cast<Index>(i), diag[i]});
    pc.remaining = SymmetricSparse::from_triplets(static_cast<Index>(pc.kept.size()), ts);
    return pc;
}

} // namespace sddld
