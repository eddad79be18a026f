#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/pcg.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"
#include "sddld/tree.hpp"

namespace sddld {

namespace detail {

struct UnionFind {
    std::vector<Index> parent;
    explicit UnionFind(Index n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    Index find(Index x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    bool unite(Index a, Index b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[static_cast<std::size_t>(a)] = b;
        return true;
    }
};

} // namespace detail

// Maximum-weight spanning tree (minimum total resistance). Ties break on a
// per-edge random key when a generator is supplied, else on edge index.
// Returns the selected edge indices of `g`.
inline std::vector<std::size_t> max_weight_spanning_tree_edges(const WeightedGraph& g, const CounterRng* rng = nullptr) {
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "spanning tree of a disconnected graph");
    std::vector<std::size_t> idx(g.edge_count());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<std::uint64_t> key(g.edge_count(), 0);
    if (rng) {
        CounterRng r = rng->substream(rng_stream::tagged(rng_stream::kTree, 0));
        for (auto& k : key) k = r.next_u64();
    }
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        const double wa = g.edges()[a].weight, wb = g.edges()[b].weight;
        if (wa != wb) return wa > wb;
        return key[a] < key[b];
    });
    detail::UnionFind uf(g.vertex_count());
    std::vector<std::size_t> tree;
    tree.reserve(static_cast<std::size_t>(g.vertex_count()) - 1);
    for (std::size_t e : idx)
        if (uf.unite(g.edges()[e].u, g.edges()[e].v)) tree.push_back(e);
    std::sort(tree.begin(), tree.end());
    return tree;
}

inline WeightedGraph subgraph_from_edges(const WeightedGraph& g, std::span<const std::size_t> edge_indices) {
    std::vector<Edge> es;
    es.reserve(edge_indices.size());
    for (std::size_t e : edge_indices) es.push_back(g.edges()[e]);
    return WeightedGraph(g.vertex_count(), es);
}

// Rooted view of a tree with prefix resistances and binary-lifting LCA;
// answers path-resistance queries in O(log n).
class TreePaths {
public:
    explicit TreePaths(const WeightedGraph& t, Index root = 0) : n_(t.vertex_count()) {
        if (t.edge_count() != static_cast<std::size_t>(n_ - 1) || !is_connected(t))
            fail(ErrorCode::NotATree, "path queries need a spanning tree");
        parent_.assign(static_cast<std::size_t>(n_), -1);
        parent_edge_.assign(static_cast<std::size_t>(n_), static_cast<std::size_t>(-1));
        depth_.assign(static_cast<std::size_t>(n_), 0);
        res_to_root_.assign(static_cast<std::size_t>(n_), 0.0);
        order_.reserve(static_cast<std::size_t>(n_));
        order_.push_back(root);
        std::vector<char> seen(static_cast<std::size_t>(n_), 0);
        seen[static_cast<std::size_t>(root)] = 1;
        for (std::size_t head = 0; head < order_.size(); ++head) {
            const Index u = order_[head];
            for (const auto& nb : t.neighbors(u)) {
                if (seen[static_cast<std::size_t>(nb.vertex)]) continue;
                seen[static_cast<std::size_t>(nb.vertex)] = 1;
                parent_[static_cast<std::size_t>(nb.vertex)] = u;
                parent_edge_[static_cast<std::size_t>(nb.vertex)] = nb.edge;
                depth_[static_cast<std::size_t>(nb.vertex)] = depth_[static_cast<std::size_t>(u)] + 1;
                res_to_root_[static_cast<std::size_t>(nb.vertex)] =
                    res_to_root_[static_cast<std::size_t>(u)] + 1.0 / nb.weight;
                order_.push_back(nb.vertex);
            }
        }
        levels_ = 1;
        while ((1 << levels_) < n_) ++levels_;
        up_.assign(static_cast<std::size_t>(levels_), std::vector<Index>(static_cast<std::size_t>(n_), -1));
        up_[0] = parent_;
        for (int k = 1; k < levels_; ++k)
            for (Index v = 0; v < n_; ++v) {
                const Index mid = up_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(v)];
                up_[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)] =
                    mid < 0 ? -1 : up_[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(mid)];
            }
    }

    Index lca(Index u, Index v) const {
        if (depth_[static_cast<std::size_t>(u)] < depth_[static_cast<std::size_t>(v)]) std::swap(u, v);
        Index diff = depth_[static_cast<std::size_t>(u)] - depth_[static_cast<std::size_t>(v)];
        for (int k = 0; diff; ++k, diff >>= 1)
            if (diff & 1) u = up_[static_cast<std::size_t>(k)][static_cast<std::size_t>(u)];
        if (u == v) return u;
        for (int k = levels_ - 1; k >= 0; --k) {
            const Index au = up_[static_cast<std::size_t>(k)][static_cast<std::size_t>(u)];
            const Index av = up_[static_cast<std::size_t>(k)][static_cast<std::size_t>(v)];
            if (au != av) {
                u = au;
                v = av;
            }
        }
        return parent_[static_cast<std::size_t>(u)];
    }

    double path_resistance(Index u, Index v) const {
        const Index a = lca(u, v);
        return res_to_root_[static_cast<std::size_t>(u)] + res_to_root_[static_cast<std::size_t>(v)] -
               2.0 * res_to_root_[static_cast<std::size_t>(a)];
    }

    Index parent(Index v) const { return parent_[static_cast<std::size_t>(v)]; }
    std::size_t parent_edge(Index v) const { return parent_edge_[static_cast<std::size_t>(v)]; }
    Index depth(Index v) const { return depth_[static_cast<std::size_t>(v)]; }
    const std::vector<Index>& bfs_order() const { return order_; }

    // Tree edges (as indices into the tree graph's edge list) on the u-v path.
    std::vector<std::size_t> path_edges(Index u, Index v) const {
        std::vector<std::size_t> out;
        const Index a = lca(u, v);
        for (Index x = u; x != a; x = parent_[static_cast<std::size_t>(x)]) out.push_back(parent_edge_[static_cast<std::size_t>(x)]);
        for (Index x = v; x != a; x = parent_[static_cast<std::size_t>(x)]) out.push_back(parent_edge_[static_cast<std::size_t>(x)]);
        return out;
    }

private:
    Index n_;
    int levels_ = 1;
    std::vector<Index> parent_;
    std::vector<std::size_t> parent_edge_;
    std::vector<Index> depth_;
    std::vector<double> res_to_root_;
    std::vector<Index> order_;
    std::vector<std::vector<Index>> up_;
};

// Grounded solver for a connected Laplacian: PCG on F_L (ground = last vertex)
// preconditioned by a spanning-tree factorization. Because the tree is a
// subgraph, kappa(M^{-1} F_L) <= st_T(L), which makes the stretch a sound
// certificate constant for the B-norm stopping rule.
class LaplacianSolver {
public:
    explicit LaplacianSolver(const WeightedGraph& g) : g_(g) {
        if (!is_connected(g_)) fail(ErrorCode::DisconnectedGraph, "solver needs a connected graph");
        const Index n = g_.vertex_count();
        ground_ = n - 1;
        f_ = laplacian_of(g_).without_vertex(ground_);
        const auto tree_edges = max_weight_spanning_tree_edges(g_);
        tree_ = subgraph_from_edges(g_, tree_edges);
        factor_ = TreeFactor::build(tree_, ground_);
        // Total stretch of g over the tree: certified kappa for the PCG stop rule.
        TreePaths paths(tree_, 0);
        kappa_cert_ = 0.0;
        for (const auto& e : g_.edges()) kappa_cert_ += e.weight * paths.path_resistance(e.u, e.v);
        kappa_cert_ = std::max(1.0, kappa_cert_);
    }

    Index grounded_dim() const { return g_.vertex_count() - 1; }
    Index ground() const { return ground_; }
    const SymmetricSparse& grounded_matrix() const { return f_; }
    double certified_kappa() const { return kappa_cert_; }

    PcgResult solve(std::span<const double> b, std::span<double> x, double nu) const {
        return pcg_solve(matvec_op(f_), tree_precond(), b, x, nu, kappa_cert_);
    }

    // Solve with one round of iterative refinement; used where the result
    // feeds exact identities.
    PcgResult solve_refined(std::span<const double> b, std::span<double> x, double nu) const {
        PcgResult r1 = solve(b, x, nu);
        std::vector<double> res(b.size()), dx(b.size());
        f_.matvec(x, res);
        for (std::size_t i = 0; i < res.size(); ++i) res[i] = b[i] - res[i];
        PcgResult r2 = solve(res, dx, nu);
        for (std::size_t i = 0; i < res.size(); ++i) x[i] += dx[i];
        r1.iterations += r2.iterations;
        r1.converged = r1.converged && r2.converged;
        return r1;
    }

    ApplyFn tree_precond() const {
        return [this](std::span<const double> in, std::span<double> out) { factor_.solve_grounded(in, out); };
    }

    ApplyFn solver_op(double nu) const {
        return [this, nu](std::span<const double> in, std::span<double> out) { solve(in, out, nu); };
    }

private:
    WeightedGraph g_;
    WeightedGraph tree_;
    TreeFactor factor_;
    SymmetricSparse f_;
    Index ground_ = 0;
    double kappa_cert_ = 1.0;
};

} // namespace sddld
