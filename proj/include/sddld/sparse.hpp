#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sddld/errors.hpp"

namespace sddld {

using Index = std::int32_t;

struct Triplet {
    Index row;
    Index col;
    double value;
};

// Immutable sparse symmetric matrix. Only the upper triangle (row <= col) is
// stored, sorted by (row, col); matvec applies the symmetric completion with a
// fixed summation order. A compressed adjacency over the full pattern is built
// once at construction for fast products.
class SymmetricSparse {
public:
    SymmetricSparse() = default;

    static SymmetricSparse from_triplets(Index n, std::span<const Triplet> triplets) {
        if (n < 0) fail(ErrorCode::InvalidParameter, "negative dimension");
        // Accumulate per unordered pair, tracking both orientations so that
        // inconsistent mirrored input can be rejected. A pair given in both
        // orientations contributes the sum of both (the dense symmetrization
        // of the triplet list).
        std::map<std::pair<Index, Index>, std::pair<double, double>> acc; // (upper, lower) sums
        std::map<std::pair<Index, Index>, std::pair<bool, bool>> seen;
        for (const auto& t : triplets) {
            if (t.row < 0 || t.col < 0 || t.row >= n || t.col >= n)
                fail(ErrorCode::IndexOutOfRange,
                     "entry (" + std::to_string(t.row) + "," + std::to_string(t.col) + ") with n=" + std::to_string(n));
            const bool upper = t.row <= t.col;
            const auto key = upper ? std::make_pair(t.row, t.col) : std::make_pair(t.col, t.row);
            auto& sums = acc[key];
            auto& flags = seen[key];
            if (upper) {
                sums.first += t.value;
                flags.first = true;
            } else {
                sums.second += t.value;
                flags.second = true;
            }
        }
        SymmetricSparse m;
        m.n_ = n;
        m.entries_.reserve(acc.size());
        for (const auto& [key, sums] : acc) {
            const auto& flags = seen[key];
            double v;
            if (key.first == key.second) {
                v = sums.first;
            } else if (flags.first && flags.second) {
                if (sums.first != sums.second)
                    fail(ErrorCode::AsymmetricInput,
                         "(" + std::to_string(key.first) + "," + std::to_string(key.second) + ") given both ways with unequal values");
                v = sums.first + sums.second;
            } else {
                v = flags.first ? sums.first : sums.second;
            }
            if (v != 0.0) m.entries_.push_back({key.first, key.second, v});
        }
        m.build_adjacency();
        return m;
    }

    Index dim() const { return n_; }
    const std::vector<Triplet>& entries() const { return entries_; }

    // Number of stored (upper-triangle) entries.
    std::size_t nnz_upper() const { return entries_.size(); }

    double diagonal(Index i) const {
        for (std::size_t k = row_start_[static_cast<std::size_t>(i)]; k < row_start_[static_cast<std::size_t>(i) + 1]; ++k)
            if (adj_col_[k] == i) return adj_val_[k];
        return 0.0;
    }

    std::vector<double> diagonal_vector() const {
        std::vector<double> d(static_cast<std::size_t>(n_), 0.0);
        for (const auto& e : entries_)
            if (e.row == e.col) d[static_cast<std::size_t>(e.row)] = e.value;
        return d;
    }

    // y = A x using the symmetric completion.
    void matvec(std::span<const double> x, std::span<double> y) const {
        if (static_cast<Index>(x.size()) != n_ || static_cast<Index>(y.size()) != n_)
            fail(ErrorCode::DimensionMismatch, "matvec expects vectors of length " + std::to_string(n_));
        for (Index i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t k = row_start_[static_cast<std::size_t>(i)]; k < row_start_[static_cast<std::size_t>(i) + 1]; ++k)
                s += adj_val_[k] * x[static_cast<std::size_t>(adj_col_[k])];
            y[static_cast<std::size_t>(i)] = s;
        }
    }

    std::vector<double> matvec(std::span<const double> x) const {
        std::vector<double> y(static_cast<std::size_t>(n_));
        matvec(x, y);
        return y;
    }

    // SDD test: per-row slack A_ii - sum_{j != i} |A_ij|.
    std::pair<bool, std::vector<double>> sdd_slack() const {
        std::vector<double> slack(static_cast<std::size_t>(n_), 0.0);
        for (Index i = 0; i < n_; ++i) {
            double diag = 0.0, off = 0.0;
            for (std::size_t k = row_start_[static_cast<std::size_t>(i)]; k < row_start_[static_cast<std::size_t>(i) + 1]; ++k) {
                if (adj_col_[k] == i) diag = adj_val_[k];
                else off += std::abs(adj_val_[k]);
            }
            slack[static_cast<std::size_t>(i)] = diag - off;
        }
        bool ok = true;
        for (double s : slack)
            if (s < 0.0) { ok = false; break; }
        return {ok, slack};
    }

    double max_abs_entry() const {
        double m = 0.0;
        for (const auto& e : entries_) m = std::max(m, std::abs(e.value));
        return m;
    }

    // A + shift * I.
    SymmetricSparse shifted(double shift) const {
        std::vector<Triplet> ts = entries_;
        std::vector<bool> has_diag(static_cast<std::size_t>(n_), false);
        for (auto& t : ts)
            if (t.row == t.col) {
                t.value += shift;
                has_diag[static_cast<std::size_t>(t.row)] = true;
            }
        for (Index i = 0; i < n_; ++i)
            if (!has_diag[static_cast<std::size_t>(i)]) ts.push_back({i, i, shift});
        return from_triplets(n_, ts);
    }

    SymmetricSparse scaled(double factor) const {
        std::vector<Triplet> ts = entries_;
        for (auto& t : ts) t.value *= factor;
        return from_triplets(n_, ts);
    }

    // Delete one row/column (returns the principal submatrix on the rest).
    SymmetricSparse without_vertex(Index v) const {
        std::vector<Triplet> ts;
        ts.reserve(entries_.size());
        for (const auto& e : entries_) {
            if (e.row == v || e.col == v) continue;
            const Index r = e.row > v ? e.row - 1 : e.row;
            const Index c = e.col > v ? e.col - 1 : e.col;
            ts.push_back({r, c, e.value});
        }
        return from_triplets(n_ - 1, ts);
    }

private:
    void build_adjacency() {
        std::sort(entries_.begin(), entries_.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        const auto n = static_cast<std::size_t>(n_);
        std::vector<std::size_t> deg(n, 0);
        for (const auto& e : entries_) {
            ++deg[static_cast<std::size_t>(e.row)];
            if (e.row != e.col) ++deg[static_cast<std::size_t>(e.col)];
        }
        row_start_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) row_start_[i + 1] = row_start_[i] + deg[i];
        adj_col_.assign(row_start_[n], 0);
        adj_val_.assign(row_start_[n], 0.0);
        std::vector<std::size_t> pos(row_start_.begin(), row_start_.end() - 1);
        for (const auto& e : entries_) {
            adj_col_[pos[static_cast<std::size_t>(e.row)]] = e.col;
            adj_val_[pos[static_cast<std::size_t>(e.row)]++] = e.value;
            if (e.row != e.col) {
                adj_col_[pos[static_cast<std::size_t>(e.col)]] = e.row;
                adj_val_[pos[static_cast<std::size_t>(e.col)]++] = e.value;
            }
        }
    }

    Index n_ = 0;
    std::vector<Triplet> entries_;
    std::vector<std::size_t> row_start_;
    std::vector<Index> adj_col_;
    std::vector<double> adj_val_;
};

inline std::pair<bool, std::vector<double>> is_sdd(const SymmetricSparse& a) { return a.sdd_slack(); }

struct Edge {
    Index u;
    Index v;
    double weight;
};

// Undirected weighted graph: no self-loops, parallel edges merged by weight
// summation, canonical edge order (min endpoint, max endpoint).
class WeightedGraph {
public:
    WeightedGraph() = default;

    WeightedGraph(Index n, std::span<const Edge> edges) : n_(n) {
        if (n < 0) fail(ErrorCode::InvalidParameter, "negative vertex count");
        std::map<std::pair<Index, Index>, double> acc;
        for (const auto& e : edges) {
            if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
                fail(ErrorCode::IndexOutOfRange, "edge endpoint out of range");
            if (e.u == e.v) fail(ErrorCode::InvalidParameter, "self-loop");
            if (!(e.weight > 0.0)) fail(ErrorCode::InvalidParameter, "edge weight must be positive");
            acc[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.weight;
        }
        edges_.reserve(acc.size());
        for (const auto& [k, w] : acc) edges_.push_back({k.first, k.second, w});
        build_adjacency();
    }

    Index vertex_count() const { return n_; }
    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }

    // Neighbors of u as (vertex, weight, edge index) triples.
    struct Neighbor {
        Index vertex;
        double weight;
        std::size_t edge;
    };
    std::span<const Neighbor> neighbors(Index u) const {
        return {adj_.data() + adj_start_[static_cast<std::size_t>(u)],
                adj_start_[static_cast<std::size_t>(u) + 1] - adj_start_[static_cast<std::size_t>(u)]};
    }

    std::size_t degree(Index u) const {
        return adj_start_[static_cast<std::size_t>(u) + 1] - adj_start_[static_cast<std::size_t>(u)];
    }

    double weighted_degree(Index u) const {
        double s = 0.0;
        for (const auto& nb : neighbors(u)) s += nb.weight;
        return s;
    }

    WeightedGraph scaled(double factor) const {
        std::vector<Edge> es = edges_;
        for (auto& e : es) e.weight *= factor;
        return WeightedGraph(n_, es);
    }

private:
    void build_adjacency() {
        const auto n = static_cast<std::size_t>(n_);
        std::vector<std::size_t> deg(n, 0);
        for (const auto& e : edges_) {
            ++deg[static_cast<std::size_t>(e.u)];
            ++deg[static_cast<std::size_t>(e.v)];
        }
        adj_start_.assign(n + 1, 0);
        for (std::size_t i = 0; i < n; ++i) adj_start_[i + 1] = adj_start_[i] + deg[i];
        adj_.resize(adj_start_[n]);
        std::vector<std::size_t> pos(adj_start_.begin(), adj_start_.end() - 1);
        for (std::size_t k = 0; k < edges_.size(); ++k) {
            const auto& e = edges_[k];
            adj_[pos[static_cast<std::size_t>(e.u)]++] = {e.v, e.weight, k};
            adj_[pos[static_cast<std::size_t>(e.v)]++] = {e.u, e.weight, k};
        }
    }

    Index n_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::size_t> adj_start_;
    std::vector<Neighbor> adj_;
};

inline SymmetricSparse laplacian_of(const WeightedGraph& g) {
    std::vector<Triplet> ts;
    ts.reserve(g.edge_count() + static_cast<std::size_t>(g.vertex_count()));
    std::vector<double> diag(static_cast<std::size_t>(g.vertex_count()), 0.0);
    for (const auto& e : g.edges()) {
        ts.push_back({e.u, e.v, -e.weight});
        diag[static_cast<std::size_t>(e.u)] += e.weight;
        diag[static_cast<std::size_t>(e.v)] += e.weight;
    }
    for (Index i = 0; i < g.vertex_count(); ++i)
        if (diag[static_cast<std::size_t>(i)] != 0.0) ts.push_back({i, i, diag[static_cast<std::size_t>(i)]});
    return SymmetricSparse::from_triplets(g.vertex_count(), ts);
}

// Inverse view: requires nonpositive off-diagonals and zero row sums within
// 1e-9 * max|entry| (grid Laplacians assembled in floating point drift).
inline WeightedGraph graph_of(const SymmetricSparse& l) {
    const double tol = 1e-9 * l.max_abs_entry();
    std::vector<double> row_sum(static_cast<std::size_t>(l.dim()), 0.0);
    std::vector<Edge> edges;
    for (const auto& e : l.entries()) {
        if (e.row == e.col) {
            row_sum[static_cast<std::size_t>(e.row)] += e.value;
        } else {
            if (e.value > 0.0)
                fail(ErrorCode::NotALaplacian, "positive off-diagonal at (" + std::to_string(e.row) + "," + std::to_string(e.col) + ")");
            row_sum[static_cast<std::size_t>(e.row)] += e.value;
            row_sum[static_cast<std::size_t>(e.col)] += e.value;
            edges.push_back({e.row, e.col, -e.value});
        }
    }
    for (std::size_t i = 0; i < row_sum.size(); ++i)
        if (std::abs(row_sum[i]) > tol)
            fail(ErrorCode::NotALaplacian, "row " + std::to_string(i) + " sums to " + std::to_string(row_sum[i]));
    return WeightedGraph(l.dim(), edges);
}

inline bool is_laplacian(const SymmetricSparse& l) {
    try {
        graph_of(l);
        return true;
    } catch (const Error&) {
        return false;
    }
}

// Component labels in [0, count), assigned in order of first traversal from
// vertex 0 upward; deterministic.
struct Components {
    std::vector<Index> label;
    Index count = 0;

    std::vector<std::vector<Index>> members() const {
        std::vector<std::vector<Index>> out(static_cast<std::size_t>(count));
        for (std::size_t v = 0; v < label.size(); ++v)
            out[static_cast<std::size_t>(label[v])].push_back(static_cast<Index>(v));
        return out;
    }
};

inline Components connected_components(const WeightedGraph& g) {
    Components c;
    c.label.assign(static_cast<std::size_t>(g.vertex_count()), -1);
    std::vector<Index> stack;
    for (Index s = 0; s < g.vertex_count(); ++s) {
        if (c.label[static_cast<std::size_t>(s)] >= 0) continue;
        stack.push_back(s);
        c.label[static_cast<std::size_t>(s)] = c.count;
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            for (const auto& nb : g.neighbors(u)) {
                if (c.label[static_cast<std::size_t>(nb.vertex)] < 0) {
                    c.label[static_cast<std::size_t>(nb.vertex)] = c.count;
                    stack.push_back(nb.vertex);
                }
            }
        }
        ++c.count;
    }
    return c;
}

inline bool is_connected(const WeightedGraph& g) {
    return g.vertex_count() <= 1 || connected_components(g).count == 1;
}

// Restriction of a graph to a vertex subset (vertices relabeled 0..k-1 in the
// order given).
inline WeightedGraph induced_subgraph(const WeightedGraph& g, std::span<const Index> vertices) {
    std::vector<Index> pos(static_cast<std::size_t>(g.vertex_count()), -1);
    for (std::size_t i = 0; i < vertices.size(); ++i)
        pos[static_cast<std::size_t>(vertices[i])] = static_cast<Index>(i);
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) {
        const Index u = pos[static_cast<std::size_t>(e.u)];
        const Index v = pos[static_cast<std::size_t>(e.v)];
        if (u >= 0 && v >= 0) edges.push_back({u, v, e.weight});
    }
    return WeightedGraph(static_cast<Index>(vertices.size()), edges);
}

} // namespace sddld
