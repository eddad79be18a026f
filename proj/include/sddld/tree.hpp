#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

// LDL^T factorization of a tree Laplacian grounded at a chosen vertex.
// Eliminating leaves first, the pivot of each vertex is exactly the weight of
// its parent edge and every unit-factor entry is -1, so the whole factor is
// the parent-pointer array. Factorization and solves are O(n).
class TreeFactor {
public:
    TreeFactor() = default;

    static TreeFactor build(const WeightedGraph& t, Index ground) {
        const Index n = t.vertex_count();
        if (ground < 0 || ground >= n) fail(ErrorCode::IndexOutOfRange, "ground vertex");
        if (t.edge_count() != static_cast<std::size_t>(n - 1) || !is_connected(t))
            fail(ErrorCode::NotATree, "expected a connected graph with n-1 edges");

        TreeFactor f;
        f.n_ = n;
        f.ground_ = ground;
        f.parent_.assign(static_cast<std::size_t>(n), -1);
        f.pivot_.assign(static_cast<std::size_t>(n), 0.0);

        // BFS from the ground; reversed order eliminates children first.
        std::vector<Index> order;
        order.reserve(static_cast<std::size_t>(n));
        std::vector<char> visited(static_cast<std::size_t>(n), 0);
        order.push_back(ground);
        visited[static_cast<std::size_t>(ground)] = 1;
        for (std::size_t head = 0; head < order.size(); ++head) {
            const Index u = order[head];
            for (const auto& nb : t.neighbors(u)) {
                if (!visited[static_cast<std::size_t>(nb.vertex)]) {
                    visited[static_cast<std::size_t>(nb.vertex)] = 1;
                    f.parent_[static_cast<std::size_t>(nb.vertex)] = u;
                    f.pivot_[static_cast<std::size_t>(nb.vertex)] = nb.weight;
                    order.push_back(nb.vertex);
                }
            }
        }
        f.elim_order_.assign(order.rbegin(), order.rend() - 1); // children first, ground excluded
        // Grounded index maps (original vertex <-> row of F with ground removed).
        f.grounded_of_.assign(static_cast<std::size_t>(n), -1);
        f.vertex_of_.reserve(static_cast<std::size_t>(n - 1));
        for (Index v = 0; v < n; ++v) {
            if (v == ground) continue;
            f.grounded_of_[static_cast<std::size_t>(v)] = static_cast<Index>(f.vertex_of_.size());
            f.vertex_of_.push_back(v);
        }
        return f;
    }

    Index dim() const { return n_; }
    Index ground() const { return ground_; }

    // Pivots in elimination order (all positive for a connected tree).
    std::vector<double> pivots() const {
        std::vector<double> d;
        d.reserve(elim_order_.size());
        for (Index v : elim_order_) d.push_back(pivot_[static_cast<std::size_t>(v)]);
        return d;
    }

    // ln det of the grounded tree Laplacian = sum of log pivots.
    double grounded_logdet() const {
        double s = 0.0;
        for (Index v : elim_order_) s += std::log(pivot_[static_cast<std::size_t>(v)]);
        return s;
    }

    double pld() const { return std::log(static_cast<double>(n_)) + grounded_logdet(); }

    // Solve F x = b in grounded coordinates (length n-1, ground row removed).
    void solve_grounded(std::span<const double> b, std::span<double> x) const {
        const auto m = static_cast<std::size_t>(n_ - 1);
        if (b.size() != m || x.size() != m)
            fail(ErrorCode::DimensionMismatch, "grounded solve expects length " + std::to_string(m));
        static thread_local std::vector<double> work_;
        work_.assign(static_cast<std::size_t>(n_), 0.0);
        for (std::size_t i = 0; i < m; ++i) work_[static_cast<std::size_t>(vertex_of_[i])] = b[i];
        // L z = b: every unit-factor entry is -1, so values flow to parents.
        for (Index v : elim_order_) {
            const Index p = parent_[static_cast<std::size_t>(v)];
            if (p != ground_) work_[static_cast<std::size_t>(p)] += work_[static_cast<std::size_t>(v)];
        }
        // D^{-1}, then L^T x = z walking parents first.
        for (auto it = elim_order_.rbegin(); it != elim_order_.rend(); ++it) {
            const Index v = *it;
            const Index p = parent_[static_cast<std::size_t>(v)];
            const double xp = (p == ground_) ? 0.0 : work_[static_cast<std::size_t>(p)];
            work_[static_cast<std::size_t>(v)] = work_[static_cast<std::size_t>(v)] / pivot_[static_cast<std::size_t>(v)] + xp;
        }
        for (std::size_t i = 0; i < m; ++i) x[i] = work_[static_cast<std::size_t>(vertex_of_[i])];
    }

    std::vector<double> solve_grounded(std::span<const double> b) const {
        std::vector<double> x(static_cast<std::size_t>(n_ - 1));
        solve_grounded(b, x);
        return x;
    }

private:
    Index n_ = 0;
    Index ground_ = 0;
    std::vector<Index> parent_;
    std::vector<double> pivot_;
    std::vector<Index> elim_order_;
    std::vector<Index> grounded_of_;
    std::vector<Index> vertex_of_;
};

inline TreeFactor tree_factorize(const WeightedGraph& t, Index ground) { return TreeFactor::build(t, ground); }

inline std::vector<double> tree_solve(const TreeFactor& f, std::span<const double> b) {
    return f.solve_grounded(b);
}

} // namespace sddld
