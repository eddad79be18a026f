#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/lapsolve.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"
#include "sddld/stretch.hpp"

namespace sddld {

namespace detail {

// Vose alias table for O(1) discrete sampling; construction is deterministic.
class AliasTable {
public:
    explicit AliasTable(std::span<const double> weights) {
        const std::size_t n = weights.size();
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        double total = 0.0;
        for (double w : weights) total += w;
        if (n == 0 || !(total > 0.0)) fail(ErrorCode::InvalidParameter, "alias table needs positive mass");
        total_ = total;
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i) scaled[i] = weights[i] * static_cast<double>(n) / total;
        std::vector<std::size_t> small, large;
        for (std::size_t i = n; i-- > 0;)
            (scaled[i] < 1.0 ? small : large).push_back(i);
        while (!small.empty() && !large.empty()) {
            const std::size_t s = small.back();
            small.pop_back();
            const std::size_t l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::size_t s : small) prob_[s] = 1.0;
        for (std::size_t l : large) prob_[l] = 1.0;
    }

    std::size_t draw(CounterRng& rng) const {
        const std::size_t i = static_cast<std::size_t>(rng.next_below(prob_.size()));
        return rng.next_double() < prob_[i] ? i : alias_[i];
    }

    double probability(std::size_t i, std::span<const double> weights) const {
        return weights[i] / total_;
    }

    double total() const { return total_; }

private:
    std::vector<double> prob_;
    std::vector<std::size_t> alias_;
    double total_ = 0.0;
};

// Per-tree-edge stretch load: for tree edge f, sum over G-edges e routed
// through f of w_e / w_f. Computed by LCA difference counts and one
// subtree-sum sweep.
inline std::vector<double> tree_edge_loads(const WeightedGraph& g, const WeightedGraph& t, const TreePaths& paths) {
    std::vector<double> count(static_cast<std::size_t>(t.vertex_count()), 0.0);
    for (const auto& e : g.edges()) {
        const Index a = paths.lca(e.u, e.v);
        count[static_cast<std::size_t>(e.u)] += e.weight;
        count[static_cast<std::size_t>(e.v)] += e.weight;
        count[static_cast<std::size_t>(a)] -= 2.0 * e.weight;
    }
    std::vector<double> load(t.edge_count(), 0.0);
    const auto& order = paths.bfs_order();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const Index v = *it;
        const Index p = paths.parent(v);
        if (p < 0) continue;
        count[static_cast<std::size_t>(p)] += count[static_cast<std::size_t>(v)];
        const std::size_t f = paths.parent_edge(v);
        load[f] = count[static_cast<std::size_t>(v)] / t.edges()[f].weight;
    }
    return load;
}

} // namespace detail

struct LowStretchTree {
    WeightedGraph tree;
    StretchReport stretch;                 // exact, per-edge over g
    std::vector<std::size_t> tree_edges;   // indices into g's edge list
    std::size_t swaps_accepted = 0;
};

// Heuristic low-stretch spanning tree: maximum-weight spanning tree with
// randomized tie-breaking, then a bounded local-improvement pass that swaps a
// high-stretch off-tree edge for the most loaded tree edge on its cycle
// whenever that lowers the total stretch. The subgraph property gives
// L_T <= L_G unconditionally; quality is certified a posteriori by the
// measured stretch.
inline LowStretchTree low_stretch_tree(const WeightedGraph& g, const CounterRng& rng,
                                       std::size_t max_swap_attempts = 384) {
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "spanning tree of a disconnected graph");
    LowStretchTree out;
    out.tree_edges = max_weight_spanning_tree_edges(g, &rng);
    out.tree = subgraph_from_edges(g, out.tree_edges);
    if (g.vertex_count() <= 2 || g.edge_count() == out.tree_edges.size()) {
        out.stretch = tree_stretch_exact(g, out.tree);
        return out;
    }

    std::vector<char> in_tree(g.edge_count(), 0);
    for (std::size_t e : out.tree_edges) in_tree[e] = 1;
    StretchReport rep = tree_stretch_exact(g, out.tree);

    max_swap_attempts = std::min(max_swap_attempts, 2 * g.edge_count());
    std::size_t attempts = 0;
    for (int pass = 0; pass < 4 && attempts < max_swap_attempts; ++pass) {
        // Off-tree edges ordered by decreasing stretch under the current tree.
        std::vector<std::size_t> cand;
        for (std::size_t e = 0; e < g.edge_count(); ++e)
            if (!in_tree[e]) cand.push_back(e);
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return (*rep.per_edge)[a] > (*rep.per_edge)[b];
        });
        std::size_t accepted_this_pass = 0, consecutive_rejects = 0;
        for (std::size_t e : cand) {
            if (attempts >= max_swap_attempts || consecutive_rejects >= 64) break;
            ++attempts;
            TreePaths paths(out.tree, 0);
            const auto loads = detail::tree_edge_loads(g, out.tree, paths);
            const auto cycle = paths.path_edges(g.edges()[e].u, g.edges()[e].v);
            if (cycle.empty()) continue;
            std::size_t f_local = cycle[0];
            for (std::size_t c : cycle)
                if (loads[c] > loads[f_local]) f_local = c;
            // Map the tree-local edge back to g's edge index.
            std::vector<std::size_t> trial = out.tree_edges;
            trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(f_local));
            trial.push_back(e);
            std::sort(trial.begin(), trial.end());
            WeightedGraph t2 = subgraph_from_edges(g, trial);
            if (!is_connected(t2)) {
                ++consecutive_rejects;
                continue;
            }
            StretchReport rep2 = tree_stretch_exact(g, t2);
            if (rep2.value < rep.value * (1.0 - 1e-12)) {
                out.tree = std::move(t2);
                out.tree_edges = std::move(trial);
                rep = std::move(rep2);
                in_tree.assign(g.edge_count(), 0);
                for (std::size_t te : out.tree_edges) in_tree[te] = 1;
                ++out.swaps_accepted;
                ++accepted_this_pass;
                consecutive_rejects = 0;
            } else {
                ++consecutive_rejects;
            }
        }
        if (accepted_this_pass == 0) break;
    }
    out.stretch = std::move(rep);
    return out;
}

// Spectral sparsifier by effective-resistance sampling: q = ceil(9 n ln n / eps^2)
// draws with replacement, probability proportional to w_e * R_eff(e) (sketched),
// each hit contributing weight w_e / (q p_e). Resamples on a disconnected
// outcome, up to 5 times.
inline WeightedGraph spectral_sparsify(const WeightedGraph& g, double eps, const CounterRng& rng) {
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::InvalidParameter, "eps must lie in (0,1)");
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "sparsifier needs a connected graph");
    const Index n = g.vertex_count();
    if (n <= 2 || g.edge_count() <= 1) return g;

    // Constant-accuracy resistances suffice for sampling probabilities.
    ResistanceSketch sketch(g, 0.5, rng.substream(rng_stream::tagged(rng_stream::kSketch, 0xABCD)));
    std::vector<double> tau(g.edge_count());
    double total = 0.0;
    for (std::size_t e = 0; e < g.edge_count(); ++e) {
        const auto& ed = g.edges()[e];
        tau[e] = std::max(1e-12, ed.weight * sketch.query(ed.u, ed.v));
        total += tau[e];
    }
    detail::AliasTable table(tau);

    const auto q = static_cast<std::size_t>(
        std::ceil(9.0 * static_cast<double>(n) * std::log(static_cast<double>(n)) / (eps * eps)));
    for (int attempt = 0; attempt < 5; ++attempt) {
        CounterRng draw = rng.substream(rng_stream::tagged(rng_stream::kSparsify, static_cast<std::uint64_t>(attempt)));
        std::vector<double> acc(g.edge_count(), 0.0);
        for (std::size_t j = 0; j < q; ++j) {
            const std::size_t e = table.draw(draw);
            acc[e] += g.edges()[e].weight / (static_cast<double>(q) * (tau[e] / total));
        }
        std::vector<Edge> edges;
        for (std::size_t e = 0; e < g.edge_count(); ++e)
            if (acc[e] > 0.0) edges.push_back({g.edges()[e].u, g.edges()[e].v, acc[e]});
        WeightedGraph h(n, edges);
        if (is_connected(h)) return h;
    }
    fail(ErrorCode::SparsificationFailed, "sampled graph stayed disconnected after 5 attempts");
}

struct IncrementalSparsifier {
    WeightedGraph b;             // preconditioner graph, L_G <= L_B <= kappa_hat L_G (measured)
    double kappa_hat = 1.0;
    double tree_scale = 1.0;
    std::size_t off_tree_samples = 0;
    LowStretchTree lst;
};

namespace detail {

// Top eigenvalue of the pencil (num, den): iterate x <- den^{-1} (num x) and
// read the generalized Rayleigh quotient (x^T num x) / (x^T den x).
inline double generalized_lambda_max(const SymmetricSparse& num, const SymmetricSparse& den,
                                     const LaplacianSolver& den_solver,
                                     std::uint64_t seed, int iterations = 30) {
    const std::size_t m = num.dim() < 1 ? 0 : static_cast<std::size_t>(num.dim());
    if (m == 0) return 1.0;
    CounterRng rng(seed, rng_stream::tagged(rng_stream::kPowerIter, m));
    std::vector<double> x(m), nx(m), dx(m), y(m);
    for (auto& v : x) v = rng.next_gaussian();
    double lam = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const double nn = norm2(x);
        if (nn == 0.0) break;
        for (auto& v : x) v /= nn;
        num.matvec(x, nx);
        den.matvec(x, dx);
        const double den_q = dot(x, dx);
        if (den_q > 0.0) lam = dot(x, nx) / den_q;
        den_solver.solve(nx, y, 1e-9);
        std::swap(x, y);
    }
    return lam;
}

} // namespace detail

// Near-tree preconditioner: the low-stretch tree scaled up, plus t off-tree
// edges sampled proportionally to their tree stretch. The spectral ordering
// L_G <= L_B is enforced by measuring the top generalized eigenvalue and
// rescaling with margin; kappa_hat is then measured in the other direction and
// reported rather than assumed.
inline IncrementalSparsifier incremental_sparsify(const WeightedGraph& g, double target_kappa, const CounterRng& rng) {
    if (!(target_kappa > 1.0)) fail(ErrorCode::InvalidParameter, "target kappa must exceed 1");
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "sparsifier needs a connected graph");
    IncrementalSparsifier out;
    const Index n = g.vertex_count();
    if (n <= 2 || g.edge_count() == static_cast<std::size_t>(n - 1)) {
        out.lst = low_stretch_tree(g, rng);
        out.b = g;
        out.kappa_hat = 1.0;
        return out;
    }

    out.lst = low_stretch_tree(g, rng);
    const double st = out.lst.stretch.value;
    const double logn = std::log(static_cast<double>(n));

    std::vector<char> in_tree(g.edge_count(), 0);
    for (std::size_t e : out.lst.tree_edges) in_tree[e] = 1;
    std::vector<std::size_t> off;
    std::vector<double> off_stretch;
    for (std::size_t e = 0; e < g.edge_count(); ++e)
        if (!in_tree[e]) {
            off.push_back(e);
            off_stretch.push_back((*out.lst.stretch.per_edge)[e]);
        }

    std::size_t t = static_cast<std::size_t>(st * logn / target_kappa);
    if (off.empty()) t = 0;
    const double s = std::max(1.0, std::ceil(std::sqrt(st * logn / static_cast<double>(std::max<std::size_t>(t, 1)))));
    out.tree_scale = s;
    out.off_tree_samples = t;

    std::vector<Edge> edges;
    for (std::size_t e : out.lst.tree_edges) {
        Edge te = g.edges()[e];
        te.weight *= s;
        edges.push_back(te);
    }
    if (t > 0) {
        double total = 0.0;
        for (double v : off_stretch) total += v;
        detail::AliasTable table(off_stretch);
        CounterRng draw = rng.substream(rng_stream::tagged(rng_stream::kSparsify, 0x0FF));
        std::vector<double> acc(off.size(), 0.0);
        for (std::size_t j = 0; j < t; ++j) {
            const std::size_t i = table.draw(draw);
            acc[i] += g.edges()[off[i]].weight / (static_cast<double>(t) * (off_stretch[i] / total));
        }
        for (std::size_t i = 0; i < off.size(); ++i)
            if (acc[i] > 0.0) edges.push_back({g.edges()[off[i]].u, g.edges()[off[i]].v, acc[i]});
    }
    WeightedGraph b0(n, edges);

    // Enforce L_G <= L_B: measure lambda_max(F_B^+ F_G) and scale up if needed.
    LaplacianSolver b_solver(b0);
    const SymmetricSparse f_g = laplacian_of(g).without_vertex(n - 1);
    const SymmetricSparse f_b0 = b_solver.grounded_matrix();
    const double lam_ab = detail::generalized_lambda_max(f_g, f_b0, b_solver, 0xA0B0 ^ static_cast<std::uint64_t>(n));
    double scale_fix = 1.0;
    if (lam_ab > 0.999) scale_fix = lam_ab * 1.05;
    out.b = scale_fix == 1.0 ? std::move(b0) : b0.scaled(scale_fix);
    out.tree_scale *= scale_fix;

    // Measured kappa: lambda_max(F_G^+ F_B) with margin.
    LaplacianSolver g_solver(g);
    const SymmetricSparse f_b = laplacian_of(out.b).without_vertex(n - 1);
    const double lam_ba = detail::generalized_lambda_max(f_b, f_g, g_solver, 0xB0A0 ^ static_cast<std::uint64_t>(n));
    out.kappa_hat = std::max(1.0, lam_ba * 1.05);
    return out;
}

} // namespace sddld
