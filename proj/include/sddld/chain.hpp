#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include "sddld/dense.hpp"
#include "sddld/elimination.hpp"
#include "sddld/errors.hpp"
#include "sddld/pcg.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"
#include "sddld/sparsify.hpp"

namespace sddld {

// One level of the sparsify -> partial-Cholesky recursion. The ground vertex
// is the last index at every level; it is protected through the elimination so
// that grounded determinant identities stay exact:
//   ln det F_{B_i} = sum ln D^{(i)} + ln det F_{A_{i+1}}.
struct ChainLevel {
    SymmetricSparse a_lap;  // Laplacian A_i
    SymmetricSparse f_a;    // A_i grounded at its last vertex
    SymmetricSparse b_lap;  // preconditioner Laplacian B_i
    SymmetricSparse f_b;
    double kappa_hat = 1.0; // measured bound for L_A <= L_B <= kappa L_A
    PartialCholesky partial; // elimination of B_i producing A_{i+1}
    double tree_scale = 1.0;
    std::size_t off_tree_samples = 0;
    double stretch = 0.0;    // exact stretch of A_i over the level's tree
    double tree_pld = 0.0;   // exact pld of the (unscaled) level tree
    bool a_connected = true;
    Index n = 0;
    std::size_t m_a = 0;
    std::size_t m_b = 0;
};

struct ChainOptions {
    Index dense_threshold = 100;
    double target_kappa = 32.0;
};

struct PreconditionerChain {
    std::vector<ChainLevel> levels;
    Index base_n = 0;            // vertex count of the final Laplacian A_d
    double base_logdet = 0.0;    // ln det of the grounded A_d (0 when base_n == 1)
    std::shared_ptr<DenseCholesky> base_factor; // grounded A_d, absent when base_n == 1
    Index top_n = 0;

    double sum_log_pivots() const {
        double s = 0.0;
        for (const auto& lv : levels) s += lv.partial.sum_log_pivots;
        return s;
    }
};

// Build the chain for a connected Laplacian until the dense base case.
inline PreconditionerChain build_chain(const WeightedGraph& g, const CounterRng& rng,
                                       const ChainOptions& opts = {}) {
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "chain needs a connected graph");
    PreconditionerChain chain;
    chain.top_n = g.vertex_count();
    const std::size_t cap =
        static_cast<std::size_t>(std::ceil(std::log2(std::max(2.0, static_cast<double>(g.vertex_count()))))) + 10;

    WeightedGraph cur = g;
    while (cur.vertex_count() >= opts.dense_threshold) {
        if (chain.levels.size() >= cap)
            fail(ErrorCode::ChainStalled, "chain exceeded its length cap");
        ChainLevel lv;
        lv.n = cur.vertex_count();
        lv.m_a = cur.edge_count();
        lv.a_connected = is_connected(cur);
        lv.a_lap = laplacian_of(cur);
        lv.f_a = lv.a_lap.without_vertex(lv.n - 1);

        auto inc = incremental_sparsify(cur, opts.target_kappa,
                                        rng.substream(rng_stream::tagged(rng_stream::kSparsify, chain.levels.size())));
        lv.b_lap = laplacian_of(inc.b);
        lv.f_b = lv.b_lap.without_vertex(lv.n - 1);
        lv.kappa_hat = inc.kappa_hat;
        lv.tree_scale = inc.tree_scale;
        lv.off_tree_samples = inc.off_tree_samples;
        lv.stretch = inc.lst.stretch.value;
        lv.tree_pld = std::log(static_cast<double>(lv.n));
        for (const auto& e : inc.lst.tree.edges()) lv.tree_pld += std::log(e.weight);
        lv.m_b = inc.b.edge_count();

        lv.partial = greedy_eliminate(lv.b_lap, lv.n - 1, /*force_progress=*/true);
        if (lv.partial.remaining_dim() >= lv.n)
            fail(ErrorCode::ChainStalled, "elimination made no progress");
        WeightedGraph next = graph_of(lv.partial.remaining);
        chain.levels.push_back(std::move(lv));
        cur = std::move(next);
    }

    chain.base_n = cur.vertex_count();
    if (chain.base_n > 1) {
        const SymmetricSparse f = laplacian_of(cur).without_vertex(chain.base_n - 1);
        chain.base_factor = std::make_shared<DenseCholesky>(f);
        chain.base_logdet = chain.base_factor->logdet();
    }
    return chain;
}

// Approximate inverses along the chain. The preconditioner at level i applies
// B_i's own partial factor with the Schur block handled by the level below;
// at the last level the dense base makes that application exact.
class ChainSolver {
public:
    explicit ChainSolver(const PreconditionerChain& chain) : chain_(&chain) {
        cond_b_.assign(chain.levels.size(), 0.0);
    }

    // Multiplicative cycle through levels [level..d]; in/out are grounded
    // coordinates of level `level` (length n_level - 1).
    void precond_apply(std::size_t level, std::span<const double> in, std::span<double> out) const {
        const auto& lv = chain_->levels[level];
        const auto n = static_cast<std::size_t>(lv.n);
        std::vector<double> t(n, 0.0);
        std::copy(in.begin(), in.end(), t.begin());
        t[n - 1] = 0.0;
        lv.partial.apply_forward(t);
        lv.partial.apply_pivot_inverse(t);

        const auto& kept = lv.partial.kept; // ground is last
        const std::size_t next_dim = kept.size() - 1;
        if (next_dim > 0) {
            std::vector<double> cin(next_dim), cout(next_dim);
            for (std::size_t j = 0; j < next_dim; ++j) cin[j] = t[static_cast<std::size_t>(kept[j])];
            if (level + 1 < chain_->levels.size()) {
                precond_apply(level + 1, cin, cout);
            } else if (chain_->base_factor) {
                chain_->base_factor->solve(cin, cout);
            } else {
                std::fill(cout.begin(), cout.end(), 0.0);
            }
            for (std::size_t j = 0; j < next_dim; ++j) t[static_cast<std::size_t>(kept[j])] = cout[j];
        }
        t[n - 1] = 0.0;
        lv.partial.apply_backward(t);
        for (std::size_t i = 0; i + 1 < n; ++i) out[i] = t[i];
    }

    ApplyFn precond_op(std::size_t level) const {
        return [this, level](std::span<const double> in, std::span<double> out) {
            precond_apply(level, in, out);
        };
    }

    // Condition estimate of F_{B_level}, cached; feeds the solver-tolerance
    // rule and the PCG certificate.
    double cond_b(std::size_t level) const {
        if (cond_b_[level] == 0.0) {
            const auto& lv = chain_->levels[level];
            const ApplyFn apply = matvec_op(lv.f_b);
            const ApplyFn boot = [this, level, &lv](std::span<const double> in, std::span<double> out) {
                pcg_solve(matvec_op(lv.f_b), precond_op(level), in, out, 1e-8, 1e4, 400);
            };
            cond_b_[level] = estimate_condition_number(apply, boot, static_cast<std::size_t>(lv.n - 1),
                                                       0xC04DULL ^ level);
        }
        return cond_b_[level];
    }

    // nu-accurate solve with F_{B_level}; returns the PCG result for flags.
    PcgResult solve_b(std::size_t level, std::span<const double> b, std::span<double> x, double nu) const {
        const auto& lv = chain_->levels[level];
        return pcg_solve(matvec_op(lv.f_b), precond_op(level), b, x, nu, cond_b(level));
    }

private:
    const PreconditionerChain* chain_;
    mutable std::vector<double> cond_b_;
};

} // namespace sddld
