#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sddld/chain.hpp"
#include "sddld/dense.hpp"
#include "sddld/elimination.hpp"
#include "sddld/errors.hpp"
#include "sddld/lapsolve.hpp"
#include "sddld/reduction.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"
#include "sddld/sparsify.hpp"
#include "sddld/stretch.hpp"
#include "sddld/trace.hpp"
#include "sddld/tree.hpp"

namespace sddld {

// Knobs shared by the top-level estimators. `max_plan_cost` caps p*l per
// remainder estimate; a plan cut down by the cap is flagged in the report and
// its accuracy then rests on the measured-variance regime instead of the
// worst-case sample bound. `nu_floor` bounds the inner solver tolerance away
// from impractically tiny values, likewise flagged.
struct McControls {
    unsigned threads = 1;
    std::size_t max_plan_cost = 1'000'000;
    double nu_floor = 1e-9;
    NuRule nu_rule = NuRule::proof;
    Index dense_threshold = 100;
    double target_kappa = 32.0;
};

struct LevelDiag {
    int side = 0;      // 0: 2n-dimensional Laplacian, 1: n-dimensional one
    int component = 0;
    int level = -1;    // -1: exact (dense or tree) contribution
    Index n = 0;
    std::size_t m_a = 0;
    std::size_t m_b = 0;
    double kappa_hat = 1.0;
    double cond_b = 1.0;
    double stretch = 0.0;
    std::size_t p = 0;
    std::size_t l = 0;
    double nu = 0.0;
    bool plan_capped = false;
    bool solver_converged = true;
    double remainder = 0.0;       // ln det(F_B^{-1} F_A) estimate
    double sum_log_pivots = 0.0;  // exact factor contribution
};

struct EstimateReport {
    double estimate = 0.0;    // n^{-1} ln|A|
    double raw_logdet = 0.0;  // n * estimate
    std::optional<double> lower, upper; // per-vertex deterministic sandwich
    double eps = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    std::string method;
    Index n = 0;
    std::size_t m = 0;
    bool degraded = false;     // an inner solve missed its certificate
    bool plan_capped = false;  // some sampling plan was cut by the compute cap
    std::vector<LevelDiag> levels;
    double time_ms = 0.0;
};

namespace detail {

struct LapComponent {
    WeightedGraph graph;
    std::vector<Index> vertices;
};

inline std::vector<LapComponent> laplacian_components(const SymmetricSparse& l) {
    const WeightedGraph g = graph_of(l);
    std::vector<LapComponent> out;
    for (auto& members : connected_components(g).members()) {
        LapComponent c;
        c.graph = induced_subgraph(g, members);
        c.vertices = std::move(members);
        out.push_back(std::move(c));
    }
    return out;
}

inline CounterRng scope_rng(std::uint64_t seed, int side, int comp, int level = 0) {
    CounterRng base(seed, 0);
    return base.substream((static_cast<std::uint64_t>(side) << 40) ^
                          (static_cast<std::uint64_t>(static_cast<std::uint32_t>(comp)) << 8) ^
                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(level)));
}

inline double exact_tree_pld(const WeightedGraph& t) {
    double s = std::log(static_cast<double>(t.vertex_count()));
    for (const auto& e : t.edges()) s += std::log(e.weight);
    return s;
}

// Top eigenvalue of the pencil (F_G, F_T) through exact tree solves.
inline double tree_pencil_lambda_max(const SymmetricSparse& f_g, const SymmetricSparse& f_t,
                                     const TreeFactor& tf, std::uint64_t salt, int iterations = 40) {
    const std::size_t m = static_cast<std::size_t>(f_g.dim());
    if (m == 0) return 1.0;
    CounterRng rng(salt, rng_stream::tagged(rng_stream::kPowerIter, m));
    std::vector<double> x(m), gx(m), tx(m), y(m);
    for (auto& v : x) v = rng.next_gaussian();
    double lam = 1.0;
    for (int it = 0; it < iterations; ++it) {
        const double nn = norm2(x);
        if (nn == 0.0) break;
        for (auto& v : x) v /= nn;
        f_g.matvec(x, gx);
        f_t.matvec(x, tx);
        const double den = dot(x, tx);
        if (den > 0.0) lam = dot(x, gx) / den;
        tf.solve_grounded(gx, y);
        std::swap(x, y);
    }
    return lam;
}

// pld of one connected component through the scaled-tree preconditioner and
// the Monte Carlo remainder. Also returns the deterministic stretch sandwich.
struct SidePld {
    double pld = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

inline SidePld pld_component_tree(const WeightedGraph& g, double eps_c, double eta_c,
                                  std::uint64_t seed, int side, int comp,
                                  const McControls& ctl, std::vector<LevelDiag>& diags,
                                  bool& any_capped) {
    const Index n = g.vertex_count();
    SidePld out;
    if (n <= 1) return out;

    LevelDiag d;
    d.side = side;
    d.component = comp;
    d.n = n;
    d.m_a = g.edge_count();

    auto lst = low_stretch_tree(g, scope_rng(seed, side, comp));
    const double pld_t = exact_tree_pld(lst.tree);
    d.stretch = lst.stretch.value;
    auto [lo, up] = pld_bounds_from_stretch(pld_t, lst.stretch.value, n);
    out.lower = lo;
    out.upper = up;

    if (g.edge_count() == static_cast<std::size_t>(n - 1)) {
        // Already a tree: the pld is exact and the sandwich is tight.
        out.pld = pld_t;
        d.level = -1;
        d.sum_log_pivots = pld_t - std::log(static_cast<double>(n));
        diags.push_back(d);
        return out;
    }

    const SymmetricSparse f_g = laplacian_of(g).without_vertex(n - 1);
    const SymmetricSparse f_t = laplacian_of(lst.tree).without_vertex(n - 1);
    TreeFactor tf = TreeFactor::build(lst.tree, n - 1);
    const double lam = tree_pencil_lambda_max(f_g, f_t, tf, seed ^ 0x7EE5ULL);
    const double kappa = std::max(1.0 + 1e-9, 1.1 * lam);
    d.kappa_hat = kappa;

    SamplePlan plan = cap_plan(plan_samples(eps_c, eta_c, 1.0 / kappa, static_cast<std::size_t>(n - 1)),
                               ctl.max_plan_cost);
    any_capped = any_capped || plan.capped;
    d.plan_capped = plan.capped;
    d.p = plan.p;
    d.l = plan.l;
    d.nu = 0.0; // tree solves are direct

    RemainderProblem prob;
    prob.dim = static_cast<std::size_t>(n - 1);
    prob.kappa = kappa;
    prob.nu = 0.0;
    prob.a_apply = matvec_op(f_g);
    prob.b_solve = [&tf, kappa](std::span<const double> in, std::span<double> xout) {
        tf.solve_grounded(in, xout);
        for (auto& v : xout) v /= kappa;
    };
    const double rem = static_cast<double>(n - 1) *
                       mc_logdet_remainder(prob, plan, scope_rng(seed, side, comp, 1), ctl.threads);
    // pld(B) for B = kappa * T.
    const double pld_b = pld_t + static_cast<double>(n - 1) * std::log(kappa);
    out.pld = pld_b + rem;
    d.remainder = rem;
    d.sum_log_pivots = pld_b - std::log(static_cast<double>(n));
    d.level = 0;
    diags.push_back(d);
    return out;
}

// pld of one connected component through the full chain. Falls back to the
// dense route below the threshold.
inline SidePld pld_component_ultra(const WeightedGraph& g, double eps_c, double eta_c,
                                   std::uint64_t seed, int side, int comp,
                                   const McControls& ctl, std::vector<LevelDiag>& diags,
                                   bool& any_capped, bool& any_degraded) {
    const Index n = g.vertex_count();
    SidePld out;
    if (n <= 1) return out;

    if (n < ctl.dense_threshold) {
        const SymmetricSparse f = laplacian_of(g).without_vertex(n - 1);
        const double ld = std::log(static_cast<double>(n)) + dense_logdet(f);
        out.pld = out.lower = out.upper = ld;
        LevelDiag d;
        d.side = side;
        d.component = comp;
        d.n = n;
        d.m_a = g.edge_count();
        d.level = -1;
        d.sum_log_pivots = ld - std::log(static_cast<double>(n));
        diags.push_back(d);
        return out;
    }

    PreconditionerChain chain = build_chain(g, scope_rng(seed, side, comp),
                                            {ctl.dense_threshold, ctl.target_kappa});
    ChainSolver solver(chain);

    // Deterministic sandwich from the level-1 tree (a subgraph of g).
    auto [lo, up] = pld_bounds_from_stretch(chain.levels.front().tree_pld, chain.levels.front().stretch, n);
    out.lower = lo;
    out.upper = up;

    double total = chain.base_logdet + chain.sum_log_pivots();
    const std::size_t dlen = chain.levels.size();
    for (std::size_t i = 0; i < dlen; ++i) {
        const auto& lv = chain.levels[i];
        LevelDiag d;
        d.side = side;
        d.component = comp;
        d.level = static_cast<int>(i);
        d.n = lv.n;
        d.m_a = lv.m_a;
        d.m_b = lv.m_b;
        d.kappa_hat = lv.kappa_hat;
        d.stretch = lv.stretch;
        d.sum_log_pivots = lv.partial.sum_log_pivots;

        const double eps_i = eps_c * std::pow(0.5, static_cast<double>(i + 1)) *
                             (static_cast<double>(n) / static_cast<double>(lv.n));
        const double eta_i = eta_c / static_cast<double>(dlen);
        const double cond = solver.cond_b(i);
        d.cond_b = cond;
        double nu = solver_tolerance(eps_i, lv.kappa_hat, cond, ctl.nu_rule);
        if (ctl.nu_floor > 0.0 && nu < ctl.nu_floor) {
            nu = ctl.nu_floor;
            any_capped = true;
        }
        d.nu = nu;

        SamplePlan plan = cap_plan(plan_samples(eps_i, eta_i, 1.0 / lv.kappa_hat,
                                                static_cast<std::size_t>(lv.n - 1)),
                                   ctl.max_plan_cost);
        any_capped = any_capped || plan.capped;
        d.plan_capped = plan.capped;
        d.p = plan.p;
        d.l = plan.l;

        bool level_converged = true;
        RemainderProblem prob;
        prob.dim = static_cast<std::size_t>(lv.n - 1);
        prob.kappa = lv.kappa_hat;
        prob.nu = nu;
        prob.a_apply = matvec_op(lv.f_a);
        prob.b_solve = [&solver, i, nu, &level_converged](std::span<const double> in, std::span<double> xout) {
            const PcgResult r = solver.solve_b(i, in, xout, nu);
            if (!r.converged) level_converged = false;
        };
        const double rem = static_cast<double>(lv.n - 1) *
                           mc_logdet_remainder(prob, plan, scope_rng(seed, side, comp, static_cast<int>(i) + 1),
                                               ctl.threads);
        total += rem;
        d.remainder = rem;
        d.solver_converged = level_converged;
        if (!level_converged) any_degraded = true;
        diags.push_back(d);
    }
    out.pld = std::log(static_cast<double>(n)) + total;
    return out;
}

struct SideTotals {
    double pld = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    Index total_n = 0;
};

template <typename ComponentFn>
inline SideTotals accumulate_side(const SymmetricSparse& lap, ComponentFn&& fn) {
    SideTotals t;
    t.total_n = lap.dim();
    int comp = 0;
    for (auto& c : laplacian_components(lap)) {
        const SidePld r = fn(c.graph, comp);
        t.pld += r.pld;
        t.lower += r.lower;
        t.upper += r.upper;
        ++comp;
    }
    return t;
}

inline void finalize(EstimateReport& rep, const SideTotals& til, const SideTotals& hat, Index n,
                     std::chrono::steady_clock::time_point start) {
    rep.raw_logdet = til.pld - hat.pld;
    rep.estimate = rep.raw_logdet / static_cast<double>(n);
    rep.lower = (til.lower - hat.upper) / static_cast<double>(n);
    rep.upper = (til.upper - hat.lower) / static_cast<double>(n);
    if (!std::isfinite(rep.estimate))
        fail(ErrorCode::InvalidParameter, "estimate is not finite");
    rep.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline void check_estimate_inputs(const SymmetricSparse& a, double eps, double eta) {
    if (!(eps > 0.0 && eps <= 10.0)) fail(ErrorCode::InvalidParameter, "eps must lie in (0, 10]");
    if (!(eta > 0.0 && eta < 1.0)) fail(ErrorCode::InvalidParameter, "eta must lie in (0, 1)");
    if (!a.sdd_slack().first) fail(ErrorCode::NotSDD, "input fails the diagonal dominance test");
}

} // namespace detail

// Estimator with the scaled low-stretch tree as the preconditioner on both
// reduced Laplacians; the remainder is sampled with exact O(n) tree solves.
inline EstimateReport tree_logdet(const SymmetricSparse& a, double eps, double eta,
                                  std::uint64_t seed, const McControls& ctl = {}) {
    const auto start = std::chrono::steady_clock::now();
    detail::check_estimate_inputs(a, eps, eta);
    const Index n = a.dim();
    EstimateReport rep;
    rep.method = "tree";
    rep.eps = eps;
    rep.eta = eta;
    rep.seed = seed;
    rep.n = n;
    rep.m = a.nnz_upper();

    const KelnerPair kp = kelner_reduce(a);
    bool capped = false;
    const auto run_side = [&](const SymmetricSparse& lap, int side, double eps_side, double eta_side) {
        const int comps = connected_components(graph_of(lap)).count;
        return detail::accumulate_side(lap, [&](const WeightedGraph& g, int comp) {
            return detail::pld_component_tree(g, eps_side, eta_side / std::max(1, comps), seed, side, comp,
                                              ctl, rep.levels, capped);
        });
    };
    // Error budget: the two sides contribute |ld errors| of about
    // N_side * eps_side to the raw log-determinant; split so the total stays
    // within n * eps.
    const auto til = run_side(kp.l_tilde, 0, eps / 4.0, eta / 2.0);
    const auto hat = run_side(kp.l_hat, 1, eps / 2.0, eta / 2.0);
    rep.plan_capped = capped;
    detail::finalize(rep, til, hat, n, start);
    return rep;
}

// Full preconditioning-chain estimator (sparsify, partial Cholesky, recurse)
// with per-level Monte Carlo remainders and a dense base case.
inline EstimateReport ultra_logdet(const SymmetricSparse& a, double eps, double eta,
                                   std::uint64_t seed, const McControls& ctl = {}) {
    const auto start = std::chrono::steady_clock::now();
    detail::check_estimate_inputs(a, eps, eta);
    const Index n = a.dim();
    EstimateReport rep;
    rep.method = "ultra";
    rep.eps = eps;
    rep.eta = eta;
    rep.seed = seed;
    rep.n = n;
    rep.m = a.nnz_upper();

    const KelnerPair kp = kelner_reduce(a);
    bool capped = false, degraded = false;
    const auto run_side = [&](const SymmetricSparse& lap, int side, double eps_side, double eta_side) {
        const int comps = connected_components(graph_of(lap)).count;
        return detail::accumulate_side(lap, [&](const WeightedGraph& g, int comp) {
            return detail::pld_component_ultra(g, eps_side, eta_side / std::max(1, comps), seed, side, comp,
                                               ctl, rep.levels, capped, degraded);
        });
    };
    const auto til = run_side(kp.l_tilde, 0, eps / 4.0, eta / 2.0);
    const auto hat = run_side(kp.l_hat, 1, eps / 2.0, eta / 2.0);
    rep.plan_capped = capped;
    rep.degraded = degraded;
    detail::finalize(rep, til, hat, n, start);
    return rep;
}

// Deterministic per-vertex bounds from exact tree plds and exact stretch; no
// Monte Carlo anywhere.
inline EstimateReport logdet_bounds(const SymmetricSparse& a, std::uint64_t seed, const McControls& ctl = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (!a.sdd_slack().first) fail(ErrorCode::NotSDD, "input fails the diagonal dominance test");
    const Index n = a.dim();
    EstimateReport rep;
    rep.method = "bounds";
    rep.seed = seed;
    rep.n = n;
    rep.m = a.nnz_upper();
    (void)ctl;

    const KelnerPair kp = kelner_reduce(a);
    const auto run_side = [&](const SymmetricSparse& lap, int side) {
        return detail::accumulate_side(lap, [&](const WeightedGraph& g, int comp) {
            detail::SidePld r;
            if (g.vertex_count() <= 1) return r;
            auto lst = low_stretch_tree(g, detail::scope_rng(seed, side, comp));
            const double pld_t = detail::exact_tree_pld(lst.tree);
            auto [lo, up] = pld_bounds_from_stretch(pld_t, lst.stretch.value, g.vertex_count());
            r.lower = lo;
            r.upper = up;
            r.pld = 0.5 * (lo + up);
            LevelDiag d;
            d.side = side;
            d.component = comp;
            d.n = g.vertex_count();
            d.m_a = g.edge_count();
            d.stretch = lst.stretch.value;
            d.level = -1;
            rep.levels.push_back(d);
            return r;
        });
    };
    const auto til = run_side(kp.l_tilde, 0);
    const auto hat = run_side(kp.l_hat, 1);
    detail::finalize(rep, til, hat, n, start);
    return rep;
}

// Constant-precision estimate: sparsify each reduced Laplacian, rescale to
// restore the ordering, bracket with the stretch sandwich, and estimate the
// sparsifier's pld with the chain estimator. The reported estimate is the
// midpoint; the half-width stays below 1/2 per vertex.
inline EstimateReport fast_inexact_logdet(const SymmetricSparse& a, std::uint64_t seed,
                                          const McControls& ctl = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (!a.sdd_slack().first) fail(ErrorCode::NotSDD, "input fails the diagonal dominance test");
    const Index n = a.dim();
    EstimateReport rep;
    rep.method = "fast";
    rep.eps = 0.5;
    rep.eta = 0.1;
    rep.seed = seed;
    rep.n = n;
    rep.m = a.nnz_upper();

    const double sp_eps = 1.0 / 16.0;
    const KelnerPair kp = kelner_reduce(a);
    bool capped = false, degraded = false;

    const auto run_side = [&](const SymmetricSparse& lap, int side, double eps_side, double eta_side) {
        const int comps = connected_components(graph_of(lap)).count;
        return detail::accumulate_side(lap, [&](const WeightedGraph& g, int comp) {
            detail::SidePld r;
            const Index nc = g.vertex_count();
            if (nc <= 1) return r;
            if (nc < ctl.dense_threshold) {
                const double ld = std::log(static_cast<double>(nc)) +
                                  dense_logdet(laplacian_of(g).without_vertex(nc - 1));
                r.pld = r.lower = r.upper = ld;
                return r;
            }
            CounterRng rng = detail::scope_rng(seed, side, comp);
            WeightedGraph h = spectral_sparsify(g, sp_eps, rng);
            h = h.scaled(1.0 / (1.0 + sp_eps));
            // Restore L_H <= L_G empirically before using the sandwich.
            LaplacianSolver g_solver(g);
            const SymmetricSparse f_g = g_solver.grounded_matrix();
            const SymmetricSparse f_h = laplacian_of(h).without_vertex(nc - 1);
            const double lam = detail::generalized_lambda_max(f_h, f_g, g_solver, seed ^ 0xFA57ULL);
            if (lam > 1.0) h = h.scaled(1.0 / (lam * 1.001));
            const StretchReport st = generalized_stretch_exact(g, h);
            // pld(H) to eps_side per vertex via the chain estimator.
            std::vector<LevelDiag> sub;
            const detail::SidePld hp = detail::pld_component_ultra(h, eps_side, eta_side / std::max(1, comps),
                                                                   seed, side, comp, ctl, sub, capped, degraded);
            for (auto& d : sub) rep.levels.push_back(d);
            auto [lo, up] = pld_bounds_from_stretch(hp.pld, st.value, nc);
            const double slack = static_cast<double>(nc) * eps_side;
            r.lower = lo - slack;
            r.upper = up + slack;
            r.pld = 0.5 * (r.lower + r.upper);
            return r;
        });
    };
    const auto til = run_side(kp.l_tilde, 0, 0.05, 0.05);
    const auto hat = run_side(kp.l_hat, 1, 0.10, 0.05);
    rep.plan_capped = capped;
    rep.degraded = degraded;
    detail::finalize(rep, til, hat, n, start);
    return rep;
}

} // namespace sddld
