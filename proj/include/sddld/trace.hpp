#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/pcg.hpp"
#include "sddld/rng.hpp"

namespace sddld {

// Sampling plan for the truncated-series trace estimator.
//
//   p >= 16 (1/eps + 1/(n eps^2)) ln(2/eta) ln^2(1/delta)
//   l >= 2 delta^{-1} ln(n / (delta eps))
//
// delta is the spectral-gap parameter (the contraction S satisfies
// 0 <= S <= (1 - delta) I; delta = 1/kappa for a kappa-approximation pair).
struct SamplePlan {
    std::size_t p = 0;
    std::size_t l = 0;
    double eps = 0.0;
    double eta = 0.0;
    double delta = 0.0;
    std::size_t n = 0;
    bool capped = false; // true when a compute cap reduced p below the planned value
    // The two additive terms of the p bound, kept visible for diagnostics.
    double p_term_eps = 0.0;
    double p_term_var = 0.0;
};

inline SamplePlan plan_samples(double eps, double eta, double delta, std::size_t n) {
    if (!(eps > 0.0)) fail(ErrorCode::InvalidParameter, "eps must be positive");
    if (!(eta > 0.0 && eta < 1.0)) fail(ErrorCode::InvalidParameter, "eta must lie in (0,1)");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorCode::InvalidParameter, "delta must lie in (0,1)");
    if (n == 0) fail(ErrorCode::InvalidParameter, "n must be positive");
    SamplePlan plan;
    plan.eps = eps;
    plan.eta = eta;
    plan.delta = delta;
    plan.n = n;
    const double log_eta = std::log(2.0 / eta);
    const double log_delta = std::log(1.0 / delta);
    plan.p_term_eps = 16.0 * (1.0 / eps) * log_eta * log_delta * log_delta;
    plan.p_term_var = 16.0 * (1.0 / (static_cast<double>(n) * eps * eps)) * log_eta * log_delta * log_delta;
    plan.p = static_cast<std::size_t>(std::max(1.0, std::ceil(plan.p_term_eps + plan.p_term_var)));
    plan.l = static_cast<std::size_t>(std::max(1.0, std::ceil((2.0 / delta) * std::log(static_cast<double>(n) / (delta * eps)))));
    return plan;
}

// Truncation length from the tail bound itself ((1-delta)^{l+1}/delta <= eps/2),
// used when a compute cap is in force.
inline std::size_t truncation_from_tail(double eps, double delta) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil((1.0 / delta) * std::log(2.0 / (eps * delta)))));
}

// Apply a compute cap to a plan. The truncation length first falls back to
// the tail bound, then if needed to 4/delta (four e-foldings of the slowest
// mode), and the sample count absorbs the remaining budget. The result is
// flagged; accuracy then rests on the measured-variance regime rather than the
// worst-case bound.
inline SamplePlan cap_plan(SamplePlan plan, std::size_t max_pl, std::size_t min_p = 16) {
    if (max_pl == 0 || plan.p * plan.l <= max_pl) return plan;
    std::size_t l = std::min(plan.l, truncation_from_tail(plan.eps, plan.delta));
    std::size_t p = std::max<std::size_t>(1, max_pl / std::max<std::size_t>(1, l));
    if (p < 4 * min_p) {
        const auto l_floor = static_cast<std::size_t>(std::ceil(4.0 / plan.delta));
        l = std::max<std::size_t>(1, std::min(l, l_floor));
        p = std::max<std::size_t>(1, max_pl / l);
    }
    if (p < min_p) {
        p = min_p;
        l = std::max<std::size_t>(1, max_pl / p);
    }
    plan.p = std::min(plan.p, p);
    plan.l = std::min(plan.l, l);
    plan.capped = true;
    return plan;
}

// Hutchinson-type estimator of n^{-1} Tr(H) with normalized Gaussian probes:
// (1/p) sum_j u_j^T H u_j / u_j^T u_j. Sample j draws substream j of the given
// generator, and the reduction over samples is a fixed serial sum, so the
// result does not depend on the thread count.
inline double hutchinson_trace(const ApplyFn& apply_h, std::size_t n, std::size_t p,
                               const CounterRng& rng, unsigned threads = 1) {
    if (p == 0) return 0.0;
    std::vector<double> values(p, 0.0);
    const auto worker = [&](std::size_t begin, std::size_t end) {
        std::vector<double> u(n), hu(n);
        for (std::size_t j = begin; j < end; ++j) {
            CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kMcSample, j));
            for (auto& v : u) v = sub.next_gaussian();
            apply_h(u, hu);
            values[j] = dot(u, hu) / dot(u, u);
        }
    };
    if (threads <= 1 || p < 2) {
        worker(0, p);
    } else {
        const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(p));
        std::vector<std::thread> pool;
        const std::size_t chunk = (p + nt - 1) / nt;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back(worker, std::min<std::size_t>(t * chunk, p), std::min<std::size_t>((t + 1) * chunk, p));
        for (auto& th : pool) th.join();
    }
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(p);
}

// The remainder problem: estimate n^{-1} ln det(B^{-1} A) for a pair
// A <= B <= kappa A, given a matrix apply for A and a nu-accurate solver for B.
struct RemainderProblem {
    ApplyFn a_apply;
    ApplyFn b_solve;
    std::size_t dim = 0;
    double kappa = 1.0;
    double nu = 0.0;
};

enum class NuRule {
    proof, // nu = min(eps / (8 kappa^2 sqrt(cond B)), 1/(2 kappa))
    body,  // nu = min(eps / (8 kappa^3 cond B),       1/(2 kappa))
};

inline double solver_tolerance(double eps, double kappa, double cond_b, NuRule rule = NuRule::proof) {
    const double k = std::max(1.0, kappa);
    const double guard = 1.0 / (2.0 * k);
    const double prec = (rule == NuRule::proof)
                            ? eps / (8.0 * k * k * std::sqrt(std::max(1.0, cond_b)))
                            : eps / (8.0 * k * k * k * std::max(1.0, cond_b));
    return std::min(prec, guard);
}

// Power sequence x_{k+1} = x_k - B^{-1}(A x_k) tracking R = I - B^{-1}A.
inline std::vector<std::vector<double>> approximate_power_sequence(const RemainderProblem& prob,
                                                                   std::span<const double> x0,
                                                                   std::size_t l) {
    if (x0.size() != prob.dim) fail(ErrorCode::DimensionMismatch, "start vector size");
    std::vector<std::vector<double>> seq;
    seq.reserve(l);
    std::vector<double> x(x0.begin(), x0.end()), ax(prob.dim), bax(prob.dim);
    for (std::size_t k = 0; k < l; ++k) {
        prob.a_apply(x, ax);
        prob.b_solve(ax, bax);
        for (std::size_t i = 0; i < prob.dim; ++i) x[i] -= bax[i];
        seq.push_back(x);
    }
    return seq;
}

// Monte Carlo estimate of n^{-1} ln det(B^{-1}A) by the truncated series in
// powers of R = I - B^{-1}A:
//
//   z = -(1/p) sum_j sum_{k=1..l} (1/k) x_{0,j}^T x_{k,j},
//
// with x_{0,j} the normalized Gaussian probe of substream j and x_{k,j} the
// approximate power sequence. Deterministic for fixed seed and plan,
// independent of the thread count.
inline double mc_logdet_remainder(const RemainderProblem& prob, const SamplePlan& plan,
                                  const CounterRng& rng, unsigned threads = 1) {
    const std::size_t n = prob.dim;
    if (n == 0 || plan.p == 0) return 0.0;
    std::vector<double> values(plan.p, 0.0);
    const auto worker = [&](std::size_t begin, std::size_t end) {
        std::vector<double> x0(n), x(n), ax(n), bax(n);
        for (std::size_t j = begin; j < end; ++j) {
            CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kMcSample, j));
            for (auto& v : x0) v = sub.next_gaussian();
            const double nrm = norm2(x0);
            if (nrm == 0.0) continue;
            for (auto& v : x0) v /= nrm;
            x = x0;
            double z = 0.0;
            for (std::size_t k = 1; k <= plan.l; ++k) {
                prob.a_apply(x, ax);
                prob.b_solve(ax, bax);
                for (std::size_t i = 0; i < n; ++i) x[i] -= bax[i];
                z += dot(x0, x) / static_cast<double>(k);
            }
            values[j] = z;
        }
    };
    if (threads <= 1 || plan.p < 2) {
        worker(0, plan.p);
    } else {
        const unsigned nt = std::min<unsigned>(threads, static_cast<unsigned>(plan.p));
        std::vector<std::thread> pool;
        const std::size_t chunk = (plan.p + nt - 1) / nt;
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back(worker, std::min<std::size_t>(t * chunk, plan.p),
                              std::min<std::size_t>((t + 1) * chunk, plan.p));
        for (auto& th : pool) th.join();
    }
    double s = 0.0;
    for (double v : values) s += v;
    return -s / static_cast<double>(plan.p);
}

} // namespace sddld
