#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

using ApplyFn = std::function<void(std::span<const double>, std::span<double>)>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

struct PcgResult {
    std::size_t iterations = 0;
    bool converged = true;   // certificate met before the iteration cap
    double certificate = 0.0; // final sqrt(kappa) * |r|_M / |b|_M
};

// Preconditioned conjugate gradient on a positive definite operator with a
// B-norm relative-error contract: the returned x satisfies
// |x - A^{-1}b|_A <= nu |A^{-1}b|_A, certified by the preconditioned residual
// bound sqrt(kappa_hat) * |r|_{M^{-1}} / |b|_{M^{-1}} <= nu/2, with kappa_hat a
// safety-inflated condition estimate. On hitting the iteration cap the best
// iterate seen is returned and `converged` is cleared.
inline PcgResult pcg_solve(const ApplyFn& apply_a,
                           const ApplyFn& apply_precond,
                           std::span<const double> b,
                           std::span<double> x,
                           double nu,
                           double kappa_hat,
                           std::size_t max_iterations = 0) {
    const std::size_t n = b.size();
    if (x.size() != n) fail(ErrorCode::DimensionMismatch, "pcg output size");
    if (!(nu > 0.0 && nu < 1.0)) fail(ErrorCode::InvalidParameter, "pcg tolerance must be in (0,1)");
    PcgResult res;
    std::fill(x.begin(), x.end(), 0.0);

    const double bnorm = norm2(b);
    if (bnorm == 0.0) return res;

    if (max_iterations == 0)
        max_iterations = static_cast<std::size_t>(10.0 * std::sqrt(std::max(1.0, kappa_hat)) * std::log(1.0 / nu)) + 100;

    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n), p(n), ap(n), best_x(n, 0.0);

    apply_precond(r, z);
    double rz = dot(r, z);
    const double bMb = rz; // r0 = b
    if (!(bMb > 0.0)) fail(ErrorCode::NotPositiveDefinite, "preconditioner produced nonpositive energy");
    p = z;

    const double target = (nu / 2.0) * std::sqrt(bMb) / std::sqrt(std::max(1.0, kappa_hat));
    double best_rM = std::sqrt(rz);
    std::size_t stagnant = 0;

    for (std::size_t it = 0; it < max_iterations; ++it) {
        if (std::sqrt(std::max(0.0, rz)) <= target) {
            res.iterations = it;
            res.certificate = std::sqrt(std::max(0.0, rz)) * std::sqrt(std::max(1.0, kappa_hat)) / std::sqrt(bMb);
            return res;
        }
        apply_a(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) break; // lost positive definiteness numerically
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i) x[i] += alpha * p[i];
        for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * ap[i];
        apply_precond(r, z);
        const double rz_next = dot(r, z);
        const double rM = std::sqrt(std::max(0.0, rz_next));
        if (rM < best_rM) {
            best_rM = rM;
            best_x.assign(x.begin(), x.end());
            stagnant = 0;
        } else if (++stagnant > 50) {
            break; // numerical floor reached
        }
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        res.iterations = it + 1;
    }

    if (best_rM < std::sqrt(std::max(0.0, rz)))
        std::copy(best_x.begin(), best_x.end(), x.begin());
    res.certificate = best_rM * std::sqrt(std::max(1.0, kappa_hat)) / std::sqrt(bMb);
    res.converged = res.certificate <= nu;
    return res;
}

// Spectral condition estimate of a positive definite operator: 50 rounds of
// power iteration for the top eigenvalue and of inverse iteration (through the
// supplied solver) for the bottom one, inflated by a safety factor of 2.
inline double estimate_condition_number(const ApplyFn& apply_a,
                                        const ApplyFn& solve_a,
                                        std::size_t n,
                                        std::uint64_t salt = 0) {
    if (n == 0) return 1.0;
    CounterRng rng(0x5DDC0DE5ULL ^ salt, rng_stream::tagged(rng_stream::kPowerIter, n));
    std::vector<double> x(n), y(n);

    for (auto& v : x) v = rng.next_gaussian();
    double lam_max = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double nx = norm2(x);
        if (nx == 0.0) break;
        for (auto& v : x) v /= nx;
        apply_a(x, y);
        lam_max = dot(x, y);
        std::swap(x, y);
    }

    for (auto& v : x) v = rng.next_gaussian();
    double lam_min = lam_max;
    for (int it = 0; it < 50; ++it) {
        const double nx = norm2(x);
        if (nx == 0.0) break;
        for (auto& v : x) v /= nx;
        solve_a(x, y);
        const double xy = dot(x, y); // x^T A^{-1} x
        if (xy > 0.0) lam_min = 1.0 / xy;
        std::swap(x, y);
    }

    if (!(lam_max > 0.0) || !(lam_min > 0.0)) return 1.0;
    return 2.0 * std::max(1.0, lam_max / lam_min);
}

inline ApplyFn matvec_op(const SymmetricSparse& a) {
    return [&a](std::span<const double> in, std::span<double> out) { a.matvec(in, out); };
}

inline ApplyFn identity_op() {
    return [](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
    };
}

} // namespace sddld
