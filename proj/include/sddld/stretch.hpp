#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/lapsolve.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

enum class StretchMethod { exact_tree, exact_solve, sketched };

// st_H(G): the weighted sum over G's edges of their effective resistance in H;
// equals Tr(L_H^+ L_G). At least n-1 whenever L_H <= L_G.
struct StretchReport {
    double value = 0.0;
    StretchMethod method = StretchMethod::exact_tree;
    std::optional<double> eps_sketch;
    std::optional<std::vector<double>> per_edge; // aligned with G's edge order
};

// Stretch over a spanning tree via rooted prefix resistances and LCA queries.
inline StretchReport tree_stretch_exact(const WeightedGraph& g, const WeightedGraph& t, bool want_per_edge = true) {
    if (g.vertex_count() != t.vertex_count())
        fail(ErrorCode::VertexMismatch, "graph and tree must share a vertex set");
    TreePaths paths(t, 0); // throws NotATree
    StretchReport rep;
    rep.method = StretchMethod::exact_tree;
    std::vector<double> per;
    per.reserve(g.edge_count());
    double total = 0.0;
    for (const auto& e : g.edges()) {
        const double s = e.weight * paths.path_resistance(e.u, e.v);
        per.push_back(s);
        total += s;
    }
    rep.value = total;
    if (want_per_edge) rep.per_edge = std::move(per);
    return rep;
}

// st_H(G) by one grounded solve per edge of G (desk-scale exact route).
inline StretchReport generalized_stretch_exact(const WeightedGraph& g, const WeightedGraph& h) {
    if (g.vertex_count() != h.vertex_count())
        fail(ErrorCode::VertexMismatch, "graphs must share a vertex set");
    if (!is_connected(g) || !is_connected(h))
        fail(ErrorCode::DisconnectedGraph, "stretch needs connected graphs");
    const Index n = g.vertex_count();
    StretchReport rep;
    rep.method = StretchMethod::exact_solve;
    if (n <= 1) return rep;

    LaplacianSolver solver(h);
    const Index ground = solver.ground();
    const std::size_t m = static_cast<std::size_t>(n - 1);
    std::vector<double> b(m), x(m);
    std::vector<double> per;
    per.reserve(g.edge_count());
    double total = 0.0;
    for (const auto& e : g.edges()) {
        std::fill(b.begin(), b.end(), 0.0);
        if (e.u != ground) b[static_cast<std::size_t>(e.u)] = 1.0;
        if (e.v != ground) b[static_cast<std::size_t>(e.v)] = -1.0;
        solver.solve_refined(b, x, 1e-12);
        const double xu = e.u == ground ? 0.0 : x[static_cast<std::size_t>(e.u)];
        const double xv = e.v == ground ? 0.0 : x[static_cast<std::size_t>(e.v)];
        const double r_eff = xu - xv; // b^T x
        per.push_back(e.weight * r_eff);
        total += e.weight * r_eff;
    }
    rep.value = total;
    rep.per_edge = std::move(per);
    return rep;
}

// Johnson-Lindenstrauss sketch of effective resistances in H: k = ceil(24 ln n / eps^2)
// random +-1 combinations of the scaled incidence rows, each pulled back through
// one grounded solve. query(u,v) is a (1 +- eps) estimate of R_eff(u,v) w.h.p.
class ResistanceSketch {
public:
    ResistanceSketch(const WeightedGraph& h, double eps, const CounterRng& rng) {
        if (!(eps > 0.0 && eps < 1.0)) fail(ErrorCode::InvalidParameter, "sketch eps must lie in (0,1)");
        if (!is_connected(h)) fail(ErrorCode::DisconnectedGraph, "sketch needs a connected graph");
        n_ = h.vertex_count();
        eps_ = eps;
        if (n_ <= 1) {
            k_ = 0;
            return;
        }
        k_ = static_cast<std::size_t>(std::ceil(24.0 * std::log(static_cast<double>(n_)) / (eps * eps)));
        k_ = std::max<std::size_t>(k_, 1);
        LaplacianSolver solver(h);
        const Index ground = solver.ground();
        const std::size_t m = static_cast<std::size_t>(n_ - 1);
        z_.assign(static_cast<std::size_t>(n_) * k_, 0.0);
        std::vector<double> y(m), x(m);
        const double scale = 1.0 / std::sqrt(static_cast<double>(k_));
        for (std::size_t i = 0; i < k_; ++i) {
            CounterRng sub = rng.substream(rng_stream::tagged(rng_stream::kSketch, i));
            std::fill(y.begin(), y.end(), 0.0);
            for (const auto& e : h.edges()) {
                const double s = (sub.next_u32() & 1u) ? 1.0 : -1.0;
                const double v = s * std::sqrt(e.weight) * scale;
                if (e.u != ground) y[static_cast<std::size_t>(e.u)] += v;
                if (e.v != ground) y[static_cast<std::size_t>(e.v)] -= v;
            }
            solver.solve(y, x, 1e-10);
            for (std::size_t j = 0; j < m; ++j) z_[j * k_ + i] = x[j];
            // ground row stays zero
        }
    }

    double query(Index u, Index v) const {
        if (u < 0 || v < 0 || u >= n_ || v >= n_) fail(ErrorCode::IndexOutOfRange, "sketch query");
        double s = 0.0;
        const double* zu = &z_[static_cast<std::size_t>(u) * k_];
        const double* zv = &z_[static_cast<std::size_t>(v) * k_];
        for (std::size_t i = 0; i < k_; ++i) {
            const double d = zu[i] - zv[i];
            s += d * d;
        }
        return s;
    }

    std::size_t probes() const { return k_; }
    double eps() const { return eps_; }

private:
    Index n_ = 0;
    std::size_t k_ = 0;
    double eps_ = 0.0;
    std::vector<double> z_; // vertex-major, ground row zero
};

inline ResistanceSketch approx_effective_resistances(const WeightedGraph& h, double eps, const CounterRng& rng) {
    return ResistanceSketch(h, eps, rng);
}

inline StretchReport approx_stretch(const WeightedGraph& g, const WeightedGraph& h, double eps, const CounterRng& rng) {
    if (g.vertex_count() != h.vertex_count())
        fail(ErrorCode::VertexMismatch, "graphs must share a vertex set");
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "stretch needs connected graphs");
    ResistanceSketch sk(h, eps, rng);
    StretchReport rep;
    rep.method = StretchMethod::sketched;
    rep.eps_sketch = eps;
    double total = 0.0;
    for (const auto& e : g.edges()) total += e.weight * sk.query(e.u, e.v);
    rep.value = total;
    return rep;
}

// Deterministic sandwich on pld(L_G) from pld(L_H) and st_H(G), valid when
// L_H <= L_G:
//   pld(L_H) + ln(st - n + 2) <= pld(L_G) <= pld(L_H) + (n-1) ln(st/(n-1)).
// Equality on both sides at st = n-1 (H = G).
inline std::pair<double, double> pld_bounds_from_stretch(double pld_h, double st, Index n) {
    if (n < 1) fail(ErrorCode::InvalidParameter, "vertex count");
    if (n == 1) return {pld_h, pld_h};
    const double base = static_cast<double>(n - 1);
    const double tol = 1e-9 * std::max(1.0, base);
    if (st < base - tol)
        fail(ErrorCode::StretchBelowMinimum,
             "stretch " + std::to_string(st) + " below n-1=" + std::to_string(base) +
                 "; the ordering assumption does not hold");
    const double s = std::max(st, base);
    const double lower = pld_h + std::log(s - base + 1.0);
    const double upper = pld_h + base * std::log(s / base);
    return {lower, std::max(lower, upper)};
}

} // namespace sddld
