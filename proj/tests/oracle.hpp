#pragma once

// Dense reference computations for the test suites, deliberately built on
// Eigen so they share no code path with the library's own factorizations.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "sddld/generate.hpp"
#include "sddld/rng.hpp"
#include "sddld/sparse.hpp"

namespace oracle {

inline Eigen::MatrixXd to_dense(const sddld::SymmetricSparse& a) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.dim(), a.dim());
    for (const auto& e : a.entries()) {
        m(e.row, e.col) = e.value;
        m(e.col, e.row) = e.value;
    }
    return m;
}

inline Eigen::MatrixXd to_dense(const sddld::WeightedGraph& g) { return to_dense(sddld::laplacian_of(g)); }

inline Eigen::VectorXd eigenvalues(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

// Sum of logs of the positive eigenvalues (relative zero cutoff).
inline double dense_pld(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
    const Eigen::VectorXd ev = eigenvalues(m);
    const double cut = rel_tol * std::max(1.0, std::abs(ev[ev.size() - 1]));
    double s = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cut) s += std::log(ev[i]);
    return s;
}

inline double dense_logdet_pd(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    double s = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i) s += std::log(llt.matrixL()(i, i));
    return 2.0 * s;
}

inline Eigen::MatrixXd pinv(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cut = rel_tol * std::max(1.0, std::abs(ev[ev.size() - 1]));
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i] > cut) inv[i] = 1.0 / ev[i];
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

inline Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Random connected weighted graph: a random tree plus `extra` random edges,
// weights uniform in [wlo, whi].
inline sddld::WeightedGraph random_connected_graph(sddld::Index n, std::size_t extra, sddld::CounterRng& rng,
                                                   double wlo = 0.5, double whi = 2.0) {
    std::vector<sddld::Edge> edges;
    for (sddld::Index v = 1; v < n; ++v) {
        const auto p = static_cast<sddld::Index>(rng.next_below(static_cast<std::uint64_t>(v)));
        edges.push_back({p, v, rng.uniform(wlo, whi)});
    }
    std::size_t added = 0, guard = 0;
    while (added < extra && guard < extra * 20 + 100) {
        ++guard;
        const auto u = static_cast<sddld::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        const auto v = static_cast<sddld::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        if (u == v) continue;
        edges.push_back({u, v, rng.uniform(wlo, whi)});
        ++added;
    }
    return sddld::WeightedGraph(n, edges);
}

// Random invertible SDD matrix with mixed off-diagonal signs.
inline sddld::SymmetricSparse random_sdd(sddld::Index n, sddld::CounterRng& rng, double density = 0.2,
                                         double slack = 0.1) {
    std::vector<sddld::Triplet> ts;
    std::vector<double> row_abs(static_cast<std::size_t>(n), 0.0);
    for (sddld::Index i = 0; i < n; ++i)
        for (sddld::Index j = i + 1; j < n; ++j) {
            if (rng.next_double() > density) continue;
            const double mag = rng.uniform(0.2, 1.0);
            const double v = rng.next_double() < 0.5 ? mag : -mag;
            ts.push_back({i, j, v});
            row_abs[static_cast<std::size_t>(i)] += mag;
            row_abs[static_cast<std::size_t>(j)] += mag;
        }
    for (sddld::Index i = 0; i < n; ++i)
        ts.push_back({i, i, row_abs[static_cast<std::size_t>(i)] + slack + rng.next_double()});
    return sddld::SymmetricSparse::from_triplets(n, ts);
}

inline sddld::SymmetricSparse grid_plus_shift(sddld::Index w, sddld::Index h, double shift,
                                              std::uint64_t seed = 1) {
    sddld::GenSpec spec;
    spec.kind = sddld::GraphKind::grid;
    spec.width = w;
    spec.height = h;
    spec.shift = shift;
    return sddld::generate(spec, seed);
}

} // namespace oracle
