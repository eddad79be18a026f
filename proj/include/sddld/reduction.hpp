#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

// Splitting of an SDD matrix A = D1 + Ap + An + D2 together with the two
// Laplacians it reduces to: log|A| = pld(L_tilde) - pld(L_hat).
struct KelnerPair {
    SymmetricSparse l_tilde; // 2n x 2n
    SymmetricSparse l_hat;   // n x n
    SymmetricSparse d1, d2, a_p, a_n;
};

inline KelnerPair kelner_reduce(const SymmetricSparse& a) {
    const auto [sdd, slack] = a.sdd_slack();
    if (!sdd) fail(ErrorCode::NotSDD, "input fails the diagonal dominance test");
    const Index n = a.dim();

    std::vector<Triplet> tp, tn, td1, td2;
    std::vector<double> offdiag_abs(static_cast<std::size_t>(n), 0.0);
    std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
    for (const auto& e : a.entries()) {
        if (e.row == e.col) {
            diag[static_cast<std::size_t>(e.row)] = e.value;
        } else {
            if (e.value > 0.0) tp.push_back(e);
            else tn.push_back(e);
            offdiag_abs[static_cast<std::size_t>(e.row)] += std::abs(e.value);
            offdiag_abs[static_cast<std::size_t>(e.col)] += std::abs(e.value);
        }
    }
    for (Index i = 0; i < n; ++i) {
        const double d1 = offdiag_abs[static_cast<std::size_t>(i)];
        const double d2 = diag[static_cast<std::size_t>(i)] - d1;
        if (d1 != 0.0) td1.push_back({i, i, d1});
        if (d2 != 0.0) td2.push_back({i, i, d2});
    }

    KelnerPair out;
    out.a_p = SymmetricSparse::from_triplets(n, tp);
    out.a_n = SymmetricSparse::from_triplets(n, tn);
    out.d1 = SymmetricSparse::from_triplets(n, td1);
    out.d2 = SymmetricSparse::from_triplets(n, td2);

    // L_hat = D1 + An - Ap.
    std::vector<Triplet> th = td1;
    for (const auto& e : tn) th.push_back(e);
    for (const auto& e : tp) th.push_back({e.row, e.col, -e.value});
    out.l_hat = SymmetricSparse::from_triplets(n, th);

    // L_tilde = [[D1 + D2/2 + An, -D2/2 - Ap], [-D2/2 - Ap, D1 + D2/2 + An]].
    std::vector<Triplet> tt;
    tt.reserve(2 * (td1.size() + td2.size() + tn.size() + tp.size()));
    for (const auto& e : td1) {
        tt.push_back(e);
        tt.push_back({e.row + n, e.col + n, e.value});
    }
    for (const auto& e : td2) {
        tt.push_back({e.row, e.col, e.value / 2.0});
        tt.push_back({e.row + n, e.col + n, e.value / 2.0});
        tt.push_back({e.row, e.col + n, -e.value / 2.0});
    }
    for (const auto& e : tn) {
        tt.push_back(e);
        tt.push_back({e.row + n, e.col + n, e.value});
    }
    for (const auto& e : tp) {
        tt.push_back({e.row, e.col + n, -e.value});
        tt.push_back({e.col, e.row + n, -e.value});
    }
    out.l_tilde = SymmetricSparse::from_triplets(2 * n, tt);
    return out;
}

// A Laplacian with one row/column deleted ("grounded" at that vertex);
// positive definite when the source graph is connected.
struct GroundedMatrix {
    SymmetricSparse f;
    Index ground_vertex;
    Index parent_n;
};

inline GroundedMatrix float_laplacian(const SymmetricSparse& l, Index ground) {
    const WeightedGraph g = graph_of(l); // throws NotALaplacian
    if (!is_connected(g)) fail(ErrorCode::DisconnectedGraph, "floating requires a connected graph");
    if (ground < 0 || ground >= l.dim()) fail(ErrorCode::IndexOutOfRange, "ground vertex");
    return {l.without_vertex(ground), ground, l.dim()};
}

// pld(L) for connected L from the log-determinant of any grounded form.
// By the matrix-tree theorem the product of the positive eigenvalues equals
// n * det(F_L), so pld(L) = ln n + ln det F_L.
inline double pld_of_laplacian_from_grounded(Index n, double logdet_f) {
    return std::log(static_cast<double>(n)) + logdet_f;
}

inline double pld_of_laplacian(const SymmetricSparse& l, double logdet_f) {
    return pld_of_laplacian_from_grounded(l.dim(), logdet_f);
}

} // namespace sddld
