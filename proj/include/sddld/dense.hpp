#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sddld/errors.hpp"
#include "sddld/sparse.hpp"

namespace sddld {

// Dense lower Cholesky of a positive definite matrix, kept for the recursion
// base case and as the exact route for small systems.
class DenseCholesky {
public:
    explicit DenseCholesky(const SymmetricSparse& a) : n_(static_cast<std::size_t>(a.dim())) {
        std::vector<double> m(n_ * n_, 0.0);
        for (const auto& e : a.entries()) {
            m[static_cast<std::size_t>(e.row) * n_ + static_cast<std::size_t>(e.col)] = e.value;
            m[static_cast<std::size_t>(e.col) * n_ + static_cast<std::size_t>(e.row)] = e.value;
        }
        factor(m);
    }

    explicit DenseCholesky(std::vector<double> dense_row_major, std::size_t n) : n_(n) {
        factor(dense_row_major);
    }

    std::size_t dim() const { return n_; }

    double logdet() const {
        double s = 0.0;
        for (std::size_t i = 0; i < n_; ++i) s += std::log(l_[i * n_ + i]);
        return 2.0 * s;
    }

    void solve(std::span<const double> b, std::span<double> x) const {
        if (b.size() != n_ || x.size() != n_)
            fail(ErrorCode::DimensionMismatch, "dense solve size mismatch");
        // L y = b
        for (std::size_t i = 0; i < n_; ++i) {
            double s = b[i];
            for (std::size_t j = 0; j < i; ++j) s -= l_[i * n_ + j] * x[j];
            x[i] = s / l_[i * n_ + i];
        }
        // L^T x = y
        for (std::size_t ii = n_; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t j = ii + 1; j < n_; ++j) s -= l_[j * n_ + ii] * x[j];
            x[ii] = s / l_[ii * n_ + ii];
        }
    }

    std::vector<double> solve(std::span<const double> b) const {
        std::vector<double> x(n_);
        solve(b, x);
        return x;
    }

private:
    void factor(std::vector<double>& m) {
        l_.assign(n_ * n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
            double d = m[j * n_ + j];
            for (std::size_t k = 0; k < j; ++k) d -= l_[j * n_ + k] * l_[j * n_ + k];
            if (!(d > 0.0))
                fail(ErrorCode::NotPositiveDefinite, "nonpositive pivot at column " + std::to_string(j));
            const double dj = std::sqrt(d);
            l_[j * n_ + j] = dj;
            for (std::size_t i = j + 1; i < n_; ++i) {
                double s = m[i * n_ + j];
                for (std::size_t k = 0; k < j; ++k) s -= l_[i * n_ + k] * l_[j * n_ + k];
                l_[i * n_ + j] = s / dj;
            }
        }
    }

    std::size_t n_;
    std::vector<double> l_;
};

// ln det A via dense Cholesky; throws NotPositiveDefinite on failure.
inline double dense_logdet(const SymmetricSparse& a) {
    if (a.dim() == 0) return 0.0;
    return DenseCholesky(a).logdet();
}

} // namespace sddld
