#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "shill/common.hpp"

namespace shill::ml {

/// Square matrix, row-major.
struct SquareMatrix {
    std::size_t n = 0;
    std::vector<double> a;

    explicit SquareMatrix(std::size_t dim = 0) : n(dim), a(dim * dim, 0.0) {}
    static SquareMatrix identity(std::size_t dim) {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }
    double& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
};

struct SymmetricEigen {
    std::vector<double> values;  // descending
    SquareMatrix vectors;        // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi rotations. Eigenvalues sorted descending (ties keep index
/// order); each eigenvector's largest-magnitude entry is made positive.
inline SymmetricEigen jacobi_eigen(SquareMatrix m) {
    const std::size_t n = m.n;
    SquareMatrix v = SquareMatrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0, total = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                total += m(i, j) * m(i, j);
                if (i != j) off += m(i, j) * m(i, j);
            }
        if (off <= 1e-30 * total || off == 0.0) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (m(p, q) == 0.0) continue;
                double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double mkp = m(k, p), mkq = m(k, q);
                    m(k, p) = c * mkp - s * mkq;
                    m(k, q) = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double mpk = m(p, k), mqk = m(q, k);
                    m(p, k) = c * mpk - s * mqk;
                    m(q, k) = s * mpk + c * mqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return m(x, x) > m(y, y); });
    SymmetricEigen out{std::vector<double>(n), SquareMatrix(n)};
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = m(order[j], order[j]);
        std::size_t big = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (std::abs(v(k, order[j])) > std::abs(v(big, order[j])) + 1e-12) big = k;
        double sign = v(big, order[j]) < 0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.vectors(k, j) = sign * v(k, order[j]);
    }
    return out;
}

struct PcaBasis {
    SquareMatrix basis;            // column j = j-th principal axis
    std::vector<double> variances; // eigenvalues, descending
    bool degenerate = false;       // zero-variance input; basis is the identity
};

/// Principal axes of `samples` (row-major, `dimension` columns): unit-norm
/// eigenvectors of the sample covariance in descending eigenvalue order.
inline PcaBasis pca_basis(std::span<const double> samples, std::size_t dimension) {
    if (dimension == 0) throw Error("pca.dimension", "PCA dimension must be >= 1");
    if (samples.size() % dimension != 0) throw Error("pca.shape", "sample buffer is not a whole number of rows");
    const std::size_t n = samples.size() / dimension;
    if (n < 2) throw Error("pca.samples", "PCA needs at least two samples");

    std::vector<double> mean(dimension, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < dimension; ++k) mean[k] += samples[i * dimension + k];
    for (auto& m : mean) m /= static_cast<double>(n);
    SquareMatrix cov(dimension);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t r = 0; r < dimension; ++r) {
            double dr = samples[i * dimension + r] - mean[r];
            for (std::size_t c = r; c < dimension; ++c)
                cov(r, c) += dr * (samples[i * dimension + c] - mean[c]);
        }
    double trace = 0.0;
    for (std::size_t r = 0; r < dimension; ++r)
        for (std::size_t c = r; c < dimension; ++c) {
            cov(r, c) /= static_cast<double>(n - 1);
            cov(c, r) = cov(r, c);
            if (r == c) trace += cov(r, r);
        }
    if (!(trace > 0.0))
        return {SquareMatrix::identity(dimension), std::vector<double>(dimension, 0.0), true};
    auto eig = jacobi_eigen(cov);
    return {std::move(eig.vectors), std::move(eig.values), false};
}

} // namespace shill::ml
