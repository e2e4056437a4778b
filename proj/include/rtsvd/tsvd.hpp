// Truncated tensor SVD via per-slice factorization in the Fourier domain,
// plus the exact minimal-error evaluator used as the baseline everywhere.

#pragma once

#include "rtsvd/tensor3.hpp"

namespace rtsvd {

struct TsvdFactors {
    Tensor3 u;       // n1 x k x n3, t-orthogonal columns
    Tensor3 s;       // k x k x n3, f-diagonal, tubes ordered by magnitude
    Tensor3 v;       // n2 x k x n3, t-orthogonal columns
    int k = 0;

    // Row i holds the full singular value sequence of Fourier slice i,
    // nonincreasing.  Exact factorizations store all min(n1, n2) values;
    // sketched ones store the k + p estimated values padded with zeros.
    Matrix sigma_hat;
};

// Rank-k truncation computed slice-wise: SVD of each unique Fourier slice,
// truncate, mirror, invert.  Throws RankOutOfRange unless 1 <= k <= min(n1, n2).
TsvdFactors tsvd_truncated(const Tensor3& a, int k, int workers = 1);

// u * s * v^T under the t-product.
Tensor3 reconstruct(const TsvdFactors& f);

// Frobenius error of the best rank-k truncation,
// sqrt( (1/n3) sum_i sum_{j > k} sigma_hat(i, j)^2 ).  Requires
// 0 <= k <= columns of sigma_hat.
double optimal_error(const TsvdFactors& f, int k);
double optimal_error(const Matrix& sigma_hat, int k);

// Full singular value sequence of every Fourier slice, one row per slice.
// This is the diagnostic half of tsvd_truncated without the factors.
Matrix slice_singular_values(const Tensor3& a, int workers = 1);

} // namespace rtsvd
