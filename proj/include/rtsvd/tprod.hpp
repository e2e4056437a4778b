// The t-product algebra: products, transposes, identities, and the
// tensor QR factorization, all realized slice-wise in the Fourier domain.

#pragma once

#include "rtsvd/tensor3.hpp"

namespace rtsvd {

// Identity element for the t-product on n x n x n3 tensors: frontal slice 0
// is I_n, the remaining slices are zero.
Tensor3 identity_tensor(Index n, Index n3);

// Tensor transpose: each frontal slice transposed, slices 1 .. n3-1 in
// reversed order.  Satisfies ttranspose(tprod(a, b)) ==
// tprod(ttranspose(b), ttranspose(a)).
Tensor3 ttranspose(const Tensor3& a);

// t-product of a (n1 x n2 x n3) and b (n2 x n4 x n3).  Computed per Fourier
// slice; with exploit_symmetry only the unique slices are formed and the
// rest are filled by conjugation.
Tensor3 tprod(const Tensor3& a, const Tensor3& b, bool exploit_symmetry = true);

// Direct circular-convolution evaluation of the t-product, kept independent
// of the transform path so the two can be checked against each other.
// Throws SizeLimit when the multiply would exceed max_ops scalar products.
Tensor3 tprod_naive(const Tensor3& a, const Tensor3& b, Index max_ops = 100'000'000);

struct TQr {
    Tensor3 q; // n1 x min(n1,n2) x n3, orthonormal columns under the t-product
    Tensor3 r; // min(n1,n2) x n2 x n3, upper triangular per Fourier slice
};

// Economy tensor QR.  Every Fourier slice of r has a real nonnegative
// diagonal, which fixes the factor pair uniquely for full-rank slices and
// keeps repeated runs bit-identical.
TQr t_qr(const Tensor3& a, bool exploit_symmetry = true);

// True iff || tprod(ttranspose(a), a) - identity ||_F <= tol * sqrt(n2 * n3).
bool is_orthogonal(const Tensor3& a, double tol = 1e-10);

// True iff every off-diagonal entry of every frontal slice has magnitude
// at most tol * frobenius_norm(a).
bool is_f_diagonal(const Tensor3& a, double tol = 1e-10);

} // namespace rtsvd
