// Per-slice dense kernels shared by the factorization routines.  The phase
// conventions here pin down otherwise arbitrary unitary factors so that
// repeated runs, mirrored slices, and different worker counts all produce
// identical bits.

#pragma once

#include "rtsvd/tensor3.hpp"

namespace rtsvd::detail {

// Economy QR with the diagonal of R made real and nonnegative.
struct QrPair {
    CMatrix q;
    CMatrix r;
};
QrPair thin_qr(const CMatrix& m);

// Thin SVD with each left singular vector's first nonzero entry made real
// and nonnegative (the matching phase is absorbed into v).
struct SvdTriple {
    CMatrix u;
    Vector s;
    CMatrix v;
};
SvdTriple thin_svd(const CMatrix& m);

// Singular values only, descending.
Vector singular_values(const CMatrix& m);

// Drops the imaginary part in place; used on slices that are real by
// conjugate symmetry so the spectrum stays exactly symmetric.
void force_real(CMatrix& m);

} // namespace rtsvd::detail
