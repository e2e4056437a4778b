// Randomized range finders and the sketched tensor SVD, with every
// published error bound available as a computable diagnostic.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rtsvd/tsvd.hpp"

namespace rtsvd {

struct SketchConfig {
    int k = 1;           // truncation rank
    int p = 5;           // oversampling, clamped so k + p <= min(n1, n2)
    int q = 0;           // subspace iterations shared by all slices
    std::optional<std::vector<int>> q_per_slice; // overrides q when present
    double eps = 0.0;    // accuracy target for adaptive iteration counts
    std::uint64_t seed = 0;
    double delta = 0.05; // failure probability for the tail diagnostic
    int q_max = 10;      // iteration cap for slices with gap ~ 1
};

// Diagnostics attached to every sketched decomposition.  Errors are
// relative to the Frobenius norm of the input; bound fields are absent when
// the effective oversampling is below 2, where the expectation bounds are
// undefined.
struct ErrorReport {
    double realized = 0.0;      // || a - u * s * v^T ||_F / || a ||_F
    double optimal = 0.0;       // minimal achievable at rank k
    std::optional<double> expected_bound;     // mean-error bound, relative
    std::optional<double> expected_bound_abs;
    std::optional<double> tail_bound;         // probabilistic bound at delta, relative
    std::optional<double> tail_bound_abs;
    std::optional<double> c_delta;            // constant inside the tail bound
    std::vector<double> tau;    // per-slice spectral gap at rank k
    std::vector<int> q_used;    // per-slice iteration counts
    int p_effective = 0;        // oversampling after clamping
    double norm_a = 0.0;
    double seconds = 0.0;       // wall time of the decomposition
};

// n1 x n2 matrix of i.i.d. standard normals drawn column-major from a
// generator seeded with `seed`.
Matrix gaussian_matrix(Index n1, Index n2, std::uint64_t seed);

// Random tensor used for sketching: frontal slice 0 is gaussian_matrix,
// the other slices are zero, so every Fourier slice equals slice 0.
Tensor3 gaussian_random_tensor(Index n1, Index n2, Index n3, std::uint64_t seed);

// Basic randomized SVD of a complex matrix: sketch with k + p Gaussian
// columns, project, factor, truncate to k.
struct MatrixRsvd {
    CMatrix u; // m x k
    Vector s;  // k, nonincreasing, nonnegative
    CMatrix v; // n x k
};
MatrixRsvd rsvd_matrix(const CMatrix& a, int k, int p, std::uint64_t seed);

// Orthonormal basis of an approximate dominant subspace after q rounds of
// power iteration with intermediate re-orthogonalization.  q = 0 is the
// plain range finder.
CMatrix subspace_range_matrix(const CMatrix& a, int k, int p, int q, std::uint64_t seed);

// Same iteration driven by a caller-supplied sketch matrix.
CMatrix subspace_range_with_sketch(const CMatrix& a, const CMatrix& w, int q);

// Sketched tensor SVD (q = 0) and its subspace-iteration variant.  Factor
// layout matches tsvd_truncated; sigma_hat holds the k + p estimated
// values per slice, zero padded.  Identical config (seed included) gives
// bit-identical factors for any worker count.
std::pair<TsvdFactors, ErrorReport> rtsvd(const Tensor3& a, SketchConfig cfg, int workers = 1);
std::pair<TsvdFactors, ErrorReport> rtsvd_subspace(const Tensor3& a, const SketchConfig& cfg,
                                                   int workers = 1);

// Per-slice iteration counts q_i = ceil( log(eps (p-1) / k) / (4 log tau_i) ),
// with q_i = 0 for slices of exact rank <= k and q_i = q_max where the gap
// is within 1e-12 of 1.  Guarantees (k / (p-1)) tau_i^(4 q_i) <= eps for
// gaps below 1.
std::vector<int> choose_iterations(const Matrix& sigma_hat, int k, int p, double eps,
                                   int q_max = 10);
std::vector<int> choose_iterations(const TsvdFactors& f, int k, int p, double eps,
                                   int q_max = 10);

// Mean-error bound sqrt( (1/n3) sum_i (1 + (k/(p-1)) tau_i^(4 q_i)) tail_i^2 ),
// in absolute Frobenius units.  Requires exact singular values in f and
// p >= 2.
double bound_expected(const TsvdFactors& f, const SketchConfig& cfg);

// Probabilistic bound at failure probability delta; same shape with
// k/(p-1) replaced by the squared tail constant.
struct TailBound {
    double bound = 0.0; // absolute Frobenius units
    double c_delta = 0.0;
};
TailBound tail_bound(const TsvdFactors& f, const SketchConfig& cfg, double delta);

// The tail constant alone.
double tail_constant(Index n2, int k, int p, double delta);

// Deterministic per-instance bound on || a - q q^H a ||_F^2 for the basis
// built from sketch w with q rounds of iteration:
// || tail ||_F^2 + tau^(4q) * || Sigma2 W2 pinv(W1) ||_F^2.
// Throws RankDeficientSketch when W1 = V1^H w loses row rank.
double structural_error_bound(const CMatrix& a, const CMatrix& w, int k, int q);

} // namespace rtsvd
