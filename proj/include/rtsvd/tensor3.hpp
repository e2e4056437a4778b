// Dense order-3 tensors and the tube-wise discrete Fourier transform.
//
// A Tensor3 holds real entries in frontal-slice order: entry (i, j, k) lives
// at data[i + n1 * (j + n2 * k)], so each frontal slice is a column-major
// n1 x n2 matrix and the slice index varies slowest.  Tensors are immutable
// after construction and safe to share across threads.
//
// fft_mode3 applies an unnormalized forward DFT along every tube (i, j, :);
// ifft_mode3 applies the 1/n3-normalized inverse.  Tube lengths are
// arbitrary, not just powers of two.  Spectra of real tensors satisfy
// slice[(n3 - s) % n3] == conj(slice[s]), which downstream per-slice
// algorithms exploit by computing only the first floor(n3/2) + 1 slices.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rtsvd/errors.hpp"

namespace rtsvd {

using Index   = Eigen::Index;
using Matrix  = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using Vector  = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

class Tensor3 {
public:
    Tensor3() = default;

    // Zero tensor of the given shape.
    Tensor3(Index n1, Index n2, Index n3);

    // Takes ownership of `data`, which must hold n1*n2*n3 finite values in
    // frontal-slice order.
    Tensor3(Index n1, Index n2, Index n3, std::vector<double> data);

    // Builds entry (i, j, k) = fn(i, j, k).
    static Tensor3 generate(Index n1, Index n2, Index n3,
                            const std::function<double(Index, Index, Index)>& fn);

    // Stacks equally sized matrices as frontal slices.
    static Tensor3 from_slices(const std::vector<Matrix>& slices);

    Index n1() const { return n1_; }
    Index n2() const { return n2_; }
    Index n3() const { return n3_; }
    Index size() const { return static_cast<Index>(data_.size()); }

    double operator()(Index i, Index j, Index k) const {
        return data_[static_cast<std::size_t>(i + n1_ * (j + n2_ * k))];
    }

    const std::vector<double>& data() const { return data_; }

    // View of frontal slice k as an n1 x n2 matrix.
    Eigen::Map<const Matrix> slice(Index k) const;

    // Copy of lateral slice j as an n1 x n3 matrix (column c = tube layer c).
    Matrix lateral(Index j) const;

    // Copy of tube (i, j, :).
    Vector tube(Index i, Index j) const;

private:
    Index n1_ = 0, n2_ = 0, n3_ = 0;
    std::vector<double> data_;
};

// Spectrum of a Tensor3 along mode 3: n3 complex n1 x n2 slices.  The
// `symmetric` flag records that the slices are conjugate-symmetric in the
// slice index, which holds for every spectrum of a real tensor and is
// required by ifft_mode3.
class FourierTensor3 {
public:
    FourierTensor3() = default;
    FourierTensor3(std::vector<CMatrix> slices, bool symmetric);

    Index n1() const { return n1_; }
    Index n2() const { return n2_; }
    Index n3() const { return static_cast<Index>(slices_.size()); }
    bool symmetric() const { return symmetric_; }

    const CMatrix& slice(Index k) const { return slices_[static_cast<std::size_t>(k)]; }
    const std::vector<CMatrix>& slices() const { return slices_; }

private:
    Index n1_ = 0, n2_ = 0;
    bool symmetric_ = false;
    std::vector<CMatrix> slices_;
};

// Number of spectrum slices that must be computed explicitly for a real
// tensor; the rest follow by conjugation.
inline Index unique_slice_count(Index n3) { return n3 / 2 + 1; }

// Index of the slice conjugate-paired with s (0-based).
inline Index mirror_slice(Index s, Index n3) { return (n3 - s) % n3; }

// True for slices that are their own mirror and therefore real-valued in
// the spectrum of a real tensor.
inline bool self_mirrored(Index s, Index n3) { return s == 0 || (n3 % 2 == 0 && s == n3 / 2); }

FourierTensor3 fft_mode3(const Tensor3& t);

// Inverts a conjugate-symmetric spectrum.  Throws SymmetryViolation when
// the flag is unset or the imaginary residue after inversion exceeds
// 1e-8 * frobenius_norm(f).
Tensor3 ifft_mode3(const FourierTensor3& f);

double frobenius_norm(const Tensor3& t);
double frobenius_norm(const FourierTensor3& f);

// Dense block-circulant matricization: an (n1*n3) x (n2*n3) matrix whose
// block (r, c) is frontal slice (r - c) mod n3.  Oracle-grade; throws
// SizeLimit when the result would exceed max_entries.
Matrix block_circulant(const Tensor3& t, Index max_entries = Index(1) << 22);

} // namespace rtsvd
