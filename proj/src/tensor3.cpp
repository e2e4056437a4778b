#include "rtsvd/tensor3.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <string>

namespace rtsvd {

namespace {

void check_finite(const std::vector<double>& data) {
    for (double x : data)
        if (!std::isfinite(x))
            throw NonFiniteValue("tensor entries must be finite");
}

// One forward/backward plan pair per tube length, shared process-wide.
// Plan creation is serialized; execution through fftw_execute_dft on
// per-thread buffers is thread-safe.
class PlanCache {
public:
    struct Plans {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    static Plans get(int n) {
        static PlanCache cache;
        std::lock_guard<std::mutex> lock(cache.mutex_);
        auto it = cache.plans_.find(n);
        if (it != cache.plans_.end())
            return it->second;

        fftw_complex* in = fftw_alloc_complex(static_cast<std::size_t>(n));
        fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n));
        Plans p;
        p.fwd = fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE);
        p.bwd = fftw_plan_dft_1d(n, in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
        fftw_free(in);
        fftw_free(out);
        cache.plans_.emplace(n, p);
        return p;
    }

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

    std::mutex mutex_;
    std::map<int, Plans> plans_;
};

// Aligned per-thread scratch for one tube; reused across calls, regrown on
// demand.  fftw_malloc alignment matches the buffers the plans were created
// with, as fftw_execute_dft requires.
struct TubeScratch {
    fftw_complex* in = nullptr;
    fftw_complex* out = nullptr;
    int capacity = 0;

    void ensure(int n) {
        if (n <= capacity)
            return;
        release();
        in = fftw_alloc_complex(static_cast<std::size_t>(n));
        out = fftw_alloc_complex(static_cast<std::size_t>(n));
        capacity = n;
    }

    void release() {
        if (in) fftw_free(in);
        if (out) fftw_free(out);
        in = out = nullptr;
        capacity = 0;
    }

    ~TubeScratch() { release(); }
};

thread_local TubeScratch scratch;

} // namespace

Tensor3::Tensor3(Index n1, Index n2, Index n3) : n1_(n1), n2_(n2), n3_(n3) {
    if (n1 < 0 || n2 < 0 || n3 < 0)
        throw DimensionMismatch("tensor dimensions must be nonnegative");
    data_.assign(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
}

Tensor3::Tensor3(Index n1, Index n2, Index n3, std::vector<double> data)
    : n1_(n1), n2_(n2), n3_(n3), data_(std::move(data)) {
    if (n1 < 0 || n2 < 0 || n3 < 0)
        throw DimensionMismatch("tensor dimensions must be nonnegative");
    if (static_cast<Index>(data_.size()) != n1 * n2 * n3)
        throw DimensionMismatch("tensor payload size does not match dimensions");
    check_finite(data_);
}

Tensor3 Tensor3::generate(Index n1, Index n2, Index n3,
                          const std::function<double(Index, Index, Index)>& fn) {
    std::vector<double> data(static_cast<std::size_t>(n1 * n2 * n3));
    std::size_t pos = 0;
    for (Index k = 0; k < n3; ++k)
        for (Index j = 0; j < n2; ++j)
            for (Index i = 0; i < n1; ++i)
                data[pos++] = fn(i, j, k);
    return Tensor3(n1, n2, n3, std::move(data));
}

Tensor3 Tensor3::from_slices(const std::vector<Matrix>& slices) {
    if (slices.empty())
        return Tensor3();
    Index n1 = slices.front().rows();
    Index n2 = slices.front().cols();
    Index n3 = static_cast<Index>(slices.size());
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n1 * n2 * n3));
    for (const Matrix& s : slices) {
        if (s.rows() != n1 || s.cols() != n2)
            throw DimensionMismatch("frontal slices must share one shape");
        data.insert(data.end(), s.data(), s.data() + s.size());
    }
    return Tensor3(n1, n2, n3, std::move(data));
}

Eigen::Map<const Matrix> Tensor3::slice(Index k) const {
    return Eigen::Map<const Matrix>(data_.data() + k * n1_ * n2_, n1_, n2_);
}

Matrix Tensor3::lateral(Index j) const {
    Matrix m(n1_, n3_);
    for (Index k = 0; k < n3_; ++k)
        for (Index i = 0; i < n1_; ++i)
            m(i, k) = (*this)(i, j, k);
    return m;
}

Vector Tensor3::tube(Index i, Index j) const {
    Vector v(n3_);
    for (Index k = 0; k < n3_; ++k)
        v(k) = (*this)(i, j, k);
    return v;
}

FourierTensor3::FourierTensor3(std::vector<CMatrix> slices, bool symmetric)
    : symmetric_(symmetric), slices_(std::move(slices)) {
    if (slices_.empty())
        return;
    n1_ = slices_.front().rows();
    n2_ = slices_.front().cols();
    for (const CMatrix& s : slices_)
        if (s.rows() != n1_ || s.cols() != n2_)
            throw DimensionMismatch("spectrum slices must share one shape");
}

FourierTensor3 fft_mode3(const Tensor3& t) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    std::vector<CMatrix> slices(static_cast<std::size_t>(n3), CMatrix(n1, n2));
    if (n1 * n2 * n3 == 0)
        return FourierTensor3(std::move(slices), true);

    auto plans = PlanCache::get(static_cast<int>(n3));
    scratch.ensure(static_cast<int>(n3));

    for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < n1; ++i) {
            for (Index k = 0; k < n3; ++k) {
                scratch.in[k][0] = t(i, j, k);
                scratch.in[k][1] = 0.0;
            }
            fftw_execute_dft(plans.fwd, scratch.in, scratch.out);
            for (Index k = 0; k < n3; ++k)
                slices[static_cast<std::size_t>(k)](i, j) =
                    Complex(scratch.out[k][0], scratch.out[k][1]);
        }
    }
    return FourierTensor3(std::move(slices), true);
}

Tensor3 ifft_mode3(const FourierTensor3& f) {
    if (!f.symmetric())
        throw SymmetryViolation("ifft_mode3 requires a conjugate-symmetric spectrum");

    const Index n1 = f.n1(), n2 = f.n2(), n3 = f.n3();
    std::vector<double> data(static_cast<std::size_t>(n1 * n2 * n3));
    if (data.empty())
        return Tensor3(n1, n2, n3, std::move(data));

    auto plans = PlanCache::get(static_cast<int>(n3));
    scratch.ensure(static_cast<int>(n3));

    const double scale = 1.0 / static_cast<double>(n3);
    double max_imag = 0.0;
    for (Index j = 0; j < n2; ++j) {
        for (Index i = 0; i < n1; ++i) {
            for (Index k = 0; k < n3; ++k) {
                Complex z = f.slice(k)(i, j);
                scratch.in[k][0] = z.real();
                scratch.in[k][1] = z.imag();
            }
            fftw_execute_dft(plans.bwd, scratch.in, scratch.out);
            for (Index k = 0; k < n3; ++k) {
                data[static_cast<std::size_t>(i + n1 * (j + n2 * k))] = scratch.out[k][0] * scale;
                max_imag = std::max(max_imag, std::abs(scratch.out[k][1]) * scale);
            }
        }
    }

    if (max_imag > 1e-8 * frobenius_norm(f))
        throw SymmetryViolation("imaginary residue " + std::to_string(max_imag) +
                                " after inverse transform");
    return Tensor3(n1, n2, n3, std::move(data));
}

double frobenius_norm(const Tensor3& t) {
    double s = 0.0;
    for (double x : t.data())
        s += x * x;
    return std::sqrt(s);
}

double frobenius_norm(const FourierTensor3& f) {
    double s = 0.0;
    for (const CMatrix& m : f.slices())
        s += m.squaredNorm();
    return std::sqrt(s);
}

Matrix block_circulant(const Tensor3& t, Index max_entries) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    if (n1 * n3 * n2 * n3 > max_entries)
        throw SizeLimit("block-circulant matrix would exceed the dense budget");
    Matrix m(n1 * n3, n2 * n3);
    for (Index r = 0; r < n3; ++r)
        for (Index c = 0; c < n3; ++c)
            m.block(r * n1, c * n2, n1, n2) = t.slice((r - c + n3) % n3);
    return m;
}

} // namespace rtsvd
