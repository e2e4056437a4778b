#include "rtsvd/tprod.hpp"

#include "rtsvd/detail/slice_linalg.hpp"

#include <string>

namespace rtsvd {

Tensor3 identity_tensor(Index n, Index n3) {
    if (n < 1 || n3 < 1)
        throw DimensionMismatch("identity tensor needs positive dimensions");
    Tensor3 t(n, n, n3);
    std::vector<double> data = t.data();
    for (Index i = 0; i < n; ++i)
        data[static_cast<std::size_t>(i + n * i)] = 1.0;
    return Tensor3(n, n, n3, std::move(data));
}

Tensor3 ttranspose(const Tensor3& a) {
    const Index n3 = a.n3();
    std::vector<Matrix> slices(static_cast<std::size_t>(n3));
    for (Index s = 0; s < n3; ++s)
        slices[static_cast<std::size_t>(s)] = a.slice((n3 - s) % n3).transpose();
    return Tensor3::from_slices(slices);
}

Tensor3 tprod(const Tensor3& a, const Tensor3& b, bool exploit_symmetry) {
    if (a.n2() != b.n1() || a.n3() != b.n3())
        throw DimensionMismatch("t-product needs a: n1 x n2 x n3 and b: n2 x n4 x n3");

    FourierTensor3 ah = fft_mode3(a);
    FourierTensor3 bh = fft_mode3(b);
    const Index n3 = a.n3();

    std::vector<CMatrix> out(static_cast<std::size_t>(n3));
    const Index unique = exploit_symmetry ? unique_slice_count(n3) : n3;
    for (Index s = 0; s < unique; ++s)
        out[static_cast<std::size_t>(s)] = ah.slice(s) * bh.slice(s);
    for (Index s = unique; s < n3; ++s)
        out[static_cast<std::size_t>(s)] = out[static_cast<std::size_t>(mirror_slice(s, n3))].conjugate();

    return ifft_mode3(FourierTensor3(std::move(out), true));
}

Tensor3 tprod_naive(const Tensor3& a, const Tensor3& b, Index max_ops) {
    if (a.n2() != b.n1() || a.n3() != b.n3())
        throw DimensionMismatch("t-product needs a: n1 x n2 x n3 and b: n2 x n4 x n3");

    const Index n1 = a.n1(), n2 = a.n2(), n4 = b.n2(), n3 = a.n3();
    if (n1 * n4 * n2 * n3 * n3 > max_ops)
        throw SizeLimit("naive t-product would exceed " + std::to_string(max_ops) + " operations");

    // c(i, j, :) = sum_l  a(i, l, :) (*) b(l, j, :), with (*) the circular
    // convolution of tubes.
    Tensor3 zero(n1, n4, n3);
    std::vector<double> data = zero.data();
    for (Index j = 0; j < n4; ++j)
        for (Index i = 0; i < n1; ++i)
            for (Index l = 0; l < n2; ++l)
                for (Index t = 0; t < n3; ++t) {
                    double acc = 0.0;
                    for (Index s = 0; s < n3; ++s)
                        acc += a(i, l, s) * b(l, j, (t - s + n3) % n3);
                    data[static_cast<std::size_t>(i + n1 * (j + n4 * t))] += acc;
                }
    return Tensor3(n1, n4, n3, std::move(data));
}

TQr t_qr(const Tensor3& a, bool exploit_symmetry) {
    const Index n3 = a.n3();
    FourierTensor3 ah = fft_mode3(a);

    std::vector<CMatrix> qs(static_cast<std::size_t>(n3));
    std::vector<CMatrix> rs(static_cast<std::size_t>(n3));
    const Index unique = exploit_symmetry ? unique_slice_count(n3) : n3;
    for (Index s = 0; s < unique; ++s) {
        detail::QrPair qr = detail::thin_qr(ah.slice(s));
        if (exploit_symmetry && self_mirrored(s, n3)) {
            detail::force_real(qr.q);
            detail::force_real(qr.r);
        }
        qs[static_cast<std::size_t>(s)] = std::move(qr.q);
        rs[static_cast<std::size_t>(s)] = std::move(qr.r);
    }
    for (Index s = unique; s < n3; ++s) {
        const Index m = mirror_slice(s, n3);
        qs[static_cast<std::size_t>(s)] = qs[static_cast<std::size_t>(m)].conjugate();
        rs[static_cast<std::size_t>(s)] = rs[static_cast<std::size_t>(m)].conjugate();
    }

    TQr out;
    out.q = ifft_mode3(FourierTensor3(std::move(qs), true));
    out.r = ifft_mode3(FourierTensor3(std::move(rs), true));
    return out;
}

bool is_orthogonal(const Tensor3& a, double tol) {
    Tensor3 gram = tprod(ttranspose(a), a);
    Tensor3 id = identity_tensor(a.n2(), a.n3());
    double dev = 0.0;
    for (std::size_t i = 0; i < gram.data().size(); ++i) {
        double d = gram.data()[i] - id.data()[i];
        dev += d * d;
    }
    return std::sqrt(dev) <= tol * std::sqrt(static_cast<double>(a.n2() * a.n3()));
}

bool is_f_diagonal(const Tensor3& a, double tol) {
    const double bound = tol * frobenius_norm(a);
    for (Index k = 0; k < a.n3(); ++k)
        for (Index j = 0; j < a.n2(); ++j)
            for (Index i = 0; i < a.n1(); ++i)
                if (i != j && std::abs(a(i, j, k)) > bound)
                    return false;
    return true;
}

} // namespace rtsvd
