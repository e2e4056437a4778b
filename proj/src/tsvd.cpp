#include "rtsvd/tsvd.hpp"

#include "rtsvd/detail/slice_linalg.hpp"
#include "rtsvd/parallel.hpp"
#include "rtsvd/tprod.hpp"

namespace rtsvd {

TsvdFactors tsvd_truncated(const Tensor3& a, int k, int workers) {
    const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    const Index rank_cap = std::min(n1, n2);
    if (k < 1 || k > rank_cap)
        throw RankOutOfRange("truncation rank must lie in [1, min(n1, n2)]");

    FourierTensor3 ah = fft_mode3(a);
    const Index unique = unique_slice_count(n3);

    std::vector<CMatrix> us(static_cast<std::size_t>(n3));
    std::vector<CMatrix> ss(static_cast<std::size_t>(n3));
    std::vector<CMatrix> vs(static_cast<std::size_t>(n3));
    Matrix sigma_hat(n3, rank_cap);

    parallel_for(static_cast<std::size_t>(unique), workers, [&](std::size_t idx) {
        const Index s = static_cast<Index>(idx);
        detail::SvdTriple svd = detail::thin_svd(ah.slice(s));
        CMatrix uk = svd.u.leftCols(k);
        CMatrix vk = svd.v.leftCols(k);
        CMatrix sk = svd.s.head(k).cast<Complex>().asDiagonal();
        if (self_mirrored(s, n3)) {
            detail::force_real(uk);
            detail::force_real(vk);
        }
        us[idx] = std::move(uk);
        ss[idx] = std::move(sk);
        vs[idx] = std::move(vk);
        sigma_hat.row(s) = svd.s.transpose();
    });

    for (Index s = unique; s < n3; ++s) {
        const std::size_t m = static_cast<std::size_t>(mirror_slice(s, n3));
        const std::size_t d = static_cast<std::size_t>(s);
        us[d] = us[m].conjugate();
        ss[d] = ss[m]; // real diagonal
        vs[d] = vs[m].conjugate();
        sigma_hat.row(s) = sigma_hat.row(mirror_slice(s, n3));
    }

    TsvdFactors f;
    f.k = k;
    f.u = ifft_mode3(FourierTensor3(std::move(us), true));
    f.s = ifft_mode3(FourierTensor3(std::move(ss), true));
    f.v = ifft_mode3(FourierTensor3(std::move(vs), true));
    f.sigma_hat = std::move(sigma_hat);
    return f;
}

Tensor3 reconstruct(const TsvdFactors& f) {
    return tprod(f.u, tprod(f.s, ttranspose(f.v)));
}

double optimal_error(const Matrix& sigma_hat, int k) {
    if (k < 0 || k > sigma_hat.cols())
        throw RankOutOfRange("tail index must lie in [0, stored singular values]");
    const Index n3 = sigma_hat.rows();
    double acc = 0.0;
    for (Index i = 0; i < n3; ++i)
        for (Index j = k; j < sigma_hat.cols(); ++j)
            acc += sigma_hat(i, j) * sigma_hat(i, j);
    return std::sqrt(acc / static_cast<double>(n3));
}

double optimal_error(const TsvdFactors& f, int k) {
    return optimal_error(f.sigma_hat, k);
}

Matrix slice_singular_values(const Tensor3& a, int workers) {
    const Index n3 = a.n3();
    const Index rank_cap = std::min(a.n1(), a.n2());
    FourierTensor3 ah = fft_mode3(a);
    Matrix sigma_hat(n3, rank_cap);

    const Index unique = unique_slice_count(n3);
    parallel_for(static_cast<std::size_t>(unique), workers, [&](std::size_t idx) {
        sigma_hat.row(static_cast<Index>(idx)) =
            detail::singular_values(ah.slice(static_cast<Index>(idx))).transpose();
    });
    for (Index s = unique; s < n3; ++s)
        sigma_hat.row(s) = sigma_hat.row(mirror_slice(s, n3));
    return sigma_hat;
}

} // namespace rtsvd
