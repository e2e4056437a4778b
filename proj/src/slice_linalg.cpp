#include "rtsvd/detail/slice_linalg.hpp"

namespace rtsvd::detail {

QrPair thin_qr(const CMatrix& m) {
    const Index rows = m.rows(), cols = m.cols();
    const Index rank = std::min(rows, cols);

    Eigen::HouseholderQR<CMatrix> qr(m);
    QrPair out;
    out.q = qr.householderQ() * CMatrix::Identity(rows, rank);
    out.r = qr.matrixQR().topRows(rank).triangularView<Eigen::Upper>();

    for (Index j = 0; j < rank; ++j) {
        Complex d = out.r(j, j);
        double mag = std::abs(d);
        if (mag == 0.0)
            continue;
        Complex phase = d / mag;
        out.r.row(j) *= std::conj(phase);
        out.q.col(j) *= phase;
    }
    return out;
}

SvdTriple thin_svd(const CMatrix& m) {
    Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdTriple out;
    out.u = svd.matrixU();
    out.s = svd.singularValues();
    out.v = svd.matrixV();

    for (Index j = 0; j < out.u.cols(); ++j) {
        Index lead = -1;
        for (Index i = 0; i < out.u.rows(); ++i) {
            if (out.u(i, j) != Complex(0.0, 0.0)) {
                lead = i;
                break;
            }
        }
        if (lead < 0)
            continue;
        Complex e = out.u(lead, j);
        Complex phase = e / std::abs(e);
        out.u.col(j) *= std::conj(phase);
        out.v.col(j) *= std::conj(phase);
    }
    return out;
}

Vector singular_values(const CMatrix& m) {
    Eigen::BDCSVD<CMatrix> svd(m);
    return svd.singularValues();
}

void force_real(CMatrix& m) {
    m = m.real().cast<Complex>();
}

} // namespace rtsvd::detail
