#include "rtsvd/randomized.hpp"

#include "rtsvd/detail/slice_linalg.hpp"
#include "rtsvd/parallel.hpp"

#include <chrono>
#include <cmath>
#include <random>

namespace rtsvd {

namespace {

// Expands the scalar/vector iteration setting to one count per slice and
// checks the mirror-pairing constraint that lets mirrored slices reuse
// computed results.
std::vector<int> iteration_vector(const SketchConfig& cfg, Index n3) {
    std::vector<int> q;
    if (cfg.q_per_slice) {
        q = *cfg.q_per_slice;
        if (static_cast<Index>(q.size()) != n3)
            throw IterationVectorLength("iteration vector must have one entry per slice");
    } else {
        q.assign(static_cast<std::size_t>(n3), cfg.q);
    }
    for (int qi : q)
        if (qi < 0)
            throw InvalidArgument("iteration counts must be nonnegative");
    for (Index s = 0; s < n3; ++s) {
        Index m = mirror_slice(s, n3);
        if (q[static_cast<std::size_t>(s)] != q[static_cast<std::size_t>(m)])
            throw IterationVectorLength("mirrored slices must share an iteration count");
    }
    return q;
}

double slice_tail_sq(const Matrix& sigma_hat, Index i, int k) {
    double acc = 0.0;
    for (Index j = k; j < sigma_hat.cols(); ++j)
        acc += sigma_hat(i, j) * sigma_hat(i, j);
    return acc;
}

double slice_gap(const Matrix& sigma_hat, Index i, int k) {
    if (k >= sigma_hat.cols())
        return 0.0;
    double lead = sigma_hat(i, k - 1);
    return lead > 0.0 ? sigma_hat(i, k) / lead : 0.0;
}

// sqrt( (1/n3) sum_i (1 + c_i * tau_i^(4 q_i)) tail_i^2 ) with c_i the
// slice-independent constant of the requested bound.
double per_slice_bound(const Matrix& sigma_hat, int k, double constant,
                       const std::vector<int>& q) {
    const Index n3 = sigma_hat.rows();
    double acc = 0.0;
    for (Index i = 0; i < n3; ++i) {
        double tau = slice_gap(sigma_hat, i, k);
        double amp = 1.0 + constant * std::pow(tau, 4.0 * q[static_cast<std::size_t>(i)]);
        acc += amp * slice_tail_sq(sigma_hat, i, k);
    }
    return std::sqrt(acc / static_cast<double>(n3));
}

CMatrix range_kernel(const CMatrix& a, const CMatrix& w, int q) {
    CMatrix basis = detail::thin_qr(a * w).q;
    for (int round = 0; round < q; ++round) {
        CMatrix cobasis = detail::thin_qr(a.adjoint() * basis).q;
        basis = detail::thin_qr(a * cobasis).q;
    }
    return basis;
}

struct SliceResult {
    CMatrix u, s, v;     // truncated factors of one Fourier slice
    Vector svals;        // singular values of the projected slice
    double residual_sq;  // || a - u s v^H ||_F^2 for this slice
};

SliceResult sketch_slice(const CMatrix& a, const CMatrix& w, int k, int q) {
    SliceResult out;
    CMatrix basis = range_kernel(a, w, q);
    detail::SvdTriple svd = detail::thin_svd(basis.adjoint() * a);
    out.u = basis * svd.u.leftCols(k);
    out.v = svd.v.leftCols(k);
    out.s = svd.s.head(k).cast<Complex>().asDiagonal();
    out.svals = svd.s;
    out.residual_sq = (a - out.u * svd.s.head(k).asDiagonal() * out.v.adjoint()).squaredNorm();
    return out;
}

} // namespace

Matrix gaussian_matrix(Index n1, Index n2, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix m(n1, n2);
    for (Index j = 0; j < n2; ++j)
        for (Index i = 0; i < n1; ++i)
            m(i, j) = normal(gen);
    return m;
}

Tensor3 gaussian_random_tensor(Index n1, Index n2, Index n3, std::uint64_t seed) {
    if (n1 < 1 || n2 < 1 || n3 < 1)
        throw DimensionMismatch("random tensor needs positive dimensions");
    Matrix head = gaussian_matrix(n1, n2, seed);
    std::vector<double> data(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
    std::copy(head.data(), head.data() + head.size(), data.begin());
    return Tensor3(n1, n2, n3, std::move(data));
}

MatrixRsvd rsvd_matrix(const CMatrix& a, int k, int p, std::uint64_t seed) {
    const Index m = a.rows(), n = a.cols();
    if (k < 1 || k > std::min(m, n))
        throw RankOutOfRange("truncation rank must lie in [1, min(m, n)]");
    if (p < 0)
        throw InvalidArgument("oversampling must be nonnegative");
    const Index width = std::min<Index>(k + p, n);

    CMatrix w = gaussian_matrix(n, width, seed).cast<Complex>();
    SliceResult r = sketch_slice(a, w, k, 0);
    return MatrixRsvd{std::move(r.u), r.svals.head(k), std::move(r.v)};
}

CMatrix subspace_range_matrix(const CMatrix& a, int k, int p, int q, std::uint64_t seed) {
    if (k < 1 || p < 0 || q < 0)
        throw InvalidArgument("need k >= 1, p >= 0, q >= 0");
    const Index width = std::min<Index>(k + p, a.cols());
    CMatrix w = gaussian_matrix(a.cols(), width, seed).cast<Complex>();
    return range_kernel(a, w, q);
}

CMatrix subspace_range_with_sketch(const CMatrix& a, const CMatrix& w, int q) {
    if (w.rows() != a.cols())
        throw DimensionMismatch("sketch must have one row per column of a");
    return range_kernel(a, w, q);
}

std::pair<TsvdFactors, ErrorReport> rtsvd(const Tensor3& a, SketchConfig cfg, int workers) {
    cfg.q = 0;
    cfg.q_per_slice.reset();
    return rtsvd_subspace(a, cfg, workers);
}

std::pair<TsvdFactors, ErrorReport> rtsvd_subspace(const Tensor3& a, const SketchConfig& cfg,
                                                   int workers) {
    const auto start = std::chrono::steady_clock::now();
    const Index n1 = a.n1(), n2 = a.n2(), n3 = a.n3();
    const Index rank_cap = std::min(n1, n2);
    if (cfg.k < 1 || cfg.k > rank_cap)
        throw RankOutOfRange("truncation rank must lie in [1, min(n1, n2)]");
    if (cfg.p < 0)
        throw InvalidArgument("oversampling must be nonnegative");

    const int k = cfg.k;
    const int p_eff = static_cast<int>(std::min<Index>(cfg.p, rank_cap - k));
    const Index width = k + p_eff;
    const std::vector<int> q = iteration_vector(cfg, n3);

    FourierTensor3 ah = fft_mode3(a);
    const CMatrix w = gaussian_matrix(n2, width, cfg.seed).cast<Complex>();
    const Index unique = unique_slice_count(n3);

    std::vector<CMatrix> us(static_cast<std::size_t>(n3));
    std::vector<CMatrix> ss(static_cast<std::size_t>(n3));
    std::vector<CMatrix> vs(static_cast<std::size_t>(n3));
    Matrix sigma_est = Matrix::Zero(n3, rank_cap);
    Matrix sigma_exact(n3, rank_cap);
    std::vector<double> residual_sq(static_cast<std::size_t>(n3), 0.0);

    parallel_for(static_cast<std::size_t>(unique), workers, [&](std::size_t idx) {
        const Index s = static_cast<Index>(idx);
        sigma_exact.row(s) = detail::singular_values(ah.slice(s)).transpose();
        SliceResult r = sketch_slice(ah.slice(s), w, k, q[idx]);
        if (self_mirrored(s, n3)) {
            detail::force_real(r.u);
            detail::force_real(r.s);
            detail::force_real(r.v);
        }
        sigma_est.row(s).head(r.svals.size()) = r.svals.transpose();
        residual_sq[idx] = r.residual_sq;
        us[idx] = std::move(r.u);
        ss[idx] = std::move(r.s);
        vs[idx] = std::move(r.v);
    });

    for (Index s = unique; s < n3; ++s) {
        const std::size_t d = static_cast<std::size_t>(s);
        const std::size_t m = static_cast<std::size_t>(mirror_slice(s, n3));
        us[d] = us[m].conjugate();
        ss[d] = ss[m];
        vs[d] = vs[m].conjugate();
        sigma_est.row(s) = sigma_est.row(mirror_slice(s, n3));
        sigma_exact.row(s) = sigma_exact.row(mirror_slice(s, n3));
        residual_sq[d] = residual_sq[m];
    }

    TsvdFactors f;
    f.k = k;
    f.u = ifft_mode3(FourierTensor3(std::move(us), true));
    f.s = ifft_mode3(FourierTensor3(std::move(ss), true));
    f.v = ifft_mode3(FourierTensor3(std::move(vs), true));
    f.sigma_hat = std::move(sigma_est);

    ErrorReport rep;
    rep.norm_a = frobenius_norm(a);
    rep.p_effective = p_eff;
    rep.q_used = q;
    double res_acc = 0.0;
    for (double r : residual_sq)
        res_acc += r;
    const double realized_abs = std::sqrt(res_acc / static_cast<double>(n3));
    rep.realized = rep.norm_a > 0.0 ? realized_abs / rep.norm_a : 0.0;
    rep.optimal = rep.norm_a > 0.0 ? optimal_error(sigma_exact, k) / rep.norm_a : 0.0;
    rep.tau.resize(static_cast<std::size_t>(n3));
    for (Index i = 0; i < n3; ++i)
        rep.tau[static_cast<std::size_t>(i)] = slice_gap(sigma_exact, i, k);

    if (p_eff >= 2) {
        double b = per_slice_bound(sigma_exact, k, static_cast<double>(k) / (p_eff - 1), q);
        rep.expected_bound_abs = b;
        rep.expected_bound = rep.norm_a > 0.0 ? b / rep.norm_a : 0.0;
    }
    if (cfg.delta > 0.0 && cfg.delta < 1.0) {
        double c = tail_constant(n2, k, p_eff, cfg.delta);
        double b = per_slice_bound(sigma_exact, k, c * c, q);
        rep.c_delta = c;
        rep.tail_bound_abs = b;
        rep.tail_bound = rep.norm_a > 0.0 ? b / rep.norm_a : 0.0;
    }

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {std::move(f), std::move(rep)};
}

std::vector<int> choose_iterations(const Matrix& sigma_hat, int k, int p, double eps, int q_max) {
    if (eps <= 0.0 || eps >= 1.0)
        throw InvalidEpsilon("accuracy target must lie in (0, 1)");
    if (p < 2)
        throw OversamplingTooSmall("iteration selection needs p >= 2");
    if (k < 1 || k > sigma_hat.cols())
        throw RankOutOfRange("truncation rank must lie in [1, stored singular values]");
    if (q_max < 0)
        throw InvalidArgument("iteration cap must be nonnegative");

    const double target = std::log(eps * (p - 1) / static_cast<double>(k));
    std::vector<int> q(static_cast<std::size_t>(sigma_hat.rows()), 0);
    for (Index i = 0; i < sigma_hat.rows(); ++i) {
        double tau = slice_gap(sigma_hat, i, k);
        if (tau <= 0.0)
            continue; // slice rank <= k, one pass is exact
        if (tau >= 1.0 - 1e-12) {
            q[static_cast<std::size_t>(i)] = q_max;
            continue;
        }
        double raw = std::ceil(0.25 * target / std::log(tau));
        q[static_cast<std::size_t>(i)] =
            static_cast<int>(std::max(0.0, std::min(raw, 1e9)));
    }
    return q;
}

std::vector<int> choose_iterations(const TsvdFactors& f, int k, int p, double eps, int q_max) {
    return choose_iterations(f.sigma_hat, k, p, eps, q_max);
}

double bound_expected(const TsvdFactors& f, const SketchConfig& cfg) {
    if (cfg.p < 2)
        throw OversamplingTooSmall("mean-error bound needs p >= 2");
    if (cfg.k < 1 || cfg.k > f.sigma_hat.cols())
        throw RankOutOfRange("truncation rank must lie in [1, stored singular values]");
    std::vector<int> q = iteration_vector(cfg, f.sigma_hat.rows());
    return per_slice_bound(f.sigma_hat, cfg.k, static_cast<double>(cfg.k) / (cfg.p - 1), q);
}

double tail_constant(Index n2, int k, int p, double delta) {
    if (delta <= 0.0 || delta >= 1.0)
        throw InvalidDelta("failure probability must lie in (0, 1)");
    if (k < 1 || k > n2)
        throw RankOutOfRange("truncation rank must lie in [1, n2]");
    if (p < 0)
        throw InvalidArgument("oversampling must be nonnegative");
    const double l = static_cast<double>(k + p);
    const double log_2d = std::log(2.0 / delta);
    return (std::exp(1.0) * std::sqrt(l) / (p + 1)) * std::pow(2.0 / delta, 1.0 / (p + 1)) *
           (std::sqrt(static_cast<double>(n2 - k)) + std::sqrt(l) + std::sqrt(2.0 * log_2d));
}

TailBound tail_bound(const TsvdFactors& f, const SketchConfig& cfg, double delta) {
    if (cfg.k < 1 || cfg.k > f.sigma_hat.cols())
        throw RankOutOfRange("truncation rank must lie in [1, stored singular values]");
    std::vector<int> q = iteration_vector(cfg, f.sigma_hat.rows());
    TailBound out;
    out.c_delta = tail_constant(f.v.n1(), cfg.k, cfg.p, delta);
    out.bound = per_slice_bound(f.sigma_hat, cfg.k, out.c_delta * out.c_delta, q);
    return out;
}

double structural_error_bound(const CMatrix& a, const CMatrix& w, int k, int q) {
    const Index m = a.rows(), n = a.cols();
    if (w.rows() != n)
        throw DimensionMismatch("sketch must have one row per column of a");
    if (k < 1 || k > std::min(m, n))
        throw RankOutOfRange("truncation rank must lie in [1, min(m, n)]");
    if (k > w.cols())
        throw RankDeficientSketch("sketch needs at least k columns");
    if (q < 0)
        throw InvalidArgument("iteration count must be nonnegative");

    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sig = svd.singularValues();
    const Index r = sig.size();
    if (k == r)
        return 0.0; // no tail to miss

    CMatrix w1 = svd.matrixV().leftCols(k).adjoint() * w;
    CMatrix w2 = svd.matrixV().rightCols(r - k).adjoint() * w;

    Eigen::JacobiSVD<CMatrix> wsvd(w1, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& ws = wsvd.singularValues();
    // scale against the whole sketch: a numerically zero leading block is
    // rank deficient even though its own singular values agree with each other
    if (ws(ws.size() - 1) <= 1e-12 * w.norm())
        throw RankDeficientSketch("leading sketch block lost row rank");
    CMatrix pinv = wsvd.matrixV() * ws.cwiseInverse().asDiagonal() * wsvd.matrixU().adjoint();

    const Vector tail = sig.tail(r - k);
    const double tau = sig(k - 1) > 0.0 ? sig(k) / sig(k - 1) : 0.0;
    const double cross = (tail.asDiagonal() * w2 * pinv).squaredNorm();
    return tail.squaredNorm() + std::pow(tau, 4.0 * q) * cross;
}

} // namespace rtsvd
