#include "rtsvd/recognition.hpp"

#include "rtsvd/parallel.hpp"
#include "rtsvd/tprod.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

namespace rtsvd {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// One derived stream per (method, fold, trial); collisions would couple
// trials that must be independent.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = seed;
    h = splitmix64(h + a + 1);
    h = splitmix64(h + b + 1);
    h = splitmix64(h + c + 1);
    return h;
}

Tensor3 select_laterals(const Tensor3& t, const std::vector<Index>& idx) {
    const Index n1 = t.n1(), n3 = t.n3();
    const Index m = static_cast<Index>(idx.size());
    std::vector<double> data(static_cast<std::size_t>(n1 * m * n3));
    for (Index c = 0; c < n3; ++c)
        for (Index jj = 0; jj < m; ++jj)
            for (Index i = 0; i < n1; ++i)
                data[static_cast<std::size_t>(i + n1 * (jj + m * c))] = t(i, idx[static_cast<std::size_t>(jj)], c);
    return Tensor3(n1, m, n3, std::move(data));
}

// Subtracts the mean lateral slice from every lateral slice; optionally
// rescales each (pixel row, tube layer) position by inv_scale.
Tensor3 shift_laterals(const Tensor3& t, const Tensor3& mean, const Tensor3* inv_scale) {
    const Index n1 = t.n1(), n2 = t.n2(), n3 = t.n3();
    if (mean.n1() != n1 || mean.n3() != n3)
        throw DimensionMismatch("mean slice does not match tensor shape");
    std::vector<double> data(static_cast<std::size_t>(n1 * n2 * n3));
    std::size_t pos = 0;
    for (Index c = 0; c < n3; ++c)
        for (Index j = 0; j < n2; ++j)
            for (Index i = 0; i < n1; ++i) {
                double v = t(i, j, c) - mean(i, 0, c);
                if (inv_scale)
                    v *= (*inv_scale)(i, 0, c);
                data[pos++] = v;
            }
    return Tensor3(n1, n2, n3, std::move(data));
}

} // namespace

Method parse_method(const std::string& name) {
    if (name == "tsvd") return Method::tsvd;
    if (name == "rtsvd") return Method::rtsvd;
    if (name == "rtsvd-q") return Method::rtsvd_q;
    throw InvalidArgument("unknown method '" + name + "'");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::tsvd: return "tsvd";
        case Method::rtsvd: return "rtsvd";
        case Method::rtsvd_q: return "rtsvd-q";
    }
    return "?";
}

RecognitionModel train(const FaceDataset& data, int k, Method method, const SketchConfig& cfg,
                       int workers, bool zscore) {
    const Index n1 = data.images.n1(), count = data.count(), n3 = data.images.n3();
    if (count < 1)
        throw TooFewSamples("training set is empty");
    if (static_cast<Index>(data.labels.size()) != count)
        throw DimensionMismatch("one label per training slice required");
    if (k < 1 || k > std::min(n1, count))
        throw RankOutOfRange("projector rank must lie in [1, min(n1, count)]");

    RecognitionModel model;
    model.method = method;
    model.k = k;
    model.labels = data.labels;
    model.label_names = data.label_names;

    // mean lateral slice over the training set
    std::vector<double> mean(static_cast<std::size_t>(n1 * n3), 0.0);
    for (Index c = 0; c < n3; ++c)
        for (Index j = 0; j < count; ++j)
            for (Index i = 0; i < n1; ++i)
                mean[static_cast<std::size_t>(i + n1 * c)] += data.images(i, j, c);
    for (double& v : mean)
        v /= static_cast<double>(count);
    model.mean_slice = Tensor3(n1, 1, n3, std::move(mean));

    if (zscore) {
        std::vector<double> inv(static_cast<std::size_t>(n1 * n3), 0.0);
        for (Index c = 0; c < n3; ++c)
            for (Index j = 0; j < count; ++j)
                for (Index i = 0; i < n1; ++i) {
                    double d = data.images(i, j, c) - model.mean_slice(i, 0, c);
                    inv[static_cast<std::size_t>(i + n1 * c)] += d * d;
                }
        for (double& v : inv) {
            double sd = std::sqrt(v / static_cast<double>(count));
            v = sd > 1e-12 ? 1.0 / sd : 1.0;
        }
        model.inv_scale = Tensor3(n1, 1, n3, std::move(inv));
    }

    Tensor3 shifted = shift_laterals(data.images, model.mean_slice,
                                     zscore ? &model.inv_scale : nullptr);

    SketchConfig run = cfg;
    run.k = k;
    switch (method) {
        case Method::tsvd:
            model.projector = tsvd_truncated(shifted, k, workers).u;
            break;
        case Method::rtsvd:
            model.projector = rtsvd(shifted, run, workers).first.u;
            break;
        case Method::rtsvd_q:
            if (run.eps > 0.0) {
                Matrix sigma = slice_singular_values(shifted, workers);
                run.q_per_slice = choose_iterations(sigma, k, run.p, run.eps, run.q_max);
            }
            model.projector = rtsvd_subspace(shifted, run, workers).first.u;
            break;
    }

    // coefficients in the Fourier domain, one projection per slice
    model.projector_hat = fft_mode3(model.projector);
    FourierTensor3 sh = fft_mode3(shifted);
    std::vector<CMatrix> coeff(static_cast<std::size_t>(n3));
    for (Index c = 0; c < n3; ++c)
        coeff[static_cast<std::size_t>(c)] = model.projector_hat.slice(c).adjoint() * sh.slice(c);
    model.coefficients_hat = FourierTensor3(std::move(coeff), true);
    model.coefficients = ifft_mode3(model.coefficients_hat);
    return model;
}

std::vector<Classification> classify_batch(const RecognitionModel& model, const Tensor3& probes) {
    const Index n1 = model.mean_slice.n1(), n3 = model.mean_slice.n3();
    if (probes.n1() != n1 || probes.n3() != n3)
        throw DimensionMismatch("probe slices must match the training image shape");
    const Index m = probes.n2();
    const Index count = model.coefficients_hat.n2();

    Tensor3 shifted = shift_laterals(probes, model.mean_slice,
                                     model.inv_scale.size() > 0 ? &model.inv_scale : nullptr);
    FourierTensor3 ph = fft_mode3(shifted);

    Matrix dist2 = Matrix::Zero(m, count);
    for (Index c = 0; c < n3; ++c) {
        CMatrix probe_coeff = model.projector_hat.slice(c).adjoint() * ph.slice(c); // k x m
        const CMatrix& train_coeff = model.coefficients_hat.slice(c);               // k x count
        for (Index t = 0; t < m; ++t)
            for (Index j = 0; j < count; ++j)
                dist2(t, j) += (probe_coeff.col(t) - train_coeff.col(j)).squaredNorm();
    }

    // spectra overcount the spatial norm by a factor n3
    std::vector<Classification> out(static_cast<std::size_t>(m));
    for (Index t = 0; t < m; ++t) {
        Index best = 0;
        for (Index j = 1; j < count; ++j)
            if (dist2(t, j) < dist2(t, best))
                best = j;
        Classification& c = out[static_cast<std::size_t>(t)];
        c.index = static_cast<int>(best);
        c.label = model.labels[static_cast<std::size_t>(best)];
        c.distance = std::sqrt(dist2(t, best) / static_cast<double>(n3));
    }
    return out;
}

Classification classify(const RecognitionModel& model, const Tensor3& probe) {
    if (probe.n2() != 1)
        throw DimensionMismatch("probe must be a single lateral slice");
    return classify_batch(model, probe).front();
}

CvReport cross_validate(const FaceDataset& data, int k, const std::vector<Method>& methods,
                        int folds, int trials, std::uint64_t seed, const SketchConfig& base_cfg,
                        int workers, bool zscore) {
    const Index count = data.count();
    if (folds < 2)
        throw InvalidArgument("cross validation needs at least two folds");
    if (count < folds)
        throw TooFewSamples("fewer samples than folds");
    if (trials < 1)
        throw InvalidArgument("trials must be positive");
    if (methods.empty())
        throw InvalidArgument("no methods requested");

    CvReport report;
    report.folds = folds;
    report.trials = trials;
    report.seed = seed;

    // seeded partition, shared by every method
    std::vector<Index> perm(static_cast<std::size_t>(count));
    std::iota(perm.begin(), perm.end(), Index(0));
    std::mt19937_64 gen(seed);
    std::shuffle(perm.begin(), perm.end(), gen);
    report.fold_indices.resize(static_cast<std::size_t>(folds));
    std::size_t cursor = 0;
    for (int f = 0; f < folds; ++f) {
        Index size = count / folds + (f < count % folds ? 1 : 0);
        auto& fold = report.fold_indices[static_cast<std::size_t>(f)];
        fold.assign(perm.begin() + cursor, perm.begin() + cursor + size);
        cursor += static_cast<std::size_t>(size);
    }

    struct Job {
        std::size_t method_idx;
        int fold;
        int trial;
    };
    std::vector<Job> jobs;
    report.methods.resize(methods.size());
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        report.methods[mi].method = methods[mi];
        int t = methods[mi] == Method::tsvd ? 1 : trials;
        report.methods[mi].folds.resize(static_cast<std::size_t>(folds));
        for (int f = 0; f < folds; ++f) {
            report.methods[mi].folds[static_cast<std::size_t>(f)].rates.assign(
                static_cast<std::size_t>(t), 0.0);
            for (int trial = 0; trial < t; ++trial)
                jobs.push_back({mi, f, trial});
        }
    }

    std::vector<double> job_seconds(jobs.size(), 0.0);
    // the worker budget is spent either across jobs or inside one
    // decomposition, never both
    const bool parallel_jobs = workers > 1 && jobs.size() > 1;
    const int inner_workers = parallel_jobs ? 1 : workers;

    parallel_for(jobs.size(), parallel_jobs ? workers : 1, [&](std::size_t ji) {
        const Job& job = jobs[ji];
        const auto& fold = report.fold_indices[static_cast<std::size_t>(job.fold)];

        std::vector<Index> train_idx;
        train_idx.reserve(static_cast<std::size_t>(count) - fold.size());
        std::vector<char> held(static_cast<std::size_t>(count), 0);
        for (Index i : fold)
            held[static_cast<std::size_t>(i)] = 1;
        for (Index i = 0; i < count; ++i)
            if (!held[static_cast<std::size_t>(i)])
                train_idx.push_back(i);

        FaceDataset train_set;
        train_set.images = select_laterals(data.images, train_idx);
        train_set.label_names = data.label_names;
        train_set.labels.reserve(train_idx.size());
        for (Index i : train_idx)
            train_set.labels.push_back(data.labels[static_cast<std::size_t>(i)]);

        SketchConfig cfg = base_cfg;
        cfg.seed = derive_seed(seed, job.method_idx, static_cast<std::uint64_t>(job.fold),
                               static_cast<std::uint64_t>(job.trial));

        const auto start = std::chrono::steady_clock::now();
        RecognitionModel model = train(train_set, k, methods[job.method_idx], cfg, inner_workers, zscore);
        job_seconds[ji] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        Tensor3 probes = select_laterals(data.images, fold);
        std::vector<Classification> preds = classify_batch(model, probes);
        Index correct = 0;
        for (std::size_t t = 0; t < fold.size(); ++t)
            if (preds[t].label == data.labels[static_cast<std::size_t>(fold[t])])
                ++correct;

        report.methods[job.method_idx]
            .folds[static_cast<std::size_t>(job.fold)]
            .rates[static_cast<std::size_t>(job.trial)] =
            static_cast<double>(correct) / static_cast<double>(fold.size());
    });

    // fold statistics and mean training time
    std::vector<double> time_acc(methods.size() * static_cast<std::size_t>(folds), 0.0);
    std::vector<int> time_n(methods.size() * static_cast<std::size_t>(folds), 0);
    for (std::size_t ji = 0; ji < jobs.size(); ++ji) {
        std::size_t slot = jobs[ji].method_idx * static_cast<std::size_t>(folds) +
                           static_cast<std::size_t>(jobs[ji].fold);
        time_acc[slot] += job_seconds[ji];
        time_n[slot] += 1;
    }
    for (std::size_t mi = 0; mi < methods.size(); ++mi)
        for (int f = 0; f < folds; ++f) {
            CvFoldStats& st = report.methods[mi].folds[static_cast<std::size_t>(f)];
            st.mean = std::accumulate(st.rates.begin(), st.rates.end(), 0.0) /
                      static_cast<double>(st.rates.size());
            st.min = *std::min_element(st.rates.begin(), st.rates.end());
            st.max = *std::max_element(st.rates.begin(), st.rates.end());
            std::size_t slot = mi * static_cast<std::size_t>(folds) + static_cast<std::size_t>(f);
            st.train_seconds = time_acc[slot] / std::max(1, time_n[slot]);
        }
    return report;
}

} // namespace rtsvd
