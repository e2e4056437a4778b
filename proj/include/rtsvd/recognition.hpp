// Nearest-subspace image recognition on top of the tensor factorizations.
// Images enter as lateral slices; training projects them onto the leading
// left factor and classification compares coefficient slices.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rtsvd/randomized.hpp"

namespace rtsvd {

enum class Method { tsvd, rtsvd, rtsvd_q };

Method parse_method(const std::string& name);
std::string method_name(Method m);

struct FaceDataset {
    Tensor3 images;                       // n1 x count x n3, one lateral slice per image
    std::vector<int> labels;              // size count, indexes label_names
    std::vector<std::string> label_names;

    Index count() const { return images.n2(); }
};

struct RecognitionModel {
    Tensor3 projector;     // n1 x k x n3
    Tensor3 coefficients;  // k x count x n3, projections of the shifted training slices
    Tensor3 mean_slice;    // n1 x 1 x n3
    Tensor3 inv_scale;     // n1 x 1 x n3 reciprocal deviations; empty unless z-scored
    std::vector<int> labels;
    std::vector<std::string> label_names;
    Method method = Method::tsvd;
    int k = 0;

    // spectra kept so classification does not re-transform the factors
    FourierTensor3 projector_hat;
    FourierTensor3 coefficients_hat;
};

// Mean-shifts the training slices, decomposes them with the requested
// method, and stores the coefficient slices.  cfg supplies the sketching
// parameters for the randomized methods; for Method::rtsvd_q a positive
// cfg.eps selects per-slice iteration counts from the exact spectrum,
// otherwise cfg.q is used everywhere.  With zscore each pixel position is
// also scaled by the inverse of its standard deviation over the
// training set.
RecognitionModel train(const FaceDataset& data, int k, Method method, const SketchConfig& cfg,
                       int workers = 1, bool zscore = false);

struct Classification {
    int label = -1;
    int index = -1;      // training slice realizing the minimal distance
    double distance = 0.0;
};

// Nearest training slice in coefficient space by Frobenius distance.
// Probe shape must be n1 x 1 x n3; ties resolve to the smallest index.
Classification classify(const RecognitionModel& model, const Tensor3& probe);

// Batch variant, one probe per lateral slice.
std::vector<Classification> classify_batch(const RecognitionModel& model, const Tensor3& probes);

struct CvFoldStats {
    std::vector<double> rates; // one entry per trial
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    double train_seconds = 0.0; // mean decomposition time across trials
};

struct CvMethodReport {
    Method method = Method::tsvd;
    std::vector<CvFoldStats> folds;
};

struct CvReport {
    int folds = 0;
    int trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<Index>> fold_indices; // seeded partition, shared by methods
    std::vector<CvMethodReport> methods;
};

// k-fold cross validation.  The fold partition is a seeded shuffle shared
// by every method; deterministic methods run one trial per fold, randomized
// ones run `trials` with derived seeds.  Rate = correct / fold size.
CvReport cross_validate(const FaceDataset& data, int k, const std::vector<Method>& methods,
                        int folds, int trials, std::uint64_t seed, const SketchConfig& base_cfg,
                        int workers = 1, bool zscore = false);

} // namespace rtsvd
