#pragma once

#include <cstdint>
#include <vector>

#include "tcm/matrix.hpp"

namespace tcm {

// Softmax probe over frozen features: logits = W x + b.
struct LinearHead {
    Mat<double> weights;        // C x D
    std::vector<double> bias;   // C
};

struct TrainConfig {
    double learning_rate = 0.1;   // cosine-decayed to 0 over the epochs
    int epochs = 200;
    double l2_penalty = 1e-4;     // applied to weights only
    int batch_size = 256;         // clamped to n
    double momentum = 0.9;
    std::uint64_t seed = 0;
};

// Minimizes mean cross-entropy + (l2/2)*||W||^2 with mini-batch SGD.
// Classes absent from `labels` keep their zero-initialized rows (their
// gradients are masked), so tiny labeled pools stay well defined.
// If epoch_loss is given it receives the full-data objective after every
// epoch. Deterministic per config.seed.
LinearHead fit(const FeatureMatrix& features, const std::vector<int>& labels,
               int class_count, const TrainConfig& config,
               std::vector<double>* epoch_loss = nullptr);

// Row-wise softmax(W x + b), max-subtracted for stability; rows sum to 1.
Mat<double> predict_proba(const LinearHead& head, const FeatureMatrix& features);

// argmax_c of each probability row; ties resolve to the lower class id.
std::vector<int> predict(const LinearHead& head, const FeatureMatrix& features);

// Full-data objective for the given parameters (mean CE + L2 term).
double training_loss(const LinearHead& head, const FeatureMatrix& features,
                     const std::vector<int>& labels, double l2_penalty);

// Gradient of the objective at `head`, flattened as [weights, bias].
// Exposed so finite-difference checks can probe the same code path fit uses.
std::vector<double> training_gradient(const LinearHead& head,
                                      const FeatureMatrix& features,
                                      const std::vector<int>& labels,
                                      double l2_penalty);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth);

// Mean per-class recall over classes that appear in `truth`.
double balanced_accuracy(const std::vector<int>& predictions,
                         const std::vector<int>& truth, int class_count);

}  // namespace tcm
