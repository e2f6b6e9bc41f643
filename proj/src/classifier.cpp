#include "tcm/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_fit_inputs(const FeatureMatrix& features, const std::vector<int>& labels,
                      int class_count, const TrainConfig& config) {
    if (features.rows() < 1) {
        throw Error(ErrorCode::InvalidInput, "fit requires at least one sample");
    }
    if (labels.size() != features.rows()) {
        throw Error(ErrorCode::InvalidInput,
                    "label count does not match feature rows");
    }
    if (class_count < 2) {
        throw Error(ErrorCode::InvalidInput, "class_count must be >= 2");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= class_count) {
            throw Error(ErrorCode::InvalidInput,
                        "label " + std::to_string(labels[i]) + " at row " +
                            std::to_string(i) + " outside [0, " +
                            std::to_string(class_count) + ")");
        }
    }
    if (!all_finite(features)) {
        throw Error(ErrorCode::InvalidInput, "fit: non-finite feature value");
    }
    if (config.epochs < 1) {
        throw Error(ErrorCode::InvalidInput, "epochs must be >= 1");
    }
    if (!(config.learning_rate > 0.0)) {
        throw Error(ErrorCode::InvalidInput, "learning_rate must be positive");
    }
    if (config.l2_penalty < 0.0) {
        throw Error(ErrorCode::InvalidInput, "l2_penalty must be non-negative");
    }
    if (config.batch_size < 1) {
        throw Error(ErrorCode::InvalidInput, "batch_size must be positive");
    }
}

// softmax(logits) in place, max-subtracted.
void softmax_row(std::span<double> logits) {
    double max_logit = logits[0];
    for (double v : logits) max_logit = std::max(max_logit, v);
    double sum = 0.0;
    for (double& v : logits) {
        v = std::exp(v - max_logit);
        sum += v;
    }
    for (double& v : logits) v /= sum;
}

void compute_logits(const LinearHead& head, std::span<const float> x,
                    std::span<double> out) {
    const std::size_t c_count = head.weights.rows();
    const std::size_t d = head.weights.cols();
    for (std::size_t c = 0; c < c_count; ++c) {
        const auto w = head.weights.row(c);
        double acc = head.bias[c];
        for (std::size_t j = 0; j < d; ++j) acc += w[j] * static_cast<double>(x[j]);
        out[c] = acc;
    }
}

}  // namespace

LinearHead fit(const FeatureMatrix& features, const std::vector<int>& labels,
               int class_count, const TrainConfig& config,
               std::vector<double>* epoch_loss) {
    check_fit_inputs(features, labels, class_count, config);

    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    const std::size_t c_count = static_cast<std::size_t>(class_count);
    const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.batch_size), n);

    LinearHead head;
    head.weights = Mat<double>(c_count, d, 0.0);
    head.bias.assign(c_count, 0.0);

    // Classes absent from the labeled pool keep their zero rows.
    std::vector<char> class_present(c_count, 0);
    for (int y : labels) class_present[static_cast<std::size_t>(y)] = 1;

    Mat<double> vel_w(c_count, d, 0.0);
    std::vector<double> vel_b(c_count, 0.0);
    Mat<double> grad_w(c_count, d, 0.0);
    std::vector<double> grad_b(c_count, 0.0);
    std::vector<double> probs(c_count, 0.0);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);

    const std::size_t batches_per_epoch = (n + batch - 1) / batch;
    const std::size_t total_updates = static_cast<std::size_t>(config.epochs) * batches_per_epoch;
    std::size_t update = 0;

    if (epoch_loss) epoch_loss->clear();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.partial_shuffle(order, n);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(start + batch, n);
            const std::size_t m = stop - start;

            std::fill(grad_w.data().begin(), grad_w.data().end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);

            for (std::size_t b = start; b < stop; ++b) {
                const std::size_t i = order[b];
                const auto x = features.row(i);
                compute_logits(head, x, probs);
                softmax_row(probs);
                probs[static_cast<std::size_t>(labels[i])] -= 1.0;
                for (std::size_t c = 0; c < c_count; ++c) {
                    if (!class_present[c]) continue;
                    const double g = probs[c];
                    grad_b[c] += g;
                    auto gw = grad_w.row(c);
                    for (std::size_t j = 0; j < d; ++j) gw[j] += g * static_cast<double>(x[j]);
                }
            }

            // Cosine decay from learning_rate to 0 over all updates.
            const double progress = total_updates > 1
                                        ? static_cast<double>(update) / static_cast<double>(total_updates)
                                        : 0.0;
            const double lr = config.learning_rate * 0.5 * (1.0 + std::cos(kPi * progress));
            ++update;

            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::size_t c = 0; c < c_count; ++c) {
                if (!class_present[c]) continue;
                auto w = head.weights.row(c);
                auto v = vel_w.row(c);
                auto gw = grad_w.row(c);
                for (std::size_t j = 0; j < d; ++j) {
                    const double g = gw[j] * inv_m + config.l2_penalty * w[j];
                    v[j] = config.momentum * v[j] - lr * g;
                    w[j] += v[j];
                }
                vel_b[c] = config.momentum * vel_b[c] - lr * (grad_b[c] * inv_m);
                head.bias[c] += vel_b[c];
            }
        }
        if (epoch_loss) {
            epoch_loss->push_back(training_loss(head, features, labels, config.l2_penalty));
        }
    }
    return head;
}

Mat<double> predict_proba(const LinearHead& head, const FeatureMatrix& features) {
    if (features.cols() != head.weights.cols()) {
        throw Error(ErrorCode::Shape,
                    "feature dim " + std::to_string(features.cols()) +
                        " does not match head dim " + std::to_string(head.weights.cols()));
    }
    if (!all_finite(features)) {
        throw Error(ErrorCode::InvalidInput, "predict_proba: non-finite feature value");
    }
    const std::size_t c_count = head.weights.rows();
    Mat<double> out(features.rows(), c_count);
    for (std::size_t i = 0; i < features.rows(); ++i) {
        auto row = out.row(i);
        compute_logits(head, features.row(i), row);
        softmax_row(row);
    }
    return out;
}

std::vector<int> predict(const LinearHead& head, const FeatureMatrix& features) {
    const Mat<double> probs = predict_proba(head, features);
    std::vector<int> labels(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const auto row = probs.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

double training_loss(const LinearHead& head, const FeatureMatrix& features,
                     const std::vector<int>& labels, double l2_penalty) {
    const std::size_t n = features.rows();
    const std::size_t c_count = head.weights.rows();
    std::vector<double> logits(c_count);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        compute_logits(head, features.row(i), logits);
        double max_logit = logits[0];
        for (double v : logits) max_logit = std::max(max_logit, v);
        double sum = 0.0;
        for (double v : logits) sum += std::exp(v - max_logit);
        const double log_z = max_logit + std::log(sum);
        loss += log_z - logits[static_cast<std::size_t>(labels[i])];
    }
    loss /= static_cast<double>(n);
    double w2 = 0.0;
    for (double w : head.weights.data()) w2 += w * w;
    return loss + 0.5 * l2_penalty * w2;
}

std::vector<double> training_gradient(const LinearHead& head,
                                      const FeatureMatrix& features,
                                      const std::vector<int>& labels,
                                      double l2_penalty) {
    const std::size_t n = features.rows();
    const std::size_t d = head.weights.cols();
    const std::size_t c_count = head.weights.rows();
    std::vector<double> grad(c_count * d + c_count, 0.0);
    std::vector<double> probs(c_count);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = features.row(i);
        compute_logits(head, x, probs);
        softmax_row(probs);
        probs[static_cast<std::size_t>(labels[i])] -= 1.0;
        for (std::size_t c = 0; c < c_count; ++c) {
            for (std::size_t j = 0; j < d; ++j) {
                grad[c * d + j] += probs[c] * static_cast<double>(x[j]);
            }
            grad[c_count * d + c] += probs[c];
        }
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& g : grad) g *= inv_n;
    for (std::size_t c = 0; c < c_count; ++c) {
        for (std::size_t j = 0; j < d; ++j) {
            grad[c * d + j] += l2_penalty * head.weights(c, j);
        }
    }
    return grad;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& truth) {
    if (truth.empty()) {
        throw Error(ErrorCode::InvalidInput, "accuracy: empty truth vector");
    }
    if (predictions.size() != truth.size()) {
        throw Error(ErrorCode::InvalidInput, "accuracy: size mismatch");
    }
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (predictions[i] == truth[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double balanced_accuracy(const std::vector<int>& predictions,
                         const std::vector<int>& truth, int class_count) {
    if (truth.empty()) {
        throw Error(ErrorCode::InvalidInput, "balanced_accuracy: empty truth vector");
    }
    if (predictions.size() != truth.size()) {
        throw Error(ErrorCode::InvalidInput, "balanced_accuracy: size mismatch");
    }
    std::vector<int> support(static_cast<std::size_t>(class_count), 0);
    std::vector<int> hits(static_cast<std::size_t>(class_count), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int y = truth[i];
        if (y < 0 || y >= class_count) {
            throw Error(ErrorCode::InvalidInput,
                        "balanced_accuracy: label " + std::to_string(y) + " out of range");
        }
        support[static_cast<std::size_t>(y)]++;
        if (predictions[i] == y) hits[static_cast<std::size_t>(y)]++;
    }
    double recall_sum = 0.0;
    int present = 0;
    for (int c = 0; c < class_count; ++c) {
        if (support[static_cast<std::size_t>(c)] == 0) continue;  // absent classes excluded
        recall_sum += static_cast<double>(hits[static_cast<std::size_t>(c)]) /
                      static_cast<double>(support[static_cast<std::size_t>(c)]);
        ++present;
    }
    return recall_sum / static_cast<double>(present);
}

}  // namespace tcm
