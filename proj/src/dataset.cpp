#include "tcm/dataset.hpp"

#include <string>

#include "tcm/error.hpp"

namespace tcm {

void validate_dataset(const EmbeddingDataset& dataset) {
    const std::size_t n = dataset.features.rows();
    const std::size_t d = dataset.features.cols();
    if (n < 1 || d < 1) {
        throw Error(ErrorCode::InvalidDataset, "dataset must have N >= 1 and D >= 1");
    }
    if (dataset.class_count < 2) {
        throw Error(ErrorCode::InvalidDataset,
                    "class_count must be >= 2, got " + std::to_string(dataset.class_count));
    }
    if (dataset.labels.size() != n) {
        throw Error(ErrorCode::InvalidDataset,
                    "label count " + std::to_string(dataset.labels.size()) +
                        " does not match N=" + std::to_string(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const int label = dataset.labels[i];
        if (label < 0 || label >= dataset.class_count) {
            throw Error(ErrorCode::InvalidDataset,
                        "label " + std::to_string(label) + " at row " + std::to_string(i) +
                            " outside [0, " + std::to_string(dataset.class_count) + ")");
        }
    }
    if (!all_finite(dataset.features)) {
        throw Error(ErrorCode::InvalidDataset, "features contain a non-finite value");
    }
}

std::vector<int> class_counts(const EmbeddingDataset& dataset) {
    std::vector<int> counts(static_cast<std::size_t>(dataset.class_count), 0);
    for (int label : dataset.labels) {
        counts[static_cast<std::size_t>(label)]++;
    }
    return counts;
}

EmbeddingDataset subset_dataset(const EmbeddingDataset& dataset,
                                const std::vector<int>& rows) {
    EmbeddingDataset out;
    out.class_count = dataset.class_count;
    out.features = FeatureMatrix(rows.size(), dataset.features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        if (r < 0 || static_cast<std::size_t>(r) >= dataset.size()) {
            throw Error(ErrorCode::InvalidInput,
                        "subset row " + std::to_string(r) + " out of range");
        }
        auto src = dataset.features.row(static_cast<std::size_t>(r));
        auto dst = out.features.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
        out.labels.push_back(dataset.labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

}  // namespace tcm
