#pragma once

#include <string>
#include <vector>

#include "tcm/matrix.hpp"

namespace tcm {

// The frozen embedding space every strategy operates on: N feature rows,
// one integer label per row, labels in [0, class_count).
struct EmbeddingDataset {
    FeatureMatrix features;
    std::vector<int> labels;
    int class_count = 0;

    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

// Throws Error(InvalidDataset) when any structural invariant is broken.
void validate_dataset(const EmbeddingDataset& dataset);

// Per-class sample counts, length class_count.
std::vector<int> class_counts(const EmbeddingDataset& dataset);

// Row subset in the given order; labels follow the rows.
EmbeddingDataset subset_dataset(const EmbeddingDataset& dataset,
                                const std::vector<int>& rows);

}  // namespace tcm
