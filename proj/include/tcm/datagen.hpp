#pragma once

#include <cstdint>
#include <string>

#include "tcm/dataset.hpp"

namespace tcm {

// Synthetic stand-in for frozen self-supervised features: C isotropic
// Gaussian blobs. Class centers are N(0, I) draws scaled by
// center_separation, so inter-center distances scale linearly with it.
struct MixtureSpec {
    int class_count = 2;
    int samples_per_class = 1;
    int dim = 1;
    double center_separation = 1.0;  // >= 0
    double noise_sigma = 1.0;        // > 0
    std::uint64_t seed = 0;
};

// Class-imbalance transform: class c keeps round(n * rho^(-c/(C-1)))
// samples, so sizes decay exponentially from n down to n/rho.
struct LongTailSpec {
    double imbalance_ratio = 1.0;  // rho >= 1
    std::uint64_t seed = 0;
};

// C*samples_per_class points, labels grouped by class (0..0,1..1,...).
// Deterministic per seed. Throws Error(InvalidSpec) on bad parameters.
EmbeddingDataset gaussian_mixture(const MixtureSpec& spec);

// Expected long-tail size of class c for a balanced input with n per class.
int longtail_class_size(int per_class, double rho, int class_count, int class_id);

// Keeps a uniform per-seed subset of each class. Requires a balanced
// input and rho <= samples per class.
EmbeddingDataset longtail_subsample(const EmbeddingDataset& dataset,
                                    const LongTailSpec& spec);

// Binary feature format: one text header line "EMB v1 N D\n" followed by
// N*D little-endian IEEE-754 binary32 values, row-major. Labels are one
// decimal integer per line, optionally preceded by "LAB v1 N C\n"; without
// the header the class count is inferred as max(label)+1. load also
// accepts plain CSV feature rows (comma-separated decimals). Errors carry
// the offending row number.
EmbeddingDataset load_embeddings(const std::string& features_path,
                                 const std::string& labels_path);

// Writes EMB v1 + LAB v1; load(save(x)) reproduces x bit-exactly.
void save_embeddings(const EmbeddingDataset& dataset,
                     const std::string& features_path,
                     const std::string& labels_path);

}  // namespace tcm
