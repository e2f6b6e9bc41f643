#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcm/geometry.hpp"
#include "tcm/matrix.hpp"
#include "tcm/pool.hpp"

namespace tcm {

enum class SamplerKind {
    Random,
    Margin,
    Entropy,
    LeastConfidence,
    Coreset,
    ProbCover,
    TypiClust,
    Tcm,
};

const char* sampler_kind_str(SamplerKind kind);
std::optional<SamplerKind> sampler_kind_from_str(const std::string& name);

// Classifier posterior for a set of pool rows: probs.row(i) belongs to
// pool index indices[i]. Rows must sum to 1 within 1e-6.
struct ProbabilityMatrix {
    std::vector<int> indices;
    Mat<double> probs;

    std::size_t rows() const { return indices.size(); }
};

// Throws Error(InvalidProbabilities) on shape mismatch, entries outside
// [0,1], or rows off unit sum by more than 1e-6.
void validate_probabilities(const ProbabilityMatrix& probs);

// Every sampler returns exactly `batch` distinct unlabeled indices, in
// selection order. Ties break toward the lower pool index throughout.

// Uniform without replacement from the unlabeled set.
std::vector<int> sample_random(const PoolState& pool, int batch, std::uint64_t seed);

// Smallest top1-top2 probability gap first.
std::vector<int> sample_margin(const ProbabilityMatrix& probs, int batch);

// Highest Shannon entropy (natural log) first.
std::vector<int> sample_entropy(const ProbabilityMatrix& probs, int batch);

// Lowest maximum class probability first.
std::vector<int> sample_least_confidence(const ProbabilityMatrix& probs, int batch);

// k-center greedy: repeatedly take the unlabeled point farthest from
// labeled + already picked. With nothing labeled the first pick is the
// point farthest from the dataset mean.
std::vector<int> sample_coreset(const FeatureMatrix& features, const PoolState& pool,
                                int batch);

// Greedy max out-degree on the delta-ball cover graph, restricted to
// still-uncovered points; each pick covers its ball.
std::vector<int> sample_probcover(const FeatureMatrix& features, const PoolState& pool,
                                  int batch, double delta);

// Largest delta from a 32-point log grid over the positive pairwise
// distance range whose ball purity >= 0.95, measured against k-means
// pseudo-labels with k = class_count. Falls back to the grid minimum.
double probcover_auto_delta(const FeatureMatrix& features, int class_count,
                            std::uint64_t seed);

// Cluster into |labeled| + batch groups, rank uncovered clusters by size
// (clusters under 5 members rank below all larger ones), then take the
// most typical unlabeled member of each. Overflow picks come from the
// largest clusters by next-highest typicality.
std::vector<int> sample_typiclust(const FeatureMatrix& features, const PoolState& pool,
                                  int batch, int neighbor_k, std::uint64_t seed);

enum class TcmPhase { TypiClust, Margin };

// TypiClust while step_index < regime.typiclust_steps, Margin afterwards.
// Step 0 is the initial selection.
TcmPhase tcm_phase(int step_index, const RegimeSpec& regime);

// Dispatches to sample_typiclust or sample_margin according to tcm_phase.
// The Margin phase requires `probs`; otherwise Error(MissingClassifier).
std::vector<int> sample_tcm(const FeatureMatrix& features, const PoolState& pool,
                            int batch, const RegimeSpec& regime, int step_index,
                            const std::optional<ProbabilityMatrix>& probs,
                            int neighbor_k, std::uint64_t seed);

}  // namespace tcm
