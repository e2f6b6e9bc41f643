#pragma once

#include <cstdint>
#include <vector>

#include "tcm/matrix.hpp"

namespace tcm {

// Euclidean distance between every row of a and every row of b.
// Summation order over dimensions is fixed, so results are reproducible.
Mat<double> pairwise_distances(const FeatureMatrix& a, const FeatureMatrix& b);

// k nearest neighbors (self excluded) for each query row, sorted by
// ascending distance, ties by ascending index. Requires 1 <= k <= n-1.
std::vector<std::vector<int>> knn(const FeatureMatrix& points,
                                  const std::vector<int>& query_rows, int k);

struct ClusterAssignment {
    std::vector<int> assignment;   // cluster id per sample, in [0, k)
    Mat<double> centroids;         // k x D
    std::vector<int> sizes;        // per-cluster sample counts
    int iterations = 0;
    double inertia = 0.0;          // sum of squared distances to assigned centroid
    std::vector<double> objective_trace;  // inertia after each assignment pass
};

// Lloyd iterations with distance-squared-weighted (++) seeding. Stops when
// assignments repeat or after max_iter passes. Empty clusters are re-seeded
// on the point farthest from its current centroid. Deterministic per seed.
ClusterAssignment kmeans(const FeatureMatrix& points, int k, std::uint64_t seed,
                         int max_iter = 100);

struct TypicalityScores {
    std::vector<double> scores;  // parallel to the members argument
    int neighbor_count_used = 0;
};

// score(x) = 1 / mean distance from x to its K' nearest members,
// K' = min(neighbor_k, |members|-1). Mean distances are clamped below at
// 1e-12 before inversion so co-located points score maximally typical.
// Throws Error(UndefinedTypicality) when |members| < 2.
TypicalityScores typicality(const FeatureMatrix& points,
                            const std::vector<int>& members, int neighbor_k);

inline constexpr int kDefaultNeighborK = 20;

}  // namespace tcm
