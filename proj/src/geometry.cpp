#include "tcm/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

Mat<double> pairwise_distances(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.cols() != b.cols()) {
        throw Error(ErrorCode::Shape, "dimension mismatch: " + std::to_string(a.cols()) +
                                          " vs " + std::to_string(b.cols()));
    }
    if (!all_finite(a) || !all_finite(b)) {
        throw Error(ErrorCode::InvalidInput, "pairwise_distances: non-finite input");
    }
    Mat<double> out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto ra = a.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            out(i, j) = euclidean_distance(ra, b.row(j));
        }
    }
    return out;
}

std::vector<std::vector<int>> knn(const FeatureMatrix& points,
                                  const std::vector<int>& query_rows, int k) {
    const int n = static_cast<int>(points.rows());
    if (k < 1 || k >= n) {
        throw Error(ErrorCode::InvalidK,
                    "knn requires 1 <= k <= n-1 (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
    }
    std::vector<std::vector<int>> result;
    result.reserve(query_rows.size());
    std::vector<std::pair<double, int>> order;
    for (int q : query_rows) {
        if (q < 0 || q >= n) {
            throw Error(ErrorCode::InvalidInput, "knn query row " + std::to_string(q) +
                                                     " out of range");
        }
        order.clear();
        const auto rq = points.row(static_cast<std::size_t>(q));
        for (int i = 0; i < n; ++i) {
            if (i == q) continue;
            order.emplace_back(euclidean_distance(rq, points.row(static_cast<std::size_t>(i))), i);
        }
        std::partial_sort(order.begin(), order.begin() + k, order.end());
        std::vector<int> neighbors(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) neighbors[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)].second;
        result.push_back(std::move(neighbors));
    }
    return result;
}

namespace {

// Greedy distance-squared-weighted (++) seeding: each new center is drawn
// from several D^2-weighted candidates and the one minimizing the
// resulting potential wins. Zero total weight (all remaining points
// coincide with a center) falls back to the lowest-index unchosen point.
std::vector<int> plus_plus_seeds(const FeatureMatrix& points, int k, Rng& rng) {
    const std::size_t n = points.rows();
    std::vector<int> seeds;
    seeds.reserve(static_cast<std::size_t>(k));
    std::vector<char> chosen(n, 0);
    std::vector<double> weight(n, 0.0);

    const int first = static_cast<int>(rng.below(n));
    seeds.push_back(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        weight[i] = squared_distance(points.row(i), points.row(static_cast<std::size_t>(first)));
    }

    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));

    while (static_cast<int>(seeds.size()) < k) {
        double total = 0.0;
        for (double w : weight) total += w;
        int next = -1;
        if (total > 0.0) {
            double best_potential = std::numeric_limits<double>::infinity();
            for (int t = 0; t < trials; ++t) {
                const double target = rng.uniform() * total;
                int candidate = -1;
                double acc = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += weight[i];
                    if (target < acc) {
                        candidate = static_cast<int>(i);
                        break;
                    }
                }
                if (candidate < 0) {
                    for (std::size_t i = n; i-- > 0;) {
                        if (weight[i] > 0.0) { candidate = static_cast<int>(i); break; }
                    }
                }
                const auto rc = points.row(static_cast<std::size_t>(candidate));
                double potential = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    potential += std::min(weight[i], squared_distance(points.row(i), rc));
                }
                if (potential < best_potential) {
                    best_potential = potential;
                    next = candidate;
                }
            }
        }
        if (next < 0) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) { next = static_cast<int>(i); break; }
            }
        }
        seeds.push_back(next);
        chosen[static_cast<std::size_t>(next)] = 1;
        const auto rn = points.row(static_cast<std::size_t>(next));
        for (std::size_t i = 0; i < n; ++i) {
            const double d = squared_distance(points.row(i), rn);
            if (d < weight[i]) weight[i] = d;
        }
    }
    return seeds;
}

void recompute_means(const FeatureMatrix& points, const std::vector<int>& assignment,
                     Mat<double>& centroids, std::vector<int>& sizes) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();
    const std::size_t k = centroids.rows();
    Mat<double> sums(k, d, 0.0);
    sizes.assign(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(assignment[i]);
        sizes[c]++;
        const auto r = points.row(i);
        auto s = sums.row(c);
        for (std::size_t j = 0; j < d; ++j) s[j] += static_cast<double>(r[j]);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0) continue;  // keep the stale centroid; reseeded later
        auto s = sums.row(c);
        auto out = centroids.row(c);
        for (std::size_t j = 0; j < d; ++j) out[j] = s[j] / sizes[c];
    }
}

ClusterAssignment kmeans_single(const FeatureMatrix& points, int k, std::uint64_t seed,
                                int max_iter) {
    const std::size_t n = points.rows();
    const std::size_t d = points.cols();

    Rng rng(seed);
    ClusterAssignment result;
    result.centroids = Mat<double>(static_cast<std::size_t>(k), d);
    result.sizes.assign(static_cast<std::size_t>(k), 0);

    const std::vector<int> seeds = plus_plus_seeds(points, k, rng);
    for (int c = 0; c < k; ++c) {
        const auto r = points.row(static_cast<std::size_t>(seeds[static_cast<std::size_t>(c)]));
        auto out = result.centroids.row(static_cast<std::size_t>(c));
        for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(r[j]);
    }

    std::vector<int> assignment(n, -1);
    std::vector<int> previous;
    std::vector<double> dist_to_own(n, 0.0);

    for (int iter = 0; iter < max_iter; ++iter) {
        // Assignment pass; ties go to the lower cluster id.
        for (std::size_t i = 0; i < n; ++i) {
            const auto r = points.row(i);
            double best = std::numeric_limits<double>::infinity();
            int best_c = 0;
            for (int c = 0; c < k; ++c) {
                const double dd = squared_distance(r, result.centroids.row(static_cast<std::size_t>(c)));
                if (dd < best) {
                    best = dd;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
            dist_to_own[i] = best;
        }

        // Re-seed empty clusters on the point farthest from its centroid.
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(assignment[i])]++;
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            double farthest = -1.0;
            int pick = -1;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[static_cast<std::size_t>(assignment[i])] <= 1) continue;
                if (dist_to_own[i] > farthest) {
                    farthest = dist_to_own[i];
                    pick = static_cast<int>(i);
                }
            }
            if (pick < 0) continue;  // all shrunk to singletons; leave empty
            counts[static_cast<std::size_t>(assignment[static_cast<std::size_t>(pick)])]--;
            counts[static_cast<std::size_t>(c)]++;
            assignment[static_cast<std::size_t>(pick)] = c;
            const auto r = points.row(static_cast<std::size_t>(pick));
            auto out = result.centroids.row(static_cast<std::size_t>(c));
            for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(r[j]);
            dist_to_own[static_cast<std::size_t>(pick)] = 0.0;
        }

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) objective += dist_to_own[i];
        result.objective_trace.push_back(objective);
        result.iterations = iter + 1;

        if (assignment == previous) break;
        previous = assignment;
        recompute_means(points, assignment, result.centroids, result.sizes);
    }

    // Final means for the converged assignment, so centroids exactly match
    // cluster averages.
    recompute_means(points, assignment, result.centroids, result.sizes);
    result.assignment = std::move(assignment);
    result.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        result.inertia += squared_distance(
            points.row(i), result.centroids.row(static_cast<std::size_t>(result.assignment[i])));
    }
    return result;
}

}  // namespace

ClusterAssignment kmeans(const FeatureMatrix& points, int k, std::uint64_t seed,
                         int max_iter) {
    const std::size_t n = points.rows();
    if (k < 1 || static_cast<std::size_t>(k) > n) {
        throw Error(ErrorCode::InvalidK,
                    "kmeans requires 1 <= k <= n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
    }
    if (!all_finite(points)) {
        throw Error(ErrorCode::InvalidInput, "kmeans: non-finite input");
    }

    // Lloyd converges to a local optimum; restarts with derived sub-seeds
    // keep the lowest-inertia run. Ties go to the earlier restart so the
    // result stays a pure function of (points, k, seed).
    constexpr int kRestarts = 10;
    ClusterAssignment best;
    for (int r = 0; r < kRestarts; ++r) {
        ClusterAssignment candidate = kmeans_single(
            points, k, mix_seed(seed, 0x6b6d, static_cast<std::uint64_t>(r)), max_iter);
        if (r == 0 || candidate.inertia < best.inertia) {
            best = std::move(candidate);
        }
    }
    return best;
}

TypicalityScores typicality(const FeatureMatrix& points,
                            const std::vector<int>& members, int neighbor_k) {
    if (members.size() < 2) {
        throw Error(ErrorCode::UndefinedTypicality,
                    "typicality needs at least 2 members, got " +
                        std::to_string(members.size()));
    }
    if (neighbor_k < 1) {
        throw Error(ErrorCode::InvalidK, "neighbor_k must be positive");
    }
    const int m = static_cast<int>(members.size());
    const int effective_k = std::min(neighbor_k, m - 1);

    TypicalityScores result;
    result.neighbor_count_used = effective_k;
    result.scores.reserve(members.size());

    std::vector<double> dists(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
        const auto ra = points.row(static_cast<std::size_t>(members[static_cast<std::size_t>(a)]));
        for (int b = 0; b < m; ++b) {
            dists[static_cast<std::size_t>(b)] =
                euclidean_distance(ra, points.row(static_cast<std::size_t>(members[static_cast<std::size_t>(b)])));
        }
        dists[static_cast<std::size_t>(a)] = std::numeric_limits<double>::infinity();  // exclude self
        std::nth_element(dists.begin(), dists.begin() + (effective_k - 1), dists.end());
        // Sum the k nearest in ascending order so the reduction order is fixed.
        std::sort(dists.begin(), dists.begin() + effective_k);
        double sum = 0.0;
        for (int i = 0; i < effective_k; ++i) sum += dists[static_cast<std::size_t>(i)];
        const double mean = std::max(sum / effective_k, 1e-12);
        result.scores.push_back(1.0 / mean);
    }
    return result;
}

}  // namespace tcm
