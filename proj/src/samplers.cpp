#include "tcm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

const char* sampler_kind_str(SamplerKind kind) {
    switch (kind) {
        case SamplerKind::Random:          return "random";
        case SamplerKind::Margin:          return "margin";
        case SamplerKind::Entropy:         return "entropy";
        case SamplerKind::LeastConfidence: return "least_confidence";
        case SamplerKind::Coreset:         return "coreset";
        case SamplerKind::ProbCover:       return "probcover";
        case SamplerKind::TypiClust:       return "typiclust";
        case SamplerKind::Tcm:             return "tcm";
    }
    return "unknown";
}

std::optional<SamplerKind> sampler_kind_from_str(const std::string& name) {
    if (name == "random") return SamplerKind::Random;
    if (name == "margin") return SamplerKind::Margin;
    if (name == "entropy") return SamplerKind::Entropy;
    if (name == "least_confidence") return SamplerKind::LeastConfidence;
    if (name == "coreset") return SamplerKind::Coreset;
    if (name == "probcover") return SamplerKind::ProbCover;
    if (name == "typiclust") return SamplerKind::TypiClust;
    if (name == "tcm") return SamplerKind::Tcm;
    return std::nullopt;
}

void validate_probabilities(const ProbabilityMatrix& probs) {
    if (probs.indices.size() != probs.probs.rows()) {
        throw Error(ErrorCode::InvalidProbabilities,
                    "probability rows do not match index count");
    }
    for (std::size_t i = 0; i < probs.probs.rows(); ++i) {
        const auto row = probs.probs.row(i);
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error(ErrorCode::InvalidProbabilities,
                            "probability outside [0,1] at row " + std::to_string(i));
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw Error(ErrorCode::InvalidProbabilities,
                        "row " + std::to_string(i) + " sums to " + std::to_string(sum));
        }
    }
}

namespace {

void check_features_match_pool(const FeatureMatrix& features, const PoolState& pool) {
    if (static_cast<int>(features.rows()) != pool.universe_size()) {
        throw Error(ErrorCode::Shape,
                    "feature rows (" + std::to_string(features.rows()) +
                        ") do not match pool size (" +
                        std::to_string(pool.universe_size()) + ")");
    }
}

void check_budget(int batch, std::size_t available) {
    if (batch < 0) {
        throw Error(ErrorCode::InvalidInput, "batch must be non-negative");
    }
    if (static_cast<std::size_t>(batch) > available) {
        throw Error(ErrorCode::BudgetExhausted,
                    "batch " + std::to_string(batch) + " exceeds the " +
                        std::to_string(available) + " available samples");
    }
}

// Takes the `batch` smallest (score, pool index) pairs; the pool index is
// the global tiebreaker.
std::vector<int> select_by_score(const std::vector<double>& scores,
                                 const std::vector<int>& indices, int batch) {
    std::vector<std::pair<double, int>> order(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        order[i] = {scores[i], indices[i]};
    }
    std::sort(order.begin(), order.end());
    std::vector<int> picked(static_cast<std::size_t>(batch));
    for (int i = 0; i < batch; ++i) picked[static_cast<std::size_t>(i)] = order[static_cast<std::size_t>(i)].second;
    return picked;
}

}  // namespace

std::vector<int> sample_random(const PoolState& pool, int batch, std::uint64_t seed) {
    check_budget(batch, pool.unlabeled().size());
    std::vector<int> candidates = pool.unlabeled();
    Rng rng(seed);
    rng.partial_shuffle(candidates, static_cast<std::size_t>(batch));
    candidates.resize(static_cast<std::size_t>(batch));
    return candidates;
}

std::vector<int> sample_margin(const ProbabilityMatrix& probs, int batch) {
    validate_probabilities(probs);
    if (probs.probs.cols() < 2) {
        throw Error(ErrorCode::InvalidProbabilities,
                    "margin needs at least two classes");
    }
    check_budget(batch, probs.rows());
    std::vector<double> scores(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const auto row = probs.probs.row(i);
        double top1 = -1.0, top2 = -1.0;
        for (double p : row) {
            if (p > top1) {
                top2 = top1;
                top1 = p;
            } else if (p > top2) {
                top2 = p;
            }
        }
        scores[i] = top1 - top2;
    }
    return select_by_score(scores, probs.indices, batch);
}

std::vector<int> sample_entropy(const ProbabilityMatrix& probs, int batch) {
    validate_probabilities(probs);
    if (probs.probs.cols() < 2) {
        throw Error(ErrorCode::InvalidProbabilities,
                    "entropy needs at least two classes");
    }
    check_budget(batch, probs.rows());
    std::vector<double> scores(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double h = 0.0;
        for (double p : probs.probs.row(i)) {
            if (p > 0.0) h -= p * std::log(p);
        }
        scores[i] = -h;  // highest entropy first
    }
    return select_by_score(scores, probs.indices, batch);
}

std::vector<int> sample_least_confidence(const ProbabilityMatrix& probs, int batch) {
    validate_probabilities(probs);
    if (probs.probs.cols() < 2) {
        throw Error(ErrorCode::InvalidProbabilities,
                    "least_confidence needs at least two classes");
    }
    check_budget(batch, probs.rows());
    std::vector<double> scores(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        double top = 0.0;
        for (double p : probs.probs.row(i)) top = std::max(top, p);
        scores[i] = top;
    }
    return select_by_score(scores, probs.indices, batch);
}

std::vector<int> sample_coreset(const FeatureMatrix& features, const PoolState& pool,
                                int batch) {
    check_features_match_pool(features, pool);
    const std::vector<int>& unlabeled = pool.unlabeled();
    if (unlabeled.empty() && batch > 0) {
        throw Error(ErrorCode::BudgetExhausted, "coreset: no unlabeled samples left");
    }
    check_budget(batch, unlabeled.size());

    const std::size_t d = features.cols();
    std::vector<double> min_dist(features.rows(), std::numeric_limits<double>::infinity());
    std::vector<char> taken(features.rows(), 0);
    std::vector<int> picks;
    picks.reserve(static_cast<std::size_t>(batch));

    if (pool.labeled().empty()) {
        // Deterministic cold start: the first pick is the point farthest
        // from the dataset mean. The mean is only a seed; it plays no part
        // in later min-distance computations.
        std::vector<double> mean(d, 0.0);
        for (std::size_t i = 0; i < features.rows(); ++i) {
            const auto r = features.row(i);
            for (std::size_t j = 0; j < d; ++j) mean[j] += static_cast<double>(r[j]);
        }
        for (double& v : mean) v /= static_cast<double>(features.rows());
        double best = -1.0;
        int pick = -1;
        for (int u : unlabeled) {
            const double dist = euclidean_distance(
                features.row(static_cast<std::size_t>(u)),
                std::span<const double>(mean.data(), d));
            if (dist > best) {
                best = dist;
                pick = u;
            }
        }
        picks.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
        const auto rp = features.row(static_cast<std::size_t>(pick));
        for (int u : unlabeled) {
            if (taken[static_cast<std::size_t>(u)]) continue;
            min_dist[static_cast<std::size_t>(u)] =
                euclidean_distance(features.row(static_cast<std::size_t>(u)), rp);
        }
    } else {
        for (int l : pool.labeled()) {
            const auto rl = features.row(static_cast<std::size_t>(l));
            for (int u : unlabeled) {
                const double dist = euclidean_distance(features.row(static_cast<std::size_t>(u)), rl);
                if (dist < min_dist[static_cast<std::size_t>(u)]) min_dist[static_cast<std::size_t>(u)] = dist;
            }
        }
    }

    while (static_cast<int>(picks.size()) < batch) {
        double best = -1.0;
        int pick = -1;
        for (int u : unlabeled) {
            if (taken[static_cast<std::size_t>(u)]) continue;
            if (min_dist[static_cast<std::size_t>(u)] > best) {
                best = min_dist[static_cast<std::size_t>(u)];
                pick = u;
            }
        }
        picks.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
        const auto rp = features.row(static_cast<std::size_t>(pick));
        for (int u : unlabeled) {
            if (taken[static_cast<std::size_t>(u)]) continue;
            const double dist = euclidean_distance(features.row(static_cast<std::size_t>(u)), rp);
            if (dist < min_dist[static_cast<std::size_t>(u)]) min_dist[static_cast<std::size_t>(u)] = dist;
        }
    }
    return picks;
}

std::vector<int> sample_probcover(const FeatureMatrix& features, const PoolState& pool,
                                  int batch, double delta) {
    check_features_match_pool(features, pool);
    if (!(delta > 0.0)) {
        throw Error(ErrorCode::InvalidRadius,
                    "probcover delta must be positive, got " + std::to_string(delta));
    }
    check_budget(batch, pool.unlabeled().size());
    const std::size_t n = features.rows();

    // Ball membership lists; the relation is symmetric and includes self.
    std::vector<std::vector<int>> ball(n);
    for (std::size_t u = 0; u < n; ++u) {
        const auto ru = features.row(u);
        for (std::size_t v = 0; v < n; ++v) {
            if (euclidean_distance(ru, features.row(v)) <= delta) {
                ball[u].push_back(static_cast<int>(v));
            }
        }
    }

    std::vector<char> covered(n, 0);
    for (int l : pool.labeled()) {
        for (int v : ball[static_cast<std::size_t>(l)]) covered[static_cast<std::size_t>(v)] = 1;
    }
    std::vector<int> out_degree(n, 0);
    for (std::size_t u = 0; u < n; ++u) {
        int deg = 0;
        for (int v : ball[u]) {
            if (!covered[static_cast<std::size_t>(v)]) ++deg;
        }
        out_degree[u] = deg;
    }

    std::vector<char> taken(n, 0);
    std::vector<int> picks;
    picks.reserve(static_cast<std::size_t>(batch));
    for (int t = 0; t < batch; ++t) {
        int best_deg = -1;
        int pick = -1;
        for (int u : pool.unlabeled()) {
            if (taken[static_cast<std::size_t>(u)]) continue;
            if (out_degree[static_cast<std::size_t>(u)] > best_deg) {
                best_deg = out_degree[static_cast<std::size_t>(u)];
                pick = u;
            }
        }
        picks.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
        for (int v : ball[static_cast<std::size_t>(pick)]) {
            if (covered[static_cast<std::size_t>(v)]) continue;
            covered[static_cast<std::size_t>(v)] = 1;
            // v leaving the uncovered set lowers the degree of every ball
            // containing it.
            for (int w : ball[static_cast<std::size_t>(v)]) {
                out_degree[static_cast<std::size_t>(w)]--;
            }
        }
    }
    return picks;
}

double probcover_auto_delta(const FeatureMatrix& features, int class_count,
                            std::uint64_t seed) {
    const std::size_t n = features.rows();
    if (n < 2) {
        throw Error(ErrorCode::InvalidInput, "auto delta needs at least 2 points");
    }
    const ClusterAssignment pseudo = kmeans(features, class_count, seed);

    // Radius of the largest pure ball around each point: distance to the
    // nearest point carrying a different pseudo-label.
    std::vector<double> pure_radius(n, std::numeric_limits<double>::infinity());
    double min_positive = std::numeric_limits<double>::infinity();
    double max_dist = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ri = features.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dist = euclidean_distance(ri, features.row(j));
            if (dist > 0.0 && dist < min_positive) min_positive = dist;
            if (dist > max_dist) max_dist = dist;
            if (pseudo.assignment[i] != pseudo.assignment[j]) {
                if (dist < pure_radius[i]) pure_radius[i] = dist;
                if (dist < pure_radius[j]) pure_radius[j] = dist;
            }
        }
    }
    if (!std::isfinite(min_positive) || max_dist <= 0.0) {
        // All points coincide; any positive radius covers everything.
        return 1.0;
    }

    constexpr int kGridSize = 32;
    constexpr double kPurityTarget = 0.95;
    const double log_lo = std::log(min_positive);
    const double log_hi = std::log(max_dist);
    double best = min_positive;
    for (int g = kGridSize - 1; g >= 0; --g) {
        const double frac = kGridSize > 1 ? static_cast<double>(g) / (kGridSize - 1) : 0.0;
        const double delta = std::exp(log_lo + frac * (log_hi - log_lo));
        std::size_t pure = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (pure_radius[i] > delta) ++pure;
        }
        if (static_cast<double>(pure) / static_cast<double>(n) >= kPurityTarget) {
            best = delta;
            break;
        }
    }
    return best;
}

namespace {

struct ClusterRank {
    int id = 0;
    int size = 0;
    bool small = false;  // under 5 members ranks below all larger clusters

    bool operator<(const ClusterRank& other) const {
        if (small != other.small) return !small;
        if (size != other.size) return size > other.size;
        return id < other.id;
    }
};

constexpr int kMinClusterSize = 5;

}  // namespace

std::vector<int> sample_typiclust(const FeatureMatrix& features, const PoolState& pool,
                                  int batch, int neighbor_k, std::uint64_t seed) {
    check_features_match_pool(features, pool);
    check_budget(batch, pool.unlabeled().size());
    if (batch == 0) return {};

    const int k = static_cast<int>(pool.labeled().size()) + batch;
    const ClusterAssignment clusters = kmeans(features, k, seed);

    std::vector<std::vector<int>> members(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < features.rows(); ++i) {
        members[static_cast<std::size_t>(clusters.assignment[i])].push_back(static_cast<int>(i));
    }
    std::vector<char> cluster_covered(static_cast<std::size_t>(k), 0);
    for (int l : pool.labeled()) {
        cluster_covered[static_cast<std::size_t>(clusters.assignment[static_cast<std::size_t>(l)])] = 1;
    }

    // Members of each cluster ranked most-typical first (ties toward the
    // lower index); singletons rank their sole member.
    std::vector<std::vector<int>> ranked(static_cast<std::size_t>(k));
    auto rank_cluster = [&](int c) {
        const std::vector<int>& ms = members[static_cast<std::size_t>(c)];
        if (ms.empty()) return;
        if (!ranked[static_cast<std::size_t>(c)].empty()) return;
        if (ms.size() == 1) {
            ranked[static_cast<std::size_t>(c)] = ms;
            return;
        }
        const TypicalityScores ts = typicality(features, ms, neighbor_k);
        std::vector<std::pair<double, int>> order(ms.size());
        for (std::size_t i = 0; i < ms.size(); ++i) {
            order[i] = {-ts.scores[i], ms[i]};
        }
        std::sort(order.begin(), order.end());
        ranked[static_cast<std::size_t>(c)].reserve(ms.size());
        for (const auto& [neg_score, index] : order) {
            ranked[static_cast<std::size_t>(c)].push_back(index);
        }
    };

    std::vector<ClusterRank> uncovered;
    for (int c = 0; c < k; ++c) {
        const int size = static_cast<int>(members[static_cast<std::size_t>(c)].size());
        if (size == 0 || cluster_covered[static_cast<std::size_t>(c)]) continue;
        uncovered.push_back({c, size, size < kMinClusterSize});
    }
    std::sort(uncovered.begin(), uncovered.end());

    std::vector<int> picks;
    picks.reserve(static_cast<std::size_t>(batch));
    std::vector<char> taken(features.rows(), 0);

    for (const ClusterRank& cr : uncovered) {
        if (static_cast<int>(picks.size()) == batch) break;
        rank_cluster(cr.id);
        // An uncovered cluster holds no labeled point, so its top-ranked
        // member is always available.
        const int pick = ranked[static_cast<std::size_t>(cr.id)].front();
        picks.push_back(pick);
        taken[static_cast<std::size_t>(pick)] = 1;
    }

    if (static_cast<int>(picks.size()) < batch) {
        // Overflow: sweep all clusters largest-first, one next-most-typical
        // unlabeled member per cluster per round.
        std::vector<ClusterRank> all;
        for (int c = 0; c < k; ++c) {
            const int size = static_cast<int>(members[static_cast<std::size_t>(c)].size());
            if (size == 0) continue;
            all.push_back({c, size, false});
        }
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> cursor(static_cast<std::size_t>(k), 0);
        while (static_cast<int>(picks.size()) < batch) {
            bool advanced = false;
            for (const ClusterRank& cr : all) {
                if (static_cast<int>(picks.size()) == batch) break;
                rank_cluster(cr.id);
                auto& pos = cursor[static_cast<std::size_t>(cr.id)];
                const auto& rank_list = ranked[static_cast<std::size_t>(cr.id)];
                while (pos < rank_list.size()) {
                    const int candidate = rank_list[pos];
                    ++pos;
                    if (!pool.is_labeled(candidate) && !taken[static_cast<std::size_t>(candidate)]) {
                        picks.push_back(candidate);
                        taken[static_cast<std::size_t>(candidate)] = 1;
                        advanced = true;
                        break;
                    }
                }
            }
            if (!advanced) break;  // nothing selectable remains
        }
    }
    return picks;
}

TcmPhase tcm_phase(int step_index, const RegimeSpec& regime) {
    return step_index < regime.typiclust_steps ? TcmPhase::TypiClust : TcmPhase::Margin;
}

std::vector<int> sample_tcm(const FeatureMatrix& features, const PoolState& pool,
                            int batch, const RegimeSpec& regime, int step_index,
                            const std::optional<ProbabilityMatrix>& probs,
                            int neighbor_k, std::uint64_t seed) {
    if (tcm_phase(step_index, regime) == TcmPhase::TypiClust) {
        return sample_typiclust(features, pool, batch, neighbor_k, seed);
    }
    if (!probs.has_value()) {
        throw Error(ErrorCode::MissingClassifier,
                    "tcm margin phase at step " + std::to_string(step_index) +
                        " requires classifier probabilities");
    }
    return sample_margin(*probs, batch);
}

}  // namespace tcm
