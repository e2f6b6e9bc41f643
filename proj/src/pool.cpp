#include "tcm/pool.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace tcm {

PoolState::PoolState(int universe_size) : n_(universe_size) {
    unlabeled_.resize(static_cast<std::size_t>(n_));
    std::iota(unlabeled_.begin(), unlabeled_.end(), 0);
    mask_.assign(static_cast<std::size_t>(n_), 0);
}

PoolState init_pool(const EmbeddingDataset& dataset) {
    validate_dataset(dataset);
    return PoolState(static_cast<int>(dataset.size()));
}

PoolState apply_query(const PoolState& pool, const std::vector<int>& batch,
                      int step_index) {
    PoolState next = pool;
    for (int index : batch) {
        if (index < 0 || index >= next.n_) {
            throw Error(ErrorCode::InvalidQuery,
                        "queried index " + std::to_string(index) + " out of range [0, " +
                            std::to_string(next.n_) + ")");
        }
        if (next.mask_[static_cast<std::size_t>(index)]) {
            throw Error(ErrorCode::InvalidQuery,
                        "index " + std::to_string(index) +
                            " is already labeled (or repeated in the batch)");
        }
        next.mask_[static_cast<std::size_t>(index)] = 1;
        next.labeled_.push_back(index);
    }
    if (!batch.empty()) {
        // One erase pass keeps unlabeled_ sorted.
        std::vector<int> kept;
        kept.reserve(next.unlabeled_.size() - batch.size());
        for (int index : next.unlabeled_) {
            if (!next.mask_[static_cast<std::size_t>(index)]) kept.push_back(index);
        }
        next.unlabeled_ = std::move(kept);
    }
    next.history_.push_back(QueryEvent{step_index, batch});
    return next;
}

const char* regime_name_str(RegimeName name) {
    switch (name) {
        case RegimeName::Tiny:   return "tiny";
        case RegimeName::Small:  return "small";
        case RegimeName::Medium: return "medium";
        case RegimeName::Large:  return "large";
    }
    return "unknown";
}

void validate_regime(const RegimeSpec& regime, int dataset_size, int class_count) {
    const BudgetSchedule& s = regime.schedule;
    if (s.initial_budget <= 0) {
        throw Error(ErrorCode::Validation, "initial_budget must be positive");
    }
    if (s.step_size <= 0 && s.num_steps > 0) {
        throw Error(ErrorCode::Validation, "step_size must be positive when num_steps > 0");
    }
    if (s.num_steps < 0) {
        throw Error(ErrorCode::Validation, "num_steps must be non-negative");
    }
    if (s.total_budget() > dataset_size) {
        throw Error(ErrorCode::Validation,
                    "schedule needs " + std::to_string(s.total_budget()) +
                        " samples but the pool holds " + std::to_string(dataset_size));
    }
    if (regime.typiclust_steps < 0 || regime.typiclust_steps > s.num_steps + 1) {
        throw Error(ErrorCode::Validation,
                    "typiclust_steps must lie in [0, num_steps + 1]");
    }
    if (regime.name == RegimeName::Tiny && s.initial_budget != class_count) {
        throw Error(ErrorCode::Validation,
                    "tiny regime requires initial_budget == class count (" +
                        std::to_string(class_count) + "), got " +
                        std::to_string(s.initial_budget));
    }
}

}  // namespace tcm
