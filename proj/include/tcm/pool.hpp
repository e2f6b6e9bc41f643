#pragma once

#include <string>
#include <vector>

#include "tcm/dataset.hpp"
#include "tcm/error.hpp"

namespace tcm {

struct QueryEvent {
    int step_index = 0;
    std::vector<int> batch;  // in selection order
};

// Immutable labeled/unlabeled partition of {0..N-1}. apply_query returns
// a new state, so snapshots can be shared freely across workers.
class PoolState {
public:
    PoolState() = default;
    explicit PoolState(int universe_size);

    int universe_size() const { return n_; }
    const std::vector<int>& labeled() const { return labeled_; }          // insertion order
    const std::vector<int>& unlabeled() const { return unlabeled_; }      // ascending
    const std::vector<QueryEvent>& history() const { return history_; }
    bool is_labeled(int index) const { return mask_[static_cast<std::size_t>(index)] != 0; }

private:
    friend PoolState apply_query(const PoolState&, const std::vector<int>&, int);

    int n_ = 0;
    std::vector<int> labeled_;
    std::vector<int> unlabeled_;
    std::vector<unsigned char> mask_;
    std::vector<QueryEvent> history_;
};

// Fresh pool over the dataset: nothing labeled, empty history.
PoolState init_pool(const EmbeddingDataset& dataset);

// Moves `batch` from unlabeled to labeled and appends a history entry.
// Throws Error(InvalidQuery) on out-of-range, duplicate, or already
// labeled indices. An empty batch still records its history entry.
PoolState apply_query(const PoolState& pool, const std::vector<int>& batch,
                      int step_index);

// Cumulative budget after step k is initial_budget + k * step_size.
struct BudgetSchedule {
    int initial_budget = 0;
    int step_size = 0;
    int num_steps = 0;

    int cumulative_budget(int step_index) const {
        return initial_budget + step_index * step_size;
    }
    int total_budget() const { return cumulative_budget(num_steps); }
    // Query size at a given step: the initial batch counts as step 0.
    int batch_at(int step_index) const {
        return step_index == 0 ? initial_budget : step_size;
    }
};

enum class RegimeName { Tiny, Small, Medium, Large };

const char* regime_name_str(RegimeName name);

struct RegimeSpec {
    RegimeName name = RegimeName::Tiny;
    BudgetSchedule schedule;
    // Number of diversity-phase selections, counting the initial batch as
    // the first one.
    int typiclust_steps = 0;
};

// Throws Error(Validation) when invariants fail (budget over N, tiny
// initial != C, typiclust_steps > num_steps + 1, ...).
void validate_regime(const RegimeSpec& regime, int dataset_size, int class_count);

}  // namespace tcm
