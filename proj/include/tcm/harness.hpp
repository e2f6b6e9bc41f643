#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcm/classifier.hpp"
#include "tcm/datagen.hpp"
#include "tcm/dataset.hpp"
#include "tcm/pool.hpp"
#include "tcm/samplers.hpp"

namespace tcm {

enum class Metric { Accuracy, BalancedAccuracy };

const char* metric_str(Metric metric);
std::optional<Metric> metric_from_str(const std::string& name);

// Either a pair of embedding/label files or a synthetic mixture, with an
// optional long-tail pass on top.
struct DatasetSource {
    std::optional<std::string> features_path;
    std::optional<std::string> labels_path;
    std::optional<MixtureSpec> mixture;
    std::optional<LongTailSpec> longtail;
};

struct StrategySpec {
    SamplerKind kind = SamplerKind::Random;
    // Diversity-phase length; < 0 means "regime default". With
    // use_20c_rule the value becomes ceil(20*C / step_size).
    int typiclust_steps = -1;
    bool use_20c_rule = false;
    // ProbCover ball radius; <= 0 selects the automatic estimate.
    double probcover_delta = 0.0;
    int neighbor_k = kDefaultNeighborK;
};

struct RegimeOverrides {
    std::optional<int> initial_budget;
    std::optional<int> step_size;
    std::optional<int> num_steps;
};

struct ExperimentConfig {
    DatasetSource dataset;
    StrategySpec strategy;
    RegimeName regime = RegimeName::Tiny;
    RegimeOverrides overrides;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    TrainConfig train;
    double test_fraction = 0.2;
    std::optional<std::string> test_index_path;
    Metric metric = Metric::Accuracy;
};

// One measurement: metric value after training on the labeled pool at the
// given cumulative budget. wall_time_s is informational only and never
// written to result files, which must be byte-reproducible.
struct RunRecord {
    std::string strategy;
    std::string regime;
    std::uint64_t seed = 0;
    int step_index = 0;
    int cumulative_budget = 0;
    std::string metric;
    double value = 0.0;
    double wall_time_s = 0.0;
};

struct AggregateRecord {
    std::string strategy;
    bool pooled = false;
    int cumulative_budget = 0;  // meaningful when !pooled
    double improvement_mean = 0.0;
    double improvement_std = 0.0;
};

enum class AggregateGrouping { PerBudget, Pooled };

// Default budget table: initial budget C / 5C / 25C / 100C for
// tiny/small/medium/large, step size = initial budget, 10 steps. All
// overridable per config.
RegimeSpec resolve_regime(RegimeName name, int class_count,
                          const RegimeOverrides& overrides);

// tiny/small: 3, medium: 2, large: 1; or ceil(20*C/step) in 20c mode.
int resolve_typiclust_steps(const StrategySpec& strategy, RegimeName regime,
                            int class_count, int step_size);

EmbeddingDataset materialize_dataset(const DatasetSource& source);

// Full protocol: per seed, stratified test split, initial selection, then
// retrain-evaluate-query rounds. Emits one record per (seed, step),
// including the initial state. Deterministic per seed; seeds may run in
// parallel (threads > 1) without changing the output.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int threads = 1);

// One run per N with the diversity phase forced to N selections.
// Strategy labels become "tcm_n<N>". Empty n_values sweeps 1..num_steps+1.
std::vector<RunRecord> run_transition_ablation(const ExperimentConfig& config,
                                               const std::vector<int>& n_values,
                                               int threads = 1);

// Diversity phase fixed; the uncertainty phase re-runs with each step
// size, total budget held equal (last step truncated). Labels "tcm_s<S>".
// Empty step_sizes uses {step/2, step, 2*step}.
std::vector<RunRecord> run_step_ablation(const ExperimentConfig& config,
                                         const std::vector<int>& step_sizes,
                                         int threads = 1);

// improvement = value(strategy) - value(baseline at the same regime,
// seed, cumulative budget); mean/std per budget or pooled over budgets.
// Throws Error(AggregationMismatch) when a key is missing or duplicated
// in the baseline.
std::vector<AggregateRecord> aggregate_improvement(
    const std::vector<RunRecord>& records,
    const std::vector<RunRecord>& baseline_records,
    AggregateGrouping grouping = AggregateGrouping::PerBudget);

// CSV header: strategy,regime,seed,step,cumulative_budget,metric,value
void write_records_csv(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_records_csv(const std::string& path);

// JSON array mirroring the CSV fields.
void write_records_json(const std::string& path, const std::vector<RunRecord>& records);

// CSV header: strategy,cumulative_budget,improvement_mean,improvement_std
// Pooled rows write "pooled" in the budget column.
void write_aggregate_csv(const std::string& path,
                         const std::vector<AggregateRecord>& records);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace tcm
