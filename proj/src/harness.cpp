#include "tcm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tcm/error.hpp"
#include "tcm/rng.hpp"

namespace tcm {

namespace {

// Purpose tags for deriving independent RNG streams per (seed, step).
constexpr std::uint64_t kSplitStream = 1;
constexpr std::uint64_t kSamplerStream = 2;
constexpr std::uint64_t kTrainStream = 3;

FeatureMatrix gather_rows(const FeatureMatrix& features, const std::vector<int>& rows) {
    FeatureMatrix out(rows.size(), features.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = features.row(static_cast<std::size_t>(rows[i]));
        auto dst = out.row(i);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] = src[j];
    }
    return out;
}

std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& rows) {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out[i] = labels[static_cast<std::size_t>(rows[i])];
    }
    return out;
}

struct Split {
    std::vector<int> train_rows;  // ascending
    std::vector<int> test_rows;   // ascending
};

// Stratified split: round(fraction * class size) test rows per class,
// chosen uniformly per seed.
Split stratified_split(const EmbeddingDataset& dataset, double fraction,
                       std::uint64_t seed) {
    std::vector<std::vector<int>> by_class(static_cast<std::size_t>(dataset.class_count));
    for (std::size_t i = 0; i < dataset.labels.size(); ++i) {
        by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(static_cast<int>(i));
    }
    Split split;
    Rng rng(mix_seed(seed, kSplitStream));
    for (auto& rows : by_class) {
        std::size_t take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(rows.size())));
        take = std::min(take, rows.size());
        rng.partial_shuffle(rows, take);
        split.test_rows.insert(split.test_rows.end(), rows.begin(), rows.begin() + take);
        split.train_rows.insert(split.train_rows.end(), rows.begin() + take, rows.end());
    }
    std::sort(split.train_rows.begin(), split.train_rows.end());
    std::sort(split.test_rows.begin(), split.test_rows.end());
    return split;
}

Split explicit_split(const EmbeddingDataset& dataset, const std::vector<int>& test_rows) {
    std::vector<char> is_test(dataset.size(), 0);
    for (int r : test_rows) {
        if (r < 0 || static_cast<std::size_t>(r) >= dataset.size()) {
            throw Error(ErrorCode::Validation,
                        "test index " + std::to_string(r) + " out of range");
        }
        if (is_test[static_cast<std::size_t>(r)]) {
            throw Error(ErrorCode::Validation,
                        "duplicate test index " + std::to_string(r));
        }
        is_test[static_cast<std::size_t>(r)] = 1;
    }
    Split split;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (is_test[i] ? split.test_rows : split.train_rows).push_back(static_cast<int>(i));
    }
    return split;
}

std::vector<int> read_index_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open test index file " + path);
    }
    std::vector<int> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        char* end = nullptr;
        const long v = std::strtol(line.c_str(), &end, 10);
        if (end == line.c_str() || (end && *end != '\0')) {
            throw Error(ErrorCode::Format,
                        path + ":" + std::to_string(line_no) + ": cannot parse index '" +
                            line + "'");
        }
        rows.push_back(static_cast<int>(v));
    }
    return rows;
}

double evaluate_metric(Metric metric, const std::vector<int>& predictions,
                       const std::vector<int>& truth, int class_count) {
    return metric == Metric::Accuracy ? accuracy(predictions, truth)
                                      : balanced_accuracy(predictions, truth, class_count);
}

// Everything one seeded run needs, resolved up front.
struct RunPlan {
    const EmbeddingDataset* dataset = nullptr;
    StrategySpec strategy;
    RegimeSpec regime;
    std::vector<int> batch_sizes;  // per step, batch_sizes[0] = initial budget
    TrainConfig train;
    Metric metric = Metric::Accuracy;
    double test_fraction = 0.2;
    std::optional<std::vector<int>> test_rows;
    std::string label;
    double probcover_delta = 0.0;  // resolved, > 0 when strategy is ProbCover
};

std::vector<RunRecord> run_one_seed(const RunPlan& plan, std::uint64_t seed) {
    const EmbeddingDataset& dataset = *plan.dataset;
    const Split split = plan.test_rows.has_value()
                            ? explicit_split(dataset, *plan.test_rows)
                            : stratified_split(dataset, plan.test_fraction, seed);
    if (split.test_rows.empty()) {
        throw Error(ErrorCode::Validation, "test split is empty");
    }
    if (split.train_rows.empty()) {
        throw Error(ErrorCode::Validation, "train split is empty");
    }

    const EmbeddingDataset train = subset_dataset(dataset, split.train_rows);
    const FeatureMatrix test_x = gather_rows(dataset.features, split.test_rows);
    const std::vector<int> test_y = gather_labels(dataset.labels, split.test_rows);

    int total = 0;
    for (int b : plan.batch_sizes) total += b;
    if (total > static_cast<int>(train.size())) {
        throw Error(ErrorCode::BudgetExhausted,
                    "schedule needs " + std::to_string(total) + " samples but only " +
                        std::to_string(train.size()) + " are available for querying");
    }

    PoolState pool = init_pool(train);
    std::optional<LinearHead> head;
    std::vector<RunRecord> records;
    records.reserve(plan.batch_sizes.size());

    int cumulative = 0;
    for (std::size_t step = 0; step < plan.batch_sizes.size(); ++step) {
        const auto t0 = std::chrono::steady_clock::now();
        const int step_index = static_cast<int>(step);
        const int batch = plan.batch_sizes[step];
        const std::uint64_t sampler_seed = mix_seed(seed, kSamplerStream, static_cast<std::uint64_t>(step));

        std::optional<ProbabilityMatrix> probs;
        if (head.has_value()) {
            ProbabilityMatrix pm;
            pm.indices = pool.unlabeled();
            pm.probs = predict_proba(*head, gather_rows(train.features, pm.indices));
            probs = std::move(pm);
        }

        std::vector<int> picks;
        switch (plan.strategy.kind) {
            case SamplerKind::Random:
                picks = sample_random(pool, batch, sampler_seed);
                break;
            case SamplerKind::Margin:
                picks = probs ? sample_margin(*probs, batch)
                              : sample_random(pool, batch, sampler_seed);
                break;
            case SamplerKind::Entropy:
                picks = probs ? sample_entropy(*probs, batch)
                              : sample_random(pool, batch, sampler_seed);
                break;
            case SamplerKind::LeastConfidence:
                picks = probs ? sample_least_confidence(*probs, batch)
                              : sample_random(pool, batch, sampler_seed);
                break;
            case SamplerKind::Coreset:
                picks = sample_coreset(train.features, pool, batch);
                break;
            case SamplerKind::ProbCover:
                picks = sample_probcover(train.features, pool, batch, plan.probcover_delta);
                break;
            case SamplerKind::TypiClust:
                picks = sample_typiclust(train.features, pool, batch,
                                         plan.strategy.neighbor_k, sampler_seed);
                break;
            case SamplerKind::Tcm:
                picks = sample_tcm(train.features, pool, batch, plan.regime, step_index,
                                   probs, plan.strategy.neighbor_k, sampler_seed);
                break;
        }

        pool = apply_query(pool, picks, step_index);
        cumulative += batch;

        TrainConfig cfg = plan.train;
        cfg.seed = mix_seed(plan.train.seed, seed * 2654435761ULL + kTrainStream,
                            static_cast<std::uint64_t>(step));
        const FeatureMatrix labeled_x = gather_rows(train.features, pool.labeled());
        const std::vector<int> labeled_y = gather_labels(train.labels, pool.labeled());
        head = fit(labeled_x, labeled_y, dataset.class_count, cfg);

        const std::vector<int> predictions = predict(*head, test_x);
        const double value = evaluate_metric(plan.metric, predictions, test_y,
                                             dataset.class_count);
        const auto t1 = std::chrono::steady_clock::now();

        RunRecord record;
        record.strategy = plan.label;
        record.regime = regime_name_str(plan.regime.name);
        record.seed = seed;
        record.step_index = step_index;
        record.cumulative_budget = cumulative;
        record.metric = metric_str(plan.metric);
        record.value = value;
        record.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
        records.push_back(std::move(record));
    }
    return records;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), count);
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<RunRecord> run_plan(const RunPlan& plan, const std::vector<std::uint64_t>& seeds,
                                int threads) {
    std::vector<std::vector<RunRecord>> per_seed(seeds.size());
    parallel_for(seeds.size(), threads,
                 [&](std::size_t i) { per_seed[i] = run_one_seed(plan, seeds[i]); });
    std::vector<RunRecord> records;
    for (auto& chunk : per_seed) {
        records.insert(records.end(), chunk.begin(), chunk.end());
    }
    return records;
}

std::vector<int> uniform_batches(const BudgetSchedule& schedule) {
    std::vector<int> batches;
    batches.reserve(static_cast<std::size_t>(schedule.num_steps) + 1);
    batches.push_back(schedule.initial_budget);
    for (int k = 0; k < schedule.num_steps; ++k) batches.push_back(schedule.step_size);
    return batches;
}

// Shared setup: materialize data, resolve regime/strategy, pre-resolve the
// probcover radius.
struct Prepared {
    EmbeddingDataset dataset;
    RegimeSpec regime;
    StrategySpec strategy;
    double probcover_delta = 0.0;
};

Prepared prepare(const ExperimentConfig& config) {
    Prepared prep;
    prep.dataset = materialize_dataset(config.dataset);
    validate_dataset(prep.dataset);
    prep.regime = resolve_regime(config.regime, prep.dataset.class_count, config.overrides);
    prep.strategy = config.strategy;
    prep.strategy.typiclust_steps = resolve_typiclust_steps(
        config.strategy, config.regime, prep.dataset.class_count,
        prep.regime.schedule.step_size);
    prep.regime.typiclust_steps = prep.strategy.typiclust_steps;
    validate_regime(prep.regime, static_cast<int>(prep.dataset.size()),
                    prep.dataset.class_count);
    if (config.seeds.empty()) {
        throw Error(ErrorCode::Validation, "at least one seed is required");
    }
    if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0) &&
        !config.test_index_path.has_value()) {
        throw Error(ErrorCode::Validation, "test_fraction must lie in (0, 1)");
    }
    if (prep.strategy.kind == SamplerKind::ProbCover) {
        prep.probcover_delta =
            prep.strategy.probcover_delta > 0.0
                ? prep.strategy.probcover_delta
                : probcover_auto_delta(prep.dataset.features, prep.dataset.class_count, 0);
    }
    return prep;
}

RunPlan make_plan(const ExperimentConfig& config, const Prepared& prep,
                  std::vector<int> batch_sizes, std::string label) {
    RunPlan plan;
    plan.dataset = &prep.dataset;
    plan.strategy = prep.strategy;
    plan.regime = prep.regime;
    plan.batch_sizes = std::move(batch_sizes);
    plan.train = config.train;
    plan.metric = config.metric;
    plan.test_fraction = config.test_fraction;
    if (config.test_index_path.has_value()) {
        plan.test_rows = read_index_file(*config.test_index_path);
    }
    plan.label = std::move(label);
    plan.probcover_delta = prep.probcover_delta;
    return plan;
}

}  // namespace

const char* metric_str(Metric metric) {
    return metric == Metric::Accuracy ? "accuracy" : "balanced_accuracy";
}

std::optional<Metric> metric_from_str(const std::string& name) {
    if (name == "accuracy") return Metric::Accuracy;
    if (name == "balanced_accuracy") return Metric::BalancedAccuracy;
    return std::nullopt;
}

RegimeSpec resolve_regime(RegimeName name, int class_count,
                          const RegimeOverrides& overrides) {
    int initial = 0;
    switch (name) {
        case RegimeName::Tiny:   initial = class_count; break;
        case RegimeName::Small:  initial = 5 * class_count; break;
        case RegimeName::Medium: initial = 25 * class_count; break;
        case RegimeName::Large:  initial = 100 * class_count; break;
    }
    if (overrides.initial_budget.has_value()) initial = *overrides.initial_budget;
    RegimeSpec regime;
    regime.name = name;
    regime.schedule.initial_budget = initial;
    regime.schedule.step_size = overrides.step_size.value_or(initial);
    regime.schedule.num_steps = overrides.num_steps.value_or(10);
    return regime;
}

int resolve_typiclust_steps(const StrategySpec& strategy, RegimeName regime,
                            int class_count, int step_size) {
    if (strategy.kind != SamplerKind::Tcm && strategy.kind != SamplerKind::TypiClust) {
        return 0;
    }
    if (strategy.use_20c_rule) {
        if (step_size <= 0) {
            throw Error(ErrorCode::Validation, "20c rule needs a positive step size");
        }
        const int steps = (20 * class_count + step_size - 1) / step_size;  // ceil
        return std::max(steps, 1);
    }
    if (strategy.typiclust_steps >= 0) return strategy.typiclust_steps;
    switch (regime) {
        case RegimeName::Tiny:
        case RegimeName::Small:  return 3;
        case RegimeName::Medium: return 2;
        case RegimeName::Large:  return 1;
    }
    return 3;
}

EmbeddingDataset materialize_dataset(const DatasetSource& source) {
    const bool has_files = source.features_path.has_value() && source.labels_path.has_value();
    if (has_files == source.mixture.has_value()) {
        throw Error(ErrorCode::Validation,
                    "dataset source must be either feature/label files or a mixture spec");
    }
    EmbeddingDataset dataset = has_files
                                   ? load_embeddings(*source.features_path, *source.labels_path)
                                   : gaussian_mixture(*source.mixture);
    if (source.longtail.has_value()) {
        dataset = longtail_subsample(dataset, *source.longtail);
    }
    return dataset;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config, int threads) {
    const Prepared prep = prepare(config);
    const RunPlan plan = make_plan(config, prep, uniform_batches(prep.regime.schedule),
                                   sampler_kind_str(prep.strategy.kind));
    return run_plan(plan, config.seeds, threads);
}

std::vector<RunRecord> run_transition_ablation(const ExperimentConfig& config,
                                               const std::vector<int>& n_values,
                                               int threads) {
    ExperimentConfig base = config;
    base.strategy.kind = SamplerKind::Tcm;
    std::vector<int> ns = n_values;
    if (ns.empty()) {
        // Sweep every transition point, from "switch immediately" to
        // "never switch".
        const int num_steps = base.overrides.num_steps.value_or(10);
        for (int n = 1; n <= num_steps + 1; ++n) ns.push_back(n);
    }
    std::vector<RunRecord> all;
    for (int n : ns) {
        if (n < 1) {
            throw Error(ErrorCode::Validation,
                        "transition ablation N must be >= 1, got " + std::to_string(n));
        }
        ExperimentConfig variant = base;
        variant.strategy.typiclust_steps = n;
        variant.strategy.use_20c_rule = false;
        const Prepared prep = prepare(variant);
        const RunPlan plan = make_plan(variant, prep, uniform_batches(prep.regime.schedule),
                                       "tcm_n" + std::to_string(n));
        const std::vector<RunRecord> records = run_plan(plan, variant.seeds, threads);
        all.insert(all.end(), records.begin(), records.end());
    }
    return all;
}

std::vector<RunRecord> run_step_ablation(const ExperimentConfig& config,
                                         const std::vector<int>& step_sizes,
                                         int threads) {
    ExperimentConfig base = config;
    base.strategy.kind = SamplerKind::Tcm;
    const Prepared base_prep = prepare(base);
    const BudgetSchedule& schedule = base_prep.regime.schedule;
    const int diversity_steps = base_prep.regime.typiclust_steps;
    if (diversity_steps < 1) {
        throw Error(ErrorCode::Validation,
                    "step ablation needs at least one diversity step");
    }
    const int diversity_budget =
        schedule.initial_budget + (diversity_steps - 1) * schedule.step_size;
    const int total_budget = schedule.total_budget();

    std::vector<int> sizes = step_sizes;
    if (sizes.empty()) {
        // Half, original, and double, as three spread-out choices.
        const int s0 = schedule.step_size;
        sizes = {std::max(1, s0 / 2), s0, 2 * s0};
        sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    }

    std::vector<RunRecord> all;
    for (int s : sizes) {
        if (s < 1) {
            throw Error(ErrorCode::Validation,
                        "step ablation size must be >= 1, got " + std::to_string(s));
        }
        std::vector<int> batches;
        batches.push_back(schedule.initial_budget);
        for (int k = 1; k < diversity_steps; ++k) batches.push_back(schedule.step_size);
        // Uncertainty phase: fixed-size steps, last one truncated so every
        // variant ends at the same cumulative budget.
        int remaining = total_budget - diversity_budget;
        while (remaining > 0) {
            const int take = std::min(s, remaining);
            batches.push_back(take);
            remaining -= take;
        }
        const RunPlan plan = make_plan(base, base_prep, std::move(batches),
                                       "tcm_s" + std::to_string(s));
        const std::vector<RunRecord> records = run_plan(plan, base.seeds, threads);
        all.insert(all.end(), records.begin(), records.end());
    }
    return all;
}

namespace {

struct RecordKey {
    std::string regime;
    std::uint64_t seed;
    int budget;

    bool operator<(const RecordKey& other) const {
        if (regime != other.regime) return regime < other.regime;
        if (seed != other.seed) return seed < other.seed;
        return budget < other.budget;
    }
};

double mean_of(const std::vector<double>& values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

// Population standard deviation, matching mean +/- std error bands.
double std_of(const std::vector<double>& values, double mean) {
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(values.size()));
}

}  // namespace

std::vector<AggregateRecord> aggregate_improvement(
    const std::vector<RunRecord>& records,
    const std::vector<RunRecord>& baseline_records,
    AggregateGrouping grouping) {
    std::map<RecordKey, const RunRecord*> baseline;
    for (const RunRecord& r : baseline_records) {
        const RecordKey key{r.regime, r.seed, r.cumulative_budget};
        if (!baseline.emplace(key, &r).second) {
            throw Error(ErrorCode::AggregationMismatch,
                        "duplicate baseline row for regime=" + r.regime + " seed=" +
                            std::to_string(r.seed) + " budget=" +
                            std::to_string(r.cumulative_budget));
        }
    }

    // (strategy, budget or -1) -> improvements
    std::map<std::pair<std::string, int>, std::vector<double>> groups;
    for (const RunRecord& r : records) {
        const RecordKey key{r.regime, r.seed, r.cumulative_budget};
        const auto it = baseline.find(key);
        if (it == baseline.end()) {
            throw Error(ErrorCode::AggregationMismatch,
                        "no baseline row for regime=" + r.regime + " seed=" +
                            std::to_string(r.seed) + " budget=" +
                            std::to_string(r.cumulative_budget));
        }
        if (it->second->metric != r.metric) {
            throw Error(ErrorCode::AggregationMismatch,
                        "metric mismatch against baseline: " + r.metric + " vs " +
                            it->second->metric);
        }
        const int budget_key =
            grouping == AggregateGrouping::PerBudget ? r.cumulative_budget : -1;
        groups[{r.strategy, budget_key}].push_back(r.value - it->second->value);
    }

    std::vector<AggregateRecord> out;
    out.reserve(groups.size());
    for (const auto& [key, improvements] : groups) {
        AggregateRecord agg;
        agg.strategy = key.first;
        agg.pooled = key.second < 0;
        agg.cumulative_budget = agg.pooled ? 0 : key.second;
        agg.improvement_mean = mean_of(improvements);
        agg.improvement_std = std_of(improvements, agg.improvement_mean);
        out.push_back(std::move(agg));
    }
    return out;
}

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.15g", value);
    if (std::strtod(buffer, nullptr) != value) {
        std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    }
    return buffer;
}

void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path);
    }
    out << "strategy,regime,seed,step,cumulative_budget,metric,value\n";
    for (const RunRecord& r : records) {
        out << r.strategy << ',' << r.regime << ',' << r.seed << ',' << r.step_index << ','
            << r.cumulative_budget << ',' << r.metric << ',' << format_double(r.value)
            << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing " + path);
    }
}

std::vector<RunRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::Format, path + ":1: empty records file");
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "strategy,regime,seed,step,cumulative_budget,metric,value") {
        throw Error(ErrorCode::Format, path + ":1: unexpected header '" + line + "'");
    }
    std::vector<RunRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t pos = 0;
        while (pos <= line.size()) {
            const std::size_t comma = line.find(',', pos);
            cells.push_back(line.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (cells.size() != 7) {
            throw Error(ErrorCode::Format, path + ":" + std::to_string(line_no) +
                                               ": expected 7 columns, got " +
                                               std::to_string(cells.size()));
        }
        try {
            RunRecord r;
            r.strategy = cells[0];
            r.regime = cells[1];
            r.seed = static_cast<std::uint64_t>(std::stoull(cells[2]));
            r.step_index = std::stoi(cells[3]);
            r.cumulative_budget = std::stoi(cells[4]);
            r.metric = cells[5];
            r.value = std::stod(cells[6]);
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            throw Error(ErrorCode::Format,
                        path + ":" + std::to_string(line_no) + ": malformed row");
        }
    }
    return records;
}

void write_records_json(const std::string& path, const std::vector<RunRecord>& records) {
    nlohmann::json array = nlohmann::json::array();
    for (const RunRecord& r : records) {
        array.push_back({
            {"strategy", r.strategy},
            {"regime", r.regime},
            {"seed", r.seed},
            {"step", r.step_index},
            {"cumulative_budget", r.cumulative_budget},
            {"metric", r.metric},
            {"value", r.value},
        });
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path);
    }
    out << array.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing " + path);
    }
}

void write_aggregate_csv(const std::string& path,
                         const std::vector<AggregateRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot write " + path);
    }
    out << "strategy,cumulative_budget,improvement_mean,improvement_std\n";
    for (const AggregateRecord& r : records) {
        out << r.strategy << ',';
        if (r.pooled) {
            out << "pooled";
        } else {
            out << r.cumulative_budget;
        }
        out << ',' << format_double(r.improvement_mean) << ','
            << format_double(r.improvement_std) << '\n';
    }
    if (!out) {
        throw Error(ErrorCode::Io, "failed writing " + path);
    }
}

}  // namespace tcm
