#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tcm/harness.hpp"

namespace tcm {

// Knobs consumed only by the ablation and aggregate subcommands.
struct AblationOptions {
    std::vector<int> transition_ns;  // empty -> 1..num_steps+1
    std::vector<int> step_sizes;     // empty -> {step/2, step, 2*step}
};

struct AggregateOptions {
    std::string records_dir;
    AggregateGrouping grouping = AggregateGrouping::PerBudget;
};

struct CliConfig {
    ExperimentConfig experiment;
    AblationOptions ablation;
    AggregateOptions aggregate;
};

// Result of parsing: either a config or every validation problem found.
struct ParseResult {
    std::optional<CliConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty() && config.has_value(); }
};

// Flat key-value format with [section] headers; grammar documented in the
// README. Reports all validation errors, not just the first. With
// require_experiment = false the dataset/strategy/regime sections may be
// absent entirely (the aggregate command needs only its own section);
// whatever is present is still validated.
ParseResult parse_config_text(const std::string& text, bool require_experiment = true);
ParseResult parse_config(const std::string& path, bool require_experiment = true);

}  // namespace tcm
