#pragma once

#include <map>
#include <string>

#include "automal/config.hpp"
#include "automal/dataset.hpp"
#include "automal/metrics.hpp"
#include "automal/tracking.hpp"

namespace automal {

struct PipelineResult {
    std::string run_id;
    MetricSet test_metrics;
    double roc_auc = 0.0;
    double wall_seconds = 0.0;
    // member name -> chosen hyperparameters (stringified)
    std::map<std::string, std::map<std::string, std::string>> best_params;
};

// Executes the full sequence — profile, preprocess, feature engineering,
// HPO, final ensemble fit, evaluation, explanations, report — logging every
// stage into the store. A stage failure marks the run failed with the stage
// name and rethrows.
PipelineResult run_pipeline(const PipelineConfig& config, RunStore& store,
                            const std::string& parent_id = "");

struct PreparedData {
    Dataset train;
    Dataset test;
};

// The deterministic data path of the pipeline (load, balance, split,
// preprocess, feature engineering) without any training. Reproduces the
// exact feature space a stored model was fitted in; pass a store/run to log
// the stages, or nullptr to stay silent.
PreparedData prepare_pipeline_data(const PipelineConfig& config, RunStore* store,
                                   const std::string& run_id,
                                   std::string* stage_out = nullptr);

// Re-executes the config snapshot stored in an existing run. The produced
// metrics must match the original exactly for a faithful replay; callers
// compare via metrics_match.
PipelineResult run_replay(const PipelineConfig& original_snapshot, RunStore& store);

bool metrics_match(const RunRecord& a, const RunRecord& b,
                   std::string* first_mismatch = nullptr);

}  // namespace automal
