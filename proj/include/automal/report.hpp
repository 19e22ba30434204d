#pragma once

#include <string>
#include <vector>

#include "automal/tracking.hpp"

namespace automal {

// Self-contained markdown report for one finished run: profile, environment,
// preprocessing decisions, selected features, per-model metrics, best
// hyperparameters, explanation tables, resource usage. Small CSV artifacts
// embed inline; larger ones are referenced by path.
std::string render_report(const RunStore& store, const std::string& run_id);

// One table row per run over the requested metric columns.
std::string render_comparison_report(const RunStore& store,
                                     const std::vector<std::string>& run_ids,
                                     const std::vector<std::string>& metric_keys);

}  // namespace automal
