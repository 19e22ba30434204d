#pragma once

#include <map>
#include <string>
#include <vector>

namespace automal {

// Declarative pipeline configuration: `key = value` lines, '#' comments.
// Keys are validated against the documented schema; unknown keys reject the
// config. resolve() fills every default so the snapshot logged into a run
// is complete and sufficient for replay.
//
// Schema (defaults in parentheses):
//   dataset.path            CSV path (required for `run`)
//   dataset.label           label column name ("class")
//   dataset.malware_label   raw value mapping to 1 ("" = automatic)
//   seed                    base seed, all stages derive from it (42)
//   threads                 worker threads, 0 = hardware count (0)
//   split.ratio             train fraction (0.8)
//   split.stratified        on|off (on)
//   preprocess.impute       median_mode (median_mode)
//   preprocess.outliers     off|iqr (off)
//   preprocess.iqr_k        fence multiplier (1.5)
//   preprocess.onehot       on|off (off)
//   preprocess.dedupe       on|off (on)
//   preprocess.balance      off|unique_undersample (off)
//   features.method         lasso|anova|pca|none (lasso)
//   features.k              ANOVA kept columns (32)
//   features.n_components   PCA components (16)
//   features.lambda         auto | non-negative real (auto)
//   features.tol            LASSO tolerance (1e-6)
//   features.max_iter       LASSO sweep cap (10000)
//   features.threshold      |beta| selection cutoff (0)
//   models.roster           comma list of tree,rf,extra,gbt_a,gbt_b,knn (all six)
//   models.voting           soft|hard (soft)
//   hpo.enable              on|off (on)
//   hpo.n_trials            total trials across the roster (50)
//   hpo.seed                "" = derive from seed ("")
//   hpo.pruner              off|halving (off)
//   hpo.eta                 halving factor (2)
//   hpo.rungs               halving rungs (3)
//   hpo.objective           recall (the only supported study objective)
//   hpo.min_mcc_guard       best-trial MCC floor, negative disables (0.05)
//   hpo.validation          holdout|kfold (holdout)
//   hpo.kfolds              folds when validation = kfold (5)
//   explain.enable          on|off (on)
//   explain.repeats         permutation-importance repeats (5)
//   explain.samples         shapley samples (2000)
//   explain.instances       explained test rows (5)
//   explain.background      background rows (100)
//   tracking.root           run store directory ("mhruns", env AUTOMAL_TRACKING_ROOT)
//   report.enable           on|off (on)
class PipelineConfig {
public:
    static PipelineConfig defaults();
    static PipelineConfig from_file(const std::string& path);
    static PipelineConfig from_snapshot_json(const std::string& json_text);

    // Unknown key or malformed value throws.
    void set(const std::string& key, const std::string& value);
    const std::string& get(const std::string& key) const;
    bool get_flag(const std::string& key) const;  // on/off
    long long get_int(const std::string& key) const;
    double get_real(const std::string& key) const;

    // Full resolved key set, canonically ordered.
    const std::map<std::string, std::string>& entries() const { return values_; }
    std::string to_json() const;

    // Checks cross-field constraints (ranges, enums) beyond per-key syntax.
    void validate() const;

private:
    std::map<std::string, std::string> values_;
};

}  // namespace automal
