#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

namespace automal {

// Counts with malware (= label 1) as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred);

struct MetricSet {
    double recall = 0.0;
    double precision = 0.0;
    double accuracy = 0.0;
    double f1 = 0.0;
    double mcc = 0.0;  // in [-1, 1]; 0 when the denominator vanishes
    ConfusionMatrix counts;
};

// Formula-exact metrics from a confusion matrix. Degenerate denominators
// resolve to 0 (documented convention; applies to precision, recall, f1,
// and mcc alike).
MetricSet classification_metrics(const ConfusionMatrix& cm);

// Mann-Whitney formulation: P(score+ > score-) + 0.5 * P(equal), via
// average ranks. Requires both classes present.
double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores);

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

// One point per distinct score, thresholds descending (predict positive when
// score >= threshold), so recall is non-decreasing along the list and the
// final point sits at recall 1 with precision equal to prevalence.
std::vector<PrPoint> pr_curve(const std::vector<int>& y_true,
                              const std::vector<double>& scores);

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

// Same threshold sweep as pr_curve, reporting (FPR, TPR).
std::vector<RocPoint> roc_curve(const std::vector<int>& y_true,
                                const std::vector<double>& scores);

struct ResourceReport {
    std::string label;
    double wall_seconds = 0.0;
    double cpu_seconds = 0.0;
    bool cpu_available = false;
    long long peak_rss_bytes = 0;  // process-wide high-water mark
    bool rss_available = false;
};

// Scoped wall/cpu/memory probe around one labeled pipeline stage. Not
// reentrant across threads for the same label.
class StageProbe {
public:
    explicit StageProbe(std::string label);
    ResourceReport finish();

private:
    std::string label_;
    std::chrono::steady_clock::time_point wall_start_;
    double cpu_start_ = 0.0;
    bool cpu_ok_ = false;
};

template <typename F>
ResourceReport probe(const std::string& label, F&& fn) {
    StageProbe p(label);
    fn();
    return p.finish();
}

}  // namespace automal
