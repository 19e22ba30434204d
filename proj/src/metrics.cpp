#include "automal/metrics.hpp"

#include <sys/resource.h>
#include <time.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "automal/error.hpp"

namespace automal {

ConfusionMatrix confusion(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw ValueError("confusion: length mismatch");
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
            throw ValueError("confusion: labels must be 0 or 1");
        if (y_true[i] == 1)
            y_pred[i] == 1 ? ++cm.tp : ++cm.fn;
        else
            y_pred[i] == 1 ? ++cm.fp : ++cm.tn;
    }
    return cm;
}

MetricSet classification_metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ValueError("classification_metrics: empty confusion matrix");
    MetricSet m;
    m.counts = cm;
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);

    m.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    m.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    m.accuracy = (tp + tn) / static_cast<double>(cm.total());
    m.f1 = m.precision + m.recall > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;

    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    m.mcc = denom > 0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
    return m;
}

namespace {

void require_both_classes(const std::vector<int>& y_true) {
    bool has0 = false, has1 = false;
    for (int y : y_true) (y == 1 ? has1 : has0) = true;
    if (!has0 || !has1)
        throw ValueError("scores metric: ground truth must contain both classes");
}

}  // namespace

double roc_auc(const std::vector<int>& y_true, const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw ValueError("roc_auc: length mismatch");
    require_both_classes(y_true);

    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Average ranks over tied scores, then the rank-sum statistic.
    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (y_true[order[k]] == 1) pos_rank_sum += avg_rank;
        i = j;
    }
    for (int y : y_true) n_pos += y == 1;
    const std::size_t n_neg = n - n_pos;
    const double u = pos_rank_sum -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<PrPoint> pr_curve(const std::vector<int>& y_true,
                              const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw ValueError("pr_curve: length mismatch");
    require_both_classes(y_true);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::size_t n_pos = 0;
    for (int y : y_true) n_pos += y == 1;

    std::vector<PrPoint> out;
    std::size_t tp = 0, predicted_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            ++predicted_pos;
            if (y_true[order[i]] == 1) ++tp;
            ++i;
        }
        out.push_back({threshold,
                       static_cast<double>(tp) / static_cast<double>(n_pos),
                       static_cast<double>(tp) / static_cast<double>(predicted_pos)});
    }
    return out;
}

std::vector<RocPoint> roc_curve(const std::vector<int>& y_true,
                                const std::vector<double>& scores) {
    if (y_true.size() != scores.size()) throw ValueError("roc_curve: length mismatch");
    require_both_classes(y_true);

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::size_t n_pos = 0;
    for (int y : y_true) n_pos += y == 1;
    const std::size_t n_neg = y_true.size() - n_pos;

    std::vector<RocPoint> out;
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (y_true[order[i]] == 1 ? tp : fp)++;
            ++i;
        }
        out.push_back({threshold, static_cast<double>(fp) / static_cast<double>(n_neg),
                       static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    return out;
}

namespace {

bool process_cpu_seconds(double& out) {
    struct timespec ts {};
    if (clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts) != 0) return false;
    out = static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
    return true;
}

}  // namespace

StageProbe::StageProbe(std::string label)
    : label_(std::move(label)), wall_start_(std::chrono::steady_clock::now()) {
    cpu_ok_ = process_cpu_seconds(cpu_start_);
}

ResourceReport StageProbe::finish() {
    ResourceReport r;
    r.label = label_;
    r.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count();
    double cpu_end = 0.0;
    if (cpu_ok_ && process_cpu_seconds(cpu_end)) {
        r.cpu_seconds = cpu_end - cpu_start_;
        r.cpu_available = true;
    }
    struct rusage ru {};
    if (getrusage(RUSAGE_SELF, &ru) == 0) {
        r.peak_rss_bytes = static_cast<long long>(ru.ru_maxrss) * 1024;  // linux: KiB
        r.rss_available = true;
    }
    return r;
}

}  // namespace automal
