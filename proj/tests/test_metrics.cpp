#include <doctest.h>

#include <chrono>
#include <cmath>
#include <thread>

#include "automal/error.hpp"
#include "automal/metrics.hpp"
#include "automal/rng.hpp"

using namespace automal;

TEST_CASE("confusion: hand-counted case") {
    // five malware then five benign
    const std::vector<int> y_true = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
    const std::vector<int> y_pred = {1, 1, 1, 0, 0, 1, 0, 0, 0, 0};
    const ConfusionMatrix cm = confusion(y_true, y_pred);
    CHECK(cm.tp == 3);
    CHECK(cm.fn == 2);
    CHECK(cm.fp == 1);
    CHECK(cm.tn == 4);
    CHECK(cm.total() == 10);

    const ConfusionMatrix perfect = confusion(y_true, y_true);
    CHECK(perfect.fp == 0);
    CHECK(perfect.fn == 0);

    const ConfusionMatrix all_ones = confusion(y_true, std::vector<int>(10, 1));
    CHECK(all_ones.tp == 5);
    CHECK(all_ones.fp == 5);

    CHECK_THROWS_AS(confusion(y_true, std::vector<int>{1}), ValueError);
}

TEST_CASE("classification_metrics: formula values on the hand case") {
    const MetricSet m = classification_metrics({3, 1, 2, 4});
    CHECK(m.recall == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(m.accuracy == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(m.mcc == doctest::Approx(10.0 / std::sqrt(600.0)).epsilon(1e-9));
    CHECK(m.mcc == doctest::Approx(0.408248).epsilon(1e-5));
}

TEST_CASE("classification_metrics: perfect and inverted predictions") {
    const MetricSet perfect = classification_metrics({5, 0, 0, 5});
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.f1 == 1.0);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.mcc == doctest::Approx(1.0).epsilon(1e-12));

    const MetricSet inverted = classification_metrics({0, 5, 5, 0});
    CHECK(inverted.mcc == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("classification_metrics: fuzz against direct formulas") {
    Rng rng(2718);
    for (int i = 0; i < 10000; ++i) {
        ConfusionMatrix cm;
        cm.tp = rng.below(10000);
        cm.fp = rng.below(10000);
        cm.fn = rng.below(10000);
        cm.tn = rng.below(10000);
        if (cm.total() == 0) continue;
        const MetricSet m = classification_metrics(cm);

        const long double tp = cm.tp, fp = cm.fp, fn = cm.fn, tn = cm.tn;
        const long double recall = tp + fn > 0 ? tp / (tp + fn) : 0.0L;
        const long double precision = tp + fp > 0 ? tp / (tp + fp) : 0.0L;
        const long double accuracy = (tp + tn) / (tp + fp + fn + tn);
        const long double f1 =
            precision + recall > 0 ? 2.0L * precision * recall / (precision + recall) : 0.0L;
        const long double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        const long double mcc = denom > 0 ? (tp * tn - fp * fn) / sqrtl(denom) : 0.0L;

        REQUIRE(std::abs(m.recall - static_cast<double>(recall)) <= 1e-12);
        REQUIRE(std::abs(m.precision - static_cast<double>(precision)) <= 1e-12);
        REQUIRE(std::abs(m.accuracy - static_cast<double>(accuracy)) <= 1e-12);
        REQUIRE(std::abs(m.f1 - static_cast<double>(f1)) <= 1e-12);
        REQUIRE(std::abs(m.mcc - static_cast<double>(mcc)) <= 1e-12);
        REQUIRE(m.mcc >= -1.0);
        REQUIRE(m.mcc <= 1.0);

        const bool both_classes = (cm.tp + cm.fn) > 0 && (cm.tn + cm.fp) > 0;
        if (m.mcc == 1.0) {
            REQUIRE(cm.fp == 0);
            REQUIRE(cm.fn == 0);
            REQUIRE(both_classes);
        }
        if (both_classes && cm.fp == 0 && cm.fn == 0) REQUIRE(m.mcc == 1.0);
    }
}

TEST_CASE("roc_auc: boundary conventions") {
    CHECK(roc_auc({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9}) == doctest::Approx(1.0));
    CHECK(roc_auc({0, 1, 0, 1}, {0.5, 0.5, 0.5, 0.5}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc_auc({1, 1}, {0.1, 0.2}), ValueError);
}

TEST_CASE("roc_auc: four-point pair-enumeration oracle") {
    // pairs (pos, neg): (.9,.8) ok, (.9,.1) ok, (.7,.8) wrong, (.7,.1) ok
    // => 3 of 4 correctly ordered, no ties => AUC = 0.75
    const double auc = roc_auc({1, 0, 1, 0}, {0.9, 0.8, 0.7, 0.1});
    CHECK(auc == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("roc_auc: invariant under strictly monotone score transforms") {
    Rng rng(5);
    std::vector<int> y(50);
    std::vector<double> s(50);
    for (int i = 0; i < 50; ++i) {
        y[i] = static_cast<int>(rng.below(2));
        s[i] = rng.uniform();
    }
    y[0] = 0;
    y[1] = 1;
    const double base = roc_auc(y, s);
    std::vector<double> exp_s(50), affine_s(50);
    for (int i = 0; i < 50; ++i) {
        exp_s[i] = std::exp(s[i]);
        affine_s[i] = 3.0 * s[i] + 11.0;
    }
    CHECK(roc_auc(y, exp_s) == doctest::Approx(base).epsilon(1e-12));
    CHECK(roc_auc(y, affine_s) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("pr_curve: threshold sweep by hand") {
    const std::vector<int> y = {1, 0, 1, 0};
    const std::vector<double> s = {0.9, 0.8, 0.7, 0.1};
    const auto curve = pr_curve(y, s);
    REQUIRE(curve.size() == 4);
    CHECK(curve[0].threshold == 0.9);
    CHECK(curve[0].recall == doctest::Approx(0.5));
    CHECK(curve[0].precision == doctest::Approx(1.0));
    CHECK(curve[1].recall == doctest::Approx(0.5));
    CHECK(curve[1].precision == doctest::Approx(0.5));
    CHECK(curve[2].recall == doctest::Approx(1.0));
    CHECK(curve[2].precision == doctest::Approx(2.0 / 3.0));
    CHECK(curve[3].recall == doctest::Approx(1.0));
    CHECK(curve[3].precision == doctest::Approx(0.5));  // prevalence

    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].threshold < curve[i - 1].threshold);
        CHECK(curve[i].recall >= curve[i - 1].recall);
    }
}

TEST_CASE("roc_curve: four-point sweep matches the trapezoid area") {
    const std::vector<int> y = {1, 0, 1, 0};
    const std::vector<double> s = {0.9, 0.8, 0.7, 0.1};
    const auto curve = roc_curve(y, s);
    REQUIRE(curve.size() == 4);
    CHECK(curve[0].fpr == 0.0);
    CHECK(curve[0].tpr == 0.5);
    CHECK(curve[1].fpr == 0.5);
    CHECK(curve[1].tpr == 0.5);
    CHECK(curve[2].tpr == 1.0);
    CHECK(curve[3].fpr == 1.0);
    CHECK(curve[3].tpr == 1.0);

    // trapezoid area under the sweep equals roc_auc
    double area = 0.0, prev_fpr = 0.0, prev_tpr = 0.0;
    for (const auto& p : curve) {
        area += (p.fpr - prev_fpr) * 0.5 * (p.tpr + prev_tpr);
        prev_fpr = p.fpr;
        prev_tpr = p.tpr;
    }
    CHECK(area == doctest::Approx(roc_auc(y, s)).epsilon(1e-12));
}

TEST_CASE("pr_curve: perfectly separated scores pass through (1,1)") {
    const auto curve = pr_curve({0, 0, 1, 1}, {0.1, 0.2, 0.8, 0.9});
    bool seen = false;
    for (const auto& p : curve)
        if (p.recall == 1.0 && p.precision == 1.0) seen = true;
    CHECK(seen);
    CHECK(curve.back().recall == 1.0);
}

TEST_CASE("probe: wall clock sanity band and nesting") {
    const ResourceReport outer = probe("outer", [] {
        StageProbe inner("inner");
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
        const ResourceReport in = inner.finish();
        CHECK(in.wall_seconds >= 0.1);
        CHECK(in.wall_seconds <= 0.5);
    });
    CHECK(outer.wall_seconds >= 0.1);
    CHECK(outer.cpu_available);
    CHECK(outer.rss_available);
    CHECK(outer.peak_rss_bytes > 0);
}

TEST_CASE("probe: child wall time bounded by the parent") {
    StageProbe parent("parent");
    double child_time = 0.0;
    {
        StageProbe child("child");
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        child_time = child.finish().wall_seconds;
    }
    CHECK(child_time <= parent.finish().wall_seconds);
}
