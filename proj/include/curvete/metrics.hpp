#pragma once

#include <string>
#include <vector>

namespace curvete {

struct ConfusionMatrix {
    int classes = 0;
    std::vector<std::int64_t> counts;  // classes*classes, rows = true, cols = predicted

    std::int64_t at(int truth, int predicted) const {
        return counts[static_cast<std::size_t>(truth) * classes + predicted];
    }
};

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
    // set when the denominator was empty and the value was reported as 0
    bool precision_undefined = false;
    bool recall_undefined = false;
};

struct MetricsReport {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<PerClassMetrics> per_class;
    ConfusionMatrix confusion;
};

// Accuracy plus macro-averaged precision/recall/F1. Classes with an empty
// denominator contribute 0 (flagged). class_count 0 derives the class count
// from the data.
MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              int class_count = 0);

std::string metrics_to_json(const MetricsReport& report, const std::string& manifest_hash,
                            const std::string& arm, std::uint64_t seed);
MetricsReport metrics_from_json(const std::string& text, std::string* manifest_hash = nullptr,
                                std::string* arm = nullptr, std::uint64_t* seed = nullptr);

// Markdown table in the ACC/PR/RE/F1 percent layout, one row per named report.
std::string metrics_markdown_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

struct WilcoxonResult {
    double statistic = 0.0;  // W+: rank sum of positive differences
    double p_value = 1.0;
    bool significant = false;
    int n = 0;               // pairs remaining after dropping zero differences
    bool exact = false;      // exact distribution (n <= 20) vs normal approximation
};

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; ties receive average ranks. Exact for n <= 20 (the full
// 2^n sign-pattern distribution), normal approximation with continuity and
// tie correction above.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& paired_a,
                                    const std::vector<double>& paired_b, double alpha = 0.05);

}  // namespace curvete
