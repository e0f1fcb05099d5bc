#include "curvete/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "curvete/errors.hpp"

using nlohmann::json;

namespace curvete {

MetricsReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                              int class_count) {
    if (predictions.size() != labels.size()) {
        throw InputError("compute_metrics: " + std::to_string(predictions.size()) + " predictions vs " +
                         std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw InputError("compute_metrics: empty input");

    int classes = class_count;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || predictions[i] < 0) throw InputError("compute_metrics: negative class index");
        classes = std::max({classes, labels[i] + 1, predictions[i] + 1});
    }

    MetricsReport rep;
    rep.confusion.classes = classes;
    rep.confusion.counts.assign(static_cast<std::size_t>(classes) * classes, 0);
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        ++rep.confusion.counts[static_cast<std::size_t>(labels[i]) * classes + predictions[i]];
        if (labels[i] == predictions[i]) ++correct;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(labels.size());

    rep.per_class.resize(static_cast<std::size_t>(classes));
    double psum = 0.0, rsum = 0.0, fsum = 0.0;
    for (int c = 0; c < classes; ++c) {
        std::int64_t tp = rep.confusion.at(c, c), fp = 0, fn = 0;
        for (int o = 0; o < classes; ++o) {
            if (o == c) continue;
            fp += rep.confusion.at(o, c);
            fn += rep.confusion.at(c, o);
        }
        auto& pc = rep.per_class[static_cast<std::size_t>(c)];
        pc.support = tp + fn;
        if (tp + fp > 0) {
            pc.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        } else {
            pc.precision_undefined = true;
        }
        if (tp + fn > 0) {
            pc.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
        } else {
            pc.recall_undefined = true;
        }
        pc.f1 = (pc.precision + pc.recall > 0)
                    ? 2.0 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        psum += pc.precision;
        rsum += pc.recall;
        fsum += pc.f1;
    }
    rep.macro_precision = psum / classes;
    rep.macro_recall = rsum / classes;
    rep.macro_f1 = fsum / classes;
    return rep;
}

std::string metrics_to_json(const MetricsReport& report, const std::string& manifest_hash,
                            const std::string& arm, std::uint64_t seed) {
    json per = json::array();
    for (const auto& pc : report.per_class) {
        per.push_back({{"precision", pc.precision},
                       {"recall", pc.recall},
                       {"f1", pc.f1},
                       {"support", pc.support},
                       {"precision_undefined", pc.precision_undefined},
                       {"recall_undefined", pc.recall_undefined}});
    }
    const json j = {{"manifest_hash", manifest_hash},
                    {"arm", arm},
                    {"seed", seed},
                    {"averaging", "macro"},
                    {"accuracy", report.accuracy},
                    {"macro_precision", report.macro_precision},
                    {"macro_recall", report.macro_recall},
                    {"macro_f1", report.macro_f1},
                    {"per_class", per},
                    {"confusion", {{"classes", report.confusion.classes}, {"counts", report.confusion.counts}}}};
    return j.dump(2);
}

MetricsReport metrics_from_json(const std::string& text, std::string* manifest_hash, std::string* arm,
                                std::uint64_t* seed) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("metrics json: ") + e.what());
    }
    MetricsReport rep;
    if (manifest_hash) *manifest_hash = j.at("manifest_hash").get<std::string>();
    if (arm) *arm = j.at("arm").get<std::string>();
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    rep.accuracy = j.at("accuracy").get<double>();
    rep.macro_precision = j.at("macro_precision").get<double>();
    rep.macro_recall = j.at("macro_recall").get<double>();
    rep.macro_f1 = j.at("macro_f1").get<double>();
    for (const auto& e : j.at("per_class")) {
        PerClassMetrics pc;
        pc.precision = e.at("precision").get<double>();
        pc.recall = e.at("recall").get<double>();
        pc.f1 = e.at("f1").get<double>();
        pc.support = e.at("support").get<std::int64_t>();
        pc.precision_undefined = e.at("precision_undefined").get<bool>();
        pc.recall_undefined = e.at("recall_undefined").get<bool>();
        rep.per_class.push_back(pc);
    }
    rep.confusion.classes = j.at("confusion").at("classes").get<int>();
    rep.confusion.counts = j.at("confusion").at("counts").get<std::vector<std::int64_t>>();
    return rep;
}

std::string metrics_markdown_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    std::size_t name_w = 5;
    for (const auto& [name, rep] : rows) name_w = std::max(name_w, name.size());
    std::ostringstream os;
    os << "| " << std::string(name_w - 5, ' ') << "model | ACC (%) | PR (%) | RE (%) | F1 (%) |\n";
    os << "|" << std::string(name_w + 2, '-') << "|---------|--------|--------|--------|\n";
    char buf[128];
    for (const auto& [name, rep] : rows) {
        std::snprintf(buf, sizeof(buf), "| %*s | %7.2f | %6.2f | %6.2f | %6.2f |\n",
                      static_cast<int>(name_w), name.c_str(), rep.accuracy * 100.0,
                      rep.macro_precision * 100.0, rep.macro_recall * 100.0, rep.macro_f1 * 100.0);
        os << buf;
    }
    return os.str();
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& paired_a,
                                    const std::vector<double>& paired_b, double alpha) {
    if (paired_a.size() != paired_b.size()) throw InputError("wilcoxon: paired samples differ in length");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < paired_a.size(); ++i) {
        const double d = paired_a[i] - paired_b[i];
        if (d != 0.0) diffs.push_back(d);
    }
    if (diffs.empty()) throw InputError("wilcoxon: degenerate input, all differences are zero");
    const int n = static_cast<int>(diffs.size());
    if (n < 5) {
        throw InputError("wilcoxon: need at least 5 nonzero differences, got " + std::to_string(n));
    }

    // average ranks of |d|, tie groups tracked for the variance correction
    std::vector<int> order(diffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return std::fabs(diffs[static_cast<std::size_t>(x)]) < std::fabs(diffs[static_cast<std::size_t>(y)]);
    });
    std::vector<double> rank(diffs.size(), 0.0);
    std::vector<std::int64_t> tie_sizes;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t jx = i;
        const double v = std::fabs(diffs[static_cast<std::size_t>(order[i])]);
        while (jx < order.size() && std::fabs(diffs[static_cast<std::size_t>(order[jx])]) == v) ++jx;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(jx)) / 2.0;
        for (std::size_t kx = i; kx < jx; ++kx) rank[static_cast<std::size_t>(order[kx])] = avg;
        tie_sizes.push_back(static_cast<std::int64_t>(jx - i));
        i = jx;
    }

    double w_plus = 0.0;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        if (diffs[i] > 0) w_plus += rank[i];
    }

    WilcoxonResult res;
    res.statistic = w_plus;
    res.n = n;

    if (n <= 20) {
        // exact: distribution of 2*W+ over all 2^n sign patterns, computed by
        // the generating polynomial over the doubled (integer) ranks
        res.exact = true;
        const int smax = n * (n + 1);  // max of sum(2*rank)
        std::vector<double> count(static_cast<std::size_t>(smax + 1), 0.0);
        count[0] = 1.0;
        for (std::size_t i = 0; i < diffs.size(); ++i) {
            const int r2 = static_cast<int>(std::llround(2.0 * rank[i]));
            for (int s = smax; s >= r2; --s) {
                count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r2)];
            }
        }
        const double total = std::pow(2.0, n);
        const int w2 = static_cast<int>(std::llround(2.0 * w_plus));
        double le = 0.0, ge = 0.0;
        for (int s = 0; s <= smax; ++s) {
            if (s <= w2) le += count[static_cast<std::size_t>(s)];
            if (s >= w2) ge += count[static_cast<std::size_t>(s)];
        }
        res.p_value = std::min(1.0, 2.0 * std::min(le, ge) / total);
    } else {
        const double mean = static_cast<double>(n) * (n + 1) / 4.0;
        double var = static_cast<double>(n) * (n + 1) * (2 * n + 1) / 24.0;
        for (const auto t : tie_sizes) {
            var -= static_cast<double>(t * t * t - t) / 48.0;
        }
        if (var <= 0.0) throw NumericalError("wilcoxon: zero variance (all magnitudes tied)");
        double z = 0.0;
        if (w_plus > mean) {
            z = (w_plus - mean - 0.5) / std::sqrt(var);
        } else if (w_plus < mean) {
            z = (w_plus - mean + 0.5) / std::sqrt(var);
        }
        res.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
    }
    res.significant = res.p_value < alpha;
    return res;
}

}  // namespace curvete
