#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "curvete/errors.hpp"
#include "curvete/metrics.hpp"
#include "curvete/rng.hpp"

using namespace curvete;

namespace {

// Independent oracle: literal 2^n enumeration of sign patterns.
double exact_p_by_enumeration(const std::vector<double>& diffs) {
    const int n = static_cast<int>(diffs.size());
    // average ranks of |d|
    std::vector<int> order(diffs.size());
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::fabs(diffs[static_cast<std::size_t>(a)]) < std::fabs(diffs[static_cast<std::size_t>(b)]);
    });
    std::vector<double> rank(diffs.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() &&
               std::fabs(diffs[static_cast<std::size_t>(order[j])]) ==
                   std::fabs(diffs[static_cast<std::size_t>(order[i])]))
            ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) rank[static_cast<std::size_t>(order[k])] = avg;
        i = j;
    }
    double w_obs = 0.0;
    for (int i = 0; i < n; ++i) {
        if (diffs[static_cast<std::size_t>(i)] > 0) w_obs += rank[static_cast<std::size_t>(i)];
    }
    std::int64_t le = 0, ge = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
        double w = 0.0;
        for (int i = 0; i < n; ++i) {
            if ((mask >> i) & 1) w += rank[static_cast<std::size_t>(i)];
        }
        if (w <= w_obs) ++le;
        if (w >= w_obs) ++ge;
    }
    const double total = std::pow(2.0, n);
    return std::min(1.0, 2.0 * std::min(static_cast<double>(le), static_cast<double>(ge)) / total);
}

}  // namespace

TEST_CASE("all-correct predictions score 1.0 everywhere") {
    const std::vector<int> labels = {0, 1, 2, 1, 0, 2};
    const auto rep = compute_metrics(labels, labels);
    CHECK(rep.accuracy == 1.0);
    CHECK(rep.macro_precision == 1.0);
    CHECK(rep.macro_recall == 1.0);
    CHECK(rep.macro_f1 == 1.0);
}

TEST_CASE("9 of 10 correct binary with one-directional errors matches hand formulas") {
    // one true-1 predicted as 0; everything else right (5x class0, 5x class1)
    const std::vector<int> labels = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
    const std::vector<int> preds  = {0, 0, 0, 0, 0, 0, 1, 1, 1, 1};
    const auto rep = compute_metrics(preds, labels);
    CHECK(rep.accuracy == doctest::Approx(0.9));
    // class 0: TP=5, FP=1, FN=0 -> P=5/6, R=1; class 1: TP=4, FP=0, FN=1 -> P=1, R=4/5
    CHECK(rep.per_class[0].precision == doctest::Approx(5.0 / 6.0));
    CHECK(rep.per_class[0].recall == doctest::Approx(1.0));
    CHECK(rep.per_class[1].precision == doctest::Approx(1.0));
    CHECK(rep.per_class[1].recall == doctest::Approx(0.8));
    const double f0 = 2.0 * (5.0 / 6.0) / (5.0 / 6.0 + 1.0);
    const double f1 = 2.0 * 0.8 / 1.8;
    CHECK(rep.macro_f1 == doctest::Approx((f0 + f1) / 2.0));
    CHECK(rep.confusion.at(1, 0) == 1);
}

TEST_CASE("metrics are invariant under permutation of the pairs") {
    Rng rng(3);
    std::vector<int> labels, preds;
    for (int i = 0; i < 60; ++i) {
        labels.push_back(static_cast<int>(rng.uniform_int(4)));
        preds.push_back(static_cast<int>(rng.uniform_int(4)));
    }
    const auto a = compute_metrics(preds, labels);
    std::vector<std::size_t> perm(labels.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng shuffler(9);
    shuffler.shuffle(perm);
    std::vector<int> labels2, preds2;
    for (const auto i : perm) {
        labels2.push_back(labels[i]);
        preds2.push_back(preds[i]);
    }
    const auto b = compute_metrics(preds2, labels2);
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.macro_precision == b.macro_precision);
    CHECK(a.macro_recall == b.macro_recall);
    CHECK(a.macro_f1 == b.macro_f1);
}

TEST_CASE("macro F1 lies between the per-class extremes") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> labels, preds;
        for (int i = 0; i < 40; ++i) {
            labels.push_back(static_cast<int>(rng.uniform_int(3)));
            preds.push_back(static_cast<int>(rng.uniform_int(3)));
        }
        const auto rep = compute_metrics(preds, labels, 3);
        double lo = 1e300, hi = -1e300;
        for (const auto& pc : rep.per_class) {
            lo = std::min(lo, pc.f1);
            hi = std::max(hi, pc.f1);
        }
        CHECK(rep.macro_f1 >= lo - 1e-12);
        CHECK(rep.macro_f1 <= hi + 1e-12);
    }
}

TEST_CASE("undefined precision is reported as zero with a flag") {
    // class 2 never predicted and never true -> both undefined
    const std::vector<int> labels = {0, 0, 1, 1};
    const std::vector<int> preds = {0, 0, 1, 1};
    const auto rep = compute_metrics(preds, labels, 3);
    CHECK(rep.per_class[2].precision == 0.0);
    CHECK(rep.per_class[2].precision_undefined);
    CHECK(rep.per_class[2].recall_undefined);
}

TEST_CASE("markdown table renders the percent layout") {
    MetricsReport rep;
    rep.accuracy = 0.9660;
    rep.macro_precision = 0.9582;
    rep.macro_recall = 0.9656;
    rep.macro_f1 = 0.9619;
    const std::string table = metrics_markdown_table({{"demo", rep}});
    CHECK(table.find("96.60") != std::string::npos);
    CHECK(table.find("95.82") != std::string::npos);
    CHECK(table.find("96.56") != std::string::npos);
    CHECK(table.find("96.19") != std::string::npos);
    CHECK(table.find("ACC") != std::string::npos);
}

TEST_CASE("metrics json round trip") {
    const auto rep = compute_metrics({0, 1, 1}, {0, 1, 0});
    const std::string text = metrics_to_json(rep, "beef", "curvete", 7);
    std::string hash, arm;
    std::uint64_t seed = 0;
    const auto back = metrics_from_json(text, &hash, &arm, &seed);
    CHECK(hash == "beef");
    CHECK(arm == "curvete");
    CHECK(seed == 7);
    CHECK(back.accuracy == rep.accuracy);
    CHECK(back.per_class.size() == rep.per_class.size());
}

TEST_CASE("errors: length mismatch and empty input") {
    CHECK_THROWS_AS(compute_metrics({0}, {0, 1}), InputError);
    CHECK_THROWS_AS(compute_metrics({}, {}), InputError);
}

TEST_CASE("wilcoxon: identical samples are a degenerate input") {
    const std::vector<double> a = {1, 2, 3, 4, 5, 6};
    CHECK_THROWS_WITH_AS(wilcoxon_signed_rank(a, a), doctest::Contains("degenerate"), InputError);
}

TEST_CASE("wilcoxon: fewer than 5 nonzero differences is an input error") {
    CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3, 4}, {2, 3, 4, 5}), InputError);
    CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2}, {1, 2, 3}), InputError);
}

TEST_CASE("wilcoxon: mirrored pairs sit at the distribution extreme with p = 2/2^6") {
    const std::vector<double> a = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> b;
    for (const double x : a) b.push_back(-x);
    const auto res = wilcoxon_signed_rank(a, b);
    CHECK(res.exact);
    CHECK(res.statistic == doctest::Approx(21.0));  // all positive: maximal rank sum
    CHECK(res.p_value == doctest::Approx(2.0 / 64.0));
    CHECK(res.significant);
}

TEST_CASE("wilcoxon exact p matches the exhaustive enumeration oracle for n <= 12") {
    Rng rng(31);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform_int(8));  // 5..12
        std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
        std::vector<double> diffs;
        for (int i = 0; i < n; ++i) {
            a[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
            // quantized shifts make magnitude ties frequent
            b[static_cast<std::size_t>(i)] =
                a[static_cast<std::size_t>(i)] + (rng.uniform_int(9) - 4.0) / 8.0;
            const double d = a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)];
            if (d != 0) diffs.push_back(d);
        }
        if (static_cast<int>(diffs.size()) < 5) continue;
        const auto res = wilcoxon_signed_rank(a, b);
        REQUIRE(res.exact);
        CHECK(res.p_value == exact_p_by_enumeration(diffs));
        CHECK(res.significant == (res.p_value < 0.05));
    }
}

TEST_CASE("wilcoxon exact and normal approximations agree within 0.02 for 10 <= n <= 20") {
    Rng rng(67);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 10 + static_cast<int>(rng.uniform_int(11));  // 10..20
        std::vector<double> base(static_cast<std::size_t>(n)), shifted(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            base[static_cast<std::size_t>(i)] = rng.uniform(-1, 1);
            shifted[static_cast<std::size_t>(i)] = base[static_cast<std::size_t>(i)] + rng.uniform(-0.5, 0.7);
        }
        const auto exact = wilcoxon_signed_rank(base, shifted);
        REQUIRE(exact.exact);

        // the normal-approximation formula applied to the same statistic
        const double mean = exact.n * (exact.n + 1) / 4.0;
        const double var = exact.n * (exact.n + 1) * (2.0 * exact.n + 1) / 24.0;
        double z = 0.0;
        if (exact.statistic > mean) z = (exact.statistic - mean - 0.5) / std::sqrt(var);
        if (exact.statistic < mean) z = (exact.statistic - mean + 0.5) / std::sqrt(var);
        const double p_normal = std::erfc(std::fabs(z) / std::sqrt(2.0));
        CHECK(std::fabs(exact.p_value - p_normal) < 0.02);
    }
}

TEST_CASE("wilcoxon normal branch engages above n = 20") {
    Rng rng(91);
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(rng.uniform(0, 1));
        b.push_back(rng.uniform(0, 1) + 0.15);
    }
    const auto res = wilcoxon_signed_rank(a, b);
    CHECK(!res.exact);
    CHECK(res.n == 30);
    CHECK(res.p_value > 0.0);
    CHECK(res.p_value <= 1.0);
}

TEST_CASE("wilcoxon significance threshold is strict at alpha") {
    // p-values like 0.038/0.001/0.0039 from the significance style flag correctly
    const std::vector<double> a = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    std::vector<double> b;
    for (const double x : a) b.push_back(-x);
    const auto res = wilcoxon_signed_rank(a, b, 0.05);
    CHECK(res.significant);
    const auto strict = wilcoxon_signed_rank(a, b, 2.0 / 64.0);  // alpha == p
    CHECK(!strict.significant);
}
