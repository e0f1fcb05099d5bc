#include "curvete/kmeans.hpp"

#include <cmath>
#include <limits>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

namespace curvete {

namespace {

double dist2(const FeatureMatrix& f, std::int64_t row, const std::vector<double>& centroids, int cluster,
             std::int64_t d) {
    double acc = 0.0;
    const std::size_t frow = static_cast<std::size_t>(row * d);
    const std::size_t crow = static_cast<std::size_t>(cluster) * static_cast<std::size_t>(d);
    for (std::int64_t j = 0; j < d; ++j) {
        const double diff = static_cast<double>(f.values[frow + static_cast<std::size_t>(j)]) -
                            centroids[crow + static_cast<std::size_t>(j)];
        acc += diff * diff;
    }
    return acc;
}

std::vector<double> kmeanspp_init(const FeatureMatrix& f, int k, Rng& rng) {
    const std::int64_t n = f.n, d = f.d;
    std::vector<double> centroids(static_cast<std::size_t>(k) * static_cast<std::size_t>(d));
    std::vector<bool> chosen(static_cast<std::size_t>(n), false);

    const auto set_centroid = [&](int c, std::int64_t row) {
        for (std::int64_t j = 0; j < d; ++j) {
            centroids[static_cast<std::size_t>(c) * d + j] =
                static_cast<double>(f.values[static_cast<std::size_t>(row * d + j)]);
        }
        chosen[static_cast<std::size_t>(row)] = true;
    };

    set_centroid(0, static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n))));

    std::vector<double> min_d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double d2 = dist2(f, i, centroids, c - 1, d);
            auto& m = min_d2[static_cast<std::size_t>(i)];
            if (d2 < m) m = d2;
            total += m;
        }
        std::int64_t pick = -1;
        if (total > 0.0) {
            const double r = rng.uniform() * total;
            double cum = 0.0;
            for (std::int64_t i = 0; i < n; ++i) {
                cum += min_d2[static_cast<std::size_t>(i)];
                if (r < cum) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = n - 1;  // r landed on the rounding edge
        }
        if (pick < 0 || chosen[static_cast<std::size_t>(pick)]) {
            // all remaining mass on duplicates: take the lowest unchosen index
            pick = -1;
            for (std::int64_t i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) pick = 0;  // n == k with duplicate points
        }
        set_centroid(c, pick);
    }
    return centroids;
}

}  // namespace

double sed_of(const FeatureMatrix& features, const std::vector<double>& centroids, std::int64_t d,
              const std::vector<int>& assignments) {
    double total = 0.0;
    for (std::int64_t i = 0; i < features.n; ++i) {
        total += dist2(features, i, centroids, assignments[static_cast<std::size_t>(i)], d);
    }
    return total;
}

ClusterModel kmeans(const FeatureMatrix& features, int k, std::uint64_t seed, int max_iter, double tol) {
    features.validate();
    const std::int64_t n = features.n, d = features.d;
    if (k < 1) throw InputError("kmeans: k must be >= 1");
    if (n < k) throw InputError("kmeans: need at least k=" + std::to_string(k) + " samples, got " +
                                std::to_string(n));
    if (max_iter < 1) throw InputError("kmeans: max_iter must be >= 1");
    if (tol < 0) throw InputError("kmeans: tol must be >= 0");

    Rng rng(seed);
    ClusterModel model;
    model.k = k;
    model.d = d;
    model.centroids = kmeanspp_init(features, k, rng);
    model.assignments.assign(static_cast<std::size_t>(n), 0);

    std::vector<std::int64_t> counts(static_cast<std::size_t>(k));
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step; ties break toward the lowest centroid index
        bool changed = false;
        for (std::int64_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d2 = dist2(features, i, model.centroids, 0, d);
            for (int c = 1; c < k; ++c) {
                const double d2 = dist2(features, i, model.centroids, c, d);
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            if (model.assignments[static_cast<std::size_t>(i)] != best) changed = true;
            model.assignments[static_cast<std::size_t>(i)] = best;
        }

        // empty-cluster repair: reseed at the point farthest from its own
        // centroid, stealing only from clusters that keep at least one member
        std::fill(counts.begin(), counts.end(), 0);
        for (const int a : model.assignments) ++counts[static_cast<std::size_t>(a)];
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) continue;
            std::int64_t farthest = -1;
            double far_d2 = -1.0;
            for (std::int64_t i = 0; i < n; ++i) {
                const int owner = model.assignments[static_cast<std::size_t>(i)];
                if (counts[static_cast<std::size_t>(owner)] < 2) continue;
                const double d2 = dist2(features, i, model.centroids, owner, d);
                if (d2 > far_d2) {
                    far_d2 = d2;
                    farthest = i;
                }
            }
            if (farthest < 0) throw NumericalError("kmeans: cannot repair empty cluster");
            --counts[static_cast<std::size_t>(model.assignments[static_cast<std::size_t>(farthest)])];
            model.assignments[static_cast<std::size_t>(farthest)] = c;
            counts[static_cast<std::size_t>(c)] = 1;
            for (std::int64_t j = 0; j < d; ++j) {
                model.centroids[static_cast<std::size_t>(c) * d + j] =
                    static_cast<double>(features.values[static_cast<std::size_t>(farthest * d + j)]);
            }
            changed = true;
        }

        // update step: centroids move to the mean of their members
        std::vector<double> sums(static_cast<std::size_t>(k) * static_cast<std::size_t>(d), 0.0);
        for (std::int64_t i = 0; i < n; ++i) {
            const int a = model.assignments[static_cast<std::size_t>(i)];
            for (std::int64_t j = 0; j < d; ++j) {
                sums[static_cast<std::size_t>(a) * d + j] +=
                    static_cast<double>(features.values[static_cast<std::size_t>(i * d + j)]);
            }
        }
        for (int c = 0; c < k; ++c) {
            for (std::int64_t j = 0; j < d; ++j) {
                model.centroids[static_cast<std::size_t>(c) * d + j] =
                    sums[static_cast<std::size_t>(c) * d + j] / static_cast<double>(counts[static_cast<std::size_t>(c)]);
            }
        }

        const double inertia = sed_of(features, model.centroids, d, model.assignments);
        model.inertia_history.push_back(inertia);
        model.inertia = inertia;
        if (!std::isfinite(inertia)) throw NumericalError("kmeans: non-finite inertia");
        if (prev_inertia - inertia < tol) break;
        if (!changed) break;  // exact fixpoint; improvement is 0 from here on
        prev_inertia = inertia;
    }
    return model;
}

}  // namespace curvete
