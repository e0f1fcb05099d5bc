#pragma once

#include <cstdint>
#include <vector>

#include "curvete/features.hpp"

namespace curvete {

struct ClusterModel {
    int k = 0;
    std::int64_t d = 0;
    std::vector<double> centroids;        // k*d row-major
    std::vector<int> assignments;         // per sample, in [0,k)
    double inertia = 0.0;                 // total squared Euclidean distance
    std::vector<double> inertia_history;  // one entry per Lloyd iteration

    double centroid_at(int cluster, std::int64_t col) const {
        return centroids[static_cast<std::size_t>(cluster) * static_cast<std::size_t>(d) +
                         static_cast<std::size_t>(col)];
    }
};

// Lloyd iterations from k-means++ seeding. Ties in nearest-centroid
// assignment break toward the lowest centroid index; a cluster emptied by an
// assignment step is reseeded at the point farthest from its own centroid.
// Inertia is recorded after each iteration and is non-increasing; the stored
// final inertia is exactly recomputable from (assignments, centroids) with
// sed_of. Deterministic under the seed.
ClusterModel kmeans(const FeatureMatrix& features, int k, std::uint64_t seed,
                    int max_iter = 100, double tol = 1e-9);

// Fixed-order SED of an assignment; the recomputation oracle for inertia.
double sed_of(const FeatureMatrix& features, const std::vector<double>& centroids,
              std::int64_t d, const std::vector<int>& assignments);

}  // namespace curvete
