#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/features.hpp"
#include "curvete/kmeans.hpp"

namespace curvete {

// One granularity level: a complete relabelling of the dataset into
// sub-classes with a total sub-label -> parent-class map. The sub-label
// space is dense: parent class c owns labels [c*j, (c+1)*j), so
// parent(sub) = sub / j even for sub-classes a small class leaves empty.
// Unlabelled data is the parent_classes == 1 case.
struct LevelView {
    int j = 1;
    int parent_classes = 1;
    std::vector<int> sub_labels;              // per sample, aligned with the ladder id list
    std::vector<int> parent_map;              // size parent_classes * j
    std::vector<std::vector<double>> centroids;  // per sub-label; empty rows for empty sub-classes

    int sub_class_count() const { return parent_classes * j; }
};

int map_to_parent(const LevelView& level, int sub_label);

struct GranularityLadder {
    int k_max = 1;
    int parent_classes = 1;
    std::vector<std::string> ids;   // sample order shared by every level
    std::vector<LevelView> levels;  // levels[j-1] is granularity j

    const LevelView& level(int j) const;
};

// Pretext-side decomposition of an unlabelled pool: level j >= 2 clusters the
// whole pool into j pseudo-classes; level 1 is the single pseudo-class.
GranularityLadder sample_decompose(const FeatureMatrix& features, int k_max, std::uint64_t seed,
                                   int kmeans_max_iter = 100, double kmeans_tol = 1e-9);

// Downstream decomposition of a labelled set: at level j every class c with
// n_c samples is clustered into min(j, n_c) sub-classes independently;
// sub-label = c*j + cluster. Level 1 is the original labelling.
GranularityLadder class_decompose(const FeatureMatrix& features, const std::vector<int>& labels,
                                  int k_max, std::uint64_t seed, int kmeans_max_iter = 100,
                                  double kmeans_tol = 1e-9);

// JSON-lines persistence: a header record, then one record per
// (level, sample_id, sub_label, parent).
void save_ladder_jsonl(const GranularityLadder& ladder, const std::string& path,
                       const std::string& manifest_hash);
GranularityLadder load_ladder_jsonl(const std::string& path, std::string* manifest_hash = nullptr);

// Flattens every level's centroids into one CRVF matrix with row ids
// "L<level>.S<sub_label>" (empty sub-classes omitted).
FeatureMatrix ladder_centroids_matrix(const GranularityLadder& ladder);

}  // namespace curvete
