#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/image.hpp"
#include "curvete/tensor.hpp"

namespace curvete {

struct DatasetSplit {
    std::vector<std::string> train, validation, test;
    double train_ratio = 0.70, validation_ratio = 0.20, test_ratio = 0.10;
};

// Stratified per class with largest-remainder rounding, shuffled and
// apportioned deterministically under the seed. Unlabelled samples form a
// single stratum. Labels must densely cover 0..max_label.
DatasetSplit split_dataset(const std::vector<ImageSample>& samples,
                           double train_ratio, double validation_ratio, double test_ratio,
                           std::uint64_t seed);

void save_split_jsonl(const DatasetSplit& split, const std::string& path,
                      const std::string& manifest_hash);
DatasetSplit load_split_jsonl(const std::string& path, std::string* manifest_hash = nullptr);

struct SynthSpec {
    int classes = 3;
    int samples_per_class = 100;
    int image_size = 32;
    double noise_sigma = 20.0;
    int intra_class_modes = 5;
};

// Synthetic grayscale dataset: each class is a family of parametric patterns
// (bars / blobs / rings) with `intra_class_modes` distinct templates per
// class plus Gaussian pixel noise, so per-class clustering has genuine
// sub-structure to recover. Deterministic under the seed.
std::vector<ImageSample> synth_dataset(const SynthSpec& spec, std::uint64_t seed);

// The noise-free template for (class, mode); exposed for the
// nearest-template oracle in tests.
ImageSample synth_template(const SynthSpec& spec, int class_index, int mode);

// Labelled directory: root/<class_name>/<file>.pgm with class indices in
// sorted class-name order. Unlabelled: a flat directory of .pgm files.
struct LabelledDataset {
    std::vector<ImageSample> samples;
    std::vector<std::string> class_names;
};
LabelledDataset load_labelled_dir(const std::string& root);
std::vector<ImageSample> load_unlabelled_dir(const std::string& dir);

// Stacks images into a [n,1,H,W] float tensor scaled to [0,1]; all images
// must share the same dimensions.
Tensor images_to_tensor(const std::vector<const ImageSample*>& images);

}  // namespace curvete
