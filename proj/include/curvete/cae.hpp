#pragma once

#include <cstdint>
#include <vector>

#include "curvete/features.hpp"
#include "curvete/image.hpp"
#include "curvete/nn.hpp"

namespace curvete {

// Two-conv convolutional autoencoder. The encoder halves the spatial size
// twice (maxpool 2x2 after each conv), so inputs must be divisible by 4; the
// decoder mirrors it with nearest-neighbor upsampling.
struct CaeSpec {
    int filters1 = 16;
    int filters2 = 8;
    int epochs = 50;
    double learning_rate = 0.001;
    int batch_size = 50;

    void validate() const;  // f1 >= f2 >= 1, epochs >= 1
};

struct CaeModel {
    CaeSpec spec;
    Dims input;                       // (1, H, W)
    LayerStack stack;                 // encoder + decoder
    int latent_layer = 0;             // index of the last encoder layer
    std::vector<double> loss_history; // per-epoch training reconstruction loss

    int latent_dim() const { return spec.filters2 * (input.h / 4) * (input.w / 4); }
};

// Untrained autoencoder with deterministic init; exposed so checkpoints can
// rebuild the structure before loading weights.
CaeModel make_cae(const CaeSpec& spec, int image_h, int image_w, std::uint64_t seed);

// Trains with Adam on mean-squared reconstruction error over [0,1]-scaled
// pixels. Deterministic under the seed; requires >= 2 images of equal size.
CaeModel train_cae(const std::vector<ImageSample>& images, const CaeSpec& spec, std::uint64_t seed);

// Flattened post-pooling activations of the second encoder conv,
// d = f2 * (H/4) * (W/4). Row i corresponds to images[i].
FeatureMatrix encode(CaeModel& model, const std::vector<ImageSample>& images);

// Reconstructions in the [0,1] internal scale, shape [n,1,H,W].
Tensor reconstruct(CaeModel& model, const std::vector<ImageSample>& images);
double reconstruction_error(CaeModel& model, const std::vector<ImageSample>& images);

}  // namespace curvete
