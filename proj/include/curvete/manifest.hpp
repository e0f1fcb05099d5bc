#pragma once

#include <cstdint>
#include <string>

#include "curvete/cae.hpp"
#include "curvete/dataset.hpp"
#include "curvete/optim.hpp"

namespace curvete {

struct DatasetConfig {
    std::string kind;  // "synth" or "labelled_dir"
    SynthSpec synth;
    std::string path;           // labelled_dir
    int input_size = 0;         // resize target for labelled_dir; synth uses image_size
    double train_ratio = 0.70;
    double validation_ratio = 0.20;
    double test_ratio = 0.10;
    // optional augmentation of the training pool (0 = off)
    int augment_copies = 0;
    double augment_rotate_degrees = 15.0;
    int augment_shift = 2;

    int effective_input_size() const { return kind == "synth" ? synth.image_size : input_size; }
};

struct ScheduleConfig {
    int cycles = 1;
    int epochs_per_level = 1;
};

// Declarative description of one experiment; the SHA-256 of its canonical
// form is embedded in every artifact the run produces.
struct ExperimentManifest {
    DatasetConfig dataset;
    CaeSpec cae;
    int pretext_k = 5;
    int downstream_k = 5;
    int kmeans_max_iter = 100;
    double kmeans_tol = 1e-9;
    ScheduleConfig schedule;
    OptimizerConfig train_optimizer;
    int train_batch_size = 50;
    std::string backbone_spec;
    std::uint64_t seed = 1;
    std::string output_dir;

    std::string hash_hex;  // filled by validate_and_hash

    void validate_and_hash();
    std::string canonical_text() const;
};

// Flat "key = value" sections; '#' starts a comment line. Unknown sections
// or keys are validation errors naming the field path.
ExperimentManifest parse_manifest_text(const std::string& text);
ExperimentManifest load_manifest(const std::string& path);

std::string sha256_hex(const std::string& data);

}  // namespace curvete
