#pragma once

#include <string>
#include <vector>

#include "curvete/manifest.hpp"
#include "curvete/metrics.hpp"
#include "curvete/training.hpp"

namespace curvete {

// In-memory view of one experiment's data: the training pool (train split
// plus optional augmented copies, then the validation split) in the exact
// order every ladder uses, and the held-out test set.
struct ExperimentContext {
    ExperimentManifest manifest;
    std::vector<ImageSample> pool;
    std::vector<int> pool_train_indices;
    std::vector<int> pool_val_indices;
    std::vector<ImageSample> test_samples;
    std::vector<int> test_labels;
    int classes = 0;
    DatasetSplit split;
};

ExperimentContext prepare_experiment(const ExperimentManifest& manifest);

// Artifact layout inside manifest.output_dir. Formats without a hash field
// (CRVF) carry the first 12 hash characters in their file name instead.
struct ArtifactPaths {
    std::string dir;
    std::string hash;

    std::string split_file() const;
    std::string cae_file() const;
    std::string cae_history_file() const;
    std::string features_file() const;
    std::string ladder_file(const std::string& which) const;
    std::string centroids_file(const std::string& which) const;
    std::string schedule_file() const;
    std::string backbone_file() const;
    std::string final_model_file(const std::string& arm) const;
    std::string metrics_file(const std::string& arm, std::uint64_t seed) const;
    std::string eval_file(const std::string& arm, std::uint64_t seed) const;
    std::string report_file() const;
};
ArtifactPaths artifact_paths(const ExperimentManifest& manifest);

// Command layer. Every command validates the manifest, checks whether its
// artifact already exists for the same manifest hash (in which case it is a
// no-op), and raises DependencyError naming the producing command when an
// upstream artifact is missing.
void cmd_pretrain_cae(const ExperimentManifest& manifest);
void cmd_decompose(const ExperimentManifest& manifest, const std::string& which);  // pretext|downstream
void cmd_pretext(const ExperimentManifest& manifest);
void cmd_finetune(const ExperimentManifest& manifest);
MetricsReport cmd_evaluate(const ExperimentManifest& manifest, const std::string& checkpoint_path);
MetricsReport cmd_ablate(const ExperimentManifest& manifest, const std::string& mode);
std::string cmd_report(const std::string& output_dir);

// The three ablation regimes plus the full pipeline, exposed for tests:
// "traditional_transfer" fine-tunes a random-init backbone on the original
// classes with the same downstream epoch budget; "wo_cl_w_sd" trains the
// pretext at fixed g_k only; "clog_cd" skips the pretext entirely.
bool is_ablation_mode(const std::string& mode);

}  // namespace curvete
