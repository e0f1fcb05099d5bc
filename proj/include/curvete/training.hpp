#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/checkpoint.hpp"
#include "curvete/curriculum.hpp"
#include "curvete/dataset.hpp"
#include "curvete/image.hpp"
#include "curvete/ladder.hpp"
#include "curvete/nn.hpp"
#include "curvete/optim.hpp"

namespace curvete {

struct TrainConfig {
    OptimizerConfig optimizer;
    int batch_size = 50;
    std::uint64_t seed = 1;
};

struct EpochRecord {
    std::string phase;
    int cycle = 0;
    int level = 0;
    int epoch_in_level = 0;
    std::int64_t global_epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    double learning_rate = 0.0;
};
using RunHistory = std::vector<EpochRecord>;

// One curriculum phase (pretext or downstream) over a decomposed pool.
// `pool` must be ordered exactly like ladder.ids; train/val indices point
// into it. skip_level1 omits optimizer steps at the single-pseudo-class
// level of unlabelled ladders.
struct PhaseSpec {
    std::string phase = "downstream";   // seed-derivation namespace
    const GranularityLadder* ladder = nullptr;
    const CurriculumSchedule* schedule = nullptr;
    const std::vector<ImageSample>* pool = nullptr;
    std::vector<int> train_indices, val_indices;
    TrainConfig config;
    std::vector<LayerSpec> backbone_specs;
    Dims input;
    bool skip_level1 = false;
};

// Mutable state of a walk through the schedule; checkpointable at any
// (visit, epoch) boundary.
struct PhaseRun {
    NetworkModel model;
    Optimizer optimizer{OptimizerConfig{}};
    RunHistory history;
    int next_visit = 0;          // index into schedule.visits
    int next_epoch = 0;          // within the current visit
    std::int64_t global_epoch = 0;
    int current_level = 0;       // level the head is currently sized for
    int transfers = 0;

    bool finished(const PhaseSpec& spec) const {
        return next_visit >= static_cast<int>(spec.schedule->visits.size());
    }
};

// Builds the initial model (random init, or a copy of `init_backbone` with a
// fresh head) sized for the first scheduled level.
PhaseRun start_phase(const PhaseSpec& spec, const LayerStack* init_backbone = nullptr);

// Runs up to `max_epochs` training epochs (-1 = to completion), applying the
// transfer policy at level changes. Resuming a restored PhaseRun continues
// bit-identically to an uninterrupted run.
void advance_phase(PhaseRun& run, const PhaseSpec& spec, std::int64_t max_epochs = -1);

// Trains the head-matched model for `epochs` epochs on one level view.
// Exposed for direct unit-testing; advance_phase uses it internally.
void train_level(PhaseRun& run, const PhaseSpec& spec, const LevelView& level, int cycle, int epochs);

// Checkpoint payload for a phase: model weights, optimizer state, cursor.
std::vector<NamedTensor> phase_run_tensors(const PhaseRun& run);
PhaseRun restore_phase(const PhaseSpec& spec, const std::vector<NamedTensor>& tensors);

// Sub-class argmax over logits.
std::vector<int> predict_sub(NetworkModel& model, const std::vector<const ImageSample*>& images);
// Argmax then parent-map correction: always a valid original class index.
std::vector<int> predict_with_relabel(NetworkModel& model, const std::vector<const ImageSample*>& images,
                                      const LevelView& level);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

}  // namespace curvete
