#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/nn.hpp"

namespace curvete {

// Anti-curriculum traversal of granularity levels: one cycle walks
// [k_max, k_max-1, ..., 1, 2, ..., k_max] (hard -> easy -> hard, one level
// per step), and the walk repeats for `cycles` cycles.
struct CurriculumSchedule {
    int k_max = 1;
    int cycles = 1;
    int epochs_per_level = 1;
    std::vector<int> visits;
};

CurriculumSchedule build_schedule(int k_max, int cycles, int epochs_per_level);

void save_schedule_json(const CurriculumSchedule& schedule, const std::string& path);
CurriculumSchedule load_schedule_json(const std::string& path);

// Difficulty of a sample is the granularity level of the dataset view it
// belongs to: higher level = finer sub-classes = harder.
struct DifficultyScore {
    double value = 0.0;
};
DifficultyScore score(int level_of_sample);

// One epoch's mini-batches: a seeded shuffle partitioned into consecutive
// batches of at most `batch_size` samples.
struct MiniBatchPlan {
    int batch_size = 50;
    std::vector<std::vector<std::string>> batches;
};
MiniBatchPlan pace(const std::vector<std::string>& samples, int batch_size, std::uint64_t epoch_seed);

// Weight transfer between levels: backbone carried over untouched, head
// re-initialized for the destination level's class count.
void transfer_policy(NetworkModel& model, int to_level_classes, std::uint64_t seed);

}  // namespace curvete
