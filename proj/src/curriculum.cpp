#include "curvete/curriculum.hpp"

#include <fstream>

#include <json.hpp>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

using nlohmann::json;

namespace curvete {

CurriculumSchedule build_schedule(int k_max, int cycles, int epochs_per_level) {
    if (k_max < 1) throw InputError("schedule: k_max must be >= 1");
    if (cycles < 1) throw InputError("schedule: cycles must be >= 1");
    if (epochs_per_level < 1) throw InputError("schedule: epochs_per_level must be >= 1");

    CurriculumSchedule s;
    s.k_max = k_max;
    s.cycles = cycles;
    s.epochs_per_level = epochs_per_level;
    s.visits.reserve(static_cast<std::size_t>(cycles) * (2 * static_cast<std::size_t>(k_max) - 1));
    for (int c = 0; c < cycles; ++c) {
        for (int level = k_max; level >= 1; --level) s.visits.push_back(level);
        for (int level = 2; level <= k_max; ++level) s.visits.push_back(level);
    }
    return s;
}

void save_schedule_json(const CurriculumSchedule& schedule, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write schedule file " + path);
    f << json{{"k_max", schedule.k_max},
              {"cycles", schedule.cycles},
              {"epochs_per_level", schedule.epochs_per_level},
              {"visits", schedule.visits}}
             .dump(2)
      << "\n";
}

CurriculumSchedule load_schedule_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DependencyError("schedule file " + path + " not found");
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    CurriculumSchedule s;
    s.k_max = j.at("k_max").get<int>();
    s.cycles = j.at("cycles").get<int>();
    s.epochs_per_level = j.at("epochs_per_level").get<int>();
    s.visits = j.at("visits").get<std::vector<int>>();
    const CurriculumSchedule rebuilt = build_schedule(s.k_max, s.cycles, s.epochs_per_level);
    if (rebuilt.visits != s.visits) throw ParseError(path + ": visit list is not a valid schedule");
    return s;
}

DifficultyScore score(int level_of_sample) {
    if (level_of_sample < 1) throw InputError("score: level must be >= 1");
    return DifficultyScore{static_cast<double>(level_of_sample)};
}

MiniBatchPlan pace(const std::vector<std::string>& samples, int batch_size, std::uint64_t epoch_seed) {
    if (samples.empty()) throw InputError("pace: empty sample set");
    if (batch_size < 1) throw InputError("pace: batch_size must be >= 1");

    std::vector<std::string> order = samples;
    Rng rng(epoch_seed);
    rng.shuffle(order);

    MiniBatchPlan plan;
    plan.batch_size = batch_size;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(batch_size));
        plan.batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                                  order.begin() + static_cast<std::ptrdiff_t>(end));
    }
    return plan;
}

void transfer_policy(NetworkModel& model, int to_level_classes, std::uint64_t seed) {
    reinit_head(model, to_level_classes, seed);
}

}  // namespace curvete
