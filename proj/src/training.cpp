#include "curvete/training.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

namespace curvete {

namespace {

void validate_spec(const PhaseSpec& spec) {
    if (!spec.ladder || !spec.schedule || !spec.pool) throw ConfigError("phase spec is missing inputs");
    if (spec.ladder->k_max != spec.schedule->k_max) {
        throw ConfigError("ladder k_max " + std::to_string(spec.ladder->k_max) +
                          " does not match schedule k_max " + std::to_string(spec.schedule->k_max));
    }
    if (spec.pool->size() != spec.ladder->ids.size()) {
        throw ConfigError("pool size does not match ladder id list");
    }
    if (spec.train_indices.empty()) throw InputError("phase has no training samples");
    spec.config.optimizer.validate();
    if (spec.config.batch_size < 1) throw ConfigError("batch_size must be >= 1");
}

int level_classes(const PhaseSpec& spec, int level) {
    return spec.ladder->level(level).sub_class_count();
}

std::vector<int> argmax_rows(const Tensor& logits) {
    const int n = logits.shape[0];
    const int c = logits.shape[1];
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const std::size_t base = static_cast<std::size_t>(i) * c;
        int best = 0;
        for (int j = 1; j < c; ++j) {
            if (logits.data[base + j] > logits.data[base + best]) best = j;
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

// Copies parameter data between structurally identical stacks.
void copy_stack_weights(LayerStack& dst, const LayerStack& src) {
    auto dp = dst.parameters();
    auto sp = src.parameters();
    if (dp.size() != sp.size()) throw ConfigError("backbone structure mismatch on weight transfer");
    for (std::size_t i = 0; i < dp.size(); ++i) {
        if (dp[i]->shape != sp[i]->shape) throw ConfigError("backbone tensor shape mismatch on weight transfer");
        dp[i]->data = sp[i]->data;
    }
}

}  // namespace

PhaseRun start_phase(const PhaseSpec& spec, const LayerStack* init_backbone) {
    validate_spec(spec);
    const int first_level = spec.schedule->visits.front();
    PhaseRun run;
    run.model = NetworkModel(spec.backbone_specs, spec.input, level_classes(spec, first_level),
                             derive_seed(spec.config.seed, spec.phase + "-model-init"));
    if (init_backbone) copy_stack_weights(run.model.backbone, *init_backbone);
    run.optimizer = Optimizer(spec.config.optimizer);
    run.current_level = first_level;
    return run;
}

void train_level(PhaseRun& run, const PhaseSpec& spec, const LevelView& level, int cycle, int epochs) {
    if (run.model.class_count() != level.sub_class_count()) {
        throw StateError("head has " + std::to_string(run.model.class_count()) + " outputs but level " +
                         std::to_string(level.j) + " has " + std::to_string(level.sub_class_count()) +
                         " sub-classes");
    }
    const auto& pool = *spec.pool;
    std::vector<std::string> train_ids;
    train_ids.reserve(spec.train_indices.size());
    std::unordered_map<std::string, int> id_to_index;
    for (const int idx : spec.train_indices) {
        train_ids.push_back(spec.ladder->ids[static_cast<std::size_t>(idx)]);
        id_to_index.emplace(train_ids.back(), idx);
    }

    for (int e = 0; e < epochs; ++e) {
        const auto plan = pace(train_ids, spec.config.batch_size,
                               derive_seed(spec.config.seed, spec.phase + "-pace",
                                           static_cast<std::uint64_t>(run.next_visit),
                                           static_cast<std::uint64_t>(run.next_epoch)));
        double loss_sum = 0.0;
        std::int64_t correct = 0, seen = 0;
        for (const auto& batch_ids : plan.batches) {
            std::vector<const ImageSample*> images;
            std::vector<int> labels;
            for (const auto& id : batch_ids) {
                const int idx = id_to_index.at(id);
                images.push_back(&pool[static_cast<std::size_t>(idx)]);
                labels.push_back(level.sub_labels[static_cast<std::size_t>(idx)]);
            }
            const Tensor logits = run.model.forward(images_to_tensor(images));
            const LossGrad lg = cross_entropy_with_grad(logits, labels);
            const auto grads = run.model.backward(lg.grad);
            run.optimizer.step(run.model, grads, run.global_epoch);

            loss_sum += lg.value * static_cast<double>(batch_ids.size());
            const auto preds = argmax_rows(logits);
            for (std::size_t i = 0; i < preds.size(); ++i) {
                if (preds[i] == labels[i]) ++correct;
            }
            seen += static_cast<std::int64_t>(batch_ids.size());
        }

        double val_acc = 0.0;
        if (!spec.val_indices.empty()) {
            std::vector<const ImageSample*> val_images;
            std::vector<int> val_labels;
            for (const int idx : spec.val_indices) {
                val_images.push_back(&pool[static_cast<std::size_t>(idx)]);
                val_labels.push_back(level.sub_labels[static_cast<std::size_t>(idx)]);
            }
            val_acc = accuracy(predict_sub(run.model, val_images), val_labels);
        }

        EpochRecord rec;
        rec.phase = spec.phase;
        rec.cycle = cycle;
        rec.level = level.j;
        rec.epoch_in_level = run.next_epoch;
        rec.global_epoch = run.global_epoch;
        rec.train_loss = loss_sum / static_cast<double>(seen);
        rec.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
        rec.val_accuracy = val_acc;
        rec.learning_rate = lr_at_epoch(spec.config.optimizer, run.global_epoch);
        run.history.push_back(std::move(rec));

        ++run.global_epoch;
        ++run.next_epoch;
    }
}

void advance_phase(PhaseRun& run, const PhaseSpec& spec, std::int64_t max_epochs) {
    validate_spec(spec);
    const auto& visits = spec.schedule->visits;
    const int visits_per_cycle = 2 * spec.schedule->k_max - 1;
    std::int64_t budget = max_epochs;

    while (run.next_visit < static_cast<int>(visits.size())) {
        const int level_idx = visits[static_cast<std::size_t>(run.next_visit)];
        if (spec.skip_level1 && level_idx == 1) {
            // single pseudo-class: cross-entropy is constant, no steps to take;
            // adjacent transfers are skipped too so training continues on the
            // previous head when the walk returns
            ++run.next_visit;
            run.next_epoch = 0;
            continue;
        }
        if (run.current_level != level_idx && run.next_epoch == 0) {
            transfer_policy(run.model, level_classes(spec, level_idx),
                            derive_seed(spec.config.seed, spec.phase + "-transfer",
                                        static_cast<std::uint64_t>(run.next_visit)));
            run.optimizer.reset_state_from(run.model.backbone.parameters().size());
            run.current_level = level_idx;
            ++run.transfers;
        }

        const int remaining_in_visit = spec.schedule->epochs_per_level - run.next_epoch;
        int todo = remaining_in_visit;
        if (budget >= 0) todo = static_cast<int>(std::min<std::int64_t>(todo, budget));
        if (todo > 0) {
            const int cycle = run.next_visit / visits_per_cycle;
            train_level(run, spec, spec.ladder->level(level_idx), cycle, todo);
            if (budget >= 0) budget -= todo;
        }
        if (run.next_epoch >= spec.schedule->epochs_per_level) {
            ++run.next_visit;
            run.next_epoch = 0;
        }
        if (budget == 0) return;
    }
}

std::vector<NamedTensor> phase_run_tensors(const PhaseRun& run) {
    std::vector<NamedTensor> out;
    const auto params = run.model.parameters();
    const auto names = run.model.parameter_names();
    for (std::size_t i = 0; i < params.size(); ++i) out.push_back({names[i], *params[i]});

    auto& self = const_cast<PhaseRun&>(run);
    for (std::size_t i = 0; i < self.optimizer.moment1().size(); ++i) {
        if (self.optimizer.moment1()[i].numel() > 0) {
            out.push_back({"opt.m1." + std::to_string(i), self.optimizer.moment1()[i]});
        }
    }
    for (std::size_t i = 0; i < self.optimizer.moment2().size(); ++i) {
        if (self.optimizer.moment2()[i].numel() > 0) {
            out.push_back({"opt.m2." + std::to_string(i), self.optimizer.moment2()[i]});
        }
    }
    Tensor cursor = Tensor::zeros({6});
    cursor.data[0] = static_cast<float>(run.next_visit);
    cursor.data[1] = static_cast<float>(run.next_epoch);
    cursor.data[2] = static_cast<float>(run.global_epoch);
    cursor.data[3] = static_cast<float>(run.current_level);
    cursor.data[4] = static_cast<float>(run.transfers);
    cursor.data[5] = static_cast<float>(self.optimizer.step_count());
    out.push_back({"state.cursor", std::move(cursor)});
    return out;
}

PhaseRun restore_phase(const PhaseSpec& spec, const std::vector<NamedTensor>& tensors) {
    PhaseRun run = start_phase(spec);
    const Tensor& cursor = find_tensor(tensors, "state.cursor");
    if (cursor.numel() != 6) throw ParseError("checkpoint cursor has unexpected size");
    run.next_visit = static_cast<int>(cursor.data[0]);
    run.next_epoch = static_cast<int>(cursor.data[1]);
    run.global_epoch = static_cast<std::int64_t>(cursor.data[2]);
    run.current_level = static_cast<int>(cursor.data[3]);
    run.transfers = static_cast<int>(cursor.data[4]);
    run.optimizer.step_count() = static_cast<std::int64_t>(cursor.data[5]);

    if (run.model.class_count() != level_classes(spec, run.current_level)) {
        reinit_head(run.model, level_classes(spec, run.current_level), 0);  // overwritten below
    }
    const auto params = run.model.parameters();
    const auto names = run.model.parameter_names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& stored = find_tensor(tensors, names[i]);
        if (stored.shape != params[i]->shape) {
            throw ParseError("checkpoint tensor " + names[i] + " has shape " + stored.shape_str());
        }
        params[i]->data = stored.data;
    }
    run.optimizer.moment1().assign(params.size(), Tensor{});
    run.optimizer.moment2().assign(params.size(), Tensor{});
    for (std::size_t i = 0; i < params.size(); ++i) {
        const std::string m1 = "opt.m1." + std::to_string(i);
        const std::string m2 = "opt.m2." + std::to_string(i);
        if (has_tensor(tensors, m1)) run.optimizer.moment1()[i] = find_tensor(tensors, m1);
        if (has_tensor(tensors, m2)) run.optimizer.moment2()[i] = find_tensor(tensors, m2);
    }
    return run;
}

std::vector<int> predict_sub(NetworkModel& model, const std::vector<const ImageSample*>& images) {
    if (images.empty()) throw InputError("predict: no images");
    std::vector<int> out;
    constexpr std::size_t kChunk = 64;
    for (std::size_t start = 0; start < images.size(); start += kChunk) {
        const std::size_t end = std::min(images.size(), start + kChunk);
        std::vector<const ImageSample*> chunk(images.begin() + static_cast<std::ptrdiff_t>(start),
                                              images.begin() + static_cast<std::ptrdiff_t>(end));
        const Tensor logits = model.forward(images_to_tensor(chunk));
        for (const int p : argmax_rows(logits)) out.push_back(p);
    }
    model.backbone.drop_tape();
    model.head.drop_tape();
    return out;
}

std::vector<int> predict_with_relabel(NetworkModel& model, const std::vector<const ImageSample*>& images,
                                      const LevelView& level) {
    if (model.class_count() != level.sub_class_count()) {
        throw StateError("head has " + std::to_string(model.class_count()) +
                         " outputs but the level view has " + std::to_string(level.sub_class_count()) +
                         " sub-classes");
    }
    std::vector<int> out = predict_sub(model, images);
    for (auto& p : out) p = map_to_parent(level, p);
    return out;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw InputError("accuracy: size mismatch or empty input");
    }
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(predictions.size());
}

}  // namespace curvete
