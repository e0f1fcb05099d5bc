#include "curvete/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace curvete {

namespace {

constexpr const char* kArms[] = {"curvete", "traditional_transfer", "wo_cl_w_sd", "clog_cd"};

std::string short_hash(const std::string& hash) { return hash.substr(0, 12); }

// idempotence probe for hash-bearing artifacts
bool artifact_current(const std::string& path, const std::string& hash) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return false;
    std::string head(4096, '\0');
    f.read(head.data(), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(f.gcount()));
    if (head.rfind("CRVT", 0) == 0) {
        std::string stored;
        try {
            load_checkpoint(path, &stored);
        } catch (const Error&) {
            return false;
        }
        return stored == hash;
    }
    return head.find(hash) != std::string::npos;  // json/jsonl/markdown artifacts
}

std::vector<ImageSample> preprocess(std::vector<ImageSample> samples, int target_size) {
    for (auto& s : samples) {
        s = histogram_equalize(s);
        if (s.height != target_size || s.width != target_size) {
            s = resize_nearest(s, target_size, target_size);
        }
    }
    return samples;
}

}  // namespace

ExperimentContext prepare_experiment(const ExperimentManifest& manifest) {
    ExperimentContext ctx;
    ctx.manifest = manifest;

    std::vector<ImageSample> samples;
    if (manifest.dataset.kind == "synth") {
        samples = synth_dataset(manifest.dataset.synth, derive_seed(manifest.seed, "dataset"));
        ctx.classes = manifest.dataset.synth.classes;
    } else {
        LabelledDataset ds = load_labelled_dir(manifest.dataset.path);
        samples = std::move(ds.samples);
        ctx.classes = static_cast<int>(ds.class_names.size());
    }
    samples = preprocess(std::move(samples), manifest.dataset.effective_input_size());

    ctx.split = split_dataset(samples, manifest.dataset.train_ratio, manifest.dataset.validation_ratio,
                              manifest.dataset.test_ratio, derive_seed(manifest.seed, "split"));

    std::map<std::string, const ImageSample*> by_id;
    for (const auto& s : samples) by_id.emplace(s.id, &s);
    const auto lookup = [&](const std::string& id) -> const ImageSample& {
        const auto it = by_id.find(id);
        if (it == by_id.end()) throw Error("internal: split id " + id + " not in dataset");
        return *it->second;
    };

    // pool order: train split, augmented train copies, then validation split
    for (const auto& id : ctx.split.train) {
        ctx.pool_train_indices.push_back(static_cast<int>(ctx.pool.size()));
        ctx.pool.push_back(lookup(id));
    }
    if (manifest.dataset.augment_copies > 0) {
        const double deg = manifest.dataset.augment_rotate_degrees;
        const int sh = manifest.dataset.augment_shift;
        for (const auto& id : ctx.split.train) {
            const ImageSample& base = lookup(id);
            for (int k = 0; k < manifest.dataset.augment_copies; ++k) {
                AugmentationOp op;
                switch (k % 4) {
                    case 0: op = AugmentationOp::rotate(k % 8 < 4 ? deg : -deg); break;
                    case 1: op = AugmentationOp::reflect(AugmentationOp::Axis::horizontal); break;
                    case 2: op = AugmentationOp::shift((k % 8 < 4) ? sh : -sh, 0); break;
                    default: op = AugmentationOp::sharpen(); break;
                }
                ImageSample aug = augment(base, op, derive_seed(manifest.seed, "augment", k));
                aug.id = base.id + "#aug" + std::to_string(k);
                ctx.pool_train_indices.push_back(static_cast<int>(ctx.pool.size()));
                ctx.pool.push_back(std::move(aug));
            }
        }
    }
    for (const auto& id : ctx.split.validation) {
        ctx.pool_val_indices.push_back(static_cast<int>(ctx.pool.size()));
        ctx.pool.push_back(lookup(id));
    }

    for (const auto& id : ctx.split.test) {
        const ImageSample& s = lookup(id);
        ctx.test_samples.push_back(s);
        ctx.test_labels.push_back(s.label.value_or(0));
    }
    return ctx;
}

std::string ArtifactPaths::split_file() const { return dir + "/split.jsonl"; }
std::string ArtifactPaths::cae_file() const { return dir + "/cae.crvt"; }
std::string ArtifactPaths::cae_history_file() const { return dir + "/cae_history.jsonl"; }
std::string ArtifactPaths::features_file() const {
    return dir + "/features_pool_" + short_hash(hash) + ".crvf";
}
std::string ArtifactPaths::ladder_file(const std::string& which) const {
    return dir + "/ladder_" + which + ".jsonl";
}
std::string ArtifactPaths::centroids_file(const std::string& which) const {
    return dir + "/centroids_" + which + "_" + short_hash(hash) + ".crvf";
}
std::string ArtifactPaths::schedule_file() const { return dir + "/schedule.json"; }
std::string ArtifactPaths::backbone_file() const { return dir + "/backbone.crvt"; }
std::string ArtifactPaths::final_model_file(const std::string& arm) const {
    return dir + "/final_" + arm + ".crvt";
}
std::string ArtifactPaths::metrics_file(const std::string& arm, std::uint64_t seed) const {
    return dir + "/metrics_" + arm + "_s" + std::to_string(seed) + ".jsonl";
}
std::string ArtifactPaths::eval_file(const std::string& arm, std::uint64_t seed) const {
    return dir + "/eval_" + arm + "_s" + std::to_string(seed) + ".json";
}
std::string ArtifactPaths::report_file() const { return dir + "/report.md"; }

ArtifactPaths artifact_paths(const ExperimentManifest& manifest) {
    ArtifactPaths p;
    p.dir = manifest.output_dir;
    p.hash = manifest.hash_hex;
    return p;
}

namespace {

std::string eval_path(const ArtifactPaths& paths, const ExperimentManifest& m, const std::string& arm) {
    return paths.eval_file(arm, m.seed);
}

std::string metrics_path(const ArtifactPaths& paths, const ExperimentManifest& m, const std::string& arm) {
    return paths.metrics_file(arm, m.seed);
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
}

void write_split_artifact(const ExperimentContext& ctx, const ArtifactPaths& paths) {
    if (!artifact_current(paths.split_file(), paths.hash)) {
        save_split_jsonl(ctx.split, paths.split_file(), paths.hash);
    }
}

std::vector<ImageSample> pool_images_for_cae(const ExperimentContext& ctx) { return ctx.pool; }

CaeModel load_cae_artifact(const ExperimentManifest& manifest, const ArtifactPaths& paths) {
    if (!fs::exists(paths.cae_file())) {
        throw DependencyError("CAE checkpoint " + paths.cae_file() + " not found; run pretrain-cae first");
    }
    std::string stored;
    const auto tensors = load_checkpoint(paths.cae_file(), &stored);
    if (stored != paths.hash) {
        throw DependencyError("CAE checkpoint " + paths.cae_file() + " belongs to manifest " + stored +
                              "; run pretrain-cae first");
    }
    const int size = manifest.dataset.effective_input_size();
    CaeModel model = make_cae(manifest.cae, size, size, derive_seed(manifest.seed, "cae"));
    const auto params = model.stack.parameters();
    const auto names = model.stack.parameter_names("cae");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& stored_t = find_tensor(tensors, names[i]);
        if (stored_t.shape != params[i]->shape) {
            throw ParseError("CAE tensor " + names[i] + " shape mismatch");
        }
        params[i]->data = stored_t.data;
    }
    return model;
}

FeatureMatrix pool_features(const ExperimentManifest& manifest, const ExperimentContext& ctx,
                            const ArtifactPaths& paths) {
    if (fs::exists(paths.features_file())) return load_features(paths.features_file());
    CaeModel cae = load_cae_artifact(manifest, paths);
    FeatureMatrix features = encode(cae, ctx.pool);
    save_features(features, paths.features_file());
    return features;
}

GranularityLadder load_ladder_artifact(const ArtifactPaths& paths, const std::string& which) {
    const std::string path = paths.ladder_file(which);
    if (!fs::exists(path)) {
        throw DependencyError("ladder " + path + " not found; run decompose first");
    }
    std::string stored;
    GranularityLadder ladder = load_ladder_jsonl(path, &stored);
    if (stored != paths.hash) {
        throw DependencyError("ladder " + path + " belongs to manifest " + stored + "; run decompose first");
    }
    return ladder;
}

// Streams per-epoch records to the metrics JSONL as training progresses.
class MetricsWriter {
  public:
    MetricsWriter(const std::string& path, const std::string& hash, const std::string& arm,
                  std::uint64_t seed)
        : out_(path, std::ios::trunc), hash_(hash), arm_(arm), seed_(seed) {
        if (!out_) throw InputError("cannot write metrics file " + path);
        out_ << json{{"manifest_hash", hash_}, {"arm", arm_}, {"seed", seed_}}.dump() << "\n";
        out_.flush();
    }

    void write(const EpochRecord& rec) {
        out_ << json{{"manifest_hash", hash_}, {"arm", arm_},   {"seed", seed_},
                     {"phase", rec.phase},     {"cycle", rec.cycle}, {"level", rec.level},
                     {"epoch_in_level", rec.epoch_in_level},    {"global_epoch", rec.global_epoch},
                     {"train_loss", rec.train_loss},            {"train_accuracy", rec.train_accuracy},
                     {"val_accuracy", rec.val_accuracy},        {"learning_rate", rec.learning_rate}}
                    .dump()
             << "\n";
        out_.flush();  // a crash loses at most one epoch
    }

  private:
    std::ofstream out_;
    std::string hash_;
    std::string arm_;
    std::uint64_t seed_;
};

PhaseSpec make_phase_spec(const ExperimentManifest& manifest, const ExperimentContext& ctx,
                          const std::string& phase, const GranularityLadder& ladder,
                          const CurriculumSchedule& schedule, bool skip_level1) {
    PhaseSpec spec;
    spec.phase = phase;
    spec.ladder = &ladder;
    spec.schedule = &schedule;
    spec.pool = &ctx.pool;
    spec.train_indices = ctx.pool_train_indices;
    spec.val_indices = ctx.pool_val_indices;
    spec.config.optimizer = manifest.train_optimizer;
    spec.config.batch_size = manifest.train_batch_size;
    spec.config.seed = manifest.seed;
    spec.backbone_specs = parse_layer_specs(manifest.backbone_spec);
    const int size = manifest.dataset.effective_input_size();
    spec.input = {1, size, size};
    spec.skip_level1 = skip_level1;
    return spec;
}

// Level-1-only ladder over the pool's original labels; no clustering.
GranularityLadder original_label_ladder(const ExperimentContext& ctx) {
    GranularityLadder ladder;
    ladder.k_max = 1;
    ladder.parent_classes = ctx.classes;
    LevelView l1;
    l1.j = 1;
    l1.parent_classes = ctx.classes;
    for (const auto& s : ctx.pool) {
        ladder.ids.push_back(s.id);
        l1.sub_labels.push_back(s.label.value_or(0));
    }
    l1.parent_map.resize(static_cast<std::size_t>(ctx.classes));
    for (int c = 0; c < ctx.classes; ++c) l1.parent_map[static_cast<std::size_t>(c)] = c;
    ladder.levels.push_back(std::move(l1));
    return ladder;
}

void save_phase_checkpoint(const std::string& path, const std::string& hash, const PhaseRun& run) {
    save_checkpoint(path, hash, phase_run_tensors(run));
}

// Rebuilds a backbone stack from a phase checkpoint for weight transfer.
LayerStack load_backbone_stack(const ExperimentManifest& manifest, const std::string& path,
                               const std::string& expected_hash, const std::string& producer) {
    if (!fs::exists(path)) {
        throw DependencyError("checkpoint " + path + " not found; run " + producer + " first");
    }
    std::string stored;
    const auto tensors = load_checkpoint(path, &stored);
    if (stored != expected_hash) {
        throw DependencyError("checkpoint " + path + " belongs to manifest " + stored + "; run " + producer +
                              " first");
    }
    const int size = manifest.dataset.effective_input_size();
    LayerStack stack(parse_layer_specs(manifest.backbone_spec), {1, size, size}, 0);
    const auto params = stack.parameters();
    const auto names = stack.parameter_names("backbone");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& stored_t = find_tensor(tensors, names[i]);
        if (stored_t.shape != params[i]->shape) throw ParseError("backbone tensor shape mismatch in " + path);
        params[i]->data = stored_t.data;
    }
    return stack;
}

MetricsReport evaluate_model(const ExperimentContext& ctx, NetworkModel& model, const LevelView& view) {
    std::vector<const ImageSample*> test;
    for (const auto& s : ctx.test_samples) test.push_back(&s);
    const auto preds = predict_with_relabel(model, test, view);
    return compute_metrics(preds, ctx.test_labels, ctx.classes);
}

void write_eval(const std::string& path, const MetricsReport& report, const ExperimentManifest& m,
                const std::string& arm) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write " + path);
    f << metrics_to_json(report, m.hash_hex, arm, m.seed) << "\n";
}

// Downstream walk from an optional pretext backbone; shared by finetune and
// the ablation arms.
MetricsReport run_downstream_arm(const ExperimentManifest& manifest, const ExperimentContext& ctx,
                                 const ArtifactPaths& paths, const std::string& arm,
                                 const GranularityLadder& ladder, const CurriculumSchedule& schedule,
                                 const LayerStack* init_backbone) {
    const PhaseSpec spec = make_phase_spec(manifest, ctx, "downstream", ladder, schedule, false);
    PhaseRun run = start_phase(spec, init_backbone);
    MetricsWriter writer(metrics_path(paths, manifest, arm), paths.hash, arm, manifest.seed);

    // walk visit by visit so records stream out as they are produced
    while (!run.finished(spec)) {
        const std::size_t before = run.history.size();
        advance_phase(run, spec, schedule.epochs_per_level);
        for (std::size_t i = before; i < run.history.size(); ++i) writer.write(run.history[i]);
    }

    save_phase_checkpoint(paths.final_model_file(arm), paths.hash, run);
    const LevelView& view = ladder.level(ladder.k_max);
    MetricsReport report = evaluate_model(ctx, run.model, view);
    write_eval(eval_path(paths, manifest, arm), report, manifest, arm);
    return report;
}

}  // namespace

void cmd_pretrain_cae(const ExperimentManifest& manifest) {
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    const ExperimentContext ctx = prepare_experiment(manifest);
    write_split_artifact(ctx, paths);
    if (artifact_current(paths.cae_file(), paths.hash)) return;

    const CaeModel model = train_cae(pool_images_for_cae(ctx), manifest.cae,
                                     derive_seed(manifest.seed, "cae"));

    std::vector<NamedTensor> tensors;
    const auto params = model.stack.parameters();
    const auto names = model.stack.parameter_names("cae");
    for (std::size_t i = 0; i < params.size(); ++i) tensors.push_back({names[i], *params[i]});
    save_checkpoint(paths.cae_file(), paths.hash, tensors);

    std::ofstream hist(paths.cae_history_file(), std::ios::trunc);
    hist << json{{"manifest_hash", paths.hash}, {"epochs", model.spec.epochs}}.dump() << "\n";
    for (std::size_t e = 0; e < model.loss_history.size(); ++e) {
        hist << json{{"epoch", e}, {"reconstruction_loss", model.loss_history[e]}}.dump() << "\n";
    }
}

void cmd_decompose(const ExperimentManifest& manifest, const std::string& which) {
    if (which != "pretext" && which != "downstream") {
        throw InputError("decompose: 'which' must be pretext or downstream, got '" + which + "'");
    }
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    if (artifact_current(paths.ladder_file(which), paths.hash)) return;

    const ExperimentContext ctx = prepare_experiment(manifest);
    write_split_artifact(ctx, paths);
    const FeatureMatrix features = pool_features(manifest, ctx, paths);

    GranularityLadder ladder;
    if (which == "pretext") {
        ladder = sample_decompose(features, manifest.pretext_k, derive_seed(manifest.seed, "pretext-ladder"),
                                  manifest.kmeans_max_iter, manifest.kmeans_tol);
    } else {
        std::vector<int> labels;
        for (const auto& s : ctx.pool) labels.push_back(s.label.value_or(0));
        ladder = class_decompose(features, labels, manifest.downstream_k,
                                 derive_seed(manifest.seed, "downstream-ladder"), manifest.kmeans_max_iter,
                                 manifest.kmeans_tol);
    }
    save_ladder_jsonl(ladder, paths.ladder_file(which), paths.hash);
    save_features(ladder_centroids_matrix(ladder), paths.centroids_file(which));
}

void cmd_pretext(const ExperimentManifest& manifest) {
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    if (artifact_current(paths.backbone_file(), paths.hash)) return;

    const ExperimentContext ctx = prepare_experiment(manifest);
    const GranularityLadder ladder = load_ladder_artifact(paths, "pretext");
    const CurriculumSchedule schedule =
        build_schedule(manifest.pretext_k, manifest.schedule.cycles, manifest.schedule.epochs_per_level);
    save_schedule_json(schedule, paths.schedule_file());

    const PhaseSpec spec = make_phase_spec(manifest, ctx, "pretext", ladder, schedule, true);
    PhaseRun run = start_phase(spec);
    MetricsWriter writer(metrics_path(paths, manifest, "curvete_pretext"), paths.hash, "curvete_pretext",
                         manifest.seed);
    while (!run.finished(spec)) {
        const std::size_t before = run.history.size();
        advance_phase(run, spec, schedule.epochs_per_level);
        for (std::size_t i = before; i < run.history.size(); ++i) writer.write(run.history[i]);
    }
    save_phase_checkpoint(paths.backbone_file(), paths.hash, run);
}

void cmd_finetune(const ExperimentManifest& manifest) {
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    if (artifact_current(paths.final_model_file("curvete"), paths.hash)) return;

    const ExperimentContext ctx = prepare_experiment(manifest);
    const GranularityLadder ladder = load_ladder_artifact(paths, "downstream");
    const LayerStack backbone =
        load_backbone_stack(manifest, paths.backbone_file(), paths.hash, "pretext");
    const CurriculumSchedule schedule =
        build_schedule(manifest.downstream_k, manifest.schedule.cycles, manifest.schedule.epochs_per_level);
    run_downstream_arm(manifest, ctx, paths, "curvete", ladder, schedule, &backbone);
}

MetricsReport cmd_evaluate(const ExperimentManifest& manifest, const std::string& checkpoint_path) {
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    std::string path = checkpoint_path;
    std::string arm = "curvete";
    if (path.empty()) {
        path = paths.final_model_file("curvete");
    } else {
        const std::string stem = fs::path(path).stem().string();
        if (stem.rfind("final_", 0) == 0) arm = stem.substr(6);
    }
    if (!fs::exists(path)) {
        throw DependencyError("checkpoint " + path + " not found; run finetune (or ablate) first");
    }
    if (artifact_current(eval_path(paths, manifest, arm), paths.hash)) {
        std::ifstream f(eval_path(paths, manifest, arm));
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return metrics_from_json(text);
    }
    std::string stored;
    const auto tensors = load_checkpoint(path, &stored);
    if (stored != paths.hash) {
        throw DependencyError("checkpoint " + path + " belongs to manifest " + stored);
    }

    const ExperimentContext ctx = prepare_experiment(manifest);

    // head width tells us which granularity view the model targets
    const Tensor& head_w = find_tensor(tensors, "head.0.dense.w");
    const int head_classes = head_w.shape[0];

    const int size = manifest.dataset.effective_input_size();
    NetworkModel model(parse_layer_specs(manifest.backbone_spec), {1, size, size}, head_classes,
                       derive_seed(manifest.seed, "evaluate"));
    const auto params = model.parameters();
    const auto names = model.parameter_names();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Tensor& stored_t = find_tensor(tensors, names[i]);
        if (stored_t.shape != params[i]->shape) throw ParseError("tensor shape mismatch in " + path);
        params[i]->data = stored_t.data;
    }

    LevelView view;
    if (head_classes == ctx.classes) {
        const GranularityLadder plain = original_label_ladder(ctx);
        view = plain.level(1);
    } else {
        const GranularityLadder ladder = load_ladder_artifact(paths, "downstream");
        if (head_classes % ctx.classes != 0 || head_classes / ctx.classes > ladder.k_max) {
            throw ParseError("checkpoint head width " + std::to_string(head_classes) +
                             " does not match any granularity level");
        }
        view = ladder.level(head_classes / ctx.classes);
    }

    MetricsReport report = evaluate_model(ctx, model, view);
    write_eval(eval_path(paths, manifest, arm), report, manifest, arm);
    return report;
}

bool is_ablation_mode(const std::string& mode) {
    return mode == "traditional_transfer" || mode == "wo_cl_w_sd" || mode == "clog_cd";
}

MetricsReport cmd_ablate(const ExperimentManifest& manifest, const std::string& mode) {
    if (!is_ablation_mode(mode)) {
        throw InputError("ablate: unknown mode '" + mode +
                         "' (expected traditional_transfer, wo_cl_w_sd or clog_cd)");
    }
    const ArtifactPaths paths = artifact_paths(manifest);
    ensure_dir(paths.dir);
    const std::string eval_file = eval_path(paths, manifest, mode);
    if (artifact_current(paths.final_model_file(mode), paths.hash) && fs::exists(eval_file)) {
        std::ifstream f(eval_file);
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        return metrics_from_json(text);
    }

    const ExperimentContext ctx = prepare_experiment(manifest);
    write_split_artifact(ctx, paths);

    if (mode == "traditional_transfer") {
        // no decomposition, no curriculum, no pretext: level-1 walk with the
        // same total downstream epoch budget as the curriculum arms
        const GranularityLadder ladder = original_label_ladder(ctx);
        const CurriculumSchedule schedule = build_schedule(
            1, manifest.schedule.cycles * (2 * manifest.downstream_k - 1), manifest.schedule.epochs_per_level);
        return run_downstream_arm(manifest, ctx, paths, mode, ladder, schedule, nullptr);
    }

    if (mode == "clog_cd") {
        // anti-curriculum + class decomposition, random-init backbone
        const GranularityLadder ladder = load_ladder_artifact(paths, "downstream");
        const CurriculumSchedule schedule = build_schedule(
            manifest.downstream_k, manifest.schedule.cycles, manifest.schedule.epochs_per_level);
        return run_downstream_arm(manifest, ctx, paths, mode, ladder, schedule, nullptr);
    }

    // wo_cl_w_sd: pretext trained only at the top granularity, no walk
    const GranularityLadder pretext_ladder = load_ladder_artifact(paths, "pretext");
    CurriculumSchedule fixed;
    fixed.k_max = manifest.pretext_k;
    fixed.cycles = manifest.schedule.cycles;
    fixed.epochs_per_level = manifest.schedule.epochs_per_level;
    fixed.visits.assign(static_cast<std::size_t>(manifest.schedule.cycles), manifest.pretext_k);

    const PhaseSpec pre_spec = make_phase_spec(manifest, ctx, "pretext", pretext_ladder, fixed, true);
    PhaseRun pre_run = start_phase(pre_spec);
    MetricsWriter pre_writer(metrics_path(paths, manifest, "wo_cl_w_sd_pretext"), paths.hash,
                             "wo_cl_w_sd_pretext", manifest.seed);
    while (!pre_run.finished(pre_spec)) {
        const std::size_t before = pre_run.history.size();
        advance_phase(pre_run, pre_spec, fixed.epochs_per_level);
        for (std::size_t i = before; i < pre_run.history.size(); ++i) pre_writer.write(pre_run.history[i]);
    }

    const GranularityLadder ladder = load_ladder_artifact(paths, "downstream");
    const CurriculumSchedule schedule = build_schedule(
        manifest.downstream_k, manifest.schedule.cycles, manifest.schedule.epochs_per_level);
    return run_downstream_arm(manifest, ctx, paths, mode, ladder, schedule, &pre_run.model.backbone);
}

std::string cmd_report(const std::string& output_dir) {
    if (!fs::is_directory(output_dir)) throw DependencyError("output directory " + output_dir + " not found");

    struct EvalEntry {
        std::string arm;
        std::uint64_t seed;
        MetricsReport report;
    };
    std::vector<EvalEntry> entries;
    std::set<std::string> hashes;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(output_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("eval_", 0) == 0 && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        throw DependencyError("no eval_*.json artifacts in " + output_dir + "; run evaluate/ablate first");
    }
    for (const auto& p : files) {
        std::ifstream f(p);
        std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        EvalEntry e;
        std::string hash;
        e.report = metrics_from_json(text, &hash, &e.arm, &e.seed);
        hashes.insert(hash);
        entries.push_back(std::move(e));
    }
    if (hashes.size() > 1) {
        std::string msg = "report: mixed manifest hashes in " + output_dir + ":";
        for (const auto& h : hashes) msg += " " + short_hash(h);
        throw ValidationError(msg);
    }

    std::ostringstream md;
    md << "# Experiment report\n\nmanifest hash: `" << *hashes.begin() << "`\n\n";

    std::vector<std::pair<std::string, MetricsReport>> rows;
    std::map<std::string, std::vector<std::pair<std::uint64_t, double>>> acc_by_arm;
    for (const auto& e : entries) {
        rows.push_back({e.arm + " (seed " + std::to_string(e.seed) + ")", e.report});
        acc_by_arm[e.arm].push_back({e.seed, e.report.accuracy});
    }
    md << metrics_markdown_table(rows) << "\n";

    // Wilcoxon pairings: curvete against every other arm, paired by seed
    if (acc_by_arm.count("curvete")) {
        std::map<std::uint64_t, double> curvete_acc;
        for (const auto& [seed, acc] : acc_by_arm["curvete"]) curvete_acc[seed] = acc;
        for (const char* arm : kArms) {
            if (std::string(arm) == "curvete" || !acc_by_arm.count(arm)) continue;
            std::vector<double> a, b;
            for (const auto& [seed, acc] : acc_by_arm[arm]) {
                const auto it = curvete_acc.find(seed);
                if (it != curvete_acc.end()) {
                    a.push_back(it->second);
                    b.push_back(acc);
                }
            }
            md << "- Wilcoxon signed-rank, curvete vs " << arm << " (" << a.size() << " paired seeds): ";
            if (a.size() < 5) {
                md << "insufficient paired runs (need >= 5)\n";
                continue;
            }
            try {
                const WilcoxonResult w = wilcoxon_signed_rank(a, b);
                char buf[160];
                std::snprintf(buf, sizeof(buf), "W+ = %.1f, p = %.4g (%s), %s at 0.05", w.statistic,
                              w.p_value, w.exact ? "exact" : "normal approx.",
                              w.significant ? "significant" : "not significant");
                md << buf << "\n";
            } catch (const InputError& e) {
                md << "not computable (" << e.what() << ")\n";
            }
        }
    }

    const std::string text = md.str();
    std::ofstream out(output_dir + "/report.md", std::ios::trunc);
    if (!out) throw InputError("cannot write report.md");
    out << text;
    return text;
}

}  // namespace curvete
