#include "curvete/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace curvete {

DatasetSplit split_dataset(const std::vector<ImageSample>& samples,
                           double train_ratio, double validation_ratio, double test_ratio,
                           std::uint64_t seed) {
    if (samples.empty()) throw InputError("split_dataset: empty dataset");
    const double sum = train_ratio + validation_ratio + test_ratio;
    if (std::fabs(sum - 1.0) > 1e-9) throw InputError("split_dataset: ratios must sum to 1");
    if (train_ratio < 0 || validation_ratio < 0 || test_ratio < 0)
        throw InputError("split_dataset: ratios must be non-negative");

    // strata in label order; unlabelled samples form stratum 0
    std::map<int, std::vector<std::string>> strata;
    int max_label = -1;
    for (const auto& s : samples) {
        const int label = s.label.value_or(0);
        strata[label].push_back(s.id);
        max_label = std::max(max_label, label);
    }
    for (int c = 0; c <= max_label; ++c) {
        if (!strata.count(c)) throw InputError("split_dataset: class " + std::to_string(c) + " has no samples");
    }

    DatasetSplit split;
    split.train_ratio = train_ratio;
    split.validation_ratio = validation_ratio;
    split.test_ratio = test_ratio;
    const double ratios[3] = {train_ratio, validation_ratio, test_ratio};

    for (auto& [label, ids] : strata) {
        Rng rng(derive_seed(seed, "split", static_cast<std::uint64_t>(label)));
        rng.shuffle(ids);

        const auto n = static_cast<std::int64_t>(ids.size());
        std::int64_t counts[3];
        double fracs[3];
        std::int64_t assigned = 0;
        for (int i = 0; i < 3; ++i) {
            const double quota = static_cast<double>(n) * ratios[i];
            counts[i] = static_cast<std::int64_t>(std::floor(quota));
            fracs[i] = quota - static_cast<double>(counts[i]);
            assigned += counts[i];
        }
        // largest remainder; ties favor train, then validation
        int order[3] = {0, 1, 2};
        std::stable_sort(order, order + 3, [&](int a, int b) { return fracs[a] > fracs[b]; });
        for (std::int64_t r = 0; r < n - assigned; ++r) ++counts[order[r % 3]];

        std::size_t pos = 0;
        for (std::int64_t i = 0; i < counts[0]; ++i) split.train.push_back(ids[pos++]);
        for (std::int64_t i = 0; i < counts[1]; ++i) split.validation.push_back(ids[pos++]);
        for (std::int64_t i = 0; i < counts[2]; ++i) split.test.push_back(ids[pos++]);
    }
    return split;
}

void save_split_jsonl(const DatasetSplit& split, const std::string& path,
                      const std::string& manifest_hash) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write split manifest " + path);
    f << json{{"manifest_hash", manifest_hash},
              {"ratios", {split.train_ratio, split.validation_ratio, split.test_ratio}}}
             .dump()
      << "\n";
    const auto emit = [&](const std::vector<std::string>& ids, const char* subset) {
        for (const auto& id : ids) f << json{{"id", id}, {"subset", subset}}.dump() << "\n";
    };
    emit(split.train, "train");
    emit(split.validation, "validation");
    emit(split.test, "test");
}

DatasetSplit load_split_jsonl(const std::string& path, std::string* manifest_hash) {
    std::ifstream f(path);
    if (!f) throw DependencyError("split manifest " + path + " not found");
    DatasetSplit split;
    std::string line;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (header) {
            if (!rec.contains("manifest_hash")) throw ParseError(path + ": missing header record");
            if (manifest_hash) *manifest_hash = rec["manifest_hash"].get<std::string>();
            split.train_ratio = rec["ratios"][0].get<double>();
            split.validation_ratio = rec["ratios"][1].get<double>();
            split.test_ratio = rec["ratios"][2].get<double>();
            header = false;
            continue;
        }
        const auto subset = rec.at("subset").get<std::string>();
        const auto id = rec.at("id").get<std::string>();
        if (subset == "train") {
            split.train.push_back(id);
        } else if (subset == "validation") {
            split.validation.push_back(id);
        } else if (subset == "test") {
            split.test.push_back(id);
        } else {
            throw ParseError(path + ":" + std::to_string(lineno) + ": unknown subset '" + subset + "'");
        }
    }
    return split;
}

namespace {

char synth_family(int class_index) {
    switch (class_index % 3) {
        case 0: return 'b';   // bars
        case 1: return 'g';   // gaussian blobs
        default: return 'r';  // rings
    }
}

}  // namespace

ImageSample synth_template(const SynthSpec& spec, int class_index, int mode) {
    const int s = spec.image_size;
    if (s < 8) throw InputError("synth: image_size must be at least 8");
    if (s < spec.intra_class_modes + 1) {
        throw InputError("synth: image too small for " + std::to_string(spec.intra_class_modes) + " modes");
    }
    constexpr int bg = 30;
    ImageSample img;
    img.id = "template_c" + std::to_string(class_index) + "_m" + std::to_string(mode);
    img.height = s;
    img.width = s;
    img.pixels.assign(static_cast<std::size_t>(s) * s, bg);

    const int variant = class_index / 3;
    const double cx = (s - 1) / 2.0, cy = (s - 1) / 2.0;
    switch (synth_family(class_index)) {
        case 'b': {
            // vertical bar; position varies with mode, thickness with variant
            const int thickness = 2 + variant;
            const int center = (mode + 1) * s / (spec.intra_class_modes + 1);
            for (int y = 0; y < s; ++y) {
                for (int x = std::max(0, center - thickness / 2);
                     x <= std::min(s - 1, center + (thickness - 1) / 2); ++x) {
                    img.at(y, x) = 220;
                }
            }
            break;
        }
        case 'g': {
            // blob centered on a circle around the middle; angle varies with mode
            const double sigma = s / 10.0 + variant;
            const double angle = 2.0 * 3.14159265358979323846 * mode / spec.intra_class_modes;
            const double bx = cx + std::cos(angle) * s / 4.0;
            const double by = cy + std::sin(angle) * s / 4.0;
            for (int y = 0; y < s; ++y) {
                for (int x = 0; x < s; ++x) {
                    const double d2 = (x - bx) * (x - bx) + (y - by) * (y - by);
                    const double v = bg + (225.0 - bg) * std::exp(-d2 / (2.0 * sigma * sigma));
                    img.at(y, x) = static_cast<std::uint8_t>(std::lround(v));
                }
            }
            break;
        }
        default: {
            // ring around the center; radius varies with mode
            const double r_min = s / 6.0, r_max = s / 3.0;
            const double radius =
                spec.intra_class_modes > 1
                    ? r_min + (r_max - r_min) * mode / (spec.intra_class_modes - 1)
                    : (r_min + r_max) / 2.0;
            const double half_width = 1.0 + 0.5 * variant;
            for (int y = 0; y < s; ++y) {
                for (int x = 0; x < s; ++x) {
                    const double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
                    if (std::fabs(d - radius) <= half_width) img.at(y, x) = 210;
                }
            }
            break;
        }
    }
    return img;
}

std::vector<ImageSample> synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
    if (spec.classes < 2) throw InputError("synth: classes must be >= 2");
    if (spec.intra_class_modes < 1) throw InputError("synth: intra_class_modes must be >= 1");
    if (spec.samples_per_class < 1) throw InputError("synth: samples_per_class must be >= 1");
    if (spec.noise_sigma < 0) throw InputError("synth: noise_sigma must be >= 0");

    // all templates must be pairwise distinct or the modes are meaningless
    std::vector<ImageSample> templates;
    for (int c = 0; c < spec.classes; ++c)
        for (int m = 0; m < spec.intra_class_modes; ++m) templates.push_back(synth_template(spec, c, m));
    for (std::size_t i = 0; i < templates.size(); ++i) {
        for (std::size_t j = i + 1; j < templates.size(); ++j) {
            if (templates[i].pixels == templates[j].pixels) {
                throw InputError("synth: image too small to separate the requested class/mode patterns");
            }
        }
    }

    std::vector<ImageSample> out;
    out.reserve(static_cast<std::size_t>(spec.classes) * spec.samples_per_class);
    char idbuf[64];
    for (int c = 0; c < spec.classes; ++c) {
        for (int i = 0; i < spec.samples_per_class; ++i) {
            const int mode = i % spec.intra_class_modes;
            const auto& tpl = templates[static_cast<std::size_t>(c) * spec.intra_class_modes + mode];
            ImageSample s = tpl;
            std::snprintf(idbuf, sizeof(idbuf), "synth_c%d_m%d_%04d", c, mode, i / spec.intra_class_modes);
            s.id = idbuf;
            s.label = c;
            if (spec.noise_sigma > 0) {
                Rng rng(derive_seed(seed, "synth-noise", static_cast<std::uint64_t>(c),
                                    static_cast<std::uint64_t>(mode), static_cast<std::uint64_t>(i)));
                for (auto& p : s.pixels) {
                    const double v = static_cast<double>(p) + spec.noise_sigma * rng.normal();
                    p = static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
                }
            }
            out.push_back(std::move(s));
        }
    }
    return out;
}

LabelledDataset load_labelled_dir(const std::string& root) {
    if (!fs::is_directory(root)) throw InputError("dataset root " + root + " is not a directory");
    LabelledDataset ds;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) ds.class_names.push_back(entry.path().filename().string());
    }
    std::sort(ds.class_names.begin(), ds.class_names.end());
    if (ds.class_names.empty()) throw InputError("dataset root " + root + " has no class directories");

    for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(fs::path(root) / ds.class_names[c])) {
            if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) throw InputError("class directory " + ds.class_names[c] + " has no .pgm files");
        for (const auto& p : files) {
            ImageSample s = load_pgm(p.string());
            s.id = ds.class_names[c] + "/" + p.stem().string();
            s.label = static_cast<int>(c);
            s.validate();
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

std::vector<ImageSample> load_unlabelled_dir(const std::string& dir) {
    if (!fs::is_directory(dir)) throw InputError("dataset dir " + dir + " is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw InputError("dataset dir " + dir + " has no .pgm files");
    std::vector<ImageSample> out;
    for (const auto& p : files) {
        ImageSample s = load_pgm(p.string());
        s.id = p.stem().string();
        s.validate();
        out.push_back(std::move(s));
    }
    return out;
}

Tensor images_to_tensor(const std::vector<const ImageSample*>& images) {
    if (images.empty()) throw InputError("images_to_tensor: empty batch");
    const int h = images[0]->height, w = images[0]->width;
    Tensor t = Tensor::zeros({static_cast<int>(images.size()), 1, h, w});
    std::size_t pos = 0;
    for (const auto* img : images) {
        if (img->height != h || img->width != w) {
            throw InputError("images_to_tensor: image " + img->id + " has mismatched size");
        }
        for (const auto p : img->pixels) t.data[pos++] = static_cast<float>(p) / 255.0f;
    }
    return t;
}

}  // namespace curvete
