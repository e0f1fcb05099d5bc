#include "curvete/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "curvete/checkpoint.hpp"
#include "curvete/errors.hpp"

namespace curvete {

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    return bytes_to_hex(md, len);
}

namespace {

struct KeyValue {
    std::string value;
    bool used = false;
};

using Section = std::map<std::string, KeyValue>;

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

class ManifestReader {
  public:
    explicit ManifestReader(const std::string& text) {
        std::istringstream is(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#' || t[0] == ';') continue;
            if (t.front() == '[') {
                if (t.back() != ']') {
                    throw ValidationError("manifest line " + std::to_string(lineno) + ": unterminated section");
                }
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty()) {
                    throw ValidationError("manifest line " + std::to_string(lineno) + ": empty section name");
                }
                sections_[section];
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw ValidationError("manifest line " + std::to_string(lineno) + ": expected key = value");
            }
            if (section.empty()) {
                throw ValidationError("manifest line " + std::to_string(lineno) + ": key outside any section");
            }
            const std::string key = trim(t.substr(0, eq));
            if (key.empty()) throw ValidationError("manifest line " + std::to_string(lineno) + ": empty key");
            if (sections_[section].count(key)) {
                throw ValidationError("manifest: duplicate key " + section + "." + key);
            }
            sections_[section][key] = {trim(t.substr(eq + 1)), false};
        }
    }

    bool has(const std::string& section, const std::string& key) {
        const auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    std::string get_string(const std::string& section, const std::string& key) {
        const auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key)) {
            throw ValidationError("manifest: missing field " + section + "." + key);
        }
        auto& kv = s->second[key];
        kv.used = true;
        return kv.value;
    }

    std::string get_string_or(const std::string& section, const std::string& key, const std::string& dflt) {
        return has(section, key) ? get_string(section, key) : dflt;
    }

    std::int64_t get_int(const std::string& section, const std::string& key) {
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const std::int64_t out = std::stoll(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ValidationError("manifest: field " + section + "." + key + " is not an integer: '" + v + "'");
        }
    }

    std::int64_t get_int_or(const std::string& section, const std::string& key, std::int64_t dflt) {
        return has(section, key) ? get_int(section, key) : dflt;
    }

    double get_double(const std::string& section, const std::string& key) {
        const std::string v = get_string(section, key);
        try {
            std::size_t pos = 0;
            const double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return out;
        } catch (const std::exception&) {
            throw ValidationError("manifest: field " + section + "." + key + " is not a number: '" + v + "'");
        }
    }

    double get_double_or(const std::string& section, const std::string& key, double dflt) {
        return has(section, key) ? get_double(section, key) : dflt;
    }

    std::vector<double> get_doubles(const std::string& section, const std::string& key) {
        std::istringstream is(get_string(section, key));
        std::vector<double> out;
        std::string tok;
        while (is >> tok) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ValidationError("manifest: field " + section + "." + key + " has a bad number: '" + tok +
                                      "'");
            }
        }
        return out;
    }

    // every provided key must have been consumed
    void check_all_used(const std::vector<std::string>& known_sections) {
        for (const auto& [name, sec] : sections_) {
            if (std::find(known_sections.begin(), known_sections.end(), name) == known_sections.end()) {
                throw ValidationError("manifest: unknown section [" + name + "]");
            }
            for (const auto& [key, kv] : sec) {
                if (!kv.used) throw ValidationError("manifest: unknown field " + name + "." + key);
            }
        }
    }

  private:
    std::map<std::string, Section> sections_;
};

}  // namespace

void ExperimentManifest::validate_and_hash() {
    if (dataset.kind != "synth" && dataset.kind != "labelled_dir") {
        throw ValidationError("manifest: dataset.kind must be 'synth' or 'labelled_dir', got '" +
                              dataset.kind + "'");
    }
    if (dataset.kind == "synth") {
        if (dataset.synth.classes < 2) throw ValidationError("manifest: dataset.classes must be >= 2");
        if (dataset.synth.samples_per_class < 1)
            throw ValidationError("manifest: dataset.samples_per_class must be >= 1");
        if (dataset.synth.image_size < 8) throw ValidationError("manifest: dataset.image_size must be >= 8");
        if (dataset.synth.intra_class_modes < 1)
            throw ValidationError("manifest: dataset.intra_class_modes must be >= 1");
        if (dataset.synth.noise_sigma < 0) throw ValidationError("manifest: dataset.noise_sigma must be >= 0");
    } else {
        if (dataset.path.empty()) throw ValidationError("manifest: dataset.path is required for labelled_dir");
        if (dataset.input_size < 8) throw ValidationError("manifest: dataset.input_size must be >= 8");
    }
    if (dataset.effective_input_size() % 4 != 0) {
        throw ValidationError("manifest: input size must be divisible by 4 (two 2x poolings)");
    }
    const double rsum = dataset.train_ratio + dataset.validation_ratio + dataset.test_ratio;
    if (std::fabs(rsum - 1.0) > 1e-9) throw ValidationError("manifest: dataset.split_ratios must sum to 1");
    if (dataset.augment_copies < 0) throw ValidationError("manifest: dataset.augment_copies must be >= 0");

    try {
        cae.validate();
        train_optimizer.validate();
    } catch (const ConfigError& e) {
        throw ValidationError(std::string("manifest: ") + e.what());
    }
    if (pretext_k < 2) throw ValidationError("manifest: decomposition.pretext_k must be >= 2");
    if (downstream_k < 2) throw ValidationError("manifest: decomposition.downstream_k must be >= 2");
    if (kmeans_max_iter < 1) throw ValidationError("manifest: decomposition.kmeans_max_iter must be >= 1");
    if (kmeans_tol < 0) throw ValidationError("manifest: decomposition.kmeans_tol must be >= 0");
    if (schedule.cycles < 1) throw ValidationError("manifest: schedule.cycles must be >= 1");
    if (schedule.epochs_per_level < 1) throw ValidationError("manifest: schedule.epochs_per_level must be >= 1");
    if (train_batch_size < 1) throw ValidationError("manifest: train.batch_size must be >= 1");
    if (output_dir.empty()) throw ValidationError("manifest: run.output_dir is required");
    try {
        parse_layer_specs(backbone_spec);
    } catch (const ParseError& e) {
        throw ValidationError(std::string("manifest: backbone.spec: ") + e.what());
    }

    hash_hex = sha256_hex(canonical_text());
}

std::string ExperimentManifest::canonical_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "[dataset]\nkind = " << dataset.kind << "\n";
    if (dataset.kind == "synth") {
        os << "classes = " << dataset.synth.classes << "\n"
           << "samples_per_class = " << dataset.synth.samples_per_class << "\n"
           << "image_size = " << dataset.synth.image_size << "\n"
           << "noise_sigma = " << dataset.synth.noise_sigma << "\n"
           << "intra_class_modes = " << dataset.synth.intra_class_modes << "\n";
    } else {
        os << "path = " << dataset.path << "\ninput_size = " << dataset.input_size << "\n";
    }
    os << "split_ratios = " << dataset.train_ratio << " " << dataset.validation_ratio << " "
       << dataset.test_ratio << "\n";
    os << "augment_copies = " << dataset.augment_copies << "\n";
    if (dataset.augment_copies > 0) {
        os << "augment_rotate_degrees = " << dataset.augment_rotate_degrees << "\n"
           << "augment_shift = " << dataset.augment_shift << "\n";
    }
    os << "[cae]\nfilters = " << cae.filters1 << " " << cae.filters2 << "\nepochs = " << cae.epochs
       << "\nlearning_rate = " << cae.learning_rate << "\nbatch_size = " << cae.batch_size << "\n";
    os << "[decomposition]\npretext_k = " << pretext_k << "\ndownstream_k = " << downstream_k
       << "\nkmeans_max_iter = " << kmeans_max_iter << "\nkmeans_tol = " << kmeans_tol << "\n";
    os << "[schedule]\ncycles = " << schedule.cycles << "\nepochs_per_level = " << schedule.epochs_per_level
       << "\n";
    os << "[train]\noptimizer = " << (train_optimizer.kind == OptimizerKind::msgd ? "msgd" : "adam")
       << "\nlearning_rate = " << train_optimizer.learning_rate
       << "\ndecay_factor = " << train_optimizer.decay_factor
       << "\ndecay_period_epochs = " << train_optimizer.decay_period_epochs
       << "\nmomentum = " << train_optimizer.momentum << "\nbatch_size = " << train_batch_size << "\n";
    os << "[backbone]\nspec = " << backbone_spec << "\n";
    os << "[run]\nseed = " << seed << "\n";
    // output_dir intentionally excluded: moving a run must not change its hash
    return os.str();
}

ExperimentManifest parse_manifest_text(const std::string& text) {
    ManifestReader r(text);
    ExperimentManifest m;

    m.dataset.kind = r.get_string("dataset", "kind");
    if (m.dataset.kind == "synth") {
        m.dataset.synth.classes = static_cast<int>(r.get_int("dataset", "classes"));
        m.dataset.synth.samples_per_class = static_cast<int>(r.get_int("dataset", "samples_per_class"));
        m.dataset.synth.image_size = static_cast<int>(r.get_int("dataset", "image_size"));
        m.dataset.synth.noise_sigma = r.get_double("dataset", "noise_sigma");
        m.dataset.synth.intra_class_modes = static_cast<int>(r.get_int("dataset", "intra_class_modes"));
    } else if (m.dataset.kind == "labelled_dir") {
        m.dataset.path = r.get_string("dataset", "path");
        m.dataset.input_size = static_cast<int>(r.get_int("dataset", "input_size"));
    }
    if (r.has("dataset", "split_ratios")) {
        const auto ratios = r.get_doubles("dataset", "split_ratios");
        if (ratios.size() != 3) throw ValidationError("manifest: dataset.split_ratios needs 3 values");
        m.dataset.train_ratio = ratios[0];
        m.dataset.validation_ratio = ratios[1];
        m.dataset.test_ratio = ratios[2];
    }
    m.dataset.augment_copies = static_cast<int>(r.get_int_or("dataset", "augment_copies", 0));
    m.dataset.augment_rotate_degrees = r.get_double_or("dataset", "augment_rotate_degrees", 15.0);
    m.dataset.augment_shift = static_cast<int>(r.get_int_or("dataset", "augment_shift", 2));

    if (r.has("cae", "filters")) {
        const auto filters = r.get_doubles("cae", "filters");
        if (filters.size() != 2) throw ValidationError("manifest: cae.filters needs 2 values");
        m.cae.filters1 = static_cast<int>(filters[0]);
        m.cae.filters2 = static_cast<int>(filters[1]);
    }
    m.cae.epochs = static_cast<int>(r.get_int_or("cae", "epochs", 50));
    m.cae.learning_rate = r.get_double_or("cae", "learning_rate", 0.001);
    m.cae.batch_size = static_cast<int>(r.get_int_or("cae", "batch_size", 50));

    m.pretext_k = static_cast<int>(r.get_int_or("decomposition", "pretext_k", 5));
    m.downstream_k = static_cast<int>(r.get_int_or("decomposition", "downstream_k", 5));
    m.kmeans_max_iter = static_cast<int>(r.get_int_or("decomposition", "kmeans_max_iter", 100));
    m.kmeans_tol = r.get_double_or("decomposition", "kmeans_tol", 1e-9);

    m.schedule.cycles = static_cast<int>(r.get_int("schedule", "cycles"));
    m.schedule.epochs_per_level = static_cast<int>(r.get_int("schedule", "epochs_per_level"));

    const std::string opt = r.get_string_or("train", "optimizer", "msgd");
    if (opt == "msgd") {
        m.train_optimizer.kind = OptimizerKind::msgd;
    } else if (opt == "adam") {
        m.train_optimizer.kind = OptimizerKind::adam;
    } else {
        throw ValidationError("manifest: train.optimizer must be 'msgd' or 'adam', got '" + opt + "'");
    }
    m.train_optimizer.learning_rate = r.get_double("train", "learning_rate");
    m.train_optimizer.decay_factor = r.get_double_or("train", "decay_factor", 1.0);
    m.train_optimizer.decay_period_epochs = static_cast<int>(r.get_int_or("train", "decay_period_epochs", 15));
    m.train_optimizer.momentum = r.get_double_or("train", "momentum", 0.0);
    m.train_batch_size = static_cast<int>(r.get_int_or("train", "batch_size", 50));

    m.backbone_spec = r.get_string("backbone", "spec");

    const std::int64_t seed = r.get_int("run", "seed");
    if (seed < 0) throw ValidationError("manifest: run.seed must be >= 0");
    m.seed = static_cast<std::uint64_t>(seed);
    m.output_dir = r.get_string("run", "output_dir");

    r.check_all_used({"dataset", "cae", "decomposition", "schedule", "train", "backbone", "run"});
    m.validate_and_hash();
    return m;
}

ExperimentManifest load_manifest(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("manifest file " + path + " not found");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_manifest_text(text);
}

}  // namespace curvete
