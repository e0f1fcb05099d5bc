#include "curvete/ladder.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "curvete/errors.hpp"
#include "curvete/rng.hpp"

using nlohmann::json;

namespace curvete {

int map_to_parent(const LevelView& level, int sub_label) {
    if (sub_label < 0 || sub_label >= static_cast<int>(level.parent_map.size())) {
        throw InputError("map_to_parent: sub-label " + std::to_string(sub_label) + " out of range [0," +
                         std::to_string(level.parent_map.size()) + ")");
    }
    return level.parent_map[static_cast<std::size_t>(sub_label)];
}

const LevelView& GranularityLadder::level(int j) const {
    if (j < 1 || j > k_max) {
        throw InputError("ladder level " + std::to_string(j) + " out of range [1," + std::to_string(k_max) + "]");
    }
    return levels[static_cast<std::size_t>(j - 1)];
}

GranularityLadder sample_decompose(const FeatureMatrix& features, int k_max, std::uint64_t seed,
                                   int kmeans_max_iter, double kmeans_tol) {
    features.validate();
    if (k_max < 2) throw InputError("sample_decompose: k_max must be >= 2");

    GranularityLadder ladder;
    ladder.k_max = k_max;
    ladder.parent_classes = 1;
    ladder.ids = features.ids;

    {
        LevelView l1;
        l1.j = 1;
        l1.parent_classes = 1;
        l1.sub_labels.assign(static_cast<std::size_t>(features.n), 0);
        l1.parent_map = {0};
        ladder.levels.push_back(std::move(l1));
    }
    for (int j = 2; j <= k_max; ++j) {
        const ClusterModel cm = kmeans(features, j, derive_seed(seed, "sample-decompose", j),
                                       kmeans_max_iter, kmeans_tol);
        LevelView level;
        level.j = j;
        level.parent_classes = 1;
        level.sub_labels = cm.assignments;
        level.parent_map.assign(static_cast<std::size_t>(j), 0);
        level.centroids.resize(static_cast<std::size_t>(j));
        for (int c = 0; c < j; ++c) {
            level.centroids[static_cast<std::size_t>(c)].assign(
                cm.centroids.begin() + static_cast<std::ptrdiff_t>(c) * cm.d,
                cm.centroids.begin() + static_cast<std::ptrdiff_t>(c + 1) * cm.d);
        }
        ladder.levels.push_back(std::move(level));
    }
    return ladder;
}

GranularityLadder class_decompose(const FeatureMatrix& features, const std::vector<int>& labels,
                                  int k_max, std::uint64_t seed, int kmeans_max_iter, double kmeans_tol) {
    features.validate();
    if (k_max < 2) throw InputError("class_decompose: k_max must be >= 2");
    if (static_cast<std::int64_t>(labels.size()) != features.n) {
        throw InputError("class_decompose: label count does not match feature rows");
    }
    int classes = 0;
    for (const int l : labels) {
        if (l < 0) throw InputError("class_decompose: negative label");
        classes = std::max(classes, l + 1);
    }
    std::vector<std::vector<std::int64_t>> members(static_cast<std::size_t>(classes));
    for (std::int64_t i = 0; i < features.n; ++i) {
        members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
    }
    for (int c = 0; c < classes; ++c) {
        if (members[static_cast<std::size_t>(c)].empty()) {
            throw InputError("class_decompose: class " + std::to_string(c) + " has no samples");
        }
    }

    GranularityLadder ladder;
    ladder.k_max = k_max;
    ladder.parent_classes = classes;
    ladder.ids = features.ids;

    {
        LevelView l1;
        l1.j = 1;
        l1.parent_classes = classes;
        l1.sub_labels = labels;
        l1.parent_map.resize(static_cast<std::size_t>(classes));
        for (int c = 0; c < classes; ++c) l1.parent_map[static_cast<std::size_t>(c)] = c;
        ladder.levels.push_back(std::move(l1));
    }

    for (int j = 2; j <= k_max; ++j) {
        LevelView level;
        level.j = j;
        level.parent_classes = classes;
        level.sub_labels.assign(static_cast<std::size_t>(features.n), -1);
        level.parent_map.resize(static_cast<std::size_t>(classes) * static_cast<std::size_t>(j));
        for (std::size_t s = 0; s < level.parent_map.size(); ++s) {
            level.parent_map[s] = static_cast<int>(s) / j;
        }
        level.centroids.resize(level.parent_map.size());

        for (int c = 0; c < classes; ++c) {
            const auto& rows = members[static_cast<std::size_t>(c)];
            const int kc = std::min<std::int64_t>(j, static_cast<std::int64_t>(rows.size()));

            FeatureMatrix sub;
            sub.n = static_cast<std::int64_t>(rows.size());
            sub.d = features.d;
            sub.values.reserve(static_cast<std::size_t>(sub.n * sub.d));
            for (const auto r : rows) {
                sub.values.insert(sub.values.end(), features.values.begin() + r * features.d,
                                  features.values.begin() + (r + 1) * features.d);
                sub.ids.push_back(features.ids[static_cast<std::size_t>(r)]);
            }

            const ClusterModel cm = kmeans(sub, kc, derive_seed(seed, "class-decompose", j, c),
                                           kmeans_max_iter, kmeans_tol);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                level.sub_labels[static_cast<std::size_t>(rows[i])] = c * j + cm.assignments[i];
            }
            for (int sc = 0; sc < kc; ++sc) {
                level.centroids[static_cast<std::size_t>(c * j + sc)].assign(
                    cm.centroids.begin() + static_cast<std::ptrdiff_t>(sc) * cm.d,
                    cm.centroids.begin() + static_cast<std::ptrdiff_t>(sc + 1) * cm.d);
            }
        }
        ladder.levels.push_back(std::move(level));
    }
    return ladder;
}

void save_ladder_jsonl(const GranularityLadder& ladder, const std::string& path,
                       const std::string& manifest_hash) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw InputError("cannot write ladder file " + path);
    f << json{{"manifest_hash", manifest_hash},
              {"k_max", ladder.k_max},
              {"parent_classes", ladder.parent_classes}}
             .dump()
      << "\n";
    for (const auto& level : ladder.levels) {
        for (std::size_t i = 0; i < ladder.ids.size(); ++i) {
            const int sub = level.sub_labels[i];
            f << json{{"level", level.j},
                      {"id", ladder.ids[i]},
                      {"sub_label", sub},
                      {"parent", level.parent_map[static_cast<std::size_t>(sub)]}}
                     .dump()
              << "\n";
        }
    }
}

GranularityLadder load_ladder_jsonl(const std::string& path, std::string* manifest_hash) {
    std::ifstream f(path);
    if (!f) throw DependencyError("ladder file " + path + " not found");
    GranularityLadder ladder;
    std::string line;
    std::size_t lineno = 0;
    bool header = true;
    std::map<std::string, std::size_t> id_index;
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
            if (manifest_hash) *manifest_hash = rec.at("manifest_hash").get<std::string>();
            ladder.k_max = rec.at("k_max").get<int>();
            ladder.parent_classes = rec.at("parent_classes").get<int>();
            if (ladder.k_max < 1) throw ParseError(path + ": bad k_max");
            ladder.levels.resize(static_cast<std::size_t>(ladder.k_max));
            for (int j = 1; j <= ladder.k_max; ++j) {
                auto& level = ladder.levels[static_cast<std::size_t>(j - 1)];
                level.j = j;
                level.parent_classes = ladder.parent_classes;
                level.parent_map.resize(static_cast<std::size_t>(ladder.parent_classes) * j);
                for (std::size_t s = 0; s < level.parent_map.size(); ++s) {
                    level.parent_map[s] = static_cast<int>(s) / j;
                }
            }
            header = false;
            continue;
        }
        const int j = rec.at("level").get<int>();
        const auto id = rec.at("id").get<std::string>();
        const int sub = rec.at("sub_label").get<int>();
        if (j < 1 || j > ladder.k_max) throw ParseError(path + ":" + std::to_string(lineno) + ": bad level");
        if (j == 1) {
            id_index[id] = ladder.ids.size();
            ladder.ids.push_back(id);
        }
        const auto it = id_index.find(id);
        if (it == id_index.end()) throw ParseError(path + ":" + std::to_string(lineno) + ": unknown id " + id);
        auto& level = ladder.levels[static_cast<std::size_t>(j - 1)];
        if (level.sub_labels.size() < ladder.ids.size()) level.sub_labels.resize(ladder.ids.size(), -1);
        if (sub < 0 || sub >= level.sub_class_count()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": sub-label out of range");
        }
        level.sub_labels[it->second] = sub;
    }
    if (header) throw ParseError(path + ": empty ladder file");
    for (const auto& level : ladder.levels) {
        if (level.sub_labels.size() != ladder.ids.size() ||
            std::any_of(level.sub_labels.begin(), level.sub_labels.end(), [](int s) { return s < 0; })) {
            throw ParseError(path + ": level " + std::to_string(level.j) + " does not cover every sample");
        }
    }
    return ladder;
}

FeatureMatrix ladder_centroids_matrix(const GranularityLadder& ladder) {
    FeatureMatrix m;
    m.d = 0;
    for (const auto& level : ladder.levels) {
        for (std::size_t s = 0; s < level.centroids.size(); ++s) {
            const auto& row = level.centroids[s];
            if (row.empty()) continue;
            if (m.d == 0) m.d = static_cast<std::int64_t>(row.size());
            for (const double v : row) m.values.push_back(static_cast<float>(v));
            m.ids.push_back("L" + std::to_string(level.j) + ".S" + std::to_string(s));
            ++m.n;
        }
    }
    if (m.n == 0) throw InputError("ladder has no centroids to persist");
    return m;
}

}  // namespace curvete
