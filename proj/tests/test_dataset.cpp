#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "curvete/dataset.hpp"
#include "curvete/errors.hpp"
#include "curvete/image.hpp"
#include "curvete/rng.hpp"

using namespace curvete;

namespace {

std::vector<ImageSample> toy_dataset(const std::vector<int>& class_sizes) {
    std::vector<ImageSample> out;
    int n = 0;
    for (std::size_t c = 0; c < class_sizes.size(); ++c) {
        for (int i = 0; i < class_sizes[c]; ++i) {
            ImageSample s;
            s.id = "s" + std::to_string(n++);
            s.height = 8;
            s.width = 8;
            s.pixels.assign(64, static_cast<std::uint8_t>(c));
            s.label = static_cast<int>(c);
            out.push_back(std::move(s));
        }
    }
    return out;
}

}  // namespace

TEST_CASE("split 10 one-class samples at 70/20/10 gives 7/2/1") {
    const auto split = split_dataset(toy_dataset({10}), 0.7, 0.2, 0.1, 42);
    CHECK(split.train.size() == 7);
    CHECK(split.validation.size() == 2);
    CHECK(split.test.size() == 1);
}

TEST_CASE("split partition property across seeds and class counts") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed * 977);
        std::vector<int> sizes;
        const int classes = 2 + static_cast<int>(rng.uniform_int(4));
        for (int c = 0; c < classes; ++c) sizes.push_back(1 + static_cast<int>(rng.uniform_int(40)));
        const auto samples = toy_dataset(sizes);
        const auto split = split_dataset(samples, 0.7, 0.2, 0.1, seed);

        std::set<std::string> all;
        for (const auto& id : split.train) CHECK(all.insert(id).second);
        for (const auto& id : split.validation) CHECK(all.insert(id).second);
        for (const auto& id : split.test) CHECK(all.insert(id).second);
        CHECK(all.size() == samples.size());
    }
}

TEST_CASE("split is stratified within one sample per class of the targets") {
    const auto samples = toy_dataset({50, 30, 20});
    const auto split = split_dataset(samples, 0.7, 0.2, 0.1, 7);
    // class 0: 35/10/5, class 1: 21/6/3, class 2: 14/4/2
    CHECK(split.train.size() == 70);
    CHECK(split.validation.size() == 20);
    CHECK(split.test.size() == 10);
}

TEST_CASE("split honours ratios taken from a published distribution table") {
    // 3064 samples split 1960/489/615 corresponds to ratios ~0.6397/0.1596/0.2007
    const auto samples = toy_dataset({3064});
    const auto split =
        split_dataset(samples, 1960.0 / 3064.0, 489.0 / 3064.0, 615.0 / 3064.0, 3);
    CHECK(split.train.size() == 1960);
    CHECK(split.validation.size() == 489);
    CHECK(split.test.size() == 615);
}

TEST_CASE("split determinism and error paths") {
    const auto samples = toy_dataset({9, 6});
    const auto a = split_dataset(samples, 0.7, 0.2, 0.1, 5);
    const auto b = split_dataset(samples, 0.7, 0.2, 0.1, 5);
    CHECK(a.train == b.train);
    CHECK(a.validation == b.validation);
    CHECK(a.test == b.test);
    const auto c = split_dataset(samples, 0.7, 0.2, 0.1, 6);
    CHECK(a.train != c.train);

    CHECK_THROWS_AS(split_dataset(samples, 0.7, 0.2, 0.2, 1), InputError);
    CHECK_THROWS_AS(split_dataset({}, 0.7, 0.2, 0.1, 1), InputError);

    auto gap = toy_dataset({3});
    gap[0].label = 2;  // classes 0,1 now empty
    CHECK_THROWS_WITH_AS(split_dataset(gap, 0.7, 0.2, 0.1, 1), doctest::Contains("has no samples"),
                         InputError);
}

TEST_CASE("split jsonl round trip") {
    const auto samples = toy_dataset({12, 8});
    const auto split = split_dataset(samples, 0.7, 0.2, 0.1, 11);
    const auto path = (std::filesystem::temp_directory_path() / "curvete_split.jsonl").string();
    save_split_jsonl(split, path, "deadbeef");
    std::string hash;
    const auto back = load_split_jsonl(path, &hash);
    CHECK(hash == "deadbeef");
    CHECK(back.train == split.train);
    CHECK(back.validation == split.validation);
    CHECK(back.test == split.test);
    std::filesystem::remove(path);
}

TEST_CASE("synth: zero noise with one mode makes identical images per class") {
    SynthSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 4;
    spec.image_size = 16;
    spec.noise_sigma = 0.0;
    spec.intra_class_modes = 1;
    const auto samples = synth_dataset(spec, 9);
    REQUIRE(samples.size() == 8);
    for (int c = 0; c < 2; ++c) {
        for (int i = 1; i < 4; ++i) {
            CHECK(samples[static_cast<std::size_t>(c * 4 + i)].pixels ==
                  samples[static_cast<std::size_t>(c * 4)].pixels);
        }
    }
}

TEST_CASE("synth: 3 classes x 5 modes yields 15 distinct templates") {
    SynthSpec spec;
    spec.classes = 3;
    spec.samples_per_class = 5;
    spec.image_size = 32;
    spec.noise_sigma = 0.0;
    spec.intra_class_modes = 5;
    std::set<std::vector<std::uint8_t>> unique;
    for (int c = 0; c < 3; ++c)
        for (int m = 0; m < 5; ++m) unique.insert(synth_template(spec, c, m).pixels);
    CHECK(unique.size() == 15);
}

TEST_CASE("synth: nearest-template classifier is perfect at zero noise") {
    SynthSpec spec;
    spec.classes = 3;
    spec.samples_per_class = 10;
    spec.image_size = 16;
    spec.noise_sigma = 0.0;
    spec.intra_class_modes = 3;
    const auto samples = synth_dataset(spec, 21);
    for (const auto& s : samples) {
        double best = 1e300;
        int best_class = -1;
        for (int c = 0; c < spec.classes; ++c) {
            for (int m = 0; m < spec.intra_class_modes; ++m) {
                const auto tpl = synth_template(spec, c, m);
                double d = 0;
                for (std::size_t i = 0; i < tpl.pixels.size(); ++i) {
                    const double diff = static_cast<double>(tpl.pixels[i]) - static_cast<double>(s.pixels[i]);
                    d += diff * diff;
                }
                if (d < best) {
                    best = d;
                    best_class = c;
                }
            }
        }
        CHECK(best_class == s.label.value());
    }
}

TEST_CASE("synth input validation") {
    SynthSpec spec;
    spec.classes = 1;
    CHECK_THROWS_AS(synth_dataset(spec, 1), InputError);
    spec.classes = 2;
    spec.intra_class_modes = 0;
    CHECK_THROWS_AS(synth_dataset(spec, 1), InputError);
    spec.intra_class_modes = 20;
    spec.image_size = 12;  // too small for 20 modes
    CHECK_THROWS_WITH_AS(synth_dataset(spec, 1), doctest::Contains("too small"), InputError);
}

TEST_CASE("synth determinism under seed") {
    SynthSpec spec;
    spec.classes = 2;
    spec.samples_per_class = 6;
    spec.image_size = 16;
    spec.noise_sigma = 25.0;
    spec.intra_class_modes = 2;
    const auto a = synth_dataset(spec, 77);
    const auto b = synth_dataset(spec, 77);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].pixels == b[i].pixels);
    const auto c = synth_dataset(spec, 78);
    CHECK(a[0].pixels != c[0].pixels);
}

TEST_CASE("labelled directory loader assigns sorted class indices") {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "curvete_ds_test";
    fs::remove_all(root);
    fs::create_directories(root / "beta");
    fs::create_directories(root / "alpha");
    ImageSample img;
    img.height = 8;
    img.width = 8;
    img.pixels.assign(64, 3);
    save_pgm(img, (root / "alpha" / "x.pgm").string());
    save_pgm(img, (root / "beta" / "y.pgm").string());
    save_pgm(img, (root / "beta" / "z.pgm").string());

    const LabelledDataset ds = load_labelled_dir(root.string());
    REQUIRE(ds.class_names == std::vector<std::string>({"alpha", "beta"}));
    REQUIRE(ds.samples.size() == 3);
    CHECK(ds.samples[0].id == "alpha/x");
    CHECK(ds.samples[0].label == 0);
    CHECK(ds.samples[1].label == 1);
    CHECK(ds.samples[2].id == "beta/z");
    fs::remove_all(root);
}

TEST_CASE("images_to_tensor scales to [0,1]") {
    auto samples = toy_dataset({2});
    samples[0].pixels.assign(64, 255);
    const Tensor t = images_to_tensor({&samples[0], &samples[1]});
    CHECK(t.shape == std::vector<int>({2, 1, 8, 8}));
    CHECK(t.data[0] == 1.0f);
    samples[1].height = 9;
    samples[1].pixels.resize(72);
    CHECK_THROWS_AS(images_to_tensor({&samples[0], &samples[1]}), InputError);
}
