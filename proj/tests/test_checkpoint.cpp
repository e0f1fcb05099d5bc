#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "curvete/checkpoint.hpp"
#include "curvete/errors.hpp"
#include "curvete/features.hpp"
#include "curvete/rng.hpp"

using namespace curvete;

namespace {

const std::string kHash = std::string(64, 'a');

std::string tmp(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round trip preserves names, shapes and bytes") {
    std::vector<NamedTensor> tensors;
    Rng rng(1);
    Tensor a = Tensor::zeros({3, 4});
    for (auto& x : a.data) x = static_cast<float>(rng.uniform(-2, 2));
    Tensor b = Tensor::zeros({5});
    for (auto& x : b.data) x = static_cast<float>(rng.normal());
    tensors.push_back({"layer.w", a});
    tensors.push_back({"layer.b", b});

    const std::string path = tmp("curvete_ckpt.crvt");
    save_checkpoint(path, kHash, tensors);
    std::string hash;
    const auto back = load_checkpoint(path, &hash);
    CHECK(hash == kHash);
    REQUIRE(back.size() == 2);
    CHECK(back[0].name == "layer.w");
    CHECK(back[0].tensor.shape == a.shape);
    CHECK(back[0].tensor.data == a.data);
    CHECK(back[1].tensor.data == b.data);
    CHECK(find_tensor(back, "layer.b").numel() == 5);
    CHECK(!has_tensor(back, "nope"));
    CHECK_THROWS_AS(find_tensor(back, "nope"), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint saves are byte-stable") {
    std::vector<NamedTensor> tensors = {{"t", Tensor::full({4}, 0.5f)}};
    const std::string p1 = tmp("curvete_ckpt1.crvt"), p2 = tmp("curvete_ckpt2.crvt");
    save_checkpoint(p1, kHash, tensors);
    save_checkpoint(p2, kHash, tensors);
    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
    const std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
    CHECK(b1 == b2);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("checkpoint rejects bad magic and truncation") {
    const std::string path = tmp("curvete_ckpt_bad.crvt");
    {
        std::ofstream f(path, std::ios::binary);
        f << "NOPE";
    }
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    {
        std::ofstream f(path, std::ios::binary);
        f << "CRVT";
        const char v[4] = {1, 0, 0, 0};
        f.write(v, 4);
        f << "short-hash";
    }
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    CHECK_THROWS_AS(load_checkpoint(tmp("curvete_missing.crvt")), DependencyError);
    std::filesystem::remove(path);
}

TEST_CASE("hash hex helpers") {
    const std::vector<unsigned char> bytes = {0x00, 0xff, 0x12, 0xab};
    const std::string hex = bytes_to_hex(bytes.data(), bytes.size());
    CHECK(hex == "00ff12ab");
    CHECK(hex_to_bytes(hex) == bytes);
    CHECK_THROWS_AS(hex_to_bytes("abc"), ParseError);
    CHECK_THROWS_AS(hex_to_bytes("zz"), ParseError);
    CHECK_THROWS_AS(save_checkpoint(tmp("x.crvt"), "abcd", {}), InputError);  // hash not 32 bytes
}

TEST_CASE("feature files round trip through the CRVF format") {
    FeatureMatrix m;
    m.n = 3;
    m.d = 2;
    m.values = {1.5f, -2.25f, 0.0f, 3.75f, -0.5f, 8.0f};
    m.ids = {"alpha", "beta", "gamma"};
    const std::string path = tmp("curvete_feat.crvf");
    save_features(m, path);
    const auto back = load_features(path);
    CHECK(back.n == 3);
    CHECK(back.d == 2);
    CHECK(back.values == m.values);
    CHECK(back.ids == m.ids);

    // header check: magic + version + n + d
    std::ifstream f(path, std::ios::binary);
    char magic[4];
    f.read(magic, 4);
    CHECK(std::string(magic, 4) == "CRVF");
    std::filesystem::remove(path);
}

TEST_CASE("feature file rejects a bad magic") {
    const std::string path = tmp("curvete_feat_bad.crvf");
    {
        std::ofstream f(path, std::ios::binary);
        f << "WAT?";
    }
    CHECK_THROWS_AS(load_features(path), ParseError);
    std::filesystem::remove(path);
}
