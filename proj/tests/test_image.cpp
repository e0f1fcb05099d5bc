#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "curvete/errors.hpp"
#include "curvete/image.hpp"
#include "curvete/rng.hpp"

using namespace curvete;

namespace {

ImageSample make_image(int h, int w, std::uint64_t seed) {
    ImageSample s;
    s.id = "img";
    s.height = h;
    s.width = w;
    s.pixels.resize(static_cast<std::size_t>(h) * w);
    Rng rng(seed);
    for (auto& p : s.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(256));
    return s;
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("pgm round trip is bit exact (property over random images)") {
    const std::string path = tmp_path("curvete_test_roundtrip.pgm");
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        Rng dims(seed * 131);
        const int h = 8 + static_cast<int>(dims.uniform_int(40));
        const int w = 8 + static_cast<int>(dims.uniform_int(40));
        const ImageSample img = make_image(h, w, seed);
        save_pgm(img, path);
        const ImageSample back = load_pgm(path);
        REQUIRE(back.height == h);
        REQUIRE(back.width == w);
        REQUIRE(back.pixels == img.pixels);
    }
    std::filesystem::remove(path);
}

TEST_CASE("pgm rejects ascii P2 and wide maxval") {
    const std::string path = tmp_path("curvete_test_badpgm.pgm");
    {
        std::ofstream f(path, std::ios::binary);
        f << "P2\n2 2\n255\n0 1 2 3\n";
    }
    CHECK_THROWS_WITH_AS(load_pgm(path), doctest::Contains("unsupported format"), ParseError);
    {
        std::ofstream f(path, std::ios::binary);
        f << "P5\n2 2\n65535\n";
        const char data[8] = {0};
        f.write(data, 8);
    }
    CHECK_THROWS_WITH_AS(load_pgm(path), doctest::Contains("maxval"), ParseError);
    {
        std::ofstream f(path, std::ios::binary);
        f << "P5\n4 4\n255\n";
        const char data[3] = {0};
        f.write(data, 3);  // truncated payload
    }
    CHECK_THROWS_WITH_AS(load_pgm(path), doctest::Contains("truncated"), ParseError);
    std::filesystem::remove(path);
}

TEST_CASE("pgm header comments are skipped") {
    const std::string path = tmp_path("curvete_test_comment.pgm");
    {
        std::ofstream f(path, std::ios::binary);
        f << "P5\n# a comment\n3 2\n255\n";
        const char data[6] = {10, 20, 30, 40, 50, 60};
        f.write(data, 6);
    }
    const ImageSample img = load_pgm(path);
    CHECK(img.width == 3);
    CHECK(img.height == 2);
    CHECK(img.at(1, 2) == 60);
    std::filesystem::remove(path);
}

TEST_CASE("histogram equalization: constant image unchanged") {
    ImageSample img = make_image(8, 8, 1);
    for (auto& p : img.pixels) p = 77;
    const ImageSample out = histogram_equalize(img);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("histogram equalization: evenly spread 2x2 values are fixed points") {
    ImageSample img;
    img.id = "q";
    img.height = 2;
    img.width = 2;
    img.pixels = {0, 85, 170, 255};
    const ImageSample out = histogram_equalize(img);
    // cdf = 1,2,3,4; cdf_min = 1; out(v) = round((cdf-1)/3*255)
    CHECK(out.pixels == std::vector<std::uint8_t>({0, 85, 170, 255}));
}

TEST_CASE("histogram equalization: linear ramp becomes uniform within +-1 per 8-bin") {
    ImageSample img;
    img.id = "ramp";
    img.height = 16;
    img.width = 16;
    img.pixels.resize(256);
    // 16x16 ramp over a narrow range [100, 164): strongly non-uniform input bins
    for (int i = 0; i < 256; ++i) img.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(100 + i / 4);
    const ImageSample out = histogram_equalize(img);
    int bins[8] = {0};
    for (const auto p : out.pixels) ++bins[p / 32];
    for (const int b : bins) CHECK(std::abs(b - 32) <= 1);
}

TEST_CASE("histogram equalization is monotone and stays in range") {
    for (std::uint64_t seed = 3; seed < 8; ++seed) {
        const ImageSample img = make_image(16, 16, seed);
        const ImageSample out = histogram_equalize(img);
        // build the value map and check monotonicity on occurring values
        int mapped[256];
        std::fill(std::begin(mapped), std::end(mapped), -1);
        for (std::size_t i = 0; i < img.pixels.size(); ++i) mapped[img.pixels[i]] = out.pixels[i];
        int prev = -1;
        for (int v = 0; v < 256; ++v) {
            if (mapped[v] < 0) continue;
            CHECK(mapped[v] >= prev);
            prev = mapped[v];
        }
    }
}

TEST_CASE("rotate 0 is the identity") {
    const ImageSample img = make_image(9, 9, 4);
    CHECK(augment(img, AugmentationOp::rotate(0)).pixels == img.pixels);
}

TEST_CASE("reflect twice is the identity") {
    const ImageSample img = make_image(10, 12, 5);
    for (const auto axis : {AugmentationOp::Axis::horizontal, AugmentationOp::Axis::vertical}) {
        const ImageSample once = augment(img, AugmentationOp::reflect(axis));
        const ImageSample twice = augment(once, AugmentationOp::reflect(axis));
        CHECK(twice.pixels == img.pixels);
        CHECK(once.pixels != img.pixels);
    }
}

TEST_CASE("rotate group laws on square images") {
    const ImageSample img = make_image(12, 12, 6);
    const ImageSample a = augment(augment(img, AugmentationOp::rotate(90)), AugmentationOp::rotate(-90));
    CHECK(a.pixels == img.pixels);
    const ImageSample b = augment(augment(img, AugmentationOp::rotate(180)), AugmentationOp::rotate(-180));
    CHECK(b.pixels == img.pixels);
    CHECK_THROWS_AS(augment(img, AugmentationOp::rotate(181)), InputError);
}

TEST_CASE("shift moves content with zero fill") {
    const ImageSample img = make_image(8, 8, 7);
    const ImageSample out = augment(img, AugmentationOp::shift(1, 0));
    for (int y = 0; y < 8; ++y) {
        CHECK(out.at(y, 0) == 0);  // vacated border
        for (int x = 1; x < 8; ++x) CHECK(out.at(y, x) == img.at(y, x - 1));
    }
    const ImageSample back = augment(out, AugmentationOp::shift(-1, 0));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 7; ++x) CHECK(back.at(y, x) == img.at(y, x));
}

TEST_CASE("sharpen keeps range and leaves flat regions alone") {
    ImageSample img = make_image(8, 8, 8);
    for (auto& p : img.pixels) p = 100;
    const ImageSample flat = augment(img, AugmentationOp::sharpen());
    CHECK(flat.pixels == img.pixels);  // 5*100 - 4*100 = 100
    const ImageSample noisy = augment(make_image(8, 8, 9), AugmentationOp::sharpen());
    CHECK(noisy.pixels.size() == 64);  // clamped to [0,255] by construction of uint8
}

TEST_CASE("crop bounds") {
    const ImageSample img = make_image(10, 10, 10);
    const ImageSample out = augment(img, AugmentationOp::crop(2, 3, 5, 4));
    CHECK(out.width == 5);
    CHECK(out.height == 4);
    CHECK(out.at(0, 0) == img.at(3, 2));
    CHECK_THROWS_AS(augment(img, AugmentationOp::crop(8, 8, 5, 5)), InputError);
}

TEST_CASE("zoom scales dimensions") {
    const ImageSample img = make_image(10, 10, 11);
    const ImageSample big = augment(img, AugmentationOp::zoom(2.0));
    CHECK(big.width == 20);
    CHECK(big.height == 20);
    CHECK_THROWS_AS(augment(img, AugmentationOp::zoom(0.0)), InputError);
}

TEST_CASE("resize nearest to arbitrary size") {
    const ImageSample img = make_image(13, 9, 12);
    const ImageSample out = resize_nearest(img, 32, 32);
    CHECK(out.height == 32);
    CHECK(out.width == 32);
    CHECK(out.at(0, 0) == img.at(0, 0));
}
