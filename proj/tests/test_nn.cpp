#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "curvete/errors.hpp"
#include "curvete/nn.hpp"
#include "curvete/rng.hpp"
#include "helpers.hpp"

using namespace curvete;
using curvete::testing::finite_diff_check;
using curvete::testing::rel_err;

namespace {

Tensor random_batch(std::vector<int> shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Tensor t = Tensor::zeros(std::move(shape));
    Rng rng(seed);
    for (auto& x : t.data) x = static_cast<float>(rng.uniform(lo, hi));
    return t;
}

}  // namespace

TEST_CASE("zero-weight network gives all-zero logits") {
    NetworkModel model(parse_layer_specs("conv:3,3x3,p1 relu maxpool:2 flatten dense:6"), {1, 8, 8}, 4, 1);
    for (auto* p : model.parameters())
        for (auto& x : p->data) x = 0.0f;
    const Tensor logits = model.forward(random_batch({2, 1, 8, 8}, 99));
    for (const float v : logits.data) CHECK(v == 0.0f);
}

TEST_CASE("identity dense layer passes input through") {
    NetworkModel model({LayerSpec::dense(3)}, {3, 1, 1}, 3, 1);
    // backbone dense = identity, head = identity
    for (auto* p : model.parameters())
        for (auto& x : p->data) x = 0.0f;
    auto params = model.parameters();
    for (int which : {0, 2}) {
        Tensor& w = *params[static_cast<std::size_t>(which)];
        for (int i = 0; i < 3; ++i) w.data[static_cast<std::size_t>(i * 3 + i)] = 1.0f;
    }
    Tensor in({1, 3}, {1.0f, 2.0f, 3.0f});
    const Tensor logits = model.forward(in);
    CHECK(logits.data[0] == doctest::Approx(1.0));
    CHECK(logits.data[1] == doctest::Approx(2.0));
    CHECK(logits.data[2] == doctest::Approx(3.0));
}

TEST_CASE("forward is bit-exact across repeated calls") {
    NetworkModel model(parse_layer_specs("conv:4,3x3,p1 relu maxpool:2 conv:4,3x3 relu flatten dense:8"),
                       {1, 8, 8}, 5, 7);
    const Tensor batch = random_batch({4, 1, 8, 8}, 11);
    const Tensor a = model.forward(batch);
    const Tensor b = model.forward(batch);
    REQUIRE(a.data.size() == b.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
}

TEST_CASE("shape mismatch reports the offending layer") {
    // dense without flatten
    CHECK_THROWS_WITH_AS(LayerStack(parse_layer_specs("conv:2,3x3 dense:4"), {1, 8, 8}, 1),
                         doctest::Contains("layer 1"), ConfigError);
    // kernel larger than input
    CHECK_THROWS_AS(LayerStack(parse_layer_specs("conv:2,9x9"), {1, 6, 6}, 1), ConfigError);
    // batch that does not match input dims
    LayerStack ok(parse_layer_specs("conv:2,3x3,p1"), {1, 8, 8}, 1);
    CHECK_THROWS_AS(ok.forward(Tensor::zeros({2, 1, 6, 6})), ConfigError);
}

TEST_CASE("backward without forward is a state error") {
    LayerStack stack(parse_layer_specs("dense:2"), {3, 1, 1}, 1);
    CHECK_THROWS_AS(stack.backward(Tensor::zeros({1, 2})), StateError);
}

TEST_CASE("zero upstream gradient zeroes every parameter gradient") {
    NetworkModel model(parse_layer_specs("conv:3,3x3,p1 relu maxpool:2 flatten dense:6 relu"), {1, 8, 8}, 4, 3);
    model.forward(random_batch({2, 1, 8, 8}, 5));
    const auto grads = model.backward(Tensor::zeros({2, 4}));
    for (const auto& g : grads)
        for (const float v : g.data) CHECK(v == 0.0f);
}

TEST_CASE("dense gradient equals g x^T") {
    LayerStack stack({LayerSpec::dense(2)}, {3, 1, 1}, 42);
    Tensor x({1, 3}, {0.5f, -1.25f, 2.0f});
    stack.forward(x);
    Tensor g({1, 2}, {0.75f, -0.5f});
    const auto grads = stack.backward(g);
    REQUIRE(grads.size() == 2);
    for (int o = 0; o < 2; ++o) {
        for (int d = 0; d < 3; ++d) {
            CHECK(grads[0].data[static_cast<std::size_t>(o * 3 + d)] ==
                  doctest::Approx(g.data[static_cast<std::size_t>(o)] * x.data[static_cast<std::size_t>(d)]));
        }
        CHECK(grads[1].data[static_cast<std::size_t>(o)] == doctest::Approx(g.data[static_cast<std::size_t>(o)]));
    }
}

TEST_CASE("analytic gradients match central finite differences on a 2-conv + dense net") {
    NetworkModel model(parse_layer_specs("conv:2,3x3,p1 relu maxpool:2 conv:3,3x3 relu flatten dense:5"),
                       {1, 8, 8}, 5, 17);
    CHECK(curvete::testing::count_params(model.parameters()) <= 500);
    const std::vector<int> labels = {0, 2};

    // resample the batch until the forward pass clears the relu/pool kinks
    Tensor batch;
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 500 && !found; ++seed) {
        batch = random_batch({2, 1, 8, 8}, seed);
        model.forward(batch);
        found = curvete::testing::kink_margin(model.backbone) > 5e-3;
    }
    REQUIRE(found);

    const Tensor logits = model.forward(batch);
    const auto lg = cross_entropy_with_grad(logits, labels);
    const auto analytic = model.backward(lg.grad);
    const auto res = finite_diff_check(model.parameters(), analytic,
                                       [&] { return cross_entropy(model.forward(batch), labels); });
    CHECK_MESSAGE(res.max_rel_err < 1e-4, res.worst, " rel err ", res.max_rel_err);
}

TEST_CASE("analytic gradients match finite differences for sigmoid/upsample stack with mse") {
    LayerStack stack(parse_layer_specs("conv:2,3x3,p1 relu maxpool:2 upsample2x conv:1,3x3,p1 sigmoid"),
                     {1, 4, 4}, 23);
    const Tensor target = random_batch({1, 1, 4, 4}, 3, 0.0, 1.0);

    Tensor batch;
    bool found = false;
    for (std::uint64_t seed = 1; seed <= 500 && !found; ++seed) {
        batch = random_batch({1, 1, 4, 4}, seed * 7919);
        stack.forward(batch);
        found = curvete::testing::kink_margin(stack) > 5e-3;
    }
    REQUIRE(found);

    const Tensor out = stack.forward(batch);
    const auto lg = mse_with_grad(out, target);
    const auto analytic = stack.backward(lg.grad);
    const auto res = finite_diff_check(stack.parameters(), analytic,
                                       [&] { return mse_loss(stack.forward(batch), target); });
    CHECK_MESSAGE(res.max_rel_err < 1e-4, res.worst, " rel err ", res.max_rel_err);
}

TEST_CASE("cross entropy on uniform logits is ln C") {
    Tensor logits = Tensor::zeros({3, 5});
    const double loss = cross_entropy(logits, {0, 3, 4});
    CHECK(loss == doctest::Approx(std::log(5.0)).epsilon(1e-9));
}

TEST_CASE("cross entropy saturated case is ~0") {
    Tensor logits({1, 2}, {20.0f, -20.0f});
    CHECK(cross_entropy(logits, {0}) < 1e-8);
}

TEST_CASE("cross entropy matches the scalar softmax formula") {
    Tensor logits({2, 2}, {1.0f, 2.0f, 3.0f, 0.0f});
    // hand evaluation: -log(e^2/(e^1+e^2)) and -log(e^3/(e^3+e^0))
    const double l0 = -std::log(std::exp(2.0) / (std::exp(1.0) + std::exp(2.0)));
    const double l1 = -std::log(std::exp(3.0) / (std::exp(3.0) + 1.0));
    const double expected = (l0 + l1) / 2.0;
    CHECK(cross_entropy(logits, {1, 0}) == doctest::Approx(expected).epsilon(1e-7));
}

TEST_CASE("cross entropy rejects out-of-range labels") {
    Tensor logits = Tensor::zeros({2, 3});
    CHECK_THROWS_AS(cross_entropy(logits, {0, 3}), InputError);
    CHECK_THROWS_AS(cross_entropy(logits, {-1, 0}), InputError);
}

TEST_CASE("mse basics") {
    Tensor a({2}, {0.0f, 0.0f});
    Tensor b({2}, {1.0f, 1.0f});
    CHECK(mse_loss(a, a) == 0.0);
    CHECK(mse_loss(a, b) == doctest::Approx(1.0));
    CHECK_THROWS_AS(mse_loss(a, Tensor::zeros({3})), InputError);

    // random pair vs scalar summation
    Tensor x = random_batch({7}, 3);
    Tensor y = random_batch({7}, 4);
    double acc = 0.0;
    for (int i = 0; i < 7; ++i) {
        const double d = static_cast<double>(x.data[static_cast<std::size_t>(i)]) -
                         static_cast<double>(y.data[static_cast<std::size_t>(i)]);
        acc += d * d;
    }
    CHECK(mse_loss(x, y) == doctest::Approx(acc / 7.0).epsilon(1e-12));
}

TEST_CASE("reinit_head keeps backbone bytes and swaps the head") {
    NetworkModel model(parse_layer_specs("conv:2,3x3,p1 relu maxpool:2 flatten dense:6"), {1, 8, 8}, 10, 5);
    std::vector<float> backbone_before;
    for (const auto* p : model.backbone.parameters())
        backbone_before.insert(backbone_before.end(), p->data.begin(), p->data.end());
    const Tensor head_before = *model.head.parameters()[0];

    reinit_head(model, 10, derive_seed(5, "new-head"));
    std::vector<float> backbone_after;
    for (const auto* p : model.backbone.parameters())
        backbone_after.insert(backbone_after.end(), p->data.begin(), p->data.end());
    CHECK(backbone_before == backbone_after);  // bit-identical
    CHECK(model.class_count() == 10);
    // same class count still re-initializes
    const Tensor& head_after = *model.head.parameters()[0];
    bool differs = false;
    for (std::size_t i = 0; i < head_after.data.size(); ++i)
        if (head_after.data[i] != head_before.data[i]) differs = true;
    CHECK(differs);

    reinit_head(model, 2, 9);
    CHECK(model.class_count() == 2);
    const Tensor logits = model.forward(random_batch({1, 1, 8, 8}, 77));
    CHECK(logits.shape == std::vector<int>{1, 2});

    CHECK_THROWS_AS(reinit_head(model, 0, 1), InputError);
}

TEST_CASE("layer spec round trip") {
    const std::string text = "conv:8,3x3,s1,p1 relu maxpool:2 conv:16,3x3,s1,p1 relu maxpool:2 flatten dense:64 relu";
    const auto specs = parse_layer_specs(text);
    CHECK(specs.size() == 9);
    CHECK(layer_specs_to_string(specs) == text);
    CHECK_THROWS_AS(parse_layer_specs("wat:3"), ParseError);
    CHECK_THROWS_AS(parse_layer_specs(""), ParseError);
}
