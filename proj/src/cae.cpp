#include "curvete/cae.hpp"

#include <numeric>

#include "curvete/dataset.hpp"
#include "curvete/errors.hpp"
#include "curvete/optim.hpp"
#include "curvete/rng.hpp"

namespace curvete {

void CaeSpec::validate() const {
    if (filters2 < 1 || filters1 < filters2) {
        throw ConfigError("cae: encoder filters must satisfy f1 >= f2 >= 1");
    }
    if (epochs < 1) throw ConfigError("cae: epochs must be >= 1");
    if (learning_rate <= 0) throw ConfigError("cae: learning_rate must be > 0");
    if (batch_size < 1) throw ConfigError("cae: batch_size must be >= 1");
}

CaeModel make_cae(const CaeSpec& spec, int image_h, int image_w, std::uint64_t seed) {
    spec.validate();
    if (image_h % 4 != 0 || image_w % 4 != 0) {
        throw InputError("cae: input size " + std::to_string(image_h) + "x" + std::to_string(image_w) +
                         " must be divisible by 4");
    }
    CaeModel model;
    model.spec = spec;
    model.input = {1, image_h, image_w};
    std::vector<LayerSpec> layers = {
        LayerSpec::conv2d(spec.filters1, 3, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2),
        LayerSpec::conv2d(spec.filters2, 3, 3, 1, 1), LayerSpec::relu(), LayerSpec::maxpool(2),
        // decoder
        LayerSpec::upsample2x(), LayerSpec::conv2d(spec.filters1, 3, 3, 1, 1), LayerSpec::relu(),
        LayerSpec::upsample2x(), LayerSpec::conv2d(1, 3, 3, 1, 1), LayerSpec::sigmoid()};
    model.latent_layer = 5;  // after the second maxpool
    model.stack = LayerStack(std::move(layers), model.input, derive_seed(seed, "cae-init"));
    return model;
}

namespace {

void check_images(const std::vector<ImageSample>& images, const Dims& input) {
    for (const auto& img : images) {
        if (img.height != input.h || img.width != input.w) {
            throw InputError("cae: image " + img.id + " is " + std::to_string(img.height) + "x" +
                             std::to_string(img.width) + ", expected " + std::to_string(input.h) + "x" +
                             std::to_string(input.w));
        }
    }
}

}  // namespace

CaeModel train_cae(const std::vector<ImageSample>& images, const CaeSpec& spec, std::uint64_t seed) {
    if (images.size() < 2) throw InputError("cae: need at least 2 training images");
    CaeModel model = make_cae(spec, images[0].height, images[0].width, seed);
    check_images(images, model.input);

    OptimizerConfig ocfg;
    ocfg.kind = OptimizerKind::adam;
    ocfg.learning_rate = spec.learning_rate;
    Optimizer opt(ocfg);

    std::vector<std::size_t> order(images.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        Rng rng(derive_seed(seed, "cae-epoch", static_cast<std::uint64_t>(epoch)));
        rng.shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(spec.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(spec.batch_size));
            std::vector<const ImageSample*> batch;
            for (std::size_t i = start; i < end; ++i) batch.push_back(&images[order[i]]);
            const Tensor x = images_to_tensor(batch);
            const Tensor y = model.stack.forward(x);
            const LossGrad lg = mse_with_grad(y, x);
            const auto grads = model.stack.backward(lg.grad);
            opt.step(model.stack, grads, epoch);
            loss_sum += lg.value * static_cast<double>(end - start);
        }
        model.loss_history.push_back(loss_sum / static_cast<double>(order.size()));
    }
    return model;
}

FeatureMatrix encode(CaeModel& model, const std::vector<ImageSample>& images) {
    if (images.empty()) throw InputError("encode: no images");
    check_images(images, model.input);

    FeatureMatrix m;
    m.d = model.latent_dim();
    m.n = static_cast<std::int64_t>(images.size());
    m.values.reserve(static_cast<std::size_t>(m.n * m.d));
    constexpr std::size_t kChunk = 64;
    for (std::size_t start = 0; start < images.size(); start += kChunk) {
        const std::size_t end = std::min(images.size(), start + kChunk);
        std::vector<const ImageSample*> batch;
        for (std::size_t i = start; i < end; ++i) batch.push_back(&images[i]);
        model.stack.forward(images_to_tensor(batch));
        const Tensor& latent = model.stack.activation_after(model.latent_layer);
        m.values.insert(m.values.end(), latent.data.begin(), latent.data.end());
    }
    for (const auto& img : images) m.ids.push_back(img.id);
    model.stack.drop_tape();
    m.validate();
    return m;
}

Tensor reconstruct(CaeModel& model, const std::vector<ImageSample>& images) {
    if (images.empty()) throw InputError("reconstruct: no images");
    check_images(images, model.input);
    std::vector<const ImageSample*> ptrs;
    for (const auto& img : images) ptrs.push_back(&img);
    Tensor out = model.stack.forward(images_to_tensor(ptrs));
    model.stack.drop_tape();
    return out;
}

double reconstruction_error(CaeModel& model, const std::vector<ImageSample>& images) {
    std::vector<const ImageSample*> ptrs;
    for (const auto& img : images) ptrs.push_back(&img);
    const Tensor x = images_to_tensor(ptrs);
    const Tensor y = model.stack.forward(x);
    model.stack.drop_tape();
    return mse_loss(y, x);
}

}  // namespace curvete
