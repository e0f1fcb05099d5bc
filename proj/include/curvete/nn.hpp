#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/tensor.hpp"

namespace curvete {

enum class LayerKind { conv2d, relu, maxpool, flatten, dense, sigmoid, upsample2x };

std::string layer_kind_name(LayerKind kind);

struct LayerSpec {
    LayerKind kind = LayerKind::relu;
    int filters = 0, kernel_h = 0, kernel_w = 0, stride = 1, padding = 0;  // conv2d
    int pool_size = 0;                                                     // maxpool
    int out_dim = 0;                                                       // dense

    static LayerSpec conv2d(int filters, int kh, int kw, int stride = 1, int padding = 0);
    static LayerSpec relu();
    static LayerSpec maxpool(int size);
    static LayerSpec flatten();
    static LayerSpec dense(int out_dim);
    static LayerSpec sigmoid();
    static LayerSpec upsample2x();

    std::string to_string() const;
};

// Parses a whitespace-separated backbone description, e.g.
//   "conv:8,3x3,s1,p1 relu maxpool:2 conv:16,3x3,s1,p1 relu maxpool:2 flatten dense:64 relu"
std::vector<LayerSpec> parse_layer_specs(const std::string& text);
std::string layer_specs_to_string(const std::vector<LayerSpec>& specs);

// Feature-map dims between layers; flat activations use h == w == 1.
struct Dims {
    int c = 0, h = 0, w = 0;
    bool operator==(const Dims&) const = default;
    int flat() const { return c * h * w; }
};

// Sequential stack of layers with a recorded forward tape for reverse-mode
// gradients. Shape compatibility is validated at construction; conv and dense
// parameters are fan-in-scaled uniform, deterministic under the init seed.
class LayerStack {
  public:
    LayerStack() = default;
    LayerStack(std::vector<LayerSpec> specs, Dims input, std::uint64_t init_seed);

    const Dims& input_dims() const { return input_; }
    const Dims& output_dims() const { return dims_.back(); }
    // Output dims of layer i (0-based); index -1 refers to the input.
    const Dims& dims_after(int layer) const { return dims_[static_cast<std::size_t>(layer + 1)]; }
    const std::vector<LayerSpec>& specs() const { return specs_; }

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    // Stable names like "<prefix>.2.conv2d.w" aligned with parameters().
    std::vector<std::string> parameter_names(const std::string& prefix) const;

    // batch: [n,c,h,w], or [n,d] when the input dims are flat. Records the tape.
    Tensor forward(const Tensor& batch);
    // Per-parameter gradients aligned with parameters(). Fills *input_grad
    // with the gradient w.r.t. the batch when requested. Throws StateError if
    // no forward pass has been recorded.
    std::vector<Tensor> backward(const Tensor& output_grad, Tensor* input_grad = nullptr);

    bool has_tape() const { return tape_valid_; }
    void drop_tape();

    // Activation recorded after layer `index` during the last forward pass.
    const Tensor& activation_after(int index) const;

  private:
    std::vector<LayerSpec> specs_;
    std::vector<Dims> dims_;  // dims_[0] = input, dims_[i+1] = after layer i
    Dims input_;
    std::vector<Tensor> weights_, biases_;  // empty tensors for layers without params

    // tape
    bool tape_valid_ = false;
    int tape_batch_ = 0;
    std::vector<Tensor> acts_;                   // acts_[0] = input, acts_[i+1] = output of layer i
    std::vector<std::vector<int>> pool_argmax_;  // per maxpool layer, flat input indices

    void validate_and_infer_shapes();
    void init_parameters(std::uint64_t seed);
};

// Classifier: a backbone stack plus a dense head sized to the class count.
// The backbone must end flat (use flatten/dense); the head is the only part
// replaced when the class count changes.
struct NetworkModel {
    LayerStack backbone;
    LayerStack head;

    NetworkModel() = default;
    NetworkModel(std::vector<LayerSpec> backbone_specs, Dims input, int class_count,
                 std::uint64_t seed);

    int class_count() const { return head.output_dims().c; }

    Tensor forward(const Tensor& batch);
    // Gradients for all parameters, backbone first then head.
    std::vector<Tensor> backward(const Tensor& logit_grad);

    std::vector<Tensor*> parameters();
    std::vector<const Tensor*> parameters() const;
    std::vector<std::string> parameter_names() const;
};

// Replaces the head with a freshly initialized dense layer of
// `new_class_count` outputs. Backbone parameters are untouched, bit for bit.
void reinit_head(NetworkModel& model, int new_class_count, std::uint64_t seed);

struct LossGrad {
    double value = 0.0;
    Tensor grad;  // w.r.t. the loss input (logits or reconstruction)
};

// Mean over the batch of -log softmax(logits)[label]. labels must lie in
// [0, class_count); logits is [n, class_count].
double cross_entropy(const Tensor& logits, const std::vector<int>& labels);
LossGrad cross_entropy_with_grad(const Tensor& logits, const std::vector<int>& labels);

// Mean squared elementwise difference.
double mse_loss(const Tensor& output, const Tensor& target);
LossGrad mse_with_grad(const Tensor& output, const Tensor& target);

}  // namespace curvete
