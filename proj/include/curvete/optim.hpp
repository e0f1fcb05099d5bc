#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "curvete/nn.hpp"
#include "curvete/tensor.hpp"

namespace curvete {

enum class OptimizerKind { msgd, adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::msgd;
    double learning_rate = 0.001;
    double decay_factor = 1.0;      // multiplicative step decay, (0,1]
    int decay_period_epochs = 15;   // epochs between decay steps
    double momentum = 0.0;          // msgd only
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    void validate() const;
};

// lr(epoch) = learning_rate * decay_factor^floor(epoch / decay_period_epochs)
double lr_at_epoch(const OptimizerConfig& config, std::int64_t epoch);

// Holds per-parameter moment state; persists across steps and serializes into
// checkpoints so a resumed run matches an uninterrupted one bit for bit.
class Optimizer {
  public:
    explicit Optimizer(OptimizerConfig config);

    const OptimizerConfig& config() const { return config_; }

    // Applies one update. `epoch` drives the stepped learning-rate decay.
    // Gradients must align with model.parameters(); non-finite gradients
    // raise NumericalError naming the offending parameter.
    void step(NetworkModel& model, const std::vector<Tensor>& gradients, std::int64_t epoch);
    // Same update for a bare layer stack (used by the autoencoder).
    void step(LayerStack& stack, const std::vector<Tensor>& gradients, std::int64_t epoch);

    // Clears moment state for parameters from `first_param` on (head swap).
    void reset_state_from(std::size_t first_param);
    void reset_all_state();

    // Serialized state: pairs of (m, v) per parameter for adam, a single
    // velocity tensor per parameter for msgd-with-momentum. Empty tensors
    // mean "state not yet allocated".
    std::vector<Tensor>& moment1() { return m1_; }
    std::vector<Tensor>& moment2() { return m2_; }
    std::int64_t& step_count() { return steps_; }

  private:
    void apply(std::vector<Tensor*> params, const std::vector<std::string>& names,
               const std::vector<Tensor>& gradients, std::int64_t epoch);

    OptimizerConfig config_;
    std::vector<Tensor> m1_, m2_;
    std::int64_t steps_ = 0;
};

}  // namespace curvete
