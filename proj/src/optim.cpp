#include "curvete/optim.hpp"

#include <cmath>

#include "curvete/errors.hpp"

namespace curvete {

void OptimizerConfig::validate() const {
    if (learning_rate <= 0.0) throw ConfigError("optimizer: learning_rate must be > 0");
    if (decay_factor <= 0.0 || decay_factor > 1.0) throw ConfigError("optimizer: decay_factor must be in (0,1]");
    if (decay_period_epochs < 1) throw ConfigError("optimizer: decay_period_epochs must be >= 1");
    if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optimizer: momentum must be in [0,1)");
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0)
        throw ConfigError("optimizer: adam betas must be in [0,1)");
    if (adam_epsilon <= 0.0) throw ConfigError("optimizer: adam_epsilon must be > 0");
}

double lr_at_epoch(const OptimizerConfig& config, std::int64_t epoch) {
    const std::int64_t steps = epoch / config.decay_period_epochs;
    return config.learning_rate * std::pow(config.decay_factor, static_cast<double>(steps));
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(NetworkModel& model, const std::vector<Tensor>& gradients, std::int64_t epoch) {
    apply(model.parameters(), model.parameter_names(), gradients, epoch);
}

void Optimizer::step(LayerStack& stack, const std::vector<Tensor>& gradients, std::int64_t epoch) {
    apply(stack.parameters(), stack.parameter_names("stack"), gradients, epoch);
}

void Optimizer::reset_state_from(std::size_t first_param) {
    for (std::size_t i = first_param; i < m1_.size(); ++i) m1_[i] = Tensor{};
    for (std::size_t i = first_param; i < m2_.size(); ++i) m2_[i] = Tensor{};
}

void Optimizer::reset_all_state() {
    m1_.clear();
    m2_.clear();
    steps_ = 0;
}

void Optimizer::apply(std::vector<Tensor*> params, const std::vector<std::string>& names,
                      const std::vector<Tensor>& gradients, std::int64_t epoch) {
    if (gradients.size() != params.size()) {
        throw ConfigError("optimizer: gradient count " + std::to_string(gradients.size()) +
                          " != parameter count " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(gradients[i])) {
            throw ConfigError("optimizer: gradient shape mismatch for " + names[i]);
        }
        for (const float g : gradients[i].data) {
            if (!std::isfinite(g)) throw NumericalError("non-finite gradient in " + names[i]);
        }
    }
    if (m1_.size() < params.size()) m1_.resize(params.size());
    if (m2_.size() < params.size()) m2_.resize(params.size());

    const double lr = lr_at_epoch(config_, epoch);

    if (config_.kind == OptimizerKind::msgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            const Tensor& g = gradients[i];
            if (config_.momentum > 0.0) {
                if (m1_[i].numel() != p.numel()) m1_[i] = Tensor::zeros(p.shape);
                Tensor& vel = m1_[i];
                for (std::size_t j = 0; j < p.data.size(); ++j) {
                    const double v = config_.momentum * static_cast<double>(vel.data[j]) +
                                     lr * static_cast<double>(g.data[j]);
                    vel.data[j] = static_cast<float>(v);
                    p.data[j] = static_cast<float>(static_cast<double>(p.data[j]) - v);
                }
            } else {
                for (std::size_t j = 0; j < p.data.size(); ++j) {
                    p.data[j] = static_cast<float>(static_cast<double>(p.data[j]) -
                                                   lr * static_cast<double>(g.data[j]));
                }
            }
        }
    } else {
        ++steps_;
        const double t = static_cast<double>(steps_);
        const double bc1 = 1.0 - std::pow(config_.adam_beta1, t);
        const double bc2 = 1.0 - std::pow(config_.adam_beta2, t);
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor& p = *params[i];
            const Tensor& g = gradients[i];
            if (m1_[i].numel() != p.numel()) m1_[i] = Tensor::zeros(p.shape);
            if (m2_[i].numel() != p.numel()) m2_[i] = Tensor::zeros(p.shape);
            Tensor& m = m1_[i];
            Tensor& v = m2_[i];
            for (std::size_t j = 0; j < p.data.size(); ++j) {
                const double gj = g.data[j];
                const double mj = config_.adam_beta1 * static_cast<double>(m.data[j]) +
                                  (1.0 - config_.adam_beta1) * gj;
                const double vj = config_.adam_beta2 * static_cast<double>(v.data[j]) +
                                  (1.0 - config_.adam_beta2) * gj * gj;
                m.data[j] = static_cast<float>(mj);
                v.data[j] = static_cast<float>(vj);
                const double mhat = mj / bc1;
                const double vhat = vj / bc2;
                p.data[j] = static_cast<float>(static_cast<double>(p.data[j]) -
                                               lr * mhat / (std::sqrt(vhat) + config_.adam_epsilon));
            }
        }
    }
}

}  // namespace curvete
