#pragma once

#include <vector>

#include "vidpace/model.hpp"

namespace vidpace {

// SGD with momentum: v <- momentum * v + grad + weight_decay * param,
// then param <- param - lr * v. Velocity buffers live in the optimizer and
// are lazily sized to the model on the first step.
class Sgd {
 public:
  explicit Sgd(double momentum = 0.9, double weight_decay = 0.0)
      : momentum_(momentum), weight_decay_(weight_decay) {}

  void step(Model<float>& model, const std::vector<TensorF>& grads, double lr);
  // Parameters with trainable[i] == false are left untouched (frozen).
  void step(Model<float>& model, const std::vector<TensorF>& grads, double lr,
            const std::vector<bool>& trainable);

  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

 private:
  double momentum_;
  double weight_decay_;
  std::vector<TensorF> velocity_;
};

}  // namespace vidpace
