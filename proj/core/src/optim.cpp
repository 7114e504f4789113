#include "vidpace/optim.hpp"

#include "vidpace/errors.hpp"

namespace vidpace {

void Sgd::step(Model<float>& model, const std::vector<TensorF>& grads, double lr) {
  step(model, grads, lr, std::vector<bool>(model.params().size(), true));
}

void Sgd::step(Model<float>& model, const std::vector<TensorF>& grads, double lr,
               const std::vector<bool>& trainable) {
  auto& params = model.params();
  if (grads.size() != params.size() || trainable.size() != params.size())
    throw ShapeError("sgd step: " + std::to_string(grads.size()) +
                     " gradients for " + std::to_string(params.size()) +
                     " parameters");

  if (velocity_.size() != params.size()) {
    velocity_.clear();
    velocity_.reserve(params.size());
    for (const auto& p : params) velocity_.emplace_back(p.value.dims);
  }

  const auto m = static_cast<float>(momentum_);
  const auto wd = static_cast<float>(weight_decay_);
  const auto rate = static_cast<float>(lr);
  for (size_t i = 0; i < params.size(); ++i) {
    TensorF& p = params[i].value;
    const TensorF& g = grads[i];
    TensorF& v = velocity_[i];
    if (!p.same_shape(g))
      throw ShapeError("sgd step: gradient " + g.shape_str() + " for parameter '" +
                       params[i].name + "' " + p.shape_str());
    if (!trainable[i]) continue;
    for (size_t k = 0; k < p.data.size(); ++k) {
      v.data[k] = m * v.data[k] + g.data[k] + wd * p.data[k];
      p.data[k] -= rate * v.data[k];
    }
  }
}

}  // namespace vidpace
