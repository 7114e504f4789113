#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "vidpace/model.hpp"

namespace vidpace {

// Scalar loss of the model; fills parameter gradients when grads != nullptr.
// Must be a deterministic function of the parameters.
using GradCheckLossFn =
    std::function<double(Model<double>&, std::vector<TensorD>*)>;

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int skipped_coordinates = 0;  // probe interval straddled a kink
  std::vector<std::pair<std::string, double>> per_param;  // max error per tensor
};

// Central finite differences against the analytic gradients, over a random
// subsample of at least min_coords coordinates per parameter tensor (all of
// them when the tensor is smaller). Relative error is
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
//
// The loss surface is only piecewise smooth (relu, max pooling); estimates
// at eps and eps/2 are compared, and a coordinate whose two estimates
// disagree has a kink inside the probe interval and is skipped rather than
// misreported. A corrupted backward pass disagrees with both estimates on
// smooth coordinates, so corruption is still detected.
GradCheckReport grad_check(Model<double>& model, const GradCheckLossFn& loss_fn,
                           double eps = 1e-4, int min_coords = 200,
                           uint64_t seed = 0);

}  // namespace vidpace
