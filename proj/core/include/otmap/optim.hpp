#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "otmap/icnn.hpp"

namespace otmap {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

// Adam optimizer state: exponential moving averages of gradients and squared
// gradients plus the step counter used for bias correction.
struct AdamState {
  AdamHyper hyper;
  long step_count = 0;
  ParamGradient first_moment;
  ParamGradient second_moment;

  static AdamState create(const IcnnParams& shape, const AdamHyper& hyper);
};

// One Adam update, applied in place:
//   m <- b1 m + (1-b1) g        v <- b2 v + (1-b2) g^2
//   theta <- theta - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
// The updated params are NOT projected onto the feasible set; callers that
// need nonnegative weights apply project_nonneg afterwards. Throws
// std::invalid_argument on shape mismatch or non-finite gradient entries,
// naming the offending tensor.
void adam_step(AdamState& state, IcnnParams& params,
               const ParamGradient& grads);

// Plain gradient descent step x - step_size * grad.
Eigen::VectorXd gd_step(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& grad,
                        double step_size);

}  // namespace otmap
