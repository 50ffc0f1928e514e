#include "otmap/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace otmap {

namespace {

void check_finite(const Eigen::MatrixXd& g, const char* tensor, int index) {
  if (!g.allFinite()) {
    throw std::invalid_argument("adam_step: non-finite gradient entries in " +
                                std::string(tensor) + "[" +
                                std::to_string(index) + "]");
  }
}

void check_shape(bool ok, const char* tensor, int index) {
  if (!ok) {
    throw std::invalid_argument("adam_step: gradient shape mismatch in " +
                                std::string(tensor) + "[" +
                                std::to_string(index) + "]");
  }
}

// Single-tensor Adam update; all ops are elementwise.
template <typename Mat>
void update_tensor(Mat& theta, Mat& m, Mat& v, const Mat& g,
                   const AdamHyper& h, double bias1, double bias2) {
  m = h.beta1 * m + (1.0 - h.beta1) * g;
  v = h.beta2 * v + (1.0 - h.beta2) * g.cwiseProduct(g);
  theta.array() -= h.learning_rate * (m.array() / bias1) /
                   ((v.array() / bias2).sqrt() + h.epsilon);
}

}  // namespace

void AdamHyper::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("AdamHyper: learning_rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0)) {
    throw std::invalid_argument("AdamHyper: beta1 must lie in [0, 1)");
  }
  if (!(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("AdamHyper: beta2 must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("AdamHyper: epsilon must be positive");
  }
}

AdamState AdamState::create(const IcnnParams& shape, const AdamHyper& hyper) {
  hyper.validate();
  AdamState state;
  state.hyper = hyper;
  state.first_moment = ParamGradient::zeros_like(shape);
  state.second_moment = ParamGradient::zeros_like(shape);
  return state;
}

void adam_step(AdamState& state, IcnnParams& params,
               const ParamGradient& grads) {
  check_shape(grads.skip_weights.size() == params.skip_weights.size() &&
                  grads.nonneg_weights.size() == params.nonneg_weights.size() &&
                  grads.biases.size() == params.biases.size(),
              "tensor lists", 0);

  for (std::size_t k = 0; k < grads.skip_weights.size(); ++k) {
    const int i = static_cast<int>(k);
    check_shape(grads.skip_weights[k].rows() == params.skip_weights[k].rows() &&
                    grads.skip_weights[k].cols() ==
                        params.skip_weights[k].cols(),
                "skip_weights", i);
    check_finite(grads.skip_weights[k], "skip_weights", i);
  }
  for (std::size_t k = 0; k < grads.nonneg_weights.size(); ++k) {
    const int i = static_cast<int>(k);
    check_shape(
        grads.nonneg_weights[k].rows() == params.nonneg_weights[k].rows() &&
            grads.nonneg_weights[k].cols() == params.nonneg_weights[k].cols(),
        "nonneg_weights", i);
    check_finite(grads.nonneg_weights[k], "nonneg_weights", i);
  }
  for (std::size_t k = 0; k < grads.biases.size(); ++k) {
    const int i = static_cast<int>(k);
    check_shape(grads.biases[k].size() == params.biases[k].size(), "biases",
                i);
    check_finite(grads.biases[k], "biases", i);
  }

  state.step_count += 1;
  const auto t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.hyper.beta1, t);
  const double bias2 = 1.0 - std::pow(state.hyper.beta2, t);

  for (std::size_t k = 0; k < params.skip_weights.size(); ++k) {
    update_tensor(params.skip_weights[k], state.first_moment.skip_weights[k],
                  state.second_moment.skip_weights[k], grads.skip_weights[k],
                  state.hyper, bias1, bias2);
  }
  for (std::size_t k = 0; k < params.nonneg_weights.size(); ++k) {
    update_tensor(params.nonneg_weights[k],
                  state.first_moment.nonneg_weights[k],
                  state.second_moment.nonneg_weights[k],
                  grads.nonneg_weights[k], state.hyper, bias1, bias2);
  }
  for (std::size_t k = 0; k < params.biases.size(); ++k) {
    update_tensor(params.biases[k], state.first_moment.biases[k],
                  state.second_moment.biases[k], grads.biases[k], state.hyper,
                  bias1, bias2);
  }
}

Eigen::VectorXd gd_step(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& grad,
                        double step_size) {
  if (x.size() != grad.size()) {
    throw std::invalid_argument("gd_step: dimension mismatch");
  }
  return x - step_size * grad;
}

}  // namespace otmap
