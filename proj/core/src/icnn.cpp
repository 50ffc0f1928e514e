#include "otmap/icnn.hpp"

#include <stdexcept>
#include <string>

#include "otmap/rng.hpp"

namespace otmap {

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

// Writes s(Z) into act and, when deriv is non-null, s'(Z) into it. Uses a
// single vectorized exp over min(Z, 0): for z >= 0 that exp is exactly 1,
// so act = max(Z, 0) + alpha (e^min(Z,0) - 1) equals ELU everywhere.
void apply_elu(const Eigen::MatrixXd& Z, double alpha, Eigen::MatrixXd& act,
               Eigen::ArrayXXd* deriv) {
  const Eigen::ArrayXXd expz = Z.array().min(0.0).exp();
  act = (Z.array().max(0.0) + alpha * (expz - 1.0)).matrix();
  if (deriv != nullptr) {
    *deriv = (Z.array() < 0.0).select(alpha * expz, 1.0);
  }
}

// Forward pass through the hidden layers, filling ws.activations and, if
// requested, ws.derivatives. The scalar output head is left to the callers.
void forward_hidden(const IcnnParams& params,
                    const Eigen::Ref<const Eigen::MatrixXd>& X,
                    bool need_derivatives, IcnnWorkspace& ws) {
  const auto& arch = params.arch;
  const int K = arch.depth;
  check(X.cols() == arch.input_dim,
        "icnn: X has " + std::to_string(X.cols()) + " columns, expected " +
            std::to_string(arch.input_dim));
  ws.activations.resize(static_cast<std::size_t>(K - 1));
  ws.derivatives.resize(static_cast<std::size_t>(K - 1));

  ws.preact.noalias() = X * params.skip_weights[0].transpose();
  ws.preact.rowwise() += params.biases[0].transpose();
  apply_elu(ws.preact, arch.activation_alpha, ws.activations[0],
            need_derivatives ? &ws.derivatives[0] : nullptr);
  for (int k = 1; k < K - 1; ++k) {
    ws.preact.noalias() =
        ws.activations[k - 1] * params.nonneg_weights[k - 1].transpose();
    ws.preact.noalias() += X * params.skip_weights[k].transpose();
    ws.preact.rowwise() += params.biases[k].transpose();
    apply_elu(ws.preact, arch.activation_alpha, ws.activations[k],
              need_derivatives ? &ws.derivatives[k] : nullptr);
  }
}

}  // namespace

void IcnnArch::validate() const {
  check(input_dim >= 1, "IcnnArch: input_dim must be >= 1");
  check(depth >= 2, "IcnnArch: depth must be >= 2");
  check(width >= 1, "IcnnArch: width must be >= 1");
  check(activation_alpha > 0.0 && std::isfinite(activation_alpha),
        "IcnnArch: activation_alpha must be positive and finite");
}

void IcnnParams::validate() const {
  arch.validate();
  const auto K = static_cast<std::size_t>(arch.depth);
  check(skip_weights.size() == K, "IcnnParams: expected depth skip weights");
  check(nonneg_weights.size() == K - 1,
        "IcnnParams: expected depth-1 nonneg weights");
  check(biases.size() == K, "IcnnParams: expected depth biases");
  for (int k = 0; k < arch.depth; ++k) {
    const int out = arch.layer_output_dim(k);
    const auto ks = std::to_string(k);
    check(skip_weights[k].rows() == out &&
              skip_weights[k].cols() == arch.input_dim,
          "IcnnParams: skip_weights[" + ks + "] has wrong shape");
    check(skip_weights[k].allFinite(),
          "IcnnParams: skip_weights[" + ks + "] has non-finite entries");
    check(biases[k].size() == out,
          "IcnnParams: biases[" + ks + "] has wrong size");
    check(biases[k].allFinite(),
          "IcnnParams: biases[" + ks + "] has non-finite entries");
    if (k >= 1) {
      const auto& A = nonneg_weights[k - 1];
      const auto as = std::to_string(k - 1);
      check(A.rows() == out && A.cols() == arch.width,
            "IcnnParams: nonneg_weights[" + as + "] has wrong shape");
      check(A.allFinite(),
            "IcnnParams: nonneg_weights[" + as + "] has non-finite entries");
      check((A.array() >= 0.0).all(),
            "IcnnParams: nonneg_weights[" + as + "] has negative entries");
    }
  }
}

ParamGradient ParamGradient::zeros_like(const IcnnParams& params) {
  ParamGradient g;
  g.skip_weights.reserve(params.skip_weights.size());
  for (const auto& w : params.skip_weights) {
    g.skip_weights.emplace_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
  }
  g.nonneg_weights.reserve(params.nonneg_weights.size());
  for (const auto& a : params.nonneg_weights) {
    g.nonneg_weights.emplace_back(Eigen::MatrixXd::Zero(a.rows(), a.cols()));
  }
  g.biases.reserve(params.biases.size());
  for (const auto& b : params.biases) {
    g.biases.emplace_back(Eigen::VectorXd::Zero(b.size()));
  }
  return g;
}

void ParamGradient::set_zero() {
  for (auto& w : skip_weights) w.setZero();
  for (auto& a : nonneg_weights) a.setZero();
  for (auto& b : biases) b.setZero();
}

void ParamGradient::axpy(double scale, const ParamGradient& other) {
  for (std::size_t k = 0; k < skip_weights.size(); ++k) {
    skip_weights[k] += scale * other.skip_weights[k];
  }
  for (std::size_t k = 0; k < nonneg_weights.size(); ++k) {
    nonneg_weights[k] += scale * other.nonneg_weights[k];
  }
  for (std::size_t k = 0; k < biases.size(); ++k) {
    biases[k] += scale * other.biases[k];
  }
}

double ParamGradient::squared_norm() const {
  double total = 0.0;
  for (const auto& w : skip_weights) total += w.squaredNorm();
  for (const auto& a : nonneg_weights) total += a.squaredNorm();
  for (const auto& b : biases) total += b.squaredNorm();
  return total;
}

IcnnParams init_icnn(const IcnnArch& arch, std::uint64_t seed) {
  arch.validate();
  Rng rng(seed);
  IcnnParams p;
  p.arch = arch;
  const double skip_scale =
      1.0 / std::sqrt(static_cast<double>(arch.input_dim));
  const double nonneg_scale = 2.0 / std::sqrt(static_cast<double>(arch.width));
  for (int k = 0; k < arch.depth; ++k) {
    const int out = arch.layer_output_dim(k);
    Eigen::MatrixXd W(out, arch.input_dim);
    for (int r = 0; r < W.rows(); ++r) {
      for (int c = 0; c < W.cols(); ++c) {
        W(r, c) = rng.uniform_in(-skip_scale, skip_scale);
      }
    }
    p.skip_weights.push_back(std::move(W));
    if (k >= 1) {
      Eigen::MatrixXd A(out, arch.width);
      for (int r = 0; r < A.rows(); ++r) {
        for (int c = 0; c < A.cols(); ++c) {
          A(r, c) = rng.uniform_in(0.0, nonneg_scale);
        }
      }
      p.nonneg_weights.push_back(std::move(A));
    }
    Eigen::VectorXd b(out);
    for (int r = 0; r < b.size(); ++r) {
      b(r) = rng.uniform_in(-skip_scale, skip_scale);
    }
    p.biases.push_back(std::move(b));
  }
  return p;
}

void icnn_eval_batch(const IcnnParams& params,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     Eigen::VectorXd* values, Eigen::MatrixXd* grads,
                     IcnnWorkspace& ws) {
  const auto& arch = params.arch;
  const int K = arch.depth;
  const Eigen::Index B = X.rows();
  const bool need_grads = grads != nullptr;

  forward_hidden(params, X, need_grads, ws);

  if (values != nullptr) {
    values->noalias() =
        ws.activations[K - 2] * params.nonneg_weights[K - 2].row(0).transpose();
    values->noalias() += X * params.skip_weights[K - 1].row(0).transpose();
    values->array() += params.biases[K - 1](0);
  }

  if (need_grads) {
    // delta_k = d phi / d z_k per row, computed top-down through the hidden
    // layers; each contributes delta_k * W_k to the input gradient.
    *grads = params.skip_weights[K - 1].replicate(B, 1);
    ws.delta = ws.derivatives[K - 2].rowwise() *
               params.nonneg_weights[K - 2].row(0).array();
    grads->noalias() += ws.delta.matrix() * params.skip_weights[K - 2];
    for (int k = K - 3; k >= 0; --k) {
      ws.delta_next = (ws.delta.matrix() * params.nonneg_weights[k]).array();
      ws.delta = ws.delta_next * ws.derivatives[k];
      grads->noalias() += ws.delta.matrix() * params.skip_weights[k];
    }
  }
}

double forward(const IcnnParams& params,
               const Eigen::Ref<const Eigen::VectorXd>& x) {
  IcnnWorkspace ws;
  Eigen::VectorXd value(1);
  icnn_eval_batch(params, x.transpose(), &value, nullptr, ws);
  return value(0);
}

Eigen::VectorXd grad_input(const IcnnParams& params,
                           const Eigen::Ref<const Eigen::VectorXd>& x) {
  IcnnWorkspace ws;
  Eigen::MatrixXd grads;
  icnn_eval_batch(params, x.transpose(), nullptr, &grads, ws);
  return grads.row(0).transpose();
}

void accumulate_grad_params(const IcnnParams& params,
                            const Eigen::Ref<const Eigen::MatrixXd>& X,
                            double scale, ParamGradient& acc,
                            IcnnWorkspace& ws) {
  const auto& arch = params.arch;
  const int K = arch.depth;
  const auto B = static_cast<double>(X.rows());

  forward_hidden(params, X, true, ws);

  // gamma_k = d sum_i phi(x_i) / d z_k rows. For the scalar output layer
  // gamma is identically one, so its tensor gradients are column sums.
  acc.skip_weights[K - 1].row(0) += scale * X.colwise().sum();
  acc.biases[K - 1](0) += scale * B;
  acc.nonneg_weights[K - 2].row(0) +=
      scale * ws.activations[K - 2].colwise().sum();

  ws.delta = ws.derivatives[K - 2].rowwise() *
             params.nonneg_weights[K - 2].row(0).array();
  for (int k = K - 2; k >= 0; --k) {
    acc.skip_weights[k].noalias() +=
        scale * (ws.delta.matrix().transpose() * X);
    acc.biases[k] += scale * ws.delta.matrix().colwise().sum().transpose();
    if (k >= 1) {
      acc.nonneg_weights[k - 1].noalias() +=
          scale * (ws.delta.matrix().transpose() * ws.activations[k - 1]);
      ws.delta_next = (ws.delta.matrix() * params.nonneg_weights[k - 1]).array();
      ws.delta = ws.delta_next * ws.derivatives[k - 1];
    }
  }
}

ParamGradient grad_params(const IcnnParams& params,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          double scale) {
  ParamGradient g = ParamGradient::zeros_like(params);
  IcnnWorkspace ws;
  accumulate_grad_params(params, x.transpose(), scale, g, ws);
  return g;
}

IcnnParams project_nonneg(const IcnnParams& params) {
  IcnnParams out = params;
  project_nonneg_in_place(out);
  return out;
}

void project_nonneg_in_place(IcnnParams& params) {
  for (auto& A : params.nonneg_weights) {
    A = A.cwiseMax(0.0);
  }
}

}  // namespace otmap
