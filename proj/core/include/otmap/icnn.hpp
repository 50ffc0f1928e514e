#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace otmap {

// Architecture of an input-convex network with K = depth affine layers:
//
//   z_1 = W_1 x + b_1
//   z_k = A_k s(z_{k-1}) + W_k x + b_k          (k = 2 .. K)
//   phi(x) = z_K                                 (scalar output)
//
// s is ELU applied entrywise, the A_k are constrained entrywise nonnegative,
// and hidden layers all have `width` units. Convexity in x follows because
// each z_k is convex when the A_k are nonnegative and s is convex and
// nondecreasing; the first layer has no A and is unconstrained.
struct IcnnArch {
  int input_dim = 1;
  int depth = 3;
  int width = 15;
  double activation_alpha = 1.0;

  int layer_output_dim(int k) const { return k + 1 == depth ? 1 : width; }

  // Throws std::invalid_argument on nonpositive dims, depth < 2 or alpha <= 0.
  void validate() const;

  bool operator==(const IcnnArch&) const = default;
};

// ELU activation and its derivative. s(z) = z for z >= 0, alpha (e^z - 1)
// for z < 0; s'(z) = 1 for z >= 0, s(z) + alpha for z < 0 (reuses e^z).
inline double elu(double z, double alpha) {
  return z >= 0.0 ? z : alpha * (std::expm1(z));
}
inline double elu_derivative_from_value(double z, double value, double alpha) {
  return z >= 0.0 ? 1.0 : value + alpha;
}

// Network parameters. Layer k (0-based) owns skip_weights[k] (out_k x d) and
// biases[k] (out_k); layers k >= 1 additionally own nonneg_weights[k-1]
// (out_k x width), the entrywise-nonnegative recurrent weights.
struct IcnnParams {
  IcnnArch arch;
  std::vector<Eigen::MatrixXd> skip_weights;
  std::vector<Eigen::MatrixXd> nonneg_weights;
  std::vector<Eigen::VectorXd> biases;

  // Throws std::invalid_argument on shape mismatch with arch, non-finite
  // entries, or negative entries in nonneg_weights.
  void validate() const;
};

// Gradient of a scalar function with respect to IcnnParams; same layout.
struct ParamGradient {
  std::vector<Eigen::MatrixXd> skip_weights;
  std::vector<Eigen::MatrixXd> nonneg_weights;
  std::vector<Eigen::VectorXd> biases;

  static ParamGradient zeros_like(const IcnnParams& params);
  void set_zero();
  // this += scale * other. Shapes must already agree.
  void axpy(double scale, const ParamGradient& other);
  double squared_norm() const;
};

// Samples initial parameters. Entries of W_k and b_k are uniform on [-s, s]
// with s = 1/sqrt(fan_in) and fan_in the input dim of the weight (d for W_k,
// treated as d for b_k as well); entries of A_k are uniform on [0, 2/sqrt(w)]
// so the nonnegativity constraint holds at initialization with the same mean
// magnitude. Draw order is fixed: for each layer, W row by row, then A row by
// row (layers k >= 1), then b.
IcnnParams init_icnn(const IcnnArch& arch, std::uint64_t seed);

// Scratch buffers for batched evaluation, reusable across calls. Not
// thread-safe; use one workspace per thread.
struct IcnnWorkspace {
  std::vector<Eigen::MatrixXd> activations;    // s(z_k) per hidden layer
  std::vector<Eigen::ArrayXXd> derivatives;    // s'(z_k) per hidden layer
  Eigen::MatrixXd preact;
  Eigen::ArrayXXd delta;
  Eigen::ArrayXXd delta_next;
};

// Batched evaluation of the network on the rows of X (count x d). Writes
// phi(x_i) into values (resized to count) and the input gradients into
// grads (resized to count x d); either output may be null. When grads is
// null the derivative buffers are not materialized.
void icnn_eval_batch(const IcnnParams& params,
                     const Eigen::Ref<const Eigen::MatrixXd>& X,
                     Eigen::VectorXd* values, Eigen::MatrixXd* grads,
                     IcnnWorkspace& ws);

// Single-point wrappers over icnn_eval_batch.
double forward(const IcnnParams& params,
               const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd grad_input(const IcnnParams& params,
                           const Eigen::Ref<const Eigen::VectorXd>& x);

// Gradient of phi(x) with respect to every parameter tensor, scaled by
// `scale` and accumulated into `acc` (which must have matching shapes).
// Shares the forward pass across all rows of X: acc += scale * sum_i
// d phi(x_i) / d theta.
void accumulate_grad_params(const IcnnParams& params,
                            const Eigen::Ref<const Eigen::MatrixXd>& X,
                            double scale, ParamGradient& acc,
                            IcnnWorkspace& ws);

// Single-point parameter gradient scale * d phi(x) / d theta.
ParamGradient grad_params(const IcnnParams& params,
                          const Eigen::Ref<const Eigen::VectorXd>& x,
                          double scale = 1.0);

// Projects onto the feasible set by clamping negative entries of the
// nonneg_weights at zero. Other tensors pass through unchanged.
IcnnParams project_nonneg(const IcnnParams& params);
void project_nonneg_in_place(IcnnParams& params);

// JSON serialization. Numbers are written with enough digits to round-trip
// bit-exactly; field order is documented in the README. Deserialization
// validates shapes, finiteness and feasibility and throws
// std::invalid_argument on malformed input.
std::string serialize_icnn(const IcnnParams& params);
IcnnParams deserialize_icnn(const std::string& json_text);
void save_icnn(const IcnnParams& params, const std::filesystem::path& path);
IcnnParams load_icnn(const std::filesystem::path& path);

}  // namespace otmap
