#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "otmap/conjugate.hpp"
#include "otmap/icnn.hpp"
#include "otmap/optim.hpp"

namespace otmap {

// Original: the conjugate sup runs unconstrained. Sieve: the sup is
// restricted to B(0, M) with M = max_i |X_i|_2 taken over the full X sample
// before training starts.
enum class EstimatorKind { Original, Sieve };

std::string estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

struct TrainConfig {
  int epochs = 500;
  int batch_x = 50;
  int batch_y = 50;
  EstimatorKind estimator = EstimatorKind::Original;
  // conjugate.radius is overwritten from the data for the sieve estimator
  // and forced to infinity for the original one; the other fields apply to
  // both variants. conjugate.init_point is ignored by the trainer.
  ConjugateConfig conjugate;
  AdamHyper adam;
  std::uint64_t shuffle_seed = 0;
  // When set, each epoch seeds the conjugate iterates with the argmax found
  // for the same Y sample in the previous epoch instead of the origin.
  bool warm_start = false;
  // When non-null, receives one "epoch,mean_loss" CSV line per epoch.
  std::ostream* loss_log = nullptr;

  void validate() const;
};

struct TrainReport {
  IcnnParams final_params;
  // Mean semi-dual batch loss per epoch, averaged over the epoch's batches.
  std::vector<double> per_epoch_loss;
  double wall_time_seconds = 0.0;
};

// Semi-dual loss of one mini-batch pair and its parameter gradient:
//   L = mean_i phi(x_i) + mean_j [ <x*_j, y_j> - phi(x*_j) ]
// with x*_j the conjugate argmax for y_j under `config`. The gradient
// follows the envelope rule: the argmax is treated as a constant, so
//   dL/dtheta = mean_i dphi(x_i)/dtheta - mean_j dphi(x*_j)/dtheta.
struct BatchLoss {
  double loss = 0.0;
  ParamGradient grads;
};

BatchLoss semi_dual_batch_loss(const IcnnParams& params,
                               const Eigen::Ref<const Eigen::MatrixXd>& batch_x,
                               const Eigen::Ref<const Eigen::MatrixXd>& batch_y,
                               const ConjugateConfig& config);

// Largest row 2-norm; the sieve radius M for a sample matrix.
double max_row_norm(const Eigen::Ref<const Eigen::MatrixXd>& m);

// Trains an ICNN potential on samples X ~ P (rows) and Y ~ Q (rows) by
// minimizing the semi-dual objective with Adam, projecting the nonneg
// weights after every step. Each epoch shuffles X and Y index orders
// independently (streams derived from config.shuffle_seed) and sweeps
// min(n / batch_x, N / batch_y) disjoint batch pairs; leftover tails are
// skipped. `seed` drives the parameter initialization. Deterministic for
// fixed seeds.
TrainReport train(const Eigen::Ref<const Eigen::MatrixXd>& x_samples,
                  const Eigen::Ref<const Eigen::MatrixXd>& y_samples,
                  const IcnnArch& arch, const TrainConfig& config,
                  std::uint64_t seed);

}  // namespace otmap
