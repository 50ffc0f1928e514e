#include "otmap/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "otmap/io.hpp"
#include "otmap/potential.hpp"
#include "otmap/rng.hpp"

namespace otmap {

namespace {

// Loss, parameter gradient and (optionally) the conjugate argmax rows for
// one batch pair. `init` seeds the conjugate iterates when non-null.
void batch_loss_impl(const IcnnParams& params,
                     const Eigen::Ref<const Eigen::MatrixXd>& batch_x,
                     const Eigen::Ref<const Eigen::MatrixXd>& batch_y,
                     const ConjugateConfig& config,
                     const Eigen::MatrixXd* init, BatchLoss& out,
                     Eigen::MatrixXd* argmax_out, IcnnWorkspace& ws) {
  if (batch_x.rows() < 1 || batch_y.rows() < 1) {
    throw std::invalid_argument("semi_dual_batch_loss: empty batch");
  }
  if (batch_x.cols() != params.arch.input_dim ||
      batch_y.cols() != params.arch.input_dim) {
    throw std::invalid_argument(
        "semi_dual_batch_loss: batch dimension mismatch");
  }
  if (!batch_x.allFinite() || !batch_y.allFinite()) {
    throw std::invalid_argument(
        "semi_dual_batch_loss: non-finite batch entries");
  }

  IcnnPotential phi(params);
  BatchConjugateResult conj = solve_conjugate_batch(phi, batch_y, config, init);

  Eigen::VectorXd x_values;
  icnn_eval_batch(params, batch_x, &x_values, nullptr, ws);

  out.loss = x_values.mean() + conj.values.mean();
  out.grads.set_zero();
  accumulate_grad_params(params, batch_x,
                         1.0 / static_cast<double>(batch_x.rows()), out.grads,
                         ws);
  accumulate_grad_params(params, conj.argmax,
                         -1.0 / static_cast<double>(batch_y.rows()),
                         out.grads, ws);
  if (argmax_out != nullptr) {
    *argmax_out = std::move(conj.argmax);
  }
}

}  // namespace

std::string estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::Original:
      return "original";
    case EstimatorKind::Sieve:
      return "sieve";
  }
  throw std::logic_error("estimator_name: unreachable");
}

EstimatorKind parse_estimator(const std::string& name) {
  if (name == "original") return EstimatorKind::Original;
  if (name == "sieve") return EstimatorKind::Sieve;
  throw std::invalid_argument("unknown estimator \"" + name +
                              "\" (expected original or sieve)");
}

void TrainConfig::validate() const {
  if (epochs < 0) {
    throw std::invalid_argument("TrainConfig: epochs must be >= 0");
  }
  if (batch_x < 1 || batch_y < 1) {
    throw std::invalid_argument("TrainConfig: batch sizes must be >= 1");
  }
  conjugate.validate();
  adam.validate();
}

BatchLoss semi_dual_batch_loss(
    const IcnnParams& params, const Eigen::Ref<const Eigen::MatrixXd>& batch_x,
    const Eigen::Ref<const Eigen::MatrixXd>& batch_y,
    const ConjugateConfig& config) {
  BatchLoss out;
  out.grads = ParamGradient::zeros_like(params);
  IcnnWorkspace ws;
  batch_loss_impl(params, batch_x, batch_y, config, nullptr, out, nullptr,
                  ws);
  return out;
}

double max_row_norm(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() == 0) return 0.0;
  return std::sqrt(m.rowwise().squaredNorm().maxCoeff());
}

TrainReport train(const Eigen::Ref<const Eigen::MatrixXd>& x_samples,
                  const Eigen::Ref<const Eigen::MatrixXd>& y_samples,
                  const IcnnArch& arch, const TrainConfig& config,
                  std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  arch.validate();
  config.validate();
  if (x_samples.cols() != arch.input_dim ||
      y_samples.cols() != arch.input_dim) {
    throw std::invalid_argument("train: sample dimension does not match "
                                "arch.input_dim");
  }
  if (!x_samples.allFinite() || !y_samples.allFinite()) {
    throw std::invalid_argument("train: non-finite sample entries");
  }
  const auto n = static_cast<int>(x_samples.rows());
  const auto N = static_cast<int>(y_samples.rows());
  if (n < config.batch_x || N < config.batch_y) {
    throw std::invalid_argument(
        "train: need at least one full batch of samples on each side");
  }

  TrainReport report;
  report.final_params = init_icnn(arch, seed);
  IcnnParams& params = report.final_params;

  ConjugateConfig conj = config.conjugate;
  conj.init_point.resize(0);
  conj.radius = config.estimator == EstimatorKind::Sieve
                    ? max_row_norm(x_samples)
                    : std::numeric_limits<double>::infinity();

  AdamState adam = AdamState::create(params, config.adam);
  Rng rng_x(derive_seed(config.shuffle_seed, 0, SeedStream::ShuffleX));
  Rng rng_y(derive_seed(config.shuffle_seed, 0, SeedStream::ShuffleY));

  const int num_batches = std::min(n / config.batch_x, N / config.batch_y);
  const int d = arch.input_dim;

  std::vector<int> idx_x(static_cast<std::size_t>(n));
  std::vector<int> idx_y(static_cast<std::size_t>(N));
  std::iota(idx_x.begin(), idx_x.end(), 0);
  std::iota(idx_y.begin(), idx_y.end(), 0);

  Eigen::MatrixXd batch_x(config.batch_x, d);
  Eigen::MatrixXd batch_y(config.batch_y, d);
  Eigen::MatrixXd warm_points;
  Eigen::MatrixXd batch_init;
  Eigen::MatrixXd batch_argmax;
  if (config.warm_start) {
    warm_points = Eigen::MatrixXd::Zero(N, d);
    batch_init.resize(config.batch_y, d);
  }

  BatchLoss batch_loss;
  batch_loss.grads = ParamGradient::zeros_like(params);
  IcnnWorkspace ws;
  report.per_epoch_loss.reserve(static_cast<std::size_t>(config.epochs));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng_x.shuffle(idx_x);
    rng_y.shuffle(idx_y);
    double epoch_loss_sum = 0.0;
    for (int b = 0; b < num_batches; ++b) {
      for (int r = 0; r < config.batch_x; ++r) {
        batch_x.row(r) =
            x_samples.row(idx_x[static_cast<std::size_t>(b * config.batch_x + r)]);
      }
      for (int r = 0; r < config.batch_y; ++r) {
        const int yi = idx_y[static_cast<std::size_t>(b * config.batch_y + r)];
        batch_y.row(r) = y_samples.row(yi);
        if (config.warm_start) batch_init.row(r) = warm_points.row(yi);
      }

      batch_loss_impl(params, batch_x, batch_y, conj,
                      config.warm_start ? &batch_init : nullptr, batch_loss,
                      config.warm_start ? &batch_argmax : nullptr, ws);
      epoch_loss_sum += batch_loss.loss;

      if (config.warm_start) {
        for (int r = 0; r < config.batch_y; ++r) {
          warm_points.row(idx_y[static_cast<std::size_t>(b * config.batch_y + r)]) =
              batch_argmax.row(r);
        }
      }

      adam_step(adam, params, batch_loss.grads);
      project_nonneg_in_place(params);
    }
    const double epoch_loss = epoch_loss_sum / num_batches;
    report.per_epoch_loss.push_back(epoch_loss);
    if (config.loss_log != nullptr) {
      *config.loss_log << epoch << ',' << format_double(epoch_loss) << '\n';
    }
  }

  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

}  // namespace otmap
