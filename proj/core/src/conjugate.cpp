#include "otmap/conjugate.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace otmap {

namespace {

constexpr double kDivergenceNormGuard = 1e8;

Eigen::VectorXd row_dots(const Eigen::Ref<const Eigen::MatrixXd>& A,
                         const Eigen::Ref<const Eigen::MatrixXd>& B) {
  return (A.array() * B.array()).rowwise().sum();
}

void check_iterates(const Eigen::MatrixXd& X, double radius, int step) {
  if (!X.allFinite()) {
    throw SolverDivergenceError(
        "conjugate solver: non-finite iterate at step " +
            std::to_string(step),
        step);
  }
  if (!std::isfinite(radius)) {
    const double max_sq = X.rowwise().squaredNorm().maxCoeff();
    if (max_sq > kDivergenceNormGuard * kDivergenceNormGuard) {
      throw SolverDivergenceError(
          "conjugate solver: iterate norm " +
              std::to_string(std::sqrt(max_sq)) + " exceeds guard " +
              std::to_string(kDivergenceNormGuard) + " at step " +
              std::to_string(step),
          step);
    }
  }
}

}  // namespace

void ConjugateConfig::validate() const {
  if (steps < 0) {
    throw std::invalid_argument("ConjugateConfig: steps must be >= 0");
  }
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw std::invalid_argument(
        "ConjugateConfig: step_size must be positive and finite");
  }
  if (std::isnan(radius) || radius <= 0.0) {
    throw std::invalid_argument(
        "ConjugateConfig: radius must be positive (may be infinite)");
  }
}

Eigen::VectorXd project_ball(const Eigen::Ref<const Eigen::VectorXd>& x,
                             double radius) {
  if (!std::isfinite(radius)) return x;
  const double norm = x.norm();
  if (norm <= radius) return x;
  return x * (radius / norm);
}

void project_ball_rows_in_place(Eigen::MatrixXd& X, double radius) {
  if (!std::isfinite(radius)) return;
  const double r_sq = radius * radius;
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double n_sq = X.row(i).squaredNorm();
    if (n_sq > r_sq) {
      X.row(i) *= radius / std::sqrt(n_sq);
    }
  }
}

BatchConjugateResult solve_conjugate_batch(
    const Potential& phi, const Eigen::Ref<const Eigen::MatrixXd>& Y,
    const ConjugateConfig& config, const Eigen::MatrixXd* init) {
  config.validate();
  const Eigen::Index d = phi.input_dim();
  if (Y.cols() != d) {
    throw std::invalid_argument(
        "solve_conjugate_batch: Y has " + std::to_string(Y.cols()) +
        " columns, expected " + std::to_string(d));
  }
  if (!Y.allFinite()) {
    throw std::invalid_argument("solve_conjugate_batch: Y has non-finite "
                                "entries");
  }
  const Eigen::Index B = Y.rows();

  BatchConjugateResult result;
  if (init != nullptr) {
    if (init->rows() != B || init->cols() != d) {
      throw std::invalid_argument(
          "solve_conjugate_batch: init shape does not match Y");
    }
    result.argmax = *init;
    project_ball_rows_in_place(result.argmax, config.radius);
  } else {
    result.argmax = Eigen::MatrixXd::Zero(B, d);
  }
  Eigen::MatrixXd& X = result.argmax;

  Eigen::VectorXd phi_values;
  phi.eval(X, &phi_values, nullptr);
  result.first_objective = row_dots(X, Y) - phi_values;

  Eigen::MatrixXd grads;
  for (int t = 1; t <= config.steps; ++t) {
    phi.eval(X, nullptr, &grads);
    X -= config.step_size * (grads - Y);
    project_ball_rows_in_place(X, config.radius);
    check_iterates(X, config.radius, t);
  }

  phi.eval(X, &phi_values, nullptr);
  result.values = row_dots(X, Y) - phi_values;
  result.last_objective = result.values;
  return result;
}

ConjugateResult solve_conjugate(const Potential& phi,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const ConjugateConfig& config) {
  Eigen::MatrixXd init;
  const Eigen::MatrixXd* init_ptr = nullptr;
  if (config.init_point.size() != 0) {
    if (config.init_point.size() != y.size()) {
      throw std::invalid_argument(
          "solve_conjugate: init_point dimension does not match y");
    }
    init = config.init_point.transpose();
    init_ptr = &init;
  }
  const BatchConjugateResult batch =
      solve_conjugate_batch(phi, y.transpose(), config, init_ptr);
  ConjugateResult result;
  result.value = batch.values(0);
  result.argmax = batch.argmax.row(0).transpose();
  result.objective_trace_first_last = {batch.first_objective(0),
                                       batch.last_objective(0)};
  return result;
}

ConjugateResult solve_conjugate(const IcnnParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const ConjugateConfig& config) {
  IcnnPotential phi(params);
  return solve_conjugate(phi, y, config);
}

double grid_conjugate_oracle(const Potential& phi,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             double radius, int points_per_axis) {
  const auto d = static_cast<int>(y.size());
  if (d < 1 || d > 3) {
    throw std::invalid_argument("grid_conjugate_oracle: supports d in 1..3");
  }
  if (!std::isfinite(radius) || radius <= 0.0) {
    throw std::invalid_argument(
        "grid_conjugate_oracle: radius must be finite and positive");
  }
  if (points_per_axis < 2) {
    throw std::invalid_argument(
        "grid_conjugate_oracle: points_per_axis must be >= 2");
  }
  if (y.size() != phi.input_dim()) {
    throw std::invalid_argument("grid_conjugate_oracle: dimension mismatch");
  }

  const double step = 2.0 * radius / (points_per_axis - 1);
  const double r_sq = radius * radius * (1.0 + 1e-12);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  Eigen::VectorXd x(d);
  Eigen::VectorXd value(1);
  double best = -std::numeric_limits<double>::infinity();
  // Lexicographic sweep over the grid; ties keep the first maximizer.
  while (true) {
    for (int a = 0; a < d; ++a) {
      x(a) = -radius + step * idx[static_cast<std::size_t>(a)];
    }
    if (x.squaredNorm() <= r_sq) {
      phi.eval(x.transpose(), &value, nullptr);
      const double objective = x.dot(y) - value(0);
      if (objective > best) best = objective;
    }
    int a = d - 1;
    while (a >= 0 && idx[static_cast<std::size_t>(a)] + 1 == points_per_axis) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
    ++idx[static_cast<std::size_t>(a)];
  }
  return best;
}

double grid_conjugate_oracle(const IcnnParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             double radius, int points_per_axis) {
  IcnnPotential phi(params);
  return grid_conjugate_oracle(phi, y, radius, points_per_axis);
}

}  // namespace otmap
