#pragma once

#include <Eigen/Core>
#include <limits>
#include <stdexcept>
#include <utility>

#include "otmap/icnn.hpp"
#include "otmap/potential.hpp"

namespace otmap {

// Settings for the inner maximization phi*(y) = sup_x <x,y> - phi(x),
// solved by `steps` plain gradient ascent steps of size `step_size` from
// `init_point` (the origin when empty). A finite `radius` restricts the
// sup to the closed ball B(0, radius): each iterate is projected back onto
// the ball, which yields the sieve variant of the estimator.
struct ConjugateConfig {
  int steps = 500;
  double step_size = 1e-3;
  double radius = std::numeric_limits<double>::infinity();
  Eigen::VectorXd init_point;

  void validate() const;
};

struct ConjugateResult {
  double value = 0.0;
  Eigen::VectorXd argmax;
  // Objective <x,y> - phi(x) at the initial point and at the final iterate.
  std::pair<double, double> objective_trace_first_last{0.0, 0.0};
};

// Result of solving the conjugate for every row of Y at once.
struct BatchConjugateResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd argmax;
  Eigen::VectorXd first_objective;
  Eigen::VectorXd last_objective;
};

// Thrown when an iterate leaves the trust region (norm above the guard
// threshold) or turns non-finite.
class SolverDivergenceError : public std::runtime_error {
 public:
  SolverDivergenceError(const std::string& message, int step)
      : std::runtime_error(message), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Euclidean projection onto the closed ball B(0, radius). Infinite radius
// is the identity; radius 0 maps everything to the origin.
Eigen::VectorXd project_ball(const Eigen::Ref<const Eigen::VectorXd>& x,
                             double radius);
void project_ball_rows_in_place(Eigen::MatrixXd& X, double radius);

ConjugateResult solve_conjugate(const Potential& phi,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const ConjugateConfig& config);
ConjugateResult solve_conjugate(const IcnnParams& params,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const ConjugateConfig& config);

// Solves the conjugate problem for each row of Y. When `init` is non-null
// its rows seed the iterates (used for warm starts); config.init_point is
// ignored in the batch form. Divergence checks run on the whole batch and
// report the first offending step.
BatchConjugateResult solve_conjugate_batch(
    const Potential& phi, const Eigen::Ref<const Eigen::MatrixXd>& Y,
    const ConjugateConfig& config, const Eigen::MatrixXd* init = nullptr);

// Brute-force conjugate value on a regular grid over [-radius, radius]^d
// intersected with B(0, radius), for d <= 3. Slow; intended as a test
// oracle for the iterative solver.
double grid_conjugate_oracle(const Potential& phi,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             double radius, int points_per_axis);
double grid_conjugate_oracle(const IcnnParams& params,
                             const Eigen::Ref<const Eigen::VectorXd>& y,
                             double radius, int points_per_axis);

}  // namespace otmap
