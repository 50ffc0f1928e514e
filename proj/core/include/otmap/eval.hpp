#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "otmap/distributions.hpp"
#include "otmap/potential.hpp"
#include "otmap/trainer.hpp"

namespace otmap {

// Canned hyperparameter profiles. `paper` uses 500 training epochs and 500
// inner conjugate steps; `fast` uses 100 of each. Batch sizes (50/50) and
// learning rates (1e-3 for both loops) are shared.
enum class Profile { Paper, Fast };

std::string profile_name(Profile profile);
Profile parse_profile(const std::string& name);
TrainConfig make_train_config(Profile profile);

// One experiment cell: a (source, map, estimator, n, N) combination run for
// `repetitions` independent training repetitions.
struct ExperimentConfig {
  std::string name = "experiment";
  int dim = 1;
  SourceKind source = SourceKind::StdNormal;
  MapKind map = MapKind::RankFunction;
  EstimatorKind estimator = EstimatorKind::Original;
  int n = 100;
  int N = 100;
  int repetitions = 20;
  // Monte-Carlo points for the L2(P) loss; 0 selects the default
  // (100000 for dim <= 3, 10000 above).
  int eval_samples = 0;
  std::uint64_t base_seed = 42;
  Profile profile = Profile::Fast;
  IcnnArch arch{1, 3, 15, 1.0};
  // Authoritative training settings; the config loader derives them from
  // `profile` and then applies explicit overrides.
  TrainConfig train;

  // Fills derived fields: eval_samples default, arch.input_dim and the
  // source/map dims from dim, train.estimator from estimator.
  void finalize();
  void validate() const;

  DistributionSpec source_spec() const { return {source, dim}; }
  MapSpec map_spec() const { return {map, dim}; }
};

struct EvalReport {
  ExperimentConfig config;
  std::vector<double> per_rep_loss;
  std::vector<double> per_rep_wall_time;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for a single repetition
  double total_wall_time_seconds = 0.0;
};

// Monte-Carlo L2(P) squared error of the fitted map against the ground
// truth: mean_z |grad phi(z) - T0(z)|^2 over eval_samples fresh draws
// Z ~ P. Deterministic for a fixed seed; accumulation is in row order.
double l2_loss(const Potential& potential, const MapSpec& map,
               const DistributionSpec& source, int eval_samples,
               std::uint64_t seed);
double l2_loss(const IcnnParams& params, const MapSpec& map,
               const DistributionSpec& source, int eval_samples,
               std::uint64_t seed);

// Runs all repetitions of one cell. Repetition r draws its sample, shuffle,
// init and eval seeds from derive_seed(base_seed, r, stream), so results do
// not depend on the number of worker threads; reductions happen in
// repetition order. Throws the first repetition error by index.
EvalReport run_experiment(const ExperimentConfig& config, int threads = 1);

// Monte-Carlo estimate of the semi-dual objective P phi + Q phi*: the mean
// of phi over the rows of X plus the mean of the approximate conjugate over
// the rows of Y. The seeded overload draws mc_samples fresh rows on each
// side (X from the source, Y as its pushforward).
double semi_dual_objective_mc(const Potential& phi,
                              const Eigen::Ref<const Eigen::MatrixXd>& X,
                              const Eigen::Ref<const Eigen::MatrixXd>& Y,
                              const ConjugateConfig& config);
double semi_dual_objective_mc(const IcnnParams& params,
                              const DistributionSpec& source,
                              const MapSpec& map, int mc_samples,
                              const ConjugateConfig& config,
                              std::uint64_t seed);

// Compares Var_P(phi1 - phi2) against the gradient-based bound that holds
// for the supported sources, with f = phi1 - phi2 and
// g2 = E_P |grad f|^2:
//   std_normal:  denom = g2 * (1 + logp(1 / sqrt(g2)))^2,
//                logp(x) = max(1, log x); the theory bounds ratio by 2.
//   student_t6:  denom = max(g2, g2^(c / (c + 2))) for a tail exponent
//                0 < c < 2 (default 1.5).
// ratio = variance / denom. A zero gradient with negligible variance
// (<= 1e-10) reports ratio 0; zero gradient with larger variance throws
// std::domain_error.
struct PoincareDiagnostic {
  double variance = 0.0;
  double grad_l2_sq = 0.0;
  double ratio = 0.0;
};

PoincareDiagnostic poincare_diagnostic(const Potential& phi1,
                                       const Potential& phi2,
                                       const DistributionSpec& source,
                                       int mc_samples, std::uint64_t rng_seed,
                                       double poly_tail_c = 1.5);
PoincareDiagnostic poincare_diagnostic(const IcnnParams& phi1,
                                       const IcnnParams& phi2,
                                       const DistributionSpec& source,
                                       int mc_samples, std::uint64_t rng_seed,
                                       double poly_tail_c = 1.5);

// Thread count resolution: explicit request > 0 wins, then the
// OTMAP_THREADS environment variable, then hardware concurrency.
int resolve_thread_count(int requested);

}  // namespace otmap
