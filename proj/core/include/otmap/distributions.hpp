#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>

namespace otmap {

// Source distributions P; coordinates are drawn i.i.d.
enum class SourceKind { StdNormal, StudentT6, Uniform01 };

// Ground-truth transport maps T0 applied coordinatewise:
//   RankFunction    x -> F(x), the source CDF per coordinate
//   Linear          x -> 3x + 5
//   SignedQuadratic x -> sign(x) x^2
enum class MapKind { RankFunction, Linear, SignedQuadratic };

struct DistributionSpec {
  SourceKind kind = SourceKind::StdNormal;
  int dim = 1;

  void validate() const;
};

struct MapSpec {
  MapKind kind = MapKind::RankFunction;
  int dim = 1;

  void validate() const;
};

std::string source_name(SourceKind kind);
std::string map_name(MapKind kind);
SourceKind parse_source(const std::string& name);
MapKind parse_map(const std::string& name);

// CDF of a one-dimensional marginal. Supported for StdNormal and StudentT6;
// throws std::invalid_argument for Uniform01 (use the identity directly).
// StdNormal uses erfc(-z / sqrt 2) / 2; StudentT6 uses the closed form
//   F(t) = 1/2 + (15/16) (u - (2/3) u^3 + (1/5) u^5),  u = t / sqrt(6 + t^2).
double cdf(SourceKind kind, double z);

// Draws `count` samples as rows of a count x dim matrix. Deterministic for
// a fixed seed: coordinates are filled row by row, left to right, from one
// Rng stream.
Eigen::MatrixXd sample(const DistributionSpec& spec, int count,
                       std::uint64_t seed);

// Applies the ground-truth map to one point. RankFunction requires a source
// with a supported CDF.
Eigen::VectorXd true_map(const MapSpec& map, const DistributionSpec& source,
                         const Eigen::Ref<const Eigen::VectorXd>& x);

// Row-wise true_map, writing into `out` (resized to match X).
void true_map_rows(const MapSpec& map, const DistributionSpec& source,
                   const Eigen::Ref<const Eigen::MatrixXd>& X,
                   Eigen::MatrixXd& out);

// Samples Q = T0 # P by drawing fresh P samples with the given seed and
// pushing them through the map. Independent of any X sample drawn with a
// different seed.
Eigen::MatrixXd pushforward_sample(const MapSpec& map,
                                   const DistributionSpec& source, int count,
                                   std::uint64_t seed);

// Plain CSV (no header, one row per sample, full round-trip precision).
void write_samples_csv(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       const std::filesystem::path& path);
Eigen::MatrixXd read_samples_csv(const std::filesystem::path& path);

}  // namespace otmap
