#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otmap/distributions.hpp"
#include "otmap/trainer.hpp"

namespace otmap {

// Shortest decimal representation that parses back to the same double
// (std::to_chars); always at least the precision of %.17g.
std::string format_double(double v);

// One line of a results CSV: one training repetition of one experiment.
struct ResultRow {
  int dim = 0;
  SourceKind source = SourceKind::StdNormal;
  MapKind map = MapKind::RankFunction;
  EstimatorKind estimator = EstimatorKind::Original;
  int n = 0;
  int N = 0;
  int rep = 0;
  double l2_loss = 0.0;
  double wall_time_s = 0.0;
};

inline constexpr const char* kResultsCsvHeader =
    "dim,source,map,estimator,n,N,rep,l2_loss,wall_time_s";

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

}  // namespace otmap
