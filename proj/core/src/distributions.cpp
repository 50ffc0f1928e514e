#include "otmap/distributions.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "otmap/io.hpp"
#include "otmap/rng.hpp"

namespace otmap {

namespace {

double draw_one(SourceKind kind, Rng& rng) {
  switch (kind) {
    case SourceKind::StdNormal:
      return rng.normal();
    case SourceKind::StudentT6:
      return rng.student_t6();
    case SourceKind::Uniform01:
      return rng.uniform();
  }
  throw std::logic_error("draw_one: unreachable");
}

double map_one(MapKind kind, SourceKind source, double z) {
  switch (kind) {
    case MapKind::RankFunction:
      return cdf(source, z);
    case MapKind::Linear:
      return 3.0 * z + 5.0;
    case MapKind::SignedQuadratic:
      return std::copysign(z * z, z);
  }
  throw std::logic_error("map_one: unreachable");
}

void check_map_source(MapKind kind, SourceKind source) {
  if (kind == MapKind::RankFunction && source == SourceKind::Uniform01) {
    throw std::invalid_argument(
        "true_map: rank function requires a std_normal or student_t6 source");
  }
}

}  // namespace

void DistributionSpec::validate() const {
  if (dim < 1) {
    throw std::invalid_argument("DistributionSpec: dim must be >= 1");
  }
}

void MapSpec::validate() const {
  if (dim < 1) {
    throw std::invalid_argument("MapSpec: dim must be >= 1");
  }
}

std::string source_name(SourceKind kind) {
  switch (kind) {
    case SourceKind::StdNormal:
      return "std_normal";
    case SourceKind::StudentT6:
      return "student_t6";
    case SourceKind::Uniform01:
      return "uniform01";
  }
  throw std::logic_error("source_name: unreachable");
}

std::string map_name(MapKind kind) {
  switch (kind) {
    case MapKind::RankFunction:
      return "rank";
    case MapKind::Linear:
      return "linear";
    case MapKind::SignedQuadratic:
      return "signed_quadratic";
  }
  throw std::logic_error("map_name: unreachable");
}

SourceKind parse_source(const std::string& name) {
  if (name == "std_normal") return SourceKind::StdNormal;
  if (name == "student_t6") return SourceKind::StudentT6;
  if (name == "uniform01") return SourceKind::Uniform01;
  throw std::invalid_argument("unknown source distribution \"" + name +
                              "\" (expected std_normal, student_t6 or "
                              "uniform01)");
}

MapKind parse_map(const std::string& name) {
  if (name == "rank") return MapKind::RankFunction;
  if (name == "linear") return MapKind::Linear;
  if (name == "signed_quadratic") return MapKind::SignedQuadratic;
  throw std::invalid_argument("unknown map \"" + name +
                              "\" (expected rank, linear or "
                              "signed_quadratic)");
}

double cdf(SourceKind kind, double z) {
  switch (kind) {
    case SourceKind::StdNormal:
      return 0.5 * std::erfc(-z * M_SQRT1_2);
    case SourceKind::StudentT6: {
      const double u = z / std::sqrt(6.0 + z * z);
      const double u2 = u * u;
      return 0.5 + (15.0 / 16.0) * u * (1.0 - u2 * (2.0 / 3.0 - u2 / 5.0));
    }
    case SourceKind::Uniform01:
      throw std::invalid_argument("cdf: not defined for uniform01 here");
  }
  throw std::logic_error("cdf: unreachable");
}

Eigen::MatrixXd sample(const DistributionSpec& spec, int count,
                       std::uint64_t seed) {
  spec.validate();
  if (count < 0) {
    throw std::invalid_argument("sample: count must be >= 0");
  }
  Rng rng(seed);
  Eigen::MatrixXd out(count, spec.dim);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = draw_one(spec.kind, rng);
    }
  }
  return out;
}

Eigen::VectorXd true_map(const MapSpec& map, const DistributionSpec& source,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  map.validate();
  check_map_source(map.kind, source.kind);
  if (x.size() != map.dim) {
    throw std::invalid_argument("true_map: point dimension mismatch");
  }
  Eigen::VectorXd out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    out(j) = map_one(map.kind, source.kind, x(j));
  }
  return out;
}

void true_map_rows(const MapSpec& map, const DistributionSpec& source,
                   const Eigen::Ref<const Eigen::MatrixXd>& X,
                   Eigen::MatrixXd& out) {
  map.validate();
  check_map_source(map.kind, source.kind);
  if (X.cols() != map.dim) {
    throw std::invalid_argument("true_map_rows: dimension mismatch");
  }
  out.resize(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      out(i, j) = map_one(map.kind, source.kind, X(i, j));
    }
  }
}

Eigen::MatrixXd pushforward_sample(const MapSpec& map,
                                   const DistributionSpec& source, int count,
                                   std::uint64_t seed) {
  if (map.dim != source.dim) {
    throw std::invalid_argument("pushforward_sample: map and source dims "
                                "must agree");
  }
  const Eigen::MatrixXd z = sample(source, count, seed);
  Eigen::MatrixXd out;
  true_map_rows(map, source, z, out);
  return out;
}

void write_samples_csv(const Eigen::Ref<const Eigen::MatrixXd>& samples,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_samples_csv: cannot open " +
                             path.string());
  }
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(samples(i, j));
    }
    out << '\n';
  }
  if (!out) {
    throw std::runtime_error("write_samples_csv: write failed for " +
                             path.string());
  }
}

Eigen::MatrixXd read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_samples_csv: cannot open " +
                             path.string());
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("read_samples_csv: ragged rows in " +
                               path.string());
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0
                                   : static_cast<Eigen::Index>(
                                         rows.front().size()));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
      out(i, j) = rows[static_cast<std::size_t>(i)]
                      [static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace otmap
