#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "otmap/icnn.hpp"

namespace otmap {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kFormatName = "otmap-icnn";
constexpr int kFormatVersion = 1;

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json vector_to_json(const Eigen::VectorXd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::MatrixXd matrix_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.empty()) {
    throw std::invalid_argument(std::string("icnn json: ") + what +
                                " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) {
    throw std::invalid_argument(std::string("icnn json: ") + what +
                                " rows must be non-empty arrays");
  }
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw std::invalid_argument(std::string("icnn json: ragged rows in ") +
                                  what);
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& cell = row[static_cast<std::size_t>(c)];
      if (!cell.is_number()) {
        throw std::invalid_argument(std::string("icnn json: non-numeric "
                                                "entry in ") +
                                    what);
      }
      m(r, c) = cell.get<double>();
    }
  }
  return m;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array()) {
    throw std::invalid_argument(std::string("icnn json: ") + what +
                                " must be an array");
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const auto& cell = j[static_cast<std::size_t>(i)];
    if (!cell.is_number()) {
      throw std::invalid_argument(std::string("icnn json: non-numeric "
                                              "entry in ") +
                                  what);
    }
    v(i) = cell.get<double>();
  }
  return v;
}

}  // namespace

std::string serialize_icnn(const IcnnParams& params) {
  params.validate();
  ordered_json j;
  j["format"] = kFormatName;
  j["version"] = kFormatVersion;
  j["arch"] = {{"input_dim", params.arch.input_dim},
               {"depth", params.arch.depth},
               {"width", params.arch.width},
               {"activation_alpha", params.arch.activation_alpha}};
  ordered_json layers = ordered_json::array();
  for (int k = 0; k < params.arch.depth; ++k) {
    ordered_json layer;
    layer["skip"] = matrix_to_json(params.skip_weights[k]);
    if (k >= 1) layer["nonneg"] = matrix_to_json(params.nonneg_weights[k - 1]);
    layer["bias"] = vector_to_json(params.biases[k]);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  return j.dump(2);
}

IcnnParams deserialize_icnn(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    throw std::invalid_argument(std::string("icnn json: parse error: ") +
                                e.what());
  }
  if (!j.is_object() || j.value("format", "") != kFormatName) {
    throw std::invalid_argument("icnn json: missing or wrong \"format\"");
  }
  if (j.value("version", -1) != kFormatVersion) {
    throw std::invalid_argument("icnn json: unsupported \"version\"");
  }
  if (!j.contains("arch") || !j.contains("layers")) {
    throw std::invalid_argument("icnn json: missing \"arch\" or \"layers\"");
  }
  const auto& arch_j = j["arch"];
  IcnnParams p;
  p.arch.input_dim = arch_j.value("input_dim", 0);
  p.arch.depth = arch_j.value("depth", 0);
  p.arch.width = arch_j.value("width", 0);
  p.arch.activation_alpha = arch_j.value("activation_alpha", 0.0);
  p.arch.validate();
  const auto& layers = j["layers"];
  if (!layers.is_array() ||
      static_cast<int>(layers.size()) != p.arch.depth) {
    throw std::invalid_argument("icnn json: \"layers\" must hold depth "
                                "entries");
  }
  for (int k = 0; k < p.arch.depth; ++k) {
    const auto& layer = layers[static_cast<std::size_t>(k)];
    if (!layer.contains("skip") || !layer.contains("bias")) {
      throw std::invalid_argument("icnn json: layer missing \"skip\" or "
                                  "\"bias\"");
    }
    p.skip_weights.push_back(matrix_from_json(layer["skip"], "skip"));
    if (k >= 1) {
      if (!layer.contains("nonneg")) {
        throw std::invalid_argument("icnn json: layer missing \"nonneg\"");
      }
      p.nonneg_weights.push_back(matrix_from_json(layer["nonneg"], "nonneg"));
    }
    p.biases.push_back(vector_from_json(layer["bias"], "bias"));
  }
  p.validate();
  return p;
}

void save_icnn(const IcnnParams& params, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("save_icnn: cannot open " + path.string());
  }
  out << serialize_icnn(params) << '\n';
  if (!out) {
    throw std::runtime_error("save_icnn: write failed for " + path.string());
  }
}

IcnnParams load_icnn(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_icnn: cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_icnn(buffer.str());
}

}  // namespace otmap
