#include "otmap/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace otmap {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) {
    throw std::runtime_error("format_double: to_chars failed");
  }
  return std::string(buf, res.ptr);
}

void write_results_csv(const std::vector<ResultRow>& rows,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_results_csv: cannot open " +
                             path.string());
  }
  out << kResultsCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.dim << ',' << source_name(r.source) << ',' << map_name(r.map)
        << ',' << estimator_name(r.estimator) << ',' << r.n << ',' << r.N
        << ',' << r.rep << ',' << format_double(r.l2_loss) << ','
        << format_double(r.wall_time_s) << '\n';
  }
  if (!out) {
    throw std::runtime_error("write_results_csv: write failed for " +
                             path.string());
  }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("read_results_csv: cannot open " +
                             path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != kResultsCsvHeader) {
    throw std::runtime_error("read_results_csv: bad header in " +
                             path.string());
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) {
      throw std::runtime_error("read_results_csv: expected 9 columns in " +
                               path.string());
    }
    ResultRow r;
    r.dim = std::stoi(cells[0]);
    r.source = parse_source(cells[1]);
    r.map = parse_map(cells[2]);
    r.estimator = parse_estimator(cells[3]);
    r.n = std::stoi(cells[4]);
    r.N = std::stoi(cells[5]);
    r.rep = std::stoi(cells[6]);
    r.l2_loss = std::stod(cells[7]);
    r.wall_time_s = std::stod(cells[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace otmap
