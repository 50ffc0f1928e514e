#include "otmap/cli.hpp"

#include <glob.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "otmap/io.hpp"

namespace otmap {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

void check_keys(const ordered_json& obj,
                std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail("unknown key \"" + it.key() + "\" in " + where);
    }
  }
}

int get_int(const ordered_json& obj, const char* key, int fallback,
            const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    fail(std::string("\"") + key + "\" in " + where + " must be an integer");
  }
  return v.get<int>();
}

std::uint64_t get_uint64(const ordered_json& obj, const char* key,
                         std::uint64_t fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() ||
      (!v.is_number_unsigned() && v.get<long long>() < 0)) {
    fail(std::string("\"") + key + "\" in " + where +
         " must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double get_double(const ordered_json& obj, const char* key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    fail(std::string("\"") + key + "\" in " + where + " must be a number");
  }
  return v.get<double>();
}

std::string get_string(const ordered_json& obj, const char* key,
                       const std::string& fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    fail(std::string("\"") + key + "\" in " + where + " must be a string");
  }
  return v.get<std::string>();
}

bool get_bool(const ordered_json& obj, const char* key, bool fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_boolean()) {
    fail(std::string("\"") + key + "\" in " + where + " must be a boolean");
  }
  return v.get<bool>();
}

ExperimentConfig parse_experiment(const ordered_json& j, std::size_t index,
                                  Profile default_profile,
                                  const std::optional<Profile>& override) {
  const std::string where = "experiments[" + std::to_string(index) + "]";
  if (!j.is_object()) fail(where + " must be an object");
  check_keys(j,
             {"name", "dim", "source", "map", "estimator", "n", "N",
              "repetitions", "eval_samples", "base_seed", "profile", "arch",
              "train"},
             where);

  ExperimentConfig cfg;
  cfg.name = get_string(j, "name", "experiment" + std::to_string(index),
                        where);
  cfg.dim = get_int(j, "dim", 1, where);
  try {
    cfg.source = parse_source(get_string(j, "source", "std_normal", where));
    cfg.map = parse_map(get_string(j, "map", "rank", where));
    cfg.estimator =
        parse_estimator(get_string(j, "estimator", "original", where));
    cfg.profile = parse_profile(
        get_string(j, "profile", profile_name(default_profile), where));
  } catch (const std::invalid_argument& e) {
    fail(std::string(e.what()) + " in " + where);
  }
  if (override.has_value()) cfg.profile = *override;
  cfg.n = get_int(j, "n", 100, where);
  cfg.N = get_int(j, "N", 100, where);
  cfg.repetitions = get_int(j, "repetitions", 20, where);
  cfg.eval_samples = get_int(j, "eval_samples", 0, where);
  cfg.base_seed = get_uint64(j, "base_seed", 42, where);

  if (j.contains("arch")) {
    const auto& a = j.at("arch");
    const std::string arch_where = where + ".arch";
    if (!a.is_object()) fail(arch_where + " must be an object");
    check_keys(a, {"depth", "width", "activation_alpha"}, arch_where);
    cfg.arch.depth = get_int(a, "depth", cfg.arch.depth, arch_where);
    cfg.arch.width = get_int(a, "width", cfg.arch.width, arch_where);
    cfg.arch.activation_alpha = get_double(
        a, "activation_alpha", cfg.arch.activation_alpha, arch_where);
  }

  cfg.train = make_train_config(cfg.profile);
  if (j.contains("train")) {
    const auto& t = j.at("train");
    const std::string train_where = where + ".train";
    if (!t.is_object()) fail(train_where + " must be an object");
    check_keys(t,
               {"epochs", "batch_x", "batch_y", "learning_rate",
                "conjugate_steps", "conjugate_step_size", "warm_start"},
               train_where);
    cfg.train.epochs = get_int(t, "epochs", cfg.train.epochs, train_where);
    cfg.train.batch_x = get_int(t, "batch_x", cfg.train.batch_x, train_where);
    cfg.train.batch_y = get_int(t, "batch_y", cfg.train.batch_y, train_where);
    cfg.train.adam.learning_rate = get_double(
        t, "learning_rate", cfg.train.adam.learning_rate, train_where);
    cfg.train.conjugate.steps =
        get_int(t, "conjugate_steps", cfg.train.conjugate.steps, train_where);
    cfg.train.conjugate.step_size =
        get_double(t, "conjugate_step_size", cfg.train.conjugate.step_size,
                   train_where);
    cfg.train.warm_start =
        get_bool(t, "warm_start", cfg.train.warm_start, train_where);
  }

  cfg.finalize();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string(e.what()) + " in " + where);
  }
  return cfg;
}

ordered_json canonical_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["dim"] = cfg.dim;
  j["source"] = source_name(cfg.source);
  j["map"] = map_name(cfg.map);
  j["estimator"] = estimator_name(cfg.estimator);
  j["n"] = cfg.n;
  j["N"] = cfg.N;
  j["repetitions"] = cfg.repetitions;
  j["eval_samples"] = cfg.eval_samples;
  j["base_seed"] = cfg.base_seed;
  j["profile"] = profile_name(cfg.profile);
  j["arch"] = {{"input_dim", cfg.arch.input_dim},
               {"depth", cfg.arch.depth},
               {"width", cfg.arch.width},
               {"activation_alpha", cfg.arch.activation_alpha}};
  j["train"] = {{"epochs", cfg.train.epochs},
                {"batch_x", cfg.train.batch_x},
                {"batch_y", cfg.train.batch_y},
                {"learning_rate", cfg.train.adam.learning_rate},
                {"conjugate_steps", cfg.train.conjugate.steps},
                {"conjugate_step_size", cfg.train.conjugate.step_size},
                {"warm_start", cfg.train.warm_start}};
  return j;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    out.push_back(ok ? c : '_');
  }
  if (out.empty()) out = "experiment";
  return out;
}

void write_summary_json(const fs::path& path, const EvalReport& report) {
  ordered_json j;
  j["name"] = report.config.name;
  j["config"] = canonical_config_json(report.config);
  j["per_rep_loss"] = report.per_rep_loss;
  j["per_rep_wall_time"] = report.per_rep_wall_time;
  j["mean"] = report.mean;
  j["sd"] = report.sd;
  j["total_wall_time_seconds"] = report.total_wall_time_seconds;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string());
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

}  // namespace

CliConfigFile parse_config_text(const std::string& json_text,
                                const std::optional<Profile>& profile_override) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const ordered_json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("top level must be an object");
  check_keys(j, {"out_dir", "threads", "profile", "experiments"},
             "the top-level object");

  CliConfigFile file;
  file.out_dir = get_string(j, "out_dir", "", "the top-level object");
  file.threads = get_int(j, "threads", 0, "the top-level object");
  Profile default_profile = Profile::Fast;
  if (j.contains("profile")) {
    try {
      default_profile = parse_profile(
          get_string(j, "profile", "fast", "the top-level object"));
    } catch (const std::invalid_argument& e) {
      fail(std::string(e.what()) + " in the top-level object");
    }
  }

  if (!j.contains("experiments")) fail("missing \"experiments\"");
  const auto& exps = j.at("experiments");
  if (!exps.is_array() || exps.empty()) {
    fail("\"experiments\" must be a non-empty array");
  }
  for (std::size_t i = 0; i < exps.size(); ++i) {
    file.experiments.push_back(
        parse_experiment(exps[i], i, default_profile, profile_override));
  }
  return file;
}

CliConfigFile load_config_file(const std::string& path,
                               const std::optional<Profile>& profile_override) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("config: cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), profile_override);
}

std::string config_hash_hex(const ExperimentConfig& config) {
  const std::string text = canonical_config_json(config).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i) {
    hex[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return hex;
}

std::string experiment_basename(const ExperimentConfig& config) {
  return sanitize_name(config.name) + "-" + config_hash_hex(config);
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  CliConfigFile file;
  try {
    file = load_config_file(options.config_path, options.profile_override);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  const std::string out_dir =
      !options.out_dir.empty() ? options.out_dir : file.out_dir;
  if (out_dir.empty()) {
    err << "error: no output directory; pass --out or set \"out_dir\" in "
           "the config\n";
    return 2;
  }
  const int threads = resolve_thread_count(
      options.threads > 0 ? options.threads : file.threads);

  try {
    fs::create_directories(out_dir);
  } catch (const std::exception& e) {
    err << "error: cannot create " << out_dir << ": " << e.what() << '\n';
    return 1;
  }

  for (const ExperimentConfig& cfg : file.experiments) {
    const std::string base = experiment_basename(cfg);
    const fs::path csv_path = fs::path(out_dir) / (base + ".csv");
    const fs::path json_path = fs::path(out_dir) / (base + ".json");
    if (!options.force && fs::exists(csv_path) && fs::exists(json_path)) {
      out << cfg.name << ": outputs exist, skipping (use --force to rerun)\n";
      continue;
    }
    try {
      const EvalReport report = run_experiment(cfg, threads);
      std::vector<ResultRow> rows;
      rows.reserve(report.per_rep_loss.size());
      for (std::size_t r = 0; r < report.per_rep_loss.size(); ++r) {
        ResultRow row;
        row.dim = report.config.dim;
        row.source = report.config.source;
        row.map = report.config.map;
        row.estimator = report.config.estimator;
        row.n = report.config.n;
        row.N = report.config.N;
        row.rep = static_cast<int>(r);
        row.l2_loss = report.per_rep_loss[r];
        row.wall_time_s = report.per_rep_wall_time[r];
        rows.push_back(row);
      }
      write_results_csv(rows, csv_path);
      write_summary_json(json_path, report);
      out << cfg.name << ": mean=" << format_double(report.mean)
          << " sd=" << format_double(report.sd) << " over "
          << report.per_rep_loss.size() << " reps ("
          << format_double(report.total_wall_time_seconds) << " s) -> "
          << csv_path.string() << '\n';
    } catch (const std::exception& e) {
      err << "error: experiment \"" << cfg.name << "\" failed: " << e.what()
          << '\n';
      return 1;
    }
  }
  return 0;
}

int cmd_table(const TableOptions& options, std::ostream& out,
              std::ostream& err) {
  if (options.results_glob.empty() || options.out_path.empty()) {
    err << "error: table needs --glob and --out\n";
    return 2;
  }
  glob_t g;
  const int rc = glob(options.results_glob.c_str(), 0, nullptr, &g);
  if (rc == GLOB_NOMATCH) {
    err << "error: no files match \"" << options.results_glob << "\"\n";
    return 1;
  }
  if (rc != 0) {
    err << "error: glob failed for \"" << options.results_glob << "\"\n";
    return 1;
  }

  using CellKey = std::tuple<std::string, std::string, std::string, int, int, int>;
  std::map<CellKey, std::vector<double>> cells;
  try {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) {
      const std::vector<ResultRow> rows = read_results_csv(g.gl_pathv[i]);
      for (const ResultRow& r : rows) {
        cells[{estimator_name(r.estimator), source_name(r.source),
               map_name(r.map), r.dim, r.n, r.N}]
            .push_back(r.l2_loss);
      }
    }
  } catch (const std::exception& e) {
    globfree(&g);
    err << "error: " << e.what() << '\n';
    return 1;
  }
  globfree(&g);

  std::ofstream table(options.out_path);
  if (!table) {
    err << "error: cannot open " << options.out_path << '\n';
    return 1;
  }
  table << "estimator,source,map,dim,n,N,mean,sd,reps\n";
  for (const auto& [key, losses] : cells) {
    // Same accumulation order as EvalReport so a single-file table matches
    // its summary JSON bit for bit.
    double mean = 0.0;
    for (double v : losses) mean += v;
    mean /= static_cast<double>(losses.size());
    double sd = 0.0;
    if (losses.size() >= 2) {
      for (double v : losses) sd += (v - mean) * (v - mean);
      sd = std::sqrt(sd / static_cast<double>(losses.size() - 1));
    }
    table << std::get<0>(key) << ',' << std::get<1>(key) << ','
          << std::get<2>(key) << ',' << std::get<3>(key) << ','
          << std::get<4>(key) << ',' << std::get<5>(key) << ','
          << format_double(mean) << ',' << format_double(sd) << ','
          << losses.size() << '\n';
  }
  if (!table) {
    err << "error: write failed for " << options.out_path << '\n';
    return 1;
  }
  out << "wrote " << cells.size() << " cells to " << options.out_path << '\n';
  return 0;
}

}  // namespace otmap
