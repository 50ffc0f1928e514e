#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "otmap/eval.hpp"

namespace otmap {

// Parsed experiment config file. See the README for the JSON schema.
// Unknown keys anywhere in the file are rejected with an error that names
// the key and its location.
struct CliConfigFile {
  std::string out_dir;  // empty when the file does not set one
  int threads = 0;      // 0 when the file does not set one
  std::vector<ExperimentConfig> experiments;
};

// Parses config JSON text. `profile_override` replaces every experiment's
// profile before the per-experiment "train" overrides are applied.
CliConfigFile parse_config_text(const std::string& json_text,
                                const std::optional<Profile>& profile_override =
                                    std::nullopt);
CliConfigFile load_config_file(const std::string& path,
                               const std::optional<Profile>& profile_override =
                                   std::nullopt);

// Hash of the resolved science settings of an experiment (everything except
// its name), as 16 hex digits of FNV-1a 64. Used to make output filenames
// idempotent: rerunning an unchanged config maps to the same files.
std::string config_hash_hex(const ExperimentConfig& config);

// Output basename "<sanitized-name>-<hash>" for an experiment.
std::string experiment_basename(const ExperimentConfig& config);

struct RunOptions {
  std::string config_path;
  std::string out_dir;  // overrides the config file when non-empty
  std::optional<Profile> profile_override;
  int threads = 0;  // overrides the config file when > 0
  bool force = false;
};

// Runs every experiment in the config, writing per-repetition results to
// <out>/<basename>.csv and a summary to <out>/<basename>.json. Existing
// outputs are kept (and the experiment skipped) unless force is set.
// Returns 0 on success, 2 on a config error, 1 on a runtime failure.
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct TableOptions {
  std::string results_glob;
  std::string out_path;
};

// Aggregates results CSVs matching a filesystem glob into one summary CSV
// with per-cell mean and sample SD over all repetitions found.
int cmd_table(const TableOptions& options, std::ostream& out,
              std::ostream& err);

}  // namespace otmap
