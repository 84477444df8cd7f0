#pragma once

// Config-driven experiment runner: parses the JSON config schema, executes a
// command pipeline, and emits byte-stable reports (manifest.json,
// summary.json, *.csv).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orbitherm/pressure.hpp"

namespace orbitherm {

// Schema/validation failure; the CLI maps it to exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string canonical_json;   // sorted-key dump of the effective config
  std::string config_hash;      // fnv1a-64 over the canonical dump minus out/threads

  std::string system_name;
  std::map<std::string, double> system_params;

  std::string potential_name = "zero";
  double potential_value = 0.0;
  int potential_axis = 0;
  std::vector<double> cylinder_values;

  Window window{6, 12};
  std::string method = "auto";      // symbolic | newton | auto
  int seed_resolution = 0;          // 0 = per-dimension default
  std::optional<int> kcap_override;

  std::vector<double> alphas{0.9};
  std::vector<double> cs{1.0};
  std::optional<double> beta;

  std::vector<double> epsilons;
  bool separated_use_cloud = false;
  double spacing_factor = 4.0;
  long separated_cloud_samples = 20000;
  int separated_cloud_depth = 8;

  std::optional<Box> region_box;    // else the full reference region

  long escape_samples = 0;
  int escape_n_max = 14;
  Window escape_window{8, 14};

  std::vector<double> scales;
  std::string cloud_source = "survivor";  // survivor | periodic | orbit
  int cloud_depth = 10;
  long cloud_samples = 20000;
  bool cloud_two_sided = true;

  std::vector<double> volume_alphas;
  std::vector<double> volume_cs;

  std::optional<Eigen::MatrixXi> shift_transitions;
  std::vector<double> shift_weights;

  int grid_resolution = 128;        // beta0 / fallback-minimum grid
  std::optional<uint64_t> seed;
  int threads = 1;
  std::string out_dir = "out";
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

// CLI overrides (--seed/--threads/--out); the canonical dump and hash are
// recomputed so the manifest reflects the effective run.
ExperimentConfig with_overrides(const ExperimentConfig& config,
                                std::optional<uint64_t> seed,
                                std::optional<int> threads,
                                std::optional<std::string> out_dir);

struct LedgerCheck {
  std::string name;
  bool pass = false;
  std::string details;
};

struct ReportBundle {
  std::string command;
  std::string config_hash;
  std::string canonical_config;
  std::string summary_json;
  std::vector<std::pair<std::string, std::string>> csv_files;  // name -> content
  std::vector<LedgerCheck> checks;
  // Set instead of throwing when a pipeline ends in a runtime status
  // ("no saddles at this alpha"); the CLI still emits, then exits 3.
  std::optional<std::string> status_error;
};

extern const char* const kCommands[8];  // orbits pressure separated volume
                                        // escape boxdim bound oracle

ReportBundle run_experiment(const ExperimentConfig& config, const std::string& command);

// Writes manifest.json, summary.json and the CSV tables under out_dir;
// returns the paths written. Byte-identical across reruns of the same config
// and seed (set SOURCE_DATE_EPOCH to pin the manifest timestamp).
std::vector<std::string> emit_report(const ReportBundle& bundle,
                                     const std::string& out_dir);

std::string format_sig12(double v);  // %.12g

}  // namespace orbitherm
