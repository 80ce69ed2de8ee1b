#pragma once

#include "gevlab/el_solver.hpp"
#include "gevlab/fourier_grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gevlab {

/// Bad or unknown configuration input (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  // [grid]
  int dim = 3;
  int n = 32;
  // [initial_data]
  double m0 = 0.05;
  double u_share = 0.5;
  double alpha = 0.0;
  double k_c = 4.0;
  Eigen::Vector3d d_bar = Eigen::Vector3d::UnitZ();
  std::uint64_t seed = 42;
  // [solver]
  double dt = 2.5e-3;
  Scheme scheme = Scheme::etd_midpoint;
  double cfl = 1.0;
  bool renormalize = false;
  double t_end = 0.5;
  // [picard]
  PicardConfig picard;
  double large_m0 = 300.0;
  int max_halvings = 2;
  // [norms]
  double p = 2.0;
  double q = 2.0;
  double theta = 0.5;
  double sample_interval = 0.05;
  std::vector<double> decay_times{0.05, 0.1, 0.2, 0.4};
  std::vector<int> orders{1, 2};
  int kernel_n = 128;
  int kernel_check_n = 256;
  double kernel_box_factor = 16.0;
  // [output]
  std::string out_dir = "gevlab_out";
  bool csv = true;
  int snapshot_every = 0;

  /// Admissible (p, q), positive sizes; throws ConfigError.
  void validate() const;
  GridSpec grid() const { return GridSpec::make(dim, n); }
  InitialDataSpec initial_data() const;
};

/// INI text with sections [grid] [initial_data] [solver] [picard] [norms] [output].
/// Missing keys keep their defaults; unknown sections or keys throw ConfigError.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Every key with its default value.
std::string default_config_text();

struct CheckRecord {
  std::string name;
  /// short tag of the property being checked
  std::string claim;
  double value = 0.0;
  double target = 0.0;
  /// "<=", ">=", "==" (within target) or "info"
  std::string relation = "info";
  bool pass = true;
  bool self_regression = false;
};

struct SeriesRow {
  double t;
  std::string name;
  double value;
};

struct ExperimentReport {
  std::string suite;
  std::vector<CheckRecord> checks;
  std::vector<SeriesRow> series;
  std::vector<std::string> notes;

  void check_le(const std::string& name, const std::string& claim, double value, double bound);
  void check_ge(const std::string& name, const std::string& claim, double value, double bound);
  void check_true(const std::string& name, const std::string& claim, bool ok, double value = 0.0);
  void info(const std::string& name, const std::string& claim, double value, bool self_regression = false);
  void append(const ExperimentReport& other);

  bool passed() const;
  const CheckRecord* find(const std::string& name) const;
  nlohmann::ordered_json to_json(const ExperimentConfig& cfg) const;
  std::string to_csv() const;
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);

/// Writes <dir>/<suite>_report.json and, if enabled, <dir>/<suite>_series.csv.
void write_report(const ExperimentReport& r, const ExperimentConfig& cfg, const std::filesystem::path& dir);

ExperimentReport run_kernel_suite(const ExperimentConfig& cfg);
ExperimentReport run_bilinear_suite(const ExperimentConfig& cfg);
ExperimentReport run_lp_toolkit_suite(const ExperimentConfig& cfg);

/// States of one small-data march, kept at the sample times.
struct SmallDataRun {
  double m0 = 0.0;
  std::vector<SolverState> samples;
  BlowupMonitor::Report monitor;
  double max_div = 0.0;
  double max_drift = 0.0;
};

/// Marches the configured initial data to t_end; snapshots are written to
/// out_dir when snapshot_every > 0.
SmallDataRun run_small_data(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir = {});

ExperimentReport run_gevrey_tracking(const ExperimentConfig& cfg, const SmallDataRun* reuse = nullptr);
ExperimentReport run_decay_experiment(const ExperimentConfig& cfg, const SmallDataRun* reuse = nullptr);
ExperimentReport run_picard_contraction(const ExperimentConfig& cfg);

/// Distance used to compare two solution series: A (L~inf parts) + B (L~1 parts) of the difference.
double series_distance(const std::vector<double>& t, const std::vector<Field>& u1, const std::vector<Field>& d1,
                       const std::vector<Field>& u2, const std::vector<Field>& d2, double p, double q,
                       const DyadicDecomposition& dec);

/// CLI entry point; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace gevlab
