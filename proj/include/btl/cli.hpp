#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "btl/bounds.hpp"
#include "btl/modes.hpp"
#include "btl/spectra.hpp"

namespace btl::cli {

inline constexpr const char* kToolName = "btl";
inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitCheck = 4 };

/// One entry of the "checks" list. Which fields matter depends on `name`.
struct CheckSpec {
  std::string name;
  double tolerance = 0.0;
  /// kappa*T values, c values, or T values depending on the check
  std::vector<double> points;
  /// k_max, n_max, trials
  std::size_t count = 0;
  /// modes per trial (interlacing)
  std::size_t modes = 0;
  std::size_t n_points = 0;
  double eta_max = 1.0;
};

struct SweepConfig {
  SpectrumSpec spectrum = SpectrumSpec::lorentzian(1.0, 1.0);
  nlohmann::json spectrum_echo;
  double t_min = 0.5;
  double t_max = 30.0;
  std::size_t t_points = 60;
  std::vector<std::size_t> k_list{1};
  DiscretizationConfig discretization;
  std::vector<std::string> outputs{"capacity_curve", "eigenvalues", "opening_times", "modes"};
  std::vector<double> mode_T;
  std::size_t mode_count = 6;
  std::size_t opening_k_max = 0;  // 0: max of k_list
  std::size_t opening_coarse_points = 48;
  double opening_tolerance = 1e-6;
  std::size_t lambdas_kept = 10;
  double eta_ceiling = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
  std::uint64_t seed = 1;
  std::string units = "kappa";
  std::filesystem::path output_dir = "out";
  std::vector<CheckSpec> checks;

  bool wants(const std::string& output) const;
  unsigned worker_count() const;
  /// Canonical JSON of every setting except output_dir, defaults filled in.
  nlohmann::json echo() const;
};

/// Throws ConfigError naming the offending key. Relative table paths resolve
/// against `base_dir`.
SweepConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
SweepConfig load_config(const std::filesystem::path& path);

struct FileRecord {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::filesystem::path output_dir;
  std::vector<FileRecord> files;
  std::vector<std::pair<std::string, double>> timings;  // seconds, in run order

  nlohmann::json to_json() const;
  /// Every listed file exists with the recorded checksum.
  bool verify() const;
};

std::string sha256_file(const std::filesystem::path& path);

struct CheckRow {
  std::string check;
  std::string label;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct CheckOutcome {
  std::vector<CheckRow> rows;
  RunManifest manifest;
  bool all_pass() const;
};

struct BoundOutcome {
  std::vector<BoundReport> reports;
  RunManifest manifest;
  bool all_satisfied() const;
};

/// capacity_curve.csv, eigenvalues.csv, opening_times.csv, modes_T<T>.csv,
/// bound.csv as selected by `outputs`, then manifest.json.
RunManifest run_sweep(const SweepConfig& config);
/// check_results.csv and manifest.json.
CheckOutcome run_check(const SweepConfig& config);
/// modes_T<T>.csv and manifest.json.
RunManifest run_modes(const SweepConfig& config, double T);
/// bound.csv over the sweep grid and manifest.json.
BoundOutcome run_bound(const SweepConfig& config);

/// Rows under a fixed-width header; "PASS"/"FAIL" in the last column.
void print_check_table(std::ostream& out, const std::vector<CheckRow>& rows);

/// Runs a command and maps errors onto exit codes, writing messages to `err`.
int dispatch(const std::string& command, const std::filesystem::path& config_path,
             const std::optional<std::filesystem::path>& output_dir, std::optional<double> at_T,
             std::ostream& out, std::ostream& err);

}  // namespace btl::cli
