#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btl/modes.hpp"
#include "btl/quadrature.hpp"
#include "btl/spectra.hpp"

namespace btl {

/// K profiles sampled on a shared time quadrature grid over [-T/2, T/2].
struct ModeSet {
  QuadratureRule rule;
  Eigen::MatrixXcd profiles;  // n x K

  std::size_t size() const noexcept { return static_cast<std::size_t>(profiles.cols()); }
  double duration() const noexcept { return rule.upper - rule.lower; }
  /// max |<f_i, f_j> - delta_ij| under the grid weights.
  double orthonormality_error() const;

  /// The first K modes of a basis (all if K == 0).
  static ModeSet from_basis(const ModeBasis& basis, std::size_t K = 0);
};

/// Frequency quadrature covering the band where eta matters, fine enough for
/// profiles of duration T.
struct FrequencyGrid {
  std::vector<double> omega;
  std::vector<double> weight;
  /// Panel boundaries; each panel holds the same number of consecutive nodes.
  std::vector<double> panel_edges;
  std::size_t size() const noexcept { return omega.size(); }
};

FrequencyGrid make_frequency_grid(const SpectrumSpec& spec, double T);

/// Profiles on a frequency grid, stored premultiplied by sqrt(weight) so that
/// inner products are plain dot products.
struct FrequencyModes {
  FrequencyGrid grid;
  Eigen::MatrixXcd values;  // M x K
  std::size_t size() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

FrequencyModes to_frequency(const ModeSet& modes, const FrequencyGrid& grid);

/// Transmitted profiles g_k(w) = tau*(w) f_k(w), tau = sqrt(eta).
FrequencyModes transmitted(const FrequencyModes& inputs, const SpectrumSpec& spec);

struct ScatteringAnalysis {
  Eigen::MatrixXcd S;                    // readouts x inputs, S_lk = <g_k, h_l>
  std::vector<double> singular_values;   // descending
  std::vector<double> gram_eigenvalues;  // descending
  double capacity = 0.0;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

/// S_lk = <g_k, h_l>. Readouts given in the time domain share the inputs' grid.
Eigen::MatrixXcd scattering_matrix(const ModeSet& inputs, const ModeSet& readouts, const SpectrumSpec& spec);
Eigen::MatrixXcd scattering_matrix(const FrequencyModes& transmitted_inputs, const FrequencyModes& readouts);

ScatteringAnalysis analyze_scattering(const FrequencyModes& transmitted_inputs, const FrequencyModes& readouts);
ScatteringAnalysis analyze_scattering(const ModeSet& inputs, const ModeSet& readouts, const SpectrumSpec& spec);

/// sum_k q(sigma_k^2).
double multimode_capacity(const ScatteringAnalysis& analysis);
double multimode_capacity(const std::vector<double>& singular_values);

struct OptimalReadout {
  Eigen::MatrixXcd U;           // inputs' = inputs * U (columns), descending lambdas
  ModeSet rotated_inputs;
  FrequencyModes transmitted;   // g'_k
  FrequencyModes readouts;      // h'_k = g'_k / sqrt(lambda_k), dropped modes omitted
  std::vector<double> lambdas;  // descending
  std::vector<std::size_t> dropped;
  /// max |<g'_i, g'_j> - lambda_i delta_ij|
  double orthogonality_error = 0.0;
};

OptimalReadout optimal_readout(const ModeSet& inputs, const SpectrumSpec& spec);
OptimalReadout optimal_readout(const ModeSet& inputs, const SpectrumSpec& spec, const FrequencyGrid& grid);

struct InterlacingReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t violations = 0;
  /// max over trials and k of sorted sigma_k^2 - sorted lambda_k (positive = violation)
  double max_violation = 0.0;
  /// max decrease of any sigma_k when a readout basis is enlarged
  double max_enlargement_violation = 0.0;
  /// max |sigma_k^2 - lambda_k| for the optimal readout
  double optimal_equality_error = 0.0;
  /// max sigma over readouts orthogonal to every g_k
  double orthogonal_readout_sigma = 0.0;
  std::vector<double> lambdas;
};

InterlacingReport interlacing_check(const ModeSet& inputs, const SpectrumSpec& spec, std::size_t trials,
                                    std::uint64_t seed, unsigned threads = 1, double tolerance = 1e-9);

}  // namespace btl
