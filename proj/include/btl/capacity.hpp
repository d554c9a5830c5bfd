#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "btl/modes.hpp"
#include "btl/spectra.hpp"

namespace btl {

/// One-way capacity of a pure-loss channel, max{0, log2(eta / (1 - eta))};
/// +infinity at eta = 1.
double pure_loss_capacity(double eta);

struct CapacityRate {
  double T = 0.0;
  double Q = 0.0;
  /// Q_k for k = 1, 2, ... over the channels with lambda_k > 1/2.
  std::vector<double> prefix;
  /// Set when a lambda above the ceiling was clamped before evaluating q.
  bool clamped = false;

  /// Q_k for any k >= 1 (equals Q once k exceeds the open channels).
  double top(std::size_t k) const;
};

/// Q(T) = (1/T) sum_k q(lambda_k). Lambdas above `eta_ceiling` are evaluated
/// at the ceiling and flagged.
CapacityRate capacity_rate(const std::vector<double>& lambdas, double T, double eta_ceiling = 1.0);
CapacityRate capacity_rate(const ModeBasis& basis, double eta_ceiling = 1.0);

/// Q^max = (1/2pi) int q(eta(w)) dw. Throws DivergenceError when eta = 1 on
/// an interval.
double continuous_time_capacity(const SpectrumSpec& spec);

struct OpeningTime {
  std::size_t n = 0;
  double T = 0.0;
};

struct OpeningSearch {
  std::size_t coarse_points = 48;
  double relative_tolerance = 1e-4;
  unsigned threads = 1;
};

/// T at which lambda_n first exceeds 1/2 for n = 1..k_max, by bisection on T.
/// Channels already open at the lower end or never open are omitted.
std::vector<OpeningTime> find_opening_times(const SpectrumSpec& spec, std::pair<double, double> T_range,
                                            std::size_t k_max, const DiscretizationConfig& config,
                                            const OpeningSearch& search = {});

struct OptimalDuration {
  double T = 0.0;
  double Q = 0.0;
};

struct DurationSearch {
  std::size_t coarse_points = 64;
  double relative_tolerance = 1e-4;
  unsigned threads = 1;
};

/// Maximizes Q_k(T) over the bracket: coarse scan, then golden section in the best basin.
OptimalDuration optimal_duration(const SpectrumSpec& spec, std::size_t k, std::pair<double, double> T_bracket,
                                 const DiscretizationConfig& config, const DurationSearch& search = {});

struct CapacityCurve {
  std::vector<double> T;
  std::vector<std::vector<double>> lambdas;  // first K per T
  std::vector<double> Q;
  std::vector<std::size_t> k_list;
  std::vector<std::vector<double>> Qk;  // Qk[i][j] = Q_{k_list[j]}(T[i])
  std::vector<OpeningTime> opening_times;
  std::vector<bool> clamped_rows;
  bool clamped = false;
};

struct SweepOptions {
  std::size_t lambdas_kept = 10;
  double eta_ceiling = 1.0;
  unsigned threads = 1;
};

/// Evenly spaced T in [t_min, t_max]; the kernel is built once for the whole range.
CapacityCurve capacity_sweep(const SpectrumSpec& spec, double t_min, double t_max, std::size_t t_points,
                             std::vector<std::size_t> k_list, const DiscretizationConfig& config,
                             const SweepOptions& options = {});

/// Columns: T, Q, Q_k for each k in k_list, clamped (0/1).
void write_capacity_csv(std::ostream& out, const CapacityCurve& curve);
/// Columns: T, lambda_1..lambda_K.
void write_eigenvalue_csv(std::ostream& out, const CapacityCurve& curve);
/// Columns: n, T_n.
void write_opening_csv(std::ostream& out, const std::vector<OpeningTime>& openings);

}  // namespace btl
