#include "btl/multimode.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "btl/capacity.hpp"
#include "btl/error.hpp"
#include "btl/fourier.hpp"
#include "btl/parallel.hpp"

namespace btl {

namespace {

using C = std::complex<double>;

constexpr std::size_t kPanelOrder = 8;
constexpr double kBandLevel = 1e-6;
constexpr double kDropLevel = 1e-12;

std::vector<double> sorted_singular_values(const Eigen::MatrixXcd& S) {
  if (S.size() == 0) return {};
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(S);
  const Eigen::VectorXd s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

Eigen::MatrixXcd orthonormal_columns(const Eigen::MatrixXcd& A) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(A.rows(), A.cols());
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Eigen::MatrixXcd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXcd Z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) Z(i, j) = C(n(rng), n(rng));
  }
  return Z;
}

void check_same_grid(const FrequencyModes& a, const FrequencyModes& b) {
  if (a.grid.omega != b.grid.omega || a.values.rows() != b.values.rows()) {
    throw DimensionError("profiles live on different frequency grids");
  }
}

}  // namespace

double ModeSet::orthonormality_error() const {
  Eigen::VectorXd w(static_cast<Eigen::Index>(rule.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rule.weights[static_cast<std::size_t>(i)];
  const Eigen::MatrixXcd gram = profiles.adjoint() * w.asDiagonal() * profiles;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

ModeSet ModeSet::from_basis(const ModeBasis& basis, std::size_t K) {
  ModeSet set;
  set.rule.kind = basis.rule;
  set.rule.lower = -0.5 * basis.T;
  set.rule.upper = 0.5 * basis.T;
  set.rule.nodes = basis.grid;
  set.rule.weights = basis.weights;
  const auto cols = K == 0 ? basis.profiles.cols() : std::min<Eigen::Index>(static_cast<Eigen::Index>(K), basis.profiles.cols());
  set.profiles = basis.profiles.leftCols(cols);
  return set;
}

FrequencyGrid make_frequency_grid(const SpectrumSpec& spec, double T) {
  if (!(T > 0.0)) throw DomainError("duration T must be > 0");
  auto [lo, hi] = spec.support();
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    const double w = spec.cutoff(kBandLevel * spec.peak());
    lo = -w;
    hi = w;
  }
  std::vector<double> breaks{lo, hi};
  for (double b : {0.0, spec.peak_location(), -spec.peak_location()}) {
    if (b > lo && b < hi) breaks.push_back(b);
  }
  for (double b : spec.breakpoints()) {
    if (b > lo && b < hi) breaks.push_back(b);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  const double width = std::min(std::numbers::pi / T, 0.25 * spec.half_max_width());
  const QuadratureRule ref = gauss_legendre(kPanelOrder, -1.0, 1.0);
  FrequencyGrid grid;
  grid.panel_edges.push_back(breaks.front());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    const auto pieces = static_cast<std::size_t>(std::ceil((b - a) / width));
    const double h = (b - a) / static_cast<double>(pieces);
    for (std::size_t s = 0; s < pieces; ++s) {
      const double mid = a + h * (static_cast<double>(s) + 0.5);
      for (std::size_t i = 0; i < kPanelOrder; ++i) {
        grid.omega.push_back(mid + 0.5 * h * ref.nodes[i]);
        grid.weight.push_back(0.5 * h * ref.weights[i]);
      }
      grid.panel_edges.push_back(s + 1 == pieces ? b : a + h * static_cast<double>(s + 1));
    }
  }
  return grid;
}

FrequencyModes to_frequency(const ModeSet& modes, const FrequencyGrid& grid) {
  if (modes.profiles.rows() != static_cast<Eigen::Index>(modes.rule.size())) {
    throw DimensionError("profile rows do not match the time grid");
  }
  const TimeToFrequency transform(modes.rule);
  FrequencyModes out;
  out.grid = grid;
  out.values = transform.apply(modes.profiles, grid.omega);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    const double scale = std::abs(grid.omega[m]) <= transform.nyquist() ? std::sqrt(grid.weight[m]) : 0.0;
    out.values.row(static_cast<Eigen::Index>(m)) *= scale;
  }
  return out;
}

FrequencyModes transmitted(const FrequencyModes& inputs, const SpectrumSpec& spec) {
  FrequencyModes out = inputs;
  for (std::size_t m = 0; m < inputs.grid.size(); ++m) {
    out.values.row(static_cast<Eigen::Index>(m)) *= spec.amplitude(inputs.grid.omega[m]);
  }
  return out;
}

Eigen::MatrixXcd scattering_matrix(const FrequencyModes& transmitted_inputs, const FrequencyModes& readouts) {
  check_same_grid(transmitted_inputs, readouts);
  return (transmitted_inputs.values.adjoint() * readouts.values).transpose();
}

Eigen::MatrixXcd scattering_matrix(const ModeSet& inputs, const ModeSet& readouts, const SpectrumSpec& spec) {
  if (inputs.rule.nodes != readouts.rule.nodes || inputs.rule.weights != readouts.rule.weights) {
    throw DimensionError("inputs and readouts must share one time grid");
  }
  const FrequencyGrid grid = make_frequency_grid(spec, inputs.duration());
  return scattering_matrix(transmitted(to_frequency(inputs, grid), spec), to_frequency(readouts, grid));
}

double multimode_capacity(const std::vector<double>& singular_values) {
  double total = 0.0;
  for (double s : singular_values) {
    const double eta = s * s;
    if (eta > 1.0 + 1e-9) throw DomainError("singular value above 1; scattering matrix is not a contraction");
    total += pure_loss_capacity(std::min(eta, 1.0));
  }
  return total;
}

double multimode_capacity(const ScatteringAnalysis& analysis) {
  return multimode_capacity(analysis.singular_values);
}

ScatteringAnalysis analyze_scattering(const FrequencyModes& transmitted_inputs, const FrequencyModes& readouts) {
  ScatteringAnalysis a;
  a.S = scattering_matrix(transmitted_inputs, readouts);
  a.singular_values = sorted_singular_values(a.S);
  const Eigen::MatrixXcd M = transmitted_inputs.values.adjoint() * transmitted_inputs.values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M, Eigen::EigenvaluesOnly);
  a.gram_eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(a.gram_eigenvalues.begin(), a.gram_eigenvalues.end(), std::greater<>());
  a.capacity = multimode_capacity(a.singular_values);
  return a;
}

ScatteringAnalysis analyze_scattering(const ModeSet& inputs, const ModeSet& readouts, const SpectrumSpec& spec) {
  if (inputs.rule.nodes != readouts.rule.nodes) throw DimensionError("inputs and readouts must share one time grid");
  const FrequencyGrid grid = make_frequency_grid(spec, inputs.duration());
  return analyze_scattering(transmitted(to_frequency(inputs, grid), spec), to_frequency(readouts, grid));
}

std::string ScatteringAnalysis::to_json() const {
  nlohmann::json j;
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index r = 0; r < S.rows(); ++r) {
    nlohmann::json rr = nlohmann::json::array(), ir = nlohmann::json::array();
    for (Eigen::Index c = 0; c < S.cols(); ++c) {
      rr.push_back(S(r, c).real());
      ir.push_back(S(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ir);
  }
  j["S"] = {{"re", re}, {"im", im}};
  j["singular_values"] = singular_values;
  j["gram_eigenvalues"] = gram_eigenvalues;
  j["capacity"] = std::isfinite(capacity) ? nlohmann::json(capacity) : nlohmann::json("inf");
  j["seed"] = seed;
  return j.dump(2);
}

OptimalReadout optimal_readout(const ModeSet& inputs, const SpectrumSpec& spec) {
  return optimal_readout(inputs, spec, make_frequency_grid(spec, inputs.duration()));
}

OptimalReadout optimal_readout(const ModeSet& inputs, const SpectrumSpec& spec, const FrequencyGrid& grid) {
  if (inputs.size() == 0) throw DimensionError("no input modes");
  if (inputs.orthonormality_error() > 1e-10) throw DomainError("input modes are not orthonormal");
  const FrequencyModes G = transmitted(to_frequency(inputs, grid), spec);
  const Eigen::MatrixXcd M = G.values.adjoint() * G.values;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
  if (es.info() != Eigen::Success) throw NumericalFailure("Gram eigensolver did not converge", 0.0);

  const auto K = M.rows();
  Eigen::MatrixXcd V = es.eigenvectors();
  for (Eigen::Index k = 0; k < K; ++k) {
    // Largest component real and positive (first of any near-ties).
    const double peak = V.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < K; ++i) {
      if (std::abs(V(i, k)) >= (1.0 - 1e-9) * peak) {
        V.col(k) *= std::conj(V(i, k)) / std::abs(V(i, k));
        break;
      }
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  const Eigen::VectorXd ev = es.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    if (std::abs(ev(a) - ev(b)) >= 1e-12) return ev(a) > ev(b);
    if (V(0, a).real() != V(0, b).real()) return V(0, a).real() > V(0, b).real();
    return V(0, a).imag() > V(0, b).imag();
  });

  OptimalReadout out;
  out.U.resize(K, K);
  for (Eigen::Index k = 0; k < K; ++k) out.U.col(k) = V.col(order[static_cast<std::size_t>(k)]);
  out.rotated_inputs.rule = inputs.rule;
  out.rotated_inputs.profiles = inputs.profiles * out.U;
  out.transmitted.grid = G.grid;
  out.transmitted.values = G.values * out.U;
  const Eigen::MatrixXcd gram = out.transmitted.values.adjoint() * out.transmitted.values;
  out.readouts.grid = G.grid;
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double lambda = gram(k, k).real();
    out.lambdas.push_back(lambda);
    if (lambda < kDropLevel) {
      out.dropped.push_back(static_cast<std::size_t>(k));
    } else {
      kept.push_back(k);
    }
  }
  out.readouts.values.resize(G.values.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const Eigen::Index k = kept[j];
    out.readouts.values.col(static_cast<Eigen::Index>(j)) = out.transmitted.values.col(k) / std::sqrt(out.lambdas[static_cast<std::size_t>(k)]);
  }
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(K, K);
  for (Eigen::Index k = 0; k < K; ++k) diag(k, k) = out.lambdas[static_cast<std::size_t>(k)];
  out.orthogonality_error = (gram - diag).cwiseAbs().maxCoeff();
  if (out.orthogonality_error > 1e-9) {
    throw NumericalFailure("rotated outputs are not orthogonal", out.orthogonality_error);
  }
  return out;
}

InterlacingReport interlacing_check(const ModeSet& inputs, const SpectrumSpec& spec, std::size_t trials,
                                    std::uint64_t seed, unsigned threads, double tolerance) {
  if (inputs.size() < 2) throw DimensionError("interlacing check needs at least two input modes");
  const FrequencyGrid grid = make_frequency_grid(spec, inputs.duration());
  const OptimalReadout best = optimal_readout(inputs, spec, grid);
  const FrequencyModes G = transmitted(to_frequency(inputs, grid), spec);
  const auto M = G.values.rows();
  const auto K = G.values.cols();

  InterlacingReport report;
  report.trials = trials;
  report.seed = seed;
  report.lambdas = best.lambdas;

  // Equality for the optimal readout and the orthogonal-complement case.
  const auto sigma_best = sorted_singular_values(scattering_matrix(G, best.readouts));
  for (std::size_t k = 0; k < sigma_best.size(); ++k) {
    report.optimal_equality_error =
        std::max(report.optimal_equality_error, std::abs(sigma_best[k] * sigma_best[k] - best.lambdas[k]));
  }
  {
    std::mt19937_64 rng(splitmix64(seed));
    Eigen::MatrixXcd Z = gaussian(rng, M, K);
    const Eigen::MatrixXcd Q = orthonormal_columns(G.values);
    Z -= Q * (Q.adjoint() * Z);
    FrequencyModes ortho{G.grid, orthonormal_columns(Z)};
    const auto s = sorted_singular_values(scattering_matrix(G, ortho));
    report.orthogonal_readout_sigma = s.empty() ? 0.0 : s.front();
  }

  struct TrialResult {
    double violation = -1.0;
    double enlargement = -1.0;
  };
  std::vector<TrialResult> results(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    std::mt19937_64 rng(splitmix64(seed + 0x9E3779B97F4A7C15ull * (t + 1)));
    const Eigen::Index kr = 1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(K + 2));
    // Alternate between readouts inside span{g}, generic ones, and partial overlaps.
    Eigen::MatrixXcd A;
    switch (t % 3) {
      case 0: A = G.values * gaussian(rng, K, kr) + 1e-3 * gaussian(rng, M, kr); break;
      case 1: A = gaussian(rng, M, kr); break;
      default: {
        std::uniform_real_distribution<double> mix(0.0, 1.0);
        A = G.values * gaussian(rng, K, kr) * mix(rng) + gaussian(rng, M, kr) * (mix(rng) / std::sqrt(double(M)));
      }
    }
    const Eigen::MatrixXcd H = orthonormal_columns(A);
    const auto sigma = sorted_singular_values(scattering_matrix(G, FrequencyModes{G.grid, H}));
    TrialResult r;
    for (std::size_t k = 0; k < sigma.size() && k < best.lambdas.size(); ++k) {
      r.violation = std::max(r.violation, sigma[k] * sigma[k] - best.lambdas[k]);
    }
    Eigen::MatrixXcd bigger(M, kr + 2);
    bigger << H, gaussian(rng, M, 2);
    const Eigen::MatrixXcd Hb = orthonormal_columns(bigger);
    const auto sigma_b = sorted_singular_values(scattering_matrix(G, FrequencyModes{G.grid, Hb}));
    for (std::size_t k = 0; k < sigma.size(); ++k) {
      r.enlargement = std::max(r.enlargement, sigma[k] - sigma_b[k]);
    }
    results[t] = r;
  });
  report.max_violation = -1.0;
  report.max_enlargement_violation = -1.0;
  for (const auto& r : results) {
    report.max_violation = std::max(report.max_violation, r.violation);
    report.max_enlargement_violation = std::max(report.max_enlargement_violation, r.enlargement);
    if (r.violation > tolerance || r.enlargement > tolerance) ++report.violations;
  }
  return report;
}

}  // namespace btl
