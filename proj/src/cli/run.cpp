#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include <openssl/evp.h>

#include "btl/analytic_oracles.hpp"
#include "btl/capacity.hpp"
#include "btl/cli.hpp"
#include "btl/error.hpp"
#include "btl/kernel.hpp"
#include "btl/multimode.hpp"
#include "btl/parallel.hpp"

namespace btl::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string unit_note(const SweepConfig& cfg) {
  return "# units: T in 1/" + cfg.units + ", omega in " + cfg.units + "\n";
}

// Collects output files and timings for one command.
class Run {
 public:
  Run(const SweepConfig& cfg, std::string command) : cfg_(cfg) {
    manifest_.command = std::move(command);
    manifest_.config = cfg.echo();
    manifest_.output_dir = cfg.output_dir;
    std::filesystem::create_directories(cfg.output_dir);
  }

  template <class Writer>
  void write(const std::string& name, Writer&& body) {
    const auto path = cfg_.output_dir / name;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
      out << "# tool: " << kToolName << " " << kToolVersion << "\n";
      out << "# command: " << manifest_.command << "\n";
      out << "# config: " << manifest_.config.dump() << "\n";
      out << unit_note(cfg_);
      body(out);
      if (!out) throw ConfigError("output_dir", "failed writing '" + path.string() + "'");
    }
    manifest_.files.push_back({name, sha256_file(path), std::filesystem::file_size(path)});
  }

  template <class F>
  auto timed(const std::string& phase, F&& f) {
    const auto start = Clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      manifest_.timings.emplace_back(phase, seconds_since(start));
    } else {
      auto result = f();
      manifest_.timings.emplace_back(phase, seconds_since(start));
      return result;
    }
  }

  RunManifest finish() {
    const auto path = cfg_.output_dir / "manifest.json";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << manifest_.to_json().dump(2) << "\n";
    if (!out) throw ConfigError("output_dir", "cannot write '" + path.string() + "'");
    return manifest_;
  }

 private:
  const SweepConfig& cfg_;
  RunManifest manifest_;
};

// Re-raises a numerical failure with the phase and T probe in front.
template <class F>
auto probe(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const NumericalFailure& e) {
    throw NumericalFailure(what + ": " + e.what(), e.estimate());
  } catch (const DivergenceError& e) {
    throw DivergenceError(what + ": " + e.what());
  } catch (const BoundInapplicableError& e) {
    throw BoundInapplicableError(what + ": " + e.what());
  }
}

DiscretizationConfig with_points(DiscretizationConfig d, std::size_t n_points) {
  if (n_points) d.n_points = n_points;
  return d;
}

std::vector<double> sweep_grid(const SweepConfig& cfg) {
  std::vector<double> T(cfg.t_points);
  for (std::size_t i = 0; i < cfg.t_points; ++i) {
    T[i] = cfg.t_min + (cfg.t_max - cfg.t_min) * static_cast<double>(i) / static_cast<double>(cfg.t_points - 1);
  }
  return T;
}

std::vector<BoundReport> bound_reports(const SweepConfig& cfg, const std::vector<double>& T) {
  std::vector<BoundReport> reports(T.size());
  parallel_for(T.size(), cfg.worker_count(), [&](std::size_t i) {
    reports[i] = probe("bound at T=" + format_number(T[i]), [&] {
      return lambda1_bound_diagnostic(cfg.spectrum, T[i], solve_modes(cfg.spectrum, T[i], cfg.discretization));
    });
  });
  return reports;
}

void write_bounds(Run& run, const std::vector<BoundReport>& reports) {
  run.write("bound.csv", [&](std::ostream& out) {
    write_bound_csv_header(out);
    for (const auto& r : reports) write_bound_csv_row(out, r);
  });
}

std::string mode_file(double T) { return "modes_T" + format_number(T) + ".csv"; }

void write_modes(Run& run, const SweepConfig& cfg, double T) {
  const ModeBasis basis =
      probe("modes at T=" + format_number(T), [&] { return solve_modes(cfg.spectrum, T, cfg.discretization); });
  run.write(mode_file(T), [&](std::ostream& out) { write_mode_csv(out, basis, cfg.mode_count); });
}

// One check case: label and residual/tolerance/pass computed by `eval`.
using CaseFn = std::function<CheckRow()>;

std::vector<CheckRow> run_cases(const std::vector<CaseFn>& cases, unsigned threads) {
  std::vector<CheckRow> rows(cases.size());
  parallel_for(cases.size(), threads, [&](std::size_t i) { rows[i] = cases[i](); });
  return rows;
}

std::vector<CaseFn> check_cases(const CheckSpec& c, const SweepConfig& cfg) {
  std::vector<CaseFn> cases;
  const DiscretizationConfig disc = with_points(cfg.discretization, c.n_points);
  for (double x : c.points) {
    const std::string at = format_number(x);
    if (c.name == "lorentzian_oracle") {
      cases.push_back([=] {
        const auto spec = SpectrumSpec::lorentzian(c.eta_max, 1.0);
        const auto num = probe("lorentzian_oracle at kappa_T=" + at,
                               [&] { return solve_lambdas(Kernel(spec, x), x, disc, c.count); });
        const auto ref = lorentzian_eigenvalues(c.eta_max, 1.0, x, c.count);
        double r = 0.0;
        for (std::size_t k = 0; k < c.count; ++k) r = std::max(r, std::abs(num[k] - ref.lambdas[k]));
        return CheckRow{c.name, "kappa_T=" + at, r, c.tolerance, r <= c.tolerance};
      });
    } else if (c.name == "slepian_oracle") {
      cases.push_back([=] {
        const auto spec = SpectrumSpec::box(1.0, 1.0);
        const auto num = probe("slepian_oracle at c=" + at,
                               [&] { return solve_lambdas(Kernel(spec, 2.0 * x), 2.0 * x, disc, c.count); });
        const auto ref = slepian_eigensystem(x, c.count);
        double r = 0.0;
        for (std::size_t k = 0; k < c.count; ++k) r = std::max(r, std::abs(num[k] - ref.lambdas[k]));
        return CheckRow{c.name, "c=" + at, r, c.tolerance, r <= c.tolerance};
      });
    } else if (c.name == "interlacing") {
      cases.push_back([=, &cfg] {
        const auto basis = probe("interlacing at T=" + at, [&] { return solve_modes(cfg.spectrum, x, disc); });
        const ModeSet inputs = ModeSet::from_basis(basis, c.modes);
        const auto rep = interlacing_check(inputs, cfg.spectrum, c.count, cfg.seed, 1, c.tolerance);
        const double r = std::max({rep.max_violation, rep.optimal_equality_error, 0.0});
        const bool pass = rep.violations == 0 && rep.optimal_equality_error <= c.tolerance;
        return CheckRow{c.name, "T=" + at + " trials=" + std::to_string(c.count), r, c.tolerance, pass};
      });
    } else if (c.name == "trace_identity") {
      cases.push_back([=, &cfg] {
        const auto basis = probe("trace_identity at T=" + at, [&] { return solve_modes(cfg.spectrum, x, disc); });
        const double trace = std::accumulate(basis.lambdas.begin(), basis.lambdas.end(), 0.0);
        const double expected = x * kernel_value_complex(cfg.spectrum, 0.0).real();
        const double r = std::abs(trace - expected);
        const double tol = 10.0 * basis.quadrature_error + c.tolerance;
        return CheckRow{c.name, "T=" + at, r, tol, r <= tol};
      });
    } else if (c.name == "orthonormality") {
      cases.push_back([=, &cfg] {
        const auto basis = probe("orthonormality at T=" + at, [&] { return solve_modes(cfg.spectrum, x, disc); });
        const double r = ModeSet::from_basis(basis).orthonormality_error();
        return CheckRow{c.name, "T=" + at, r, c.tolerance, r <= c.tolerance};
      });
    } else if (c.name == "bound") {
      cases.push_back([=, &cfg] {
        const auto rep = probe("bound at T=" + at, [&] {
          return lambda1_bound_diagnostic(cfg.spectrum, x, solve_modes(cfg.spectrum, x, disc));
        });
        const double r = std::max(0.0, rep.lambda1_numeric - rep.bound_value);
        return CheckRow{c.name, "T=" + at, r, c.tolerance, r <= c.tolerance};
      });
    }
  }
  return cases;
}

}  // namespace

json RunManifest::to_json() const {
  json j;
  j["tool"] = kToolName;
  j["version"] = kToolVersion;
  j["command"] = command;
  j["config"] = config;
  j["output_dir"] = output_dir.string();
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["timings_seconds"] = json::array();
  for (const auto& [phase, s] : timings) j["timings_seconds"].push_back({{"phase", phase}, {"seconds", s}});
  return j;
}

bool RunManifest::verify() const {
  for (const auto& f : files) {
    const auto path = output_dir / f.name;
    if (!std::filesystem::exists(path) || sha256_file(path) != f.sha256) return false;
  }
  return true;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

bool CheckOutcome::all_pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.pass; });
}

bool BoundOutcome::all_satisfied() const {
  return std::all_of(reports.begin(), reports.end(), [](const BoundReport& r) { return r.satisfied; });
}

RunManifest run_sweep(const SweepConfig& cfg) {
  Run run(cfg, "sweep");
  const unsigned threads = cfg.worker_count();
  if (cfg.wants("capacity_curve") || cfg.wants("eigenvalues")) {
    const CapacityCurve curve = run.timed("capacity_sweep", [&] {
      return capacity_sweep(cfg.spectrum, cfg.t_min, cfg.t_max, cfg.t_points, cfg.k_list, cfg.discretization,
                            {cfg.lambdas_kept, cfg.eta_ceiling, threads});
    });
    if (cfg.wants("capacity_curve")) {
      run.write("capacity_curve.csv", [&](std::ostream& out) {
        out << "# eta_ceiling: " << format_number(cfg.eta_ceiling) << " (clamped=1 marks rows evaluated at it)\n";
        write_capacity_csv(out, curve);
      });
    }
    if (cfg.wants("eigenvalues")) run.write("eigenvalues.csv", [&](std::ostream& out) { write_eigenvalue_csv(out, curve); });
  }
  if (cfg.wants("opening_times")) {
    const std::size_t k_max =
        cfg.opening_k_max ? cfg.opening_k_max : *std::max_element(cfg.k_list.begin(), cfg.k_list.end());
    const auto openings = run.timed("opening_times", [&] {
      return probe("opening times", [&] {
        return find_opening_times(cfg.spectrum, {cfg.t_min, cfg.t_max}, k_max, cfg.discretization,
                                  {cfg.opening_coarse_points, cfg.opening_tolerance, threads});
      });
    });
    run.write("opening_times.csv", [&](std::ostream& out) { write_opening_csv(out, openings); });
  }
  if (cfg.wants("modes")) {
    run.timed("modes", [&] {
      for (double T : cfg.mode_T) write_modes(run, cfg, T);
    });
  }
  if (cfg.wants("bound")) {
    const auto reports = run.timed("bound", [&] { return bound_reports(cfg, sweep_grid(cfg)); });
    write_bounds(run, reports);
  }
  return run.finish();
}

CheckOutcome run_check(const SweepConfig& cfg) {
  Run run(cfg, "check");
  CheckOutcome outcome;
  for (const auto& c : cfg.checks) {
    auto rows = run.timed(c.name, [&] { return run_cases(check_cases(c, cfg), cfg.worker_count()); });
    outcome.rows.insert(outcome.rows.end(), rows.begin(), rows.end());
  }
  run.write("check_results.csv", [&](std::ostream& out) {
    out << "check,case,residual,tolerance,pass\n" << std::setprecision(17);
    for (const auto& r : outcome.rows) {
      out << r.check << "," << r.label << "," << r.residual << "," << r.tolerance << "," << (r.pass ? 1 : 0) << "\n";
    }
  });
  outcome.manifest = run.finish();
  return outcome;
}

RunManifest run_modes(const SweepConfig& cfg, double T) {
  if (!(T > 0.0)) throw ConfigError("--at-T", "must be > 0");
  Run run(cfg, "modes");
  run.timed("modes", [&] { write_modes(run, cfg, T); });
  return run.finish();
}

BoundOutcome run_bound(const SweepConfig& cfg) {
  Run run(cfg, "bound");
  BoundOutcome outcome;
  outcome.reports = run.timed("bound", [&] { return bound_reports(cfg, sweep_grid(cfg)); });
  write_bounds(run, outcome.reports);
  outcome.manifest = run.finish();
  return outcome;
}

void print_check_table(std::ostream& out, const std::vector<CheckRow>& rows) {
  std::size_t wc = 5, wl = 4;
  for (const auto& r : rows) {
    wc = std::max(wc, r.check.size());
    wl = std::max(wl, r.label.size());
  }
  const auto flags = out.flags();
  out << std::left << std::setw(static_cast<int>(wc)) << "check" << "  " << std::setw(static_cast<int>(wl)) << "case"
      << "  " << std::setw(12) << "residual" << "  " << std::setw(12) << "tolerance" << "  result\n";
  for (const auto& r : rows) {
    out << std::setw(static_cast<int>(wc)) << r.check << "  " << std::setw(static_cast<int>(wl)) << r.label << "  "
        << std::scientific << std::setprecision(3) << std::setw(12) << r.residual << "  " << std::setw(12)
        << r.tolerance << "  " << (r.pass ? "PASS" : "FAIL") << "\n";
    out.flags(flags);
    out << std::left;
  }
  out.flags(flags);
}

int dispatch(const std::string& command, const std::filesystem::path& config_path,
             const std::optional<std::filesystem::path>& output_dir, std::optional<double> at_T, std::ostream& out,
             std::ostream& err) {
  try {
    SweepConfig cfg = load_config(config_path);
    if (output_dir) cfg.output_dir = *output_dir;
    if (command == "sweep") {
      const auto m = run_sweep(cfg);
      for (const auto& f : m.files) out << "wrote " << (cfg.output_dir / f.name).string() << "\n";
      return kExitOk;
    }
    if (command == "check") {
      const auto outcome = run_check(cfg);
      print_check_table(out, outcome.rows);
      if (!outcome.all_pass()) {
        for (const auto& r : outcome.rows) {
          if (!r.pass) err << "check failed: " << r.check << " (" << r.label << ")\n";
        }
        return kExitCheck;
      }
      return kExitOk;
    }
    if (command == "modes") {
      if (!at_T) throw ConfigError("--at-T", "required by modes");
      const auto m = run_modes(cfg, *at_T);
      for (const auto& f : m.files) out << "wrote " << (cfg.output_dir / f.name).string() << "\n";
      return kExitOk;
    }
    if (command == "bound") {
      const auto outcome = run_bound(cfg);
      out << "wrote " << (cfg.output_dir / "bound.csv").string() << "\n";
      if (!outcome.all_satisfied()) {
        for (const auto& r : outcome.reports) {
          if (!r.satisfied) err << "bound violated at T=" << format_number(r.T) << "\n";
        }
        return kExitCheck;
      }
      return kExitOk;
    }
    err << "unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const SpecInvalidError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config key 'output_dir': " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace btl::cli
