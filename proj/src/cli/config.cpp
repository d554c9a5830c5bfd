#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "btl/cli.hpp"
#include "btl/error.hpp"
#include "btl/parallel.hpp"

namespace btl::cli {

using nlohmann::json;

namespace {

const std::set<std::string> kOutputs{"capacity_curve", "eigenvalues", "opening_times", "modes", "bound"};

// A JSON object whose keys are consumed one by one; leftovers are errors.
class Table {
 public:
  Table(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where(), "expected a table");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(name(key), "expected a number");
    return v.get<double>();
  }

  std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ConfigError(name(key), "expected a nonnegative integer");
    }
    return v.get<std::size_t>();
  }

  bool flag(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(name(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(name(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> fallback = std::nullopt) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(name(key), "expected a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw ConfigError(name(key), "expected a list of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, std::optional<std::vector<std::size_t>> fallback) {
    if (!has(key)) return require(key, fallback);
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(name(key), "expected a list of integers");
    std::vector<std::size_t> out;
    for (const auto& x : v) {
      if (!x.is_number_integer() || x.get<long long>() < 0) {
        throw ConfigError(name(key), "expected a list of nonnegative integers");
      }
      out.push_back(x.get<std::size_t>());
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_array()) throw ConfigError(name(key), "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
      if (!x.is_string()) throw ConfigError(name(key), "expected a list of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  Table sub(const std::string& key) {
    if (!has(key)) throw ConfigError(name(key), "required");
    return Table(raw(key), name(key));
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

 private:
  template <class T>
  T require(const std::string& key, const std::optional<T>& fallback) const {
    if (!fallback) throw ConfigError(name(key), "required");
    return *fallback;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SpectrumSpec parse_spectrum(Table t, const std::filesystem::path& base_dir, json& echo) {
  const std::string kind = t.text("kind");
  echo = json::object();
  echo["kind"] = kind;
  try {
    if (kind == "lorentzian") {
      const double eta_max = t.number("eta_max");
      const double kappa = t.number("kappa", 1.0);
      t.finish();
      echo["eta_max"] = eta_max;
      echo["kappa"] = kappa;
      return SpectrumSpec::lorentzian(eta_max, kappa);
    }
    if (kind == "box") {
      const double eta_bar = t.number("eta_bar");
      const double half = t.number("omega_half_width", 1.0);
      t.finish();
      echo["eta_bar"] = eta_bar;
      echo["omega_half_width"] = half;
      return SpectrumSpec::box(eta_bar, half);
    }
    if (kind == "transducer") {
      const double g = t.number("g", 1.0);
      const double a1 = t.number("kappa_a1");
      const double a2 = t.number("kappa_a2");
      const double b = t.number("kappa_b");
      t.finish();
      echo["g"] = g;
      echo["kappa_a1"] = a1;
      echo["kappa_a2"] = a2;
      echo["kappa_b"] = b;
      return SpectrumSpec::transducer(g, a1, a2, b);
    }
    if (kind == "tabulated") {
      const bool mirrored = t.flag("mirrored", false);
      echo["mirrored"] = mirrored;
      if (t.has("file")) {
        const std::string file = t.text("file");
        t.finish();
        echo["file"] = file;
        std::filesystem::path p(file);
        if (p.is_relative()) p = base_dir / p;
        return SpectrumSpec::tabulated_from_file(p.string(), mirrored);
      }
      auto omega = t.numbers("omega");
      auto eta = t.numbers("eta");
      t.finish();
      echo["omega"] = omega;
      echo["eta"] = eta;
      return SpectrumSpec::tabulated(std::move(omega), std::move(eta), mirrored);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(t.where(), e.what());
  }
  throw ConfigError(t.name("kind"), "unknown spectrum kind '" + kind + "'");
}

QuadratureKind parse_rule(const std::string& rule, const std::string& key) {
  if (rule == "gauss-legendre") return QuadratureKind::GaussLegendre;
  if (rule == "trapezoid") return QuadratureKind::Trapezoid;
  throw ConfigError(key, "expected 'gauss-legendre' or 'trapezoid'");
}

std::vector<double> positive_list(Table& t, const std::string& key, std::vector<double> fallback) {
  auto v = t.numbers(key, std::move(fallback));
  for (double x : v) {
    if (!(x > 0.0)) throw ConfigError(t.name(key), "values must be > 0");
  }
  return v;
}

CheckSpec parse_check(Table t) {
  CheckSpec c;
  c.name = t.text("name");
  if (c.name == "lorentzian_oracle") {
    c.tolerance = t.number("tolerance", 1e-4);
    c.points = positive_list(t, "kappa_T", {1.0, 3.0, 10.0, 30.0});
    c.count = t.count("k_max", 5);
    c.n_points = t.count("n_points", 800);
    c.eta_max = t.number("eta_max", 1.0);
  } else if (c.name == "slepian_oracle") {
    c.tolerance = t.number("tolerance", 1e-4);
    c.points = positive_list(t, "c", {0.5, 2.0, 5.0, 10.0});
    c.count = t.count("n_max", 6);
    c.n_points = t.count("n_points", 800);
  } else if (c.name == "interlacing") {
    c.tolerance = t.number("tolerance", 1e-9);
    c.points = positive_list(t, "T", {10.0});
    c.count = t.count("trials", 200);
    c.modes = t.count("modes", 4);
    c.n_points = t.count("n_points", 0);
    if (c.modes == 0) throw ConfigError(t.name("modes"), "must be >= 1");
  } else if (c.name == "trace_identity" || c.name == "orthonormality" || c.name == "bound") {
    c.tolerance = t.number("tolerance", c.name == "bound" ? 1e-9 : 1e-10);
    c.points = positive_list(t, "T", {1.0, 5.0, 10.0});
    c.n_points = t.count("n_points", 0);
  } else {
    throw ConfigError(t.name("name"), "unknown check '" + c.name + "'");
  }
  if (!(c.tolerance >= 0.0)) throw ConfigError(t.name("tolerance"), "must be >= 0");
  if (c.name.find("oracle") != std::string::npos && c.n_points < 2) {
    throw ConfigError(t.name("n_points"), "must be >= 2");
  }
  t.finish();
  return c;
}

json check_echo(const CheckSpec& c) {
  json j{{"name", c.name}, {"tolerance", c.tolerance}, {"points", c.points}};
  if (c.count) j["count"] = c.count;
  if (c.modes) j["modes"] = c.modes;
  if (c.n_points) j["n_points"] = c.n_points;
  if (c.name == "lorentzian_oracle") j["eta_max"] = c.eta_max;
  return j;
}

}  // namespace

bool SweepConfig::wants(const std::string& output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

unsigned SweepConfig::worker_count() const { return threads == 0 ? default_threads() : threads; }

json SweepConfig::echo() const {
  json j;
  j["spectrum"] = spectrum_echo;
  j["sweep"] = {{"t_min", t_min}, {"t_max", t_max}, {"t_points", t_points}, {"k_list", k_list}};
  j["discretization"] = {{"n_points", discretization.n_points},
                         {"rule", to_string(discretization.rule)},
                         {"eigen_tolerance", discretization.eigen_tolerance},
                         {"singularity_subtraction", discretization.singularity_subtraction}};
  j["outputs"] = outputs;
  j["modes"] = {{"T", mode_T}, {"count", mode_count}};
  j["opening"] = {{"k_max", opening_k_max}, {"coarse_points", opening_coarse_points},
                  {"relative_tolerance", opening_tolerance}};
  j["lambdas_kept"] = lambdas_kept;
  j["eta_ceiling"] = eta_ceiling;
  j["threads"] = threads;
  j["seed"] = seed;
  j["units"] = units;
  j["checks"] = json::array();
  for (const auto& c : checks) j["checks"].push_back(check_echo(c));
  return j;
}

SweepConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  SweepConfig cfg;
  Table root(doc, "");
  cfg.spectrum = parse_spectrum(root.sub("spectrum"), base_dir, cfg.spectrum_echo);

  if (root.has("sweep")) {
    Table s = root.sub("sweep");
    cfg.t_min = s.number("t_min");
    cfg.t_max = s.number("t_max");
    cfg.t_points = s.count("t_points");
    cfg.k_list = s.counts("k_list", std::vector<std::size_t>{1});
    s.finish();
    if (!(cfg.t_min > 0.0)) throw ConfigError(s.name("t_min"), "must be > 0");
    if (!(cfg.t_max >= cfg.t_min)) throw ConfigError(s.name("t_max"), "must be >= t_min");
    if (cfg.t_points < 2) throw ConfigError(s.name("t_points"), "must be >= 2");
    for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
      if (cfg.k_list[i] == 0 || (i > 0 && cfg.k_list[i] <= cfg.k_list[i - 1])) {
        throw ConfigError(s.name("k_list"), "must be sorted, unique and positive");
      }
    }
  }

  if (root.has("discretization")) {
    Table d = root.sub("discretization");
    cfg.discretization.n_points = d.count("n_points", cfg.discretization.n_points);
    cfg.discretization.rule = parse_rule(d.text("rule", std::string("gauss-legendre")), d.name("rule"));
    cfg.discretization.eigen_tolerance = d.number("eigen_tolerance", cfg.discretization.eigen_tolerance);
    cfg.discretization.singularity_subtraction =
        d.flag("singularity_subtraction", cfg.discretization.singularity_subtraction);
    d.finish();
    try {
      cfg.discretization.validate();
    } catch (const Error& e) {
      throw ConfigError(d.where(), e.what());
    }
  }

  cfg.outputs = root.texts("outputs", cfg.outputs);
  for (const auto& o : cfg.outputs) {
    if (!kOutputs.count(o)) throw ConfigError(root.name("outputs"), "unknown output '" + o + "'");
  }

  if (root.has("modes")) {
    Table m = root.sub("modes");
    cfg.mode_T = positive_list(m, "T", {});
    cfg.mode_count = m.count("count", cfg.mode_count);
    m.finish();
  }

  if (root.has("opening")) {
    Table o = root.sub("opening");
    cfg.opening_k_max = o.count("k_max", 0);
    cfg.opening_coarse_points = o.count("coarse_points", cfg.opening_coarse_points);
    cfg.opening_tolerance = o.number("relative_tolerance", cfg.opening_tolerance);
    o.finish();
    if (cfg.opening_coarse_points < 2) throw ConfigError(o.name("coarse_points"), "must be >= 2");
    if (!(cfg.opening_tolerance > 0.0)) throw ConfigError(o.name("relative_tolerance"), "must be > 0");
  }

  cfg.lambdas_kept = root.count("lambdas_kept", cfg.lambdas_kept);
  cfg.eta_ceiling = root.number("eta_ceiling", cfg.eta_ceiling);
  if (!(cfg.eta_ceiling > 0.5 && cfg.eta_ceiling <= 1.0)) {
    throw ConfigError(root.name("eta_ceiling"), "must lie in (0.5, 1]");
  }
  cfg.threads = static_cast<unsigned>(root.count("threads", 0));
  cfg.seed = root.count("seed", 1);
  cfg.units = root.text("units", cfg.units);
  if (root.has("output_dir")) cfg.output_dir = root.text("output_dir");

  if (root.has("checks")) {
    const json& list = root.raw("checks");
    if (!list.is_array()) throw ConfigError(root.name("checks"), "expected a list of tables");
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.checks.push_back(parse_check(Table(list[i], "checks[" + std::to_string(i) + "]")));
    }
  }
  root.finish();
  return cfg;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("not valid JSON: ") + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace btl::cli
