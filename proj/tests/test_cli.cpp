#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "btl/cli.hpp"
#include "btl/error.hpp"

using namespace btl;
using namespace btl::cli;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("btl_cli_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error_key(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

json small_sweep() {
  return json::parse(R"({
    "spectrum": {"kind": "lorentzian", "eta_max": 1.0, "kappa": 1.0},
    "sweep": {"t_min": 0.5, "t_max": 6.0, "t_points": 12, "k_list": [1, 2]},
    "discretization": {"n_points": 80},
    "outputs": ["capacity_curve", "eigenvalues", "opening_times", "modes", "bound"],
    "modes": {"T": [2.0], "count": 3},
    "opening": {"k_max": 3, "relative_tolerance": 1e-5},
    "threads": 2
  })");
}

}  // namespace

TEST_CASE("config defaults and echo") {
  const auto cfg = parse_config(json::parse(R"({"spectrum": {"kind": "box", "eta_bar": 0.85}})"));
  CHECK(cfg.spectrum.kind() == SpectrumKind::Box);
  CHECK(cfg.discretization.n_points == 400);
  CHECK(cfg.k_list == std::vector<std::size_t>{1});
  CHECK(cfg.worker_count() >= 1);
  CHECK(cfg.echo()["spectrum"]["omega_half_width"] == 1.0);
  CHECK_FALSE(cfg.echo().contains("output_dir"));
  const auto two = parse_config(small_sweep());
  CHECK(two.worker_count() == 2);
  CHECK(two.wants("bound"));
}

TEST_CASE("config errors name the offending key") {
  CHECK(config_error_key(json::parse(R"({})")) == "spectrum");
  CHECK(config_error_key(json::parse(R"({"spectrum": {"kind": "lorentzian"}})")) == "spectrum.eta_max");
  CHECK(config_error_key(json::parse(R"({"spectrum": {"kind": "lorentz", "eta_max": 1}})")) == "spectrum.kind");
  CHECK(config_error_key(json::parse(R"({"spectrum": {"kind": "lorentzian", "eta_max": 1.5}})")) == "spectrum");
  auto doc = small_sweep();
  doc["sweep"]["t_min"] = 0.0;
  CHECK(config_error_key(doc) == "sweep.t_min");
  doc = small_sweep();
  doc["sweep"]["t_points"] = 1;
  CHECK(config_error_key(doc) == "sweep.t_points");
  doc = small_sweep();
  doc["sweep"]["k_list"] = {2, 1};
  CHECK(config_error_key(doc) == "sweep.k_list");
  doc = small_sweep();
  doc["sweep"]["k_list"] = {0, 1};
  CHECK(config_error_key(doc) == "sweep.k_list");
  doc = small_sweep();
  doc["discretization"]["rule"] = "simpson";
  CHECK(config_error_key(doc) == "discretization.rule");
  doc = small_sweep();
  doc["discretization"]["n_points"] = "many";
  CHECK(config_error_key(doc) == "discretization.n_points");
  doc = small_sweep();
  doc["eta_ceiling"] = 1.2;
  CHECK(config_error_key(doc) == "eta_ceiling");
  doc = small_sweep();
  doc["outputs"] = {"plots"};
  CHECK(config_error_key(doc) == "outputs");
  doc = small_sweep();
  doc["sweeep"] = 1;
  CHECK(config_error_key(doc) == "sweeep");
  doc = small_sweep();
  doc["checks"] = json::array({{{"name", "nope"}}});
  CHECK(config_error_key(doc) == "checks[0].name");
  doc = small_sweep();
  doc["checks"] = json::array({{{"name", "bound"}, {"T", {1.0}}, {"tolerence", 1e-9}}});
  CHECK(config_error_key(doc) == "checks[0].tolerence");
}

TEST_CASE("tabulated spectrum from a file relative to the config") {
  const auto dir = scratch("table");
  std::ofstream(dir / "eta.txt") << "# w eta\n-2 0\n-1 0.5\n0 0.9\n1 0.5\n2 0\n";
  std::ofstream(dir / "cfg.json") << R"({"spectrum": {"kind": "tabulated", "file": "eta.txt"}})";
  const auto cfg = load_config(dir / "cfg.json");
  CHECK(cfg.spectrum.kind() == SpectrumKind::Tabulated);
  CHECK(cfg.spectrum.transmissivity(0.0) == doctest::Approx(0.9));
}

TEST_CASE("sweep writes every output deterministically") {
  auto cfg = parse_config(small_sweep());
  cfg.output_dir = scratch("sweep_a");
  const auto a = run_sweep(cfg);
  cfg.output_dir = scratch("sweep_b");
  const auto b = run_sweep(cfg);
  REQUIRE(a.files.size() == 5);
  CHECK(a.verify());
  CHECK(b.verify());
  for (std::size_t i = 0; i < a.files.size(); ++i) {
    CHECK(a.files[i].name == b.files[i].name);
    CHECK(a.files[i].sha256 == b.files[i].sha256);
    CHECK(a.files[i].sha256.size() == 64);
  }
  const std::string curve = slurp(a.output_dir / "capacity_curve.csv");
  CHECK(curve.rfind("# tool: btl", 0) == 0);
  CHECK(curve.find("\nT,Q,Q_1,Q_2,clamped\n") != std::string::npos);
  CHECK(curve.find('\r') == std::string::npos);
  const std::string openings = slurp(a.output_dir / "opening_times.csv");
  CHECK(openings.find("\n1,1.5707") != std::string::npos);
  CHECK(openings.find("\n2,4.712") != std::string::npos);
  CHECK(std::filesystem::exists(a.output_dir / "modes_T2.csv"));
  const auto manifest = json::parse(slurp(a.output_dir / "manifest.json"));
  CHECK(manifest["files"].size() == 5);
  CHECK(manifest["config"]["threads"] == 2);
  CHECK(manifest["timings_seconds"].size() == 4);
}

TEST_CASE("sweep flags rows clamped at the ceiling") {
  auto doc = small_sweep();
  doc["eta_ceiling"] = 0.8;
  doc["outputs"] = {"capacity_curve"};
  auto cfg = parse_config(doc);
  cfg.output_dir = scratch("clamp");
  run_sweep(cfg);
  const std::string curve = slurp(cfg.output_dir / "capacity_curve.csv");
  CHECK(curve.find(",1\n") != std::string::npos);
}

TEST_CASE("manifest detects a modified file") {
  auto doc = small_sweep();
  doc["outputs"] = {"eigenvalues"};
  auto cfg = parse_config(doc);
  cfg.output_dir = scratch("tamper");
  const auto m = run_sweep(cfg);
  CHECK(m.verify());
  std::ofstream(cfg.output_dir / "eigenvalues.csv", std::ios::app) << "x\n";
  CHECK_FALSE(m.verify());
}

TEST_CASE("check exit codes") {
  const auto dir = scratch("check");
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return dir / name;
  };
  const auto good = write("good.json", R"({
    "spectrum": {"kind": "lorentzian", "eta_max": 1.0},
    "checks": [{"name": "lorentzian_oracle", "kappa_T": [1, 3], "k_max": 3, "n_points": 300}]})");
  const auto corrupted = write("bad.json", R"({
    "spectrum": {"kind": "lorentzian", "eta_max": 1.0},
    "checks": [{"name": "lorentzian_oracle", "kappa_T": [3], "k_max": 3, "n_points": 300, "tolerance": 1e-20}]})");
  const auto empty = write("empty.json", R"({"spectrum": {"kind": "lorentzian", "eta_max": 1.0}, "checks": []})");
  const auto broken = write("broken.json", R"({"spectrum": )");
  std::ostringstream out, err;
  CHECK(dispatch("check", good, dir / "o1", std::nullopt, out, err) == kExitOk);
  CHECK(out.str().find("PASS") != std::string::npos);
  out.str("");
  CHECK(dispatch("check", corrupted, dir / "o2", std::nullopt, out, err) == kExitCheck);
  CHECK(err.str().find("lorentzian_oracle") != std::string::npos);
  out.str("");
  CHECK(dispatch("check", empty, dir / "o3", std::nullopt, out, err) == kExitOk);
  CHECK(out.str().find("PASS") == std::string::npos);
  CHECK(dispatch("check", broken, dir / "o4", std::nullopt, out, err) == kExitConfig);
  CHECK(dispatch("check", dir / "missing.json", dir / "o5", std::nullopt, out, err) == kExitConfig);
  CHECK(dispatch("modes", good, dir / "o6", std::nullopt, out, err) == kExitConfig);
  CHECK(dispatch("modes", good, dir / "o7", 2.0, out, err) == kExitOk);
}

TEST_CASE("numerical failures exit with code 3") {
  const auto dir = scratch("numerical");
  // Non-monotone tail: the bound diagnostic refuses it.
  std::ofstream(dir / "cfg.json") << R"({
    "spectrum": {"kind": "tabulated", "omega": [0, 1, 2, 3, 4], "eta": [0.8, 0.2, 0.6, 0.1, 0], "mirrored": true},
    "sweep": {"t_min": 1, "t_max": 2, "t_points": 2},
    "discretization": {"n_points": 60}})";
  std::ostringstream out, err;
  CHECK(dispatch("bound", dir / "cfg.json", dir / "o", std::nullopt, out, err) == kExitNumerical);
  CHECK(err.str().find("T=1") != std::string::npos);
}
