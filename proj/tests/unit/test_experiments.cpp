#include "gevlab/experiments.hpp"
#include "gevlab/snapshot.hpp"

#include "../support/test_support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace gevlab;
namespace fs = std::filesystem;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "gevlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gevlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

const char* kSmallRun = R"([grid]
n = 16
[solver]
t_end = 0.1
dt = 0.005
[norms]
sample_interval = 0.05
decay_times = 0.05, 0.1
[picard]
steps = 16
large_m0 = 300
)";

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream empty("");
  const ExperimentConfig def = parse_config(empty);
  CHECK(def.n == 32);
  CHECK(def.seed == 42);
  CHECK(def.scheme == Scheme::etd_midpoint);

  std::istringstream text("[grid]\nn = 16\n[solver]\nscheme = etd1\nrenormalize = yes\n[norms]\norders = 1, 2, 3\n"
                          "[initial_data]\nd_bar = 1, 0, 0\nseed = 7\n");
  const ExperimentConfig c = parse_config(text);
  CHECK(c.n == 16);
  CHECK(c.scheme == Scheme::etd1);
  CHECK(c.renormalize);
  CHECK(c.orders == std::vector<int>{1, 2, 3});
  CHECK(c.d_bar == Eigen::Vector3d(1, 0, 0));
  CHECK(c.seed == 7u);

  std::istringstream round(default_config_text());
  const ExperimentConfig back = parse_config(round);
  CHECK(config_to_json(back) == config_to_json(def));

  for (const char* bad : {"[grid]\nsize = 3\n", "[mystery]\na = 1\n", "[grid]\nn = 12\n", "[grid]\nn = 16x\n",
                          "[norms]\np = 2\nq = 8\n", "[initial_data]\nd_bar = 1, 1, 0\n", "[solver]\nscheme = rk4\n",
                          "[output]\ncsv = maybe\n", "[norms]\ndecay_times = 0.05, 9\n", "n = 3\n"}) {
    std::istringstream is(bad);
    CHECK_THROWS_AS(parse_config(is), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/gevlab.ini"), ConfigError);
}

TEST_CASE("reports") {
  ExperimentReport r;
  r.suite = "unit";
  r.check_le("a", "tag", 1.0, 2.0);
  r.check_ge("b", "tag", 1.0, 2.0);
  r.info("c", "tag", std::nan(""), true);
  r.series.push_back({0.5, "x", 0.1});
  CHECK_FALSE(r.passed());
  REQUIRE(r.find("b"));
  CHECK_FALSE(r.find("b")->pass);
  CHECK(r.find("zzz") == nullptr);
  const auto j = r.to_json(ExperimentConfig{});
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["suite"] == "unit");
  CHECK(j["passed"] == false);
  CHECK(j["checks"].size() == 3);
  CHECK(j["checks"][2]["value"] == "nan");
  CHECK(j["checks"][2]["self_regression"] == true);
  CHECK(j["config"]["grid"]["n"] == "32");
  CHECK(r.to_csv() == "t,norm_name,value\n0.5,x,0.1\n");
  ExperimentReport other;
  other.check_true("d", "tag", true);
  r.append(other);
  CHECK(r.checks.size() == 4);
}

TEST_CASE("CLI exit codes") {
  CHECK(run_cli({"gen-config"}) == 0);
  CHECK(run_cli({}) == 2);
  CHECK(run_cli({"frobnicate"}) == 2);
  CHECK(run_cli({"verify", "--bogus"}) == 2);
  CHECK(run_cli({"verify", "everything"}) == 2);

  const fs::path dir = scratch("cli");
  {
    std::ofstream os(dir / "bad.ini");
    os << "[grid]\nwidth = 3\n";
  }
  CHECK(run_cli({"verify", "bilinear", "--config", (dir / "bad.ini").string(), "--out", dir.string()}) == 2);

  const Field f = testing::random_field(GridSpec::make(3, 8), 3, 1);
  write_snapshot(dir / "ok.gvlc", f);
  CHECK(run_cli({"inspect", (dir / "ok.gvlc").string()}) == 0);
  CHECK(run_cli({"inspect", (dir / "ok.gvlc").string(), "--json"}) == 0);
  const std::string bytes = slurp(dir / "ok.gvlc");
  {
    std::ofstream os(dir / "cut.gvlc", std::ios::binary);
    os << bytes.substr(0, bytes.size() / 2);
  }
  CHECK(run_cli({"inspect", (dir / "cut.gvlc").string()}) == 2);
  CHECK(run_cli({"inspect", (dir / "missing.gvlc").string()}) == 2);
}

TEST_CASE("verify writes deterministic reports") {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  CHECK(run_cli({"verify", "bilinear", "--out", a.string()}) == 0);
  CHECK(run_cli({"verify", "bilinear", "--json", "--out", b.string()}) == 0);
  const std::string ja = slurp(a / "bilinear_report.json");
  const auto without_dir = [](const std::string& text) {
    auto j = nlohmann::json::parse(text);
    j["config"]["output"].erase("dir");
    return j.dump();
  };
  CHECK(without_dir(ja) == without_dir(slurp(b / "bilinear_report.json")));
  CHECK(slurp(a / "bilinear_series.csv") == slurp(b / "bilinear_series.csv"));
  const auto j = nlohmann::json::parse(ja);
  CHECK(j["schema_version"] == 1);
  CHECK(j["passed"] == true);
  for (const auto& c : j["checks"]) {
    CHECK(c.contains("name"));
    CHECK(c.contains("claim"));
    CHECK(c.contains("value"));
    CHECK(c.contains("relation"));
    CHECK(c.contains("pass"));
  }
}

TEST_CASE("solver experiments on a small configuration") {
  const fs::path dir = scratch("runs");
  {
    std::ofstream os(dir / "small.ini");
    os << kSmallRun << "[output]\nsnapshot_every = 10\n";
  }
  const std::string cfg = (dir / "small.ini").string();
  CHECK(run_cli({"run", "gevrey", "--config", cfg, "--seed", "42", "--json", "--out", dir.string()}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "gevrey_report.json"));
  CHECK(j["suite"] == "gevrey");
  CHECK(j["config"]["initial_data"]["seed"] == "42");
  CHECK(fs::exists(dir / "snapshots" / "u_0.gvlc"));
  CHECK(run_cli({"inspect", (dir / "snapshots" / "delta_10.gvlc").string()}) == 0);

  std::istringstream is(kSmallRun);
  const ExperimentConfig c = parse_config(is);
  const SmallDataRun run = run_small_data(c);
  CHECK(run.samples.size() == 3);
  CHECK(run.samples.back().t == 0.1);
  CHECK(run.max_div <= 1e-12);
  const ExperimentReport decay = run_decay_experiment(c, &run);
  CHECK(decay.passed());

  ExperimentConfig zero = c;
  zero.m0 = 0.0;
  const SmallDataRun zr = run_small_data(zero);
  for (const auto& s : zr.samples) CHECK(max_abs(s.u) == 0.0);
  CHECK(run_gevrey_tracking(zero, &zr).passed());
}
