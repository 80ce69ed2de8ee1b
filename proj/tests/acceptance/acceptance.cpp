#include "gevlab/el_solver.hpp"
#include "gevlab/experiments.hpp"
#include "gevlab/gevrey_ops.hpp"

#include "../support/test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

using namespace gevlab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every non-info check whose name starts with one of the prefixes must pass.
// Detail names the first failing check.
Outcome from_report(const ExperimentReport& r, std::initializer_list<const char*> prefixes) {
  Outcome o;
  int matched = 0, failed = 0;
  std::string first_failure;
  for (const auto& c : r.checks) {
    if (c.relation == "info") continue;
    bool hit = false;
    for (const char* p : prefixes) hit |= c.name.rfind(p, 0) == 0;
    if (!hit) continue;
    ++matched;
    if (!c.pass) {
      ++failed;
      if (first_failure.empty()) {
        std::ostringstream os;
        os << c.name << " = " << c.value;
        first_failure = os.str();
      }
    }
  }
  o.pass = matched > 0 && failed == 0;
  std::ostringstream os;
  os << matched - failed << "/" << matched << " checks";
  if (!first_failure.empty()) os << ", first failure: " << first_failure;
  if (matched == 0) os << " (no matching checks)";
  o.detail = os.str();
  return o;
}

int failures = 0;

void report(int id, const std::string& label, Outcome o, double seconds, double limit) {
  const bool in_time = limit <= 0.0 || seconds < limit;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("criterion %2d %s  %s: %s; %.1f s", id, ok ? "PASS" : "FAIL", label.c_str(), o.detail.c_str(), seconds);
  if (limit > 0.0) std::printf(" (limit %.0f s)", limit);
  std::printf("\n");
  std::fflush(stdout);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome kernel_unit_mass(const ExperimentConfig& cfg) {
  Outcome o;
  double worst = 0.0;
  for (double t : {0.25, 1.0, 4.0}) {
    const KernelResult k = kernel_l1_norm(KernelProbe::make(0, t, cfg.kernel_n, cfg.kernel_box_factor));
    worst = std::max(worst, std::abs(k.l1 - 1.0));
    o.pass &= k.resolution_ok && k.min_value >= 0.0;
  }
  o.pass &= worst <= 1e-6;
  std::ostringstream os;
  os << "max |L1 - 1| = " << worst << " (tol 1e-6)";
  o.detail = os.str();
  return o;
}

Outcome kernel_scaling(const ExperimentConfig& cfg) {
  Outcome o;
  double worst = 0.0;
  for (int m = 1; m <= 2; ++m) {
    double ref = 0.0;
    for (double t : {1.0, 0.25, 4.0}) {
      const KernelResult k = kernel_l1_norm(KernelProbe::make(m, t, cfg.kernel_n, cfg.kernel_box_factor));
      o.pass &= k.resolution_ok;
      const double scaled = k.l1 * std::pow(t, 0.5 * m);
      if (t == 1.0)
        ref = scaled;
      else
        worst = std::max(worst, std::abs(scaled / ref - 1.0));
    }
  }
  o.pass &= worst <= 1e-4;
  std::ostringstream os;
  os << "max relative spread of t^{m/2} |k_m|_L1 = " << worst << " (tol 1e-4)";
  o.detail = os.str();
  return o;
}

Outcome nse_reduction() {
  const GridSpec g = GridSpec::make(3, 32);
  const Eigen::Vector3d d_bar = Eigen::Vector3d::UnitZ();
  Field noise = leray_project(testing::random_field(g, 3, 11, 4.0));
  noise = noise * (0.5 / lp_norm(noise, kInfinity));
  double worst = 0.0;
  bool delta_zero = true;
  for (const Field& u0 : {testing::taylor_green(g, 0.5), noise}) {
    MarchOptions opt;
    opt.dt = 2.5e-3;
    const SolverState end = march(SolverState::make(0.0, u0, Field(g, 3), d_bar), 0.1, opt);
    const Field ref = testing::NseOracle::solve(u0, 0.1, 200);
    delta_zero &= max_abs(end.delta) == 0.0;
    worst = std::max(worst, max_abs(end.u - ref) / max_abs(u0));
  }
  Outcome o;
  o.pass = delta_zero && worst <= 1e-6;
  std::ostringstream os;
  os << "max relative deviation from the Navier-Stokes oracle = " << worst << " (tol 1e-6), delta stays 0: "
     << (delta_zero ? "yes" : "no");
  o.detail = os.str();
  return o;
}

Outcome determinism(const std::string& cli, const fs::path& dir) {
  Outcome o;
  std::string first_json, first_csv;
  for (int run = 0; run < 2; ++run) {
    fs::remove_all(dir);
    const std::string cmd = "\"" + cli + "\" verify toolkit --seed 7 --out \"" + dir.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) {
      o.pass = false;
      o.detail = "CLI run " + std::to_string(run + 1) + " did not exit 0";
      return o;
    }
    const std::string json = slurp(dir / "toolkit_report.json");
    const std::string csv = slurp(dir / "toolkit_series.csv");
    if (run == 0) {
      first_json = json;
      first_csv = csv;
    } else {
      o.pass = !json.empty() && json == first_json && csv == first_csv;
    }
  }
  o.detail = std::string("two CLI processes, same config and seed: reports ") +
             (o.pass ? "byte-identical" : "differ");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <path to gevlab CLI> [scratch dir]\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "gevlab_acceptance";
  fs::create_directories(scratch);

  ExperimentConfig cfg;
  cfg.out_dir = scratch.string();

  auto t0 = Clock::now();
  Outcome o = kernel_unit_mass(cfg);
  report(1, "kernel unit mass", o, seconds_since(t0), 10.0);

  t0 = Clock::now();
  o = kernel_scaling(cfg);
  report(2, "kernel scaling", o, seconds_since(t0), 60.0);

  t0 = Clock::now();
  const ExperimentReport bil = run_bilinear_suite(cfg);
  const double bil_seconds = seconds_since(t0);
  report(3, "bilinear decomposition", from_report(bil, {"decomposition vs direct", "direct vs product"}), bil_seconds,
         30.0);
  report(4, "octant symbol membership", from_report(bil, {"octant factorization"}), bil_seconds, 0.0);

  t0 = Clock::now();
  const ExperimentReport tk = run_lp_toolkit_suite(cfg);
  const double tk_seconds = seconds_since(t0);
  report(5, "toolkit exactness",
         from_report(tk, {"partition of unity", "low-pass plus blocks", "Bony reconstruction", "block near-orthogonality",
                          "Bernstein"}),
         tk_seconds, 60.0);

  t0 = Clock::now();
  o = nse_reduction();
  report(6, "Navier-Stokes reduction", o, seconds_since(t0), 300.0);

  t0 = Clock::now();
  const ExperimentReport pic = run_picard_contraction(cfg);
  const double pic_seconds = seconds_since(t0);
  report(7, "Picard contraction",
         from_report(pic, {"Picard iteration converged", "max successive-difference ratio", "Picard vs marching",
                           "large-data negative control"}),
         pic_seconds, 600.0);

  t0 = Clock::now();
  const SmallDataRun small = run_small_data(cfg);
  const ExperimentReport gev = run_gevrey_tracking(cfg, &small);
  const double gev_seconds = seconds_since(t0);
  report(8, "Gevrey persistence",
         from_report(gev, {"Gevrey-Besov norms over M0", "fitted radius over sqrt(t)", "heat-only slope"}),
         gev_seconds, 900.0);

  t0 = Clock::now();
  const ExperimentReport dec = run_decay_experiment(cfg, &small);
  const double dec_seconds = seconds_since(t0);
  report(9, "derivative decay",
         from_report(dec, {"scaled derivative norm sup over M0 m=1", "scaled derivative norm sup over M0 m=2",
                           "eigenmode heat control"}),
         dec_seconds, 300.0);

  t0 = Clock::now();
  o = determinism(cli, scratch / "determinism");
  report(10, "determinism", o, seconds_since(t0), 0.0);

  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
