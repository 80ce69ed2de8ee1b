#include "gevlab/besov.hpp"
#include "gevlab/experiments.hpp"
#include "gevlab/snapshot.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <iostream>

namespace gevlab {

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json = false;
};

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (const char* env = std::getenv("GEVLAB_OUT"); env && *env) cfg.out_dir = env;
  if (!o.out.empty()) cfg.out_dir = o.out;
  cfg.validate();
  return cfg;
}

void print_report(const ExperimentReport& r, double seconds) {
  std::cout << "== " << r.suite << " ==\n";
  for (const auto& c : r.checks) {
    const char* tag = c.relation == "info" ? "INFO" : (c.pass ? "PASS" : "FAIL");
    std::cout << "  [" << tag << "] " << c.name << ": " << std::setprecision(6) << c.value;
    if (c.relation == "<=" || c.relation == ">=") std::cout << ' ' << c.relation << ' ' << c.target;
    std::cout << '\n';
  }
  for (const auto& n : r.notes) std::cout << "  note: " << n << '\n';
  std::cout << "  " << (r.passed() ? "passed" : "FAILED") << " in " << std::fixed << std::setprecision(2) << seconds
            << " s\n"
            << std::defaultfloat << std::setprecision(6);
}

template <typename Fn>
bool run_suite(const ExperimentConfig& cfg, const CommonOptions& o, Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentReport r = fn();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_report(r, cfg, cfg.out_dir);
  if (o.json)
    std::cout << r.to_json(cfg).dump(2) << '\n';
  else
    print_report(r, seconds);
  return r.passed();
}

int inspect(const std::string& path, bool json) {
  const Field f = read_snapshot(std::filesystem::path(path));
  const GridSpec& g = f.grid();
  const DyadicDecomposition dec(g);
  nlohmann::ordered_json j;
  j["dim"] = g.dim;
  j["n"] = g.n;
  j["components"] = f.components();
  j["l2"] = parseval_l2(f);
  j["max_coefficient"] = max_abs(f);
  j["j_min"] = dec.j_min();
  const Eigen::VectorXd b = block_norms(f, 2.0, dec);
  j["block_l2_norms"] = std::vector<double>(b.data(), b.data() + b.size());
  if (json) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "grid " << g.dim << "D n=" << g.n << ", " << f.components() << " component(s)\n"
              << "L2 norm " << parseval_l2(f) << ", max |coefficient| " << max_abs(f) << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i)
      std::cout << "  block j=" << dec.j_min() + i << "  L2 " << b[i] << '\n';
  }
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"gevlab: Gevrey-class and Besov diagnostics for the simplified Ericksen-Leslie system"};
  app.require_subcommand(1);
  CommonOptions o;
  const auto add_common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "override initial_data.seed");
    sub->add_option("--out", o.out, "output directory (overrides GEVLAB_OUT and output.dir)");
    sub->add_flag("--json", o.json, "print the JSON report instead of the summary");
  };

  std::string verify_target = "all";
  auto* verify = app.add_subcommand("verify", "operator checks: kernel, bilinear, toolkit or all");
  verify->add_option("suite", verify_target)->check(CLI::IsMember({"kernel", "bilinear", "toolkit", "all"}));
  add_common(verify);

  std::string run_target = "all";
  auto* run = app.add_subcommand("run", "solver experiments: gevrey, decay, picard or all");
  run->add_option("experiment", run_target)->check(CLI::IsMember({"gevrey", "decay", "picard", "all"}));
  add_common(run);

  std::string inspect_path;
  auto* insp = app.add_subcommand("inspect", "summarize a GVLC snapshot file");
  insp->add_option("file", inspect_path)->required()->check(CLI::ExistingFile);
  insp->add_flag("--json", o.json, "JSON output");

  app.add_subcommand("gen-config", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("gen-config")) {
      std::cout << default_config_text();
      return 0;
    }
    if (insp->parsed()) return inspect(inspect_path, o.json);

    const ExperimentConfig cfg = resolve_config(o);
    bool ok = true;
    if (verify->parsed()) {
      const bool all = verify_target == "all";
      if (all || verify_target == "kernel") ok &= run_suite(cfg, o, [&] { return run_kernel_suite(cfg); });
      if (all || verify_target == "bilinear") ok &= run_suite(cfg, o, [&] { return run_bilinear_suite(cfg); });
      if (all || verify_target == "toolkit") ok &= run_suite(cfg, o, [&] { return run_lp_toolkit_suite(cfg); });
    } else {
      const bool all = run_target == "all";
      std::optional<SmallDataRun> shared;
      const auto small = [&]() -> const SmallDataRun& {
        if (!shared)
          shared = run_small_data(cfg, std::filesystem::path(cfg.out_dir) / "snapshots");
        return *shared;
      };
      if (all || run_target == "gevrey")
        ok &= run_suite(cfg, o, [&] { return run_gevrey_tracking(cfg, &small()); });
      if (all || run_target == "decay")
        ok &= run_suite(cfg, o, [&] { return run_decay_experiment(cfg, &small()); });
      if (all || run_target == "picard") ok &= run_suite(cfg, o, [&] { return run_picard_contraction(cfg); });
    }
    return ok ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const SnapshotFormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace gevlab
