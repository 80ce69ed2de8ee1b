#include "gevlab/experiments.hpp"

#include "gevlab/besov.hpp"
#include "gevlab/gevrey_ops.hpp"
#include "gevlab/littlewood_paley.hpp"
#include "gevlab/snapshot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace gevlab {

// ---------------------------------------------------------------- report

void ExperimentReport::check_le(const std::string& name, const std::string& claim, double value, double bound) {
  checks.push_back({name, claim, value, bound, "<=", value <= bound, false});
}

void ExperimentReport::check_ge(const std::string& name, const std::string& claim, double value, double bound) {
  checks.push_back({name, claim, value, bound, ">=", value >= bound, false});
}

void ExperimentReport::check_true(const std::string& name, const std::string& claim, bool ok, double value) {
  checks.push_back({name, claim, value, 1.0, "==", ok, false});
}

void ExperimentReport::info(const std::string& name, const std::string& claim, double value, bool self_regression) {
  checks.push_back({name, claim, value, 0.0, "info", true, self_regression});
}

void ExperimentReport::append(const ExperimentReport& other) {
  checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  series.insert(series.end(), other.series.begin(), other.series.end());
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

const CheckRecord* ExperimentReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

namespace {

nlohmann::ordered_json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

nlohmann::ordered_json ExperimentReport::to_json(const ExperimentConfig& cfg) const {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["suite"] = suite;
  j["passed"] = passed();
  j["config"] = config_to_json(cfg);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json row;
    row["name"] = c.name;
    row["claim"] = c.claim;
    row["value"] = number(c.value);
    row["relation"] = c.relation;
    row["target"] = number(c.target);
    row["pass"] = c.pass;
    row["self_regression"] = c.self_regression;
    arr.push_back(row);
  }
  j["checks"] = arr;
  j["notes"] = notes;
  return j;
}

std::string ExperimentReport::to_csv() const {
  std::ostringstream os;
  os << "t,norm_name,value\n";
  for (const auto& r : series) os << fmt(r.t) << ',' << r.name << ',' << fmt(r.value) << '\n';
  return os.str();
}

void write_report(const ExperimentReport& r, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream os(dir / (r.suite + "_report.json"));
    if (!os) throw std::runtime_error("cannot write report into " + dir.string());
    os << r.to_json(cfg).dump(2) << '\n';
  }
  if (cfg.csv) {
    std::ofstream os(dir / (r.suite + "_series.csv"));
    os << r.to_csv();
  }
}

// ---------------------------------------------------------------- helpers

namespace {

std::string str(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

/// Real random field: white noise, optionally shaped by e^{-(|xi|/k_c)^2}, zero mean, dealiased.
Field random_field(const GridSpec& g, int comps, std::mt19937_64& rng, double k_c) {
  std::normal_distribution<double> normal(0.0, 1.0);
  GridArray<double> w(g.points(), comps);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (int c = 0; c < comps; ++c) w(i, c) = normal(rng);
  Field f = remove_mean(forward_transform(w, g));
  if (k_c > 0.0)
    f = apply_multiplier(f, [k_c](const Frequency& q) { return std::exp(-q.l2_squared() / (k_c * k_c)); });
  return dealias(f);
}

double rel_diff(const Field& a, const Field& b) {
  const double scale = std::max(max_abs(b), 1e-300);
  return max_abs(a - b) / scale;
}

double max_divergence(const Field& u) { return to_physical(divergence(u)).abs().maxCoeff(); }

}  // namespace

double series_distance(const std::vector<double>& t, const std::vector<Field>& u1, const std::vector<Field>& d1,
                       const std::vector<Field>& u2, const std::vector<Field>& d2, double p, double q,
                       const DyadicDecomposition& dec) {
  std::vector<Field> du, dd;
  for (std::size_t k = 0; k < t.size(); ++k) {
    du.push_back(u1[k] - u2[k]);
    dd.push_back(d1[k] - d2[k]);
  }
  return series_norms(t, du, dd, p, q, dec).weighted(1.0, 1.0);
}

// ---------------------------------------------------------------- kernel

ExperimentReport run_kernel_suite(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.suite = "kernel";
  const double ts[] = {0.25, 1.0, 4.0};
  double value[3][3];
  for (int m = 0; m <= 2; ++m) {
    for (int i = 0; i < 3; ++i) {
      const KernelResult k = kernel_l1_norm(KernelProbe::make(m, ts[i], cfg.kernel_n, cfg.kernel_box_factor));
      value[m][i] = k.l1;
      r.series.push_back({ts[i], "kernel_l1_m" + std::to_string(m), k.l1});
      const std::string tag = "m=" + std::to_string(m) + " t=" + str(ts[i]);
      r.check_true("kernel resolution " + tag, "kernel-resolution", k.resolution_ok, k.spectral_edge);
      if (m == 0) {
        r.check_le("kernel unit mass " + tag, "kernel-unit-mass", std::abs(k.l1 - 1.0), 1e-6);
        r.check_ge("kernel positivity " + tag, "kernel-positivity", k.min_value, 0.0);
      }
      if (i == 1) r.info("kernel tail fraction m=" + std::to_string(m), "kernel-box-tail", k.tail_fraction);
    }
  }
  for (int m = 1; m <= 2; ++m) {
    for (int i : {0, 2}) {
      const double scaled = value[m][i] * std::pow(ts[i], 0.5 * m);
      r.check_le("kernel scaling m=" + std::to_string(m) + " t=" + str(ts[i]), "kernel-scaling",
                 std::abs(scaled / value[m][1] - 1.0), 1e-4);
    }
  }
  r.check_le("kernel ratio m=1 t=0.25/t=1 minus 2", "kernel-scaling", std::abs(value[1][0] / value[1][1] - 2.0), 1e-4);
  r.check_le("kernel ratio m=2 t=4/t=1 minus 1/4", "kernel-scaling", std::abs(value[2][2] / value[2][1] - 0.25), 1e-4);
  for (int m = 1; m <= 2; ++m) {
    const KernelResult fine = kernel_l1_norm(KernelProbe::make(m, 1.0, cfg.kernel_check_n, cfg.kernel_box_factor));
    const double change = std::abs(fine.l1 / value[m][1] - 1.0);
    // |k_2| has more sign changes per unit length, so trapezoid error on |k| converges slower
    if (m == 1)
      r.check_le("kernel resolution agreement m=1", "kernel-refinement", change, 1e-4);
    else
      r.info("kernel resolution change m=" + std::to_string(m), "kernel-refinement", change);
    r.info("kernel constant C_" + std::to_string(m), "kernel-constant", fine.l1, true);
  }
  r.notes.push_back("kernel L1 norms are periodized on a cube of side " + str(cfg.kernel_box_factor) +
                    " sqrt(t); they bound the whole-space norm from below");
  return r;
}

// ---------------------------------------------------------------- bilinear

ExperimentReport run_bilinear_suite(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.suite = "bilinear";
  std::mt19937_64 rng(cfg.seed);
  for (int n : {16, 32, 64}) {
    const GridSpec g = GridSpec::make(1, n);
    const Field u = random_field(g, 1, rng, 0.0), v = random_field(g, 1, rng, 0.0);
    for (double t : {0.0, 0.1, 1.0}) {
      const Field direct = bilinear_direct(u, v, t);
      const double err = rel_diff(bilinear_decomposed(u, v, t), direct);
      const std::string tag = "n=" + std::to_string(n) + " t=" + str(t);
      r.check_le("decomposition vs direct " + tag, "bilinear-decomposition", err, t == 0.0 ? 1e-12 : 1e-8);
      r.series.push_back({t, "rel_err_decomposition_n" + std::to_string(n), err});
      if (t == 0.0)
        r.check_le("direct vs product " + tag, "bilinear-trivial-weight", rel_diff(direct, product(u, v)), 1e-12);
    }
  }
  {
    const GridSpec g = GridSpec::make(2, 16);
    const Field u = random_field(g, 1, rng, 0.0), v = random_field(g, 1, rng, 0.0);
    r.check_le("decomposition vs direct dim=2 n=16 t=0.5", "bilinear-decomposition",
               rel_diff(bilinear_decomposed(u, v, 0.5), bilinear_direct(u, v, 0.5)), 1e-8);
  }
  {
    const GridSpec g = GridSpec::make(1, 32);
    const Field u = random_field(g, 1, rng, 0.0), v = random_field(g, 1, rng, 0.0);
    const GevreyWeight w = GevreyWeight::make(0.5);
    const Field conj = gevrey_multiply(product(gevrey_multiply(u, w, -1), gevrey_multiply(v, w, -1)), w, 1);
    r.check_le("conjugation identity n=32 t=0.5", "bilinear-conjugation", rel_diff(conj, bilinear_direct(u, v, 0.5)),
               1e-10);
    double worst = -kInfinity;
    for (int a = -16; a < 16; ++a)
      for (int b = -16; b < 16; ++b) worst = std::max(worst, double(std::abs(a + b) - std::abs(a) - std::abs(b)));
    r.check_le("weight exponent sign, exhaustive dim=1", "bilinear-weight-sign", worst, 0.0);
  }
  for (double t : {0.1, 1.0}) {
    const OctantCheck oc = octant_weight_check(10000, t, 32, cfg.seed + 1);
    r.check_le("octant factorization t=" + str(t), "octant-membership", oc.max_error, 1e-12);
    r.check_le("weight exponent sign dim=3 t=" + str(t), "bilinear-weight-sign", oc.max_exponent, 0.0);
    r.info("octant pairs outside the literal set t=" + str(t), "octant-literal-set", oc.literal_set_misses);
  }
  {
    const GridSpec g = GridSpec::make(2, 32);
    const Field u = random_field(g, 1, rng, 6.0), v = random_field(g, 1, rng, 6.0);
    double worst = 0.0;
    for (double t : {0.0, 0.5, 1.0, 2.0, 4.0}) {
      const double ratio = bilinear_lp_ratio(u, v, t, 2.0);
      r.series.push_back({t, "bilinear_lp_ratio", ratio});
      worst = std::max(worst, ratio);
    }
    r.check_true("bilinear operator ratio finite on t in [0, 4]", "bilinear-lp-bound", std::isfinite(worst), worst);
    r.info("bilinear operator ratio max", "bilinear-lp-bound", worst);
  }
  {
    const GridSpec g = GridSpec::make(3, 16);
    const Field f = random_field(g, 1, rng, 0.0);
    double worst2 = 0.0, worst4 = 0.0;
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
      const double r2 = heat_gevrey_lp_ratio(f, t, 2.0), r4 = heat_gevrey_lp_ratio(f, t, 4.0);
      r.series.push_back({t, "heat_gevrey_l2_ratio", r2});
      r.series.push_back({t, "heat_gevrey_l4_ratio", r4});
      worst2 = std::max(worst2, r2);
      worst4 = std::max(worst4, r4);
    }
    r.check_le("heat-gevrey L2 operator ratio", "heat-gevrey-bounded", worst2, std::exp(1.5));
    r.info("heat-gevrey L4 operator ratio max", "heat-gevrey-bounded", worst4);
    const Field split = half_line_project(f, 0, 1) + half_line_project(f, 0, -1);
    r.check_le("half-line partition", "half-line-projection", rel_diff(split, f), 1e-13);
  }
  for (double k2 : {1.0, 4.0}) {
    const double err = duhamel_quadrature_error(k2, 0.25, 64);
    r.check_le("Duhamel quadrature |k|^2=" + str(k2), "duhamel-smoothing", err, 1e-4);
  }
  return r;
}

// ---------------------------------------------------------------- toolkit

ExperimentReport run_lp_toolkit_suite(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.suite = "toolkit";
  const GridSpec g = GridSpec::make(3, cfg.n);
  const DyadicDecomposition dec(g);
  std::mt19937_64 rng(cfg.seed);

  {
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(g.points());
    for (int j = dec.j_min(); j <= dec.j_max(); ++j)
      for (const auto& e : dec.support(j)) sum[e.index] += e.weight;
    double worst = 0.0, worst_chi = 0.0;
    for_each_frequency(g, [&](const Frequency& q) {
      if (q.is_zero()) return;
      worst = std::max(worst, std::abs(sum[q.index] - 1.0));
      double s = lp::chi(q.l2());
      for (int j = 0; j <= dec.j_max(); ++j) s += dec.block_weight(j, q.l2());
      worst_chi = std::max(worst_chi, std::abs(s - 1.0));
    });
    r.check_le("partition of unity residual", "partition-of-unity", worst, 1e-12);
    r.check_le("low-pass plus blocks residual", "partition-of-unity", worst_chi, 1e-12);
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Field u = random_field(g, 1, rng, 0.0), v = random_field(g, 1, rng, 0.0);
      const auto parts = bony_decompose(u, v, dec);
      worst = std::max(worst, rel_diff(parts.paraproduct_uv + parts.paraproduct_vu + parts.remainder, product(u, v)));
    }
    r.check_le("Bony reconstruction, 20 pairs", "bony-reconstruction", worst, 1e-11);
  }
  {
    const Field f = random_field(g, 1, rng, 0.0);
    double worst = 0.0;
    for (int j = dec.j_min(); j <= dec.j_max(); ++j)
      for (int k = dec.j_min(); k <= dec.j_max(); ++k)
        if (std::abs(j - k) >= 2) worst = std::max(worst, max_abs(delta_j(delta_j(f, j, dec), k, dec)));
    r.check_true("block near-orthogonality is exact", "block-orthogonality", worst == 0.0, worst);
    const Field h = random_field(g, 1, rng, 0.0);
    double worst_loc = 0.0;
    for (int k = dec.j_min(); k <= dec.j_max(); ++k) {
      const Field pk = product(s_j(f, k - 1, dec), delta_j(h, k, dec));
      const double scale = std::max(max_abs(pk), 1e-300);
      for (int j = dec.j_min(); j <= dec.j_max(); ++j)
        if (std::abs(j - k) >= 5) worst_loc = std::max(worst_loc, max_abs(delta_j(pk, j, dec)) / scale);
    }
    r.check_le("paraproduct block locality", "paraproduct-locality", worst_loc, 1e-12);
  }
  {
    double up_lo = kInfinity, up_hi = 0.0, lo_lo = kInfinity, lo_hi = 0.0, identity = 0.0;
    for (int trial = 0; trial < 3; ++trial) {
      const Field f = random_field(g, 1, rng, 0.0);
      for (int j = dec.j_min() + 1; j <= dec.j_max() - 1; ++j) {
        for (int k = 0; k <= 2; ++k) {
          const auto br = bernstein_ratio(f, j, 2.0, kInfinity, k, dec);
          if (!br) continue;
          up_lo = std::min(up_lo, br->upper);
          up_hi = std::max(up_hi, br->upper);
          lo_lo = std::min(lo_lo, br->lower);
          lo_hi = std::max(lo_hi, br->lower);
          if (trial == 0) r.series.push_back({double(j), "bernstein_upper_k" + std::to_string(k), br->upper});
        }
        const auto same = bernstein_ratio(f, j, 2.0, 2.0, 0, dec);
        if (same) identity = std::max(identity, std::abs(same->upper - 1.0));
      }
    }
    // the p -> q ratio is one-sided: spread-out blocks sit far below it
    const double c_lo = std::max(lo_hi, 1.0 / lo_lo);
    r.check_le("Bernstein k=0 p=q ratio minus 1", "bernstein", identity, 1e-12);
    r.check_le("Bernstein upper ratio max", "bernstein", up_hi, 64.0);
    r.info("Bernstein upper ratio min", "bernstein", up_lo);
    r.check_le("Bernstein annulus window constant C", "bernstein", c_lo, 64.0);
  }
  {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const Field f = random_field(GridSpec::make(3, 16), 1, rng, 3.0 + trial % 5);
      worst = std::max(worst, interpolation_check(f, -1.0, 1.0, 0.5, 2.0, 1.0, DyadicDecomposition(f.grid())));
    }
    r.check_le("interpolation ratio, 100 fields, r=1", "interpolation", worst, 2.0);
    const Field f = random_field(g, 1, rng, 0.0);
    const Field one = delta_j(f, 1, dec);
    // A field whose spectrum meets a single block exactly is hard to build from smooth cutoffs;
    // with r = inf the ratio is exactly 1 whenever one block dominates both norms.
    r.check_le("interpolation ratio, single block, r=inf", "interpolation",
               std::abs(interpolation_check(one, -1.0, 1.0, 0.5, 2.0, kInfinity, dec) - 1.0), 1e-12);
  }
  {
    double emb = 0.0, eq_lo = kInfinity, eq_hi = 0.0, homog = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      const Field f = random_field(g, 1, rng, 6.0);
      emb = std::max(emb, embedding_ratio(f, 0.5, 2.0, 4.0, 1.0, dec));
      emb = std::max(emb, embedding_ratio(f, 1.5, 2.0, kInfinity, 1.0, dec));
      const double e = gradient_equivalence_ratio(f, 0.5, 2.0, 1.0, dec);
      eq_lo = std::min(eq_lo, e);
      eq_hi = std::max(eq_hi, e);
      const BesovIndex idx = BesovIndex::make(0.5, 2.0, 1.0);
      const double base = besov_norm(f, idx, dec);
      homog = std::max(homog, std::abs(besov_norm(-3.0 * f, idx, dec) - 3.0 * base) / (3.0 * base));
    }
    r.check_true("embedding constant finite", "besov-embedding", std::isfinite(emb), emb);
    r.info("embedding constant", "besov-embedding", emb);
    r.info("gradient equivalence lower", "besov-gradient-equivalence", eq_lo);
    r.info("gradient equivalence upper", "besov-gradient-equivalence", eq_hi);
    r.check_le("norm homogeneity", "besov-homogeneity", homog, 1e-12);
  }
  {
    double worst = 0.0, refine = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Field f = random_field(g, 1, rng, 4.0), h = random_field(g, 1, rng, 4.0);
      for (auto mode : {ProductEstimate::low_high, ProductEstimate::mixed})
        worst = std::max(worst, product_estimate_ratio(f, h, mode, 2.0, 2.0, 0.1, 1.0, dec));
    }
    r.check_le("product estimate ratio, 20 pairs", "product-estimate", worst, 50.0);
    const auto smooth = [](int n) {
      const GridSpec gs = GridSpec::make(3, n);
      const Field f = remove_mean(forward_transform(
          sample(gs, 1, [](const Eigen::Vector3d& x) { return Eigen::Matrix<double, 1, 1>(std::exp(std::sin(x[0]) + 0.5 * std::cos(x[1] - x[2]))); }), gs));
      const Field h = remove_mean(forward_transform(
          sample(gs, 1, [](const Eigen::Vector3d& x) { return Eigen::Matrix<double, 1, 1>(std::cos(x[0] + x[1]) / (1.5 + std::sin(x[2]))); }), gs));
      const DyadicDecomposition d(gs);
      return product_estimate_ratio(f, h, ProductEstimate::low_high, 2.0, 2.0, 0.1, 1.0, d);
    };
    const double coarse = smooth(cfg.n / 2), fine = smooth(cfg.n);
    refine = fine / coarse;
    r.check_le("product estimate refinement change", "product-estimate", std::max(refine, 1.0 / refine), 2.0);
  }
  {
    const Field f = random_field(g, 1, rng, 6.0);
    const BesovIndex idx = BesovIndex::make(0.5, 2.0, 1.0);
    const double b = besov_norm(f, idx, dec);
    const double one = chemin_lerner_norm({f}, TimeNormSpec{kInfinity, {0.0}, idx}, dec);
    r.check_le("time norm rho=inf single snapshot", "chemin-lerner", std::abs(one - b) / b, 1e-15);
    const double l1 = chemin_lerner_norm({f, f}, TimeNormSpec{1.0, {0.0, 0.7}, idx}, dec);
    r.check_le("time norm rho=1 constant field", "chemin-lerner", std::abs(l1 - 0.7 * b) / (0.7 * b), 1e-12);
    Field mode(g, 1, false);
    mode.coeffs()(flat_index(g, {1, 0, 0}), 0) = 1.0;
    std::vector<Field> snaps;
    std::vector<double> ts;
    for (int k = 0; k < 64; ++k) {
      ts.push_back(k / 63.0);
      snaps.push_back(heat_semigroup(mode, ts.back()));
    }
    const double heat = chemin_lerner_norm(snaps, TimeNormSpec{1.0, ts, idx}, dec);
    const double exact = besov_norm(mode, idx, dec) * (1.0 - std::exp(-1.0));
    r.check_le("time norm of heat-decaying mode", "chemin-lerner", std::abs(heat - exact) / exact, 1e-4);
  }
  return r;
}

// ---------------------------------------------------------------- small-data runs

SmallDataRun run_small_data(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& snapshot_dir) {
  const GridSpec g = cfg.grid();
  if (g.dim < 2) throw ConfigError("solver runs need grid.dim >= 2");
  const DyadicDecomposition dec(g);
  const auto [u0, d0] = make_initial_data(g, cfg.initial_data(), dec);
  SmallDataRun run;
  run.m0 = initial_size(u0, d0, cfg.p, cfg.q, dec);
  BlowupMonitor monitor(dec, cfg.p, cfg.q, cfg.theta);
  MarchOptions opt;
  opt.dt = cfg.dt;
  opt.step.scheme = cfg.scheme;
  opt.step.cfl = cfg.cfl;
  opt.renormalize = cfg.renormalize;
  const SolverState s0 = SolverState::make(0.0, u0, d0, cfg.d_bar);
  const int samples = static_cast<int>(std::llround(cfg.t_end / cfg.sample_interval));
  int step = 0;
  int next_sample = 0;
  SolverState cur = s0;
  const auto observe = [&](const SolverState& s) {
    monitor.add(s);
    run.max_div = std::max(run.max_div, max_divergence(s.u));
    run.max_drift = std::max(run.max_drift, director_drift(s));
    if (snapshot_dir && cfg.snapshot_every > 0 && step % cfg.snapshot_every == 0) {
      std::filesystem::create_directories(*snapshot_dir);
      write_snapshot(*snapshot_dir / ("u_" + std::to_string(step) + ".gvlc"), s.u);
      write_snapshot(*snapshot_dir / ("delta_" + std::to_string(step) + ".gvlc"), s.delta);
    }
    ++step;
  };
  // march sample interval by sample interval so sample times are hit exactly
  observe(cur);
  run.samples.push_back(cur);
  for (next_sample = 1; next_sample <= samples; ++next_sample) {
    const double target = next_sample * cfg.sample_interval;
    bool first = true;
    cur = march(cur, target, opt, [&](const SolverState& s) {
      if (first) {
        first = false;
        return;
      }
      observe(s);
    });
    cur.t = target;
    run.samples.push_back(cur);
  }
  run.monitor = monitor.report();
  return run;
}

ExperimentReport run_gevrey_tracking(const ExperimentConfig& cfg, const SmallDataRun* reuse) {
  ExperimentReport r;
  r.suite = "gevrey";
  const SmallDataRun own = reuse ? SmallDataRun{} : run_small_data(cfg, std::filesystem::path(cfg.out_dir) / "snapshots");
  const SmallDataRun& run = reuse ? *reuse : own;
  const GridSpec g = cfg.grid();
  const DyadicDecomposition dec(g);
  const double d = g.dim;
  const BesovIndex iu = BesovIndex::make(d / cfg.p - 1, cfg.p, 1.0), id = BesovIndex::make(d / cfg.q, cfg.q, 1.0);
  r.info("initial size M0", "initial-size", run.m0);

  double worst_c = 0.0, worst_radius = kInfinity, energy_rise = 0.0, prev_energy = kInfinity;
  for (const auto& s : run.samples) {
    const double a = std::sqrt(s.t);
    const double gu = gevrey_besov_norm(s.u, a, iu, dec), gd = gevrey_besov_norm(s.delta, a, id, dec);
    r.series.push_back({s.t, "gevrey_besov_u", gu});
    r.series.push_back({s.t, "gevrey_besov_delta", gd});
    if (run.m0 > 0.0) worst_c = std::max(worst_c, (gu + gd) / run.m0);
    const double energy = std::pow(parseval_l2(s.u), 2) + std::pow(parseval_l2(gradient(s.delta)), 2);
    r.series.push_back({s.t, "energy", energy});
    if (std::isfinite(prev_energy)) energy_rise = std::max(energy_rise, (energy - prev_energy) / prev_energy);
    prev_energy = energy;
    if (s.t >= 0.05 - 1e-12 && run.m0 > 0.0) {
      for (const Field* f : {&s.u, &s.delta}) {
        const SlopeFit fit = spectral_slope(*f);
        worst_radius = std::min(worst_radius, fit.radius() / a);
        r.series.push_back({s.t, f == &s.u ? "radius_u" : "radius_delta", fit.radius()});
      }
    }
  }
  r.check_le("Gevrey-Besov norms over M0", "gevrey-persistence", worst_c, 10.0);
  if (run.m0 > 0.0) r.check_ge("fitted radius over sqrt(t)", "gevrey-radius", worst_radius, 0.9);
  r.check_true("continuation quantity trend flat", "continuation-monitor", !run.monitor.increasing,
               run.monitor.value.empty() ? 0.0 : run.monitor.value.back());
  r.info("continuation quantity early rate", "continuation-monitor", run.monitor.early_rate);
  r.info("continuation quantity late rate", "continuation-monitor", run.monitor.late_rate);
  for (std::size_t i = 0; i < run.monitor.t.size(); ++i)
    r.series.push_back({run.monitor.t[i], "continuation_quantity", run.monitor.value[i]});
  r.check_le("max divergence of u", "divergence-free", run.max_div, 1e-12);
  r.info("max director length drift", "unit-length-drift", run.max_drift);
  r.info("max relative energy increase between samples", "energy-monitor", energy_rise);

  // heat-only control: evolved numerically in dt steps vs the closed-form spectrum
  {
    const auto [u0, d0] = make_initial_data(g, cfg.initial_data(), dec);
    const double t = 0.25;
    if (max_abs(u0) > 0.0) {
      Field f = u0;
      const int steps = static_cast<int>(std::llround(t / cfg.dt));
      for (int k = 0; k < steps; ++k) f = heat_semigroup(f, t / steps);
      const SlopeFit num = spectral_slope(f), exact = spectral_slope(heat_semigroup(u0, t));
      r.check_le("heat-only slope vs closed form", "heat-slope-control",
                 std::abs(num.slope - exact.slope) / std::abs(exact.slope), 0.02);
      r.check_ge("heat-only radius over sqrt(t)", "heat-slope-control",
                 std::min(num.radius(), exact.radius()) / std::sqrt(t), 0.9);
    }
    std::mt19937_64 rng(cfg.seed + 7);
    const Field noise = random_field(g, 1, rng, 0.0);
    const SlopeFit wf = spectral_slope(noise);
    r.check_true("white noise flagged non-analytic", "analyticity-negative-control",
                 !looks_analytic(wf, 0.9 * std::sqrt(t)), wf.radius());
  }
  return r;
}

ExperimentReport run_decay_experiment(const ExperimentConfig& cfg, const SmallDataRun* reuse) {
  ExperimentReport r;
  r.suite = "decay";
  const SmallDataRun own = reuse ? SmallDataRun{} : run_small_data(cfg);
  const SmallDataRun& run = reuse ? *reuse : own;
  const GridSpec g = cfg.grid();
  const DyadicDecomposition dec(g);
  const double d = g.dim;
  const BesovIndex iu = BesovIndex::make(d / cfg.p - 1, cfg.p, 1.0), id = BesovIndex::make(d / cfg.q, cfg.q, 1.0);
  const auto at = [&](double t) -> const SolverState& {
    for (const auto& s : run.samples)
      if (std::abs(s.t - t) < 1e-9) return s;
    throw ConfigError("decay time " + str(t) + " is not a sample time (multiple of norms.sample_interval)");
  };
  std::vector<int> orders = cfg.orders;
  if (std::find(orders.begin(), orders.end(), 0) == orders.end()) orders.insert(orders.begin(), 0);
  for (int m : orders) {
    double sup = 0.0;
    std::vector<double> lx, ly;
    for (double t : cfg.decay_times) {
      const SolverState& s = at(t);
      const double nm = besov_norm(lambda_power(s.u, m), iu, dec) + besov_norm(lambda_power(s.delta, m), id, dec);
      const double scaled = std::pow(t, 0.5 * m) * nm;
      r.series.push_back({t, "lambda_norm_m" + std::to_string(m), nm});
      r.series.push_back({t, "scaled_lambda_norm_m" + std::to_string(m), scaled});
      sup = std::max(sup, scaled);
      if (nm > 0.0) {
        lx.push_back(std::log(t));
        ly.push_back(std::log(nm));
      }
    }
    const std::string tag = "m=" + std::to_string(m);
    if (m == 0) {
      r.info("scaled derivative norm sup over M0 " + tag, "derivative-decay", run.m0 > 0 ? sup / run.m0 : 0.0);
      continue;
    }
    if (run.m0 > 0.0) r.check_le("scaled derivative norm sup over M0 " + tag, "derivative-decay", sup / run.m0, 20.0);
    if (lx.size() >= 2) {
      const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / lx.size();
      const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / ly.size();
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
      }
      r.info("log-log slope over decay times " + tag, "derivative-decay", sxy / sxx);
    }
  }

  // eigenmode control: a shear mode solves the full system with zero nonlinearity
  {
    Field u0(g, g.dim);
    const double amp = 0.1;
    u0.coeffs()(flat_index(g, {0, 1, 0}), 0) = std::complex<double>(0.0, -0.5 * amp);
    u0.coeffs()(flat_index(g, {0, -1, 0}), 0) = std::complex<double>(0.0, 0.5 * amp);
    MarchOptions opt;
    opt.dt = cfg.dt;
    opt.step.scheme = cfg.scheme;
    SolverState s = SolverState::make(0.0, u0, Field(g, 3), cfg.d_bar);
    const double base = besov_norm(u0, iu, dec);
    double worst = 0.0;
    for (double t : cfg.decay_times) {
      s = march(s, t, opt);
      for (int m : orders) {
        const double nm = besov_norm(lambda_power(s.u, m), iu, dec);
        worst = std::max(worst, std::abs(nm - std::exp(-t) * base) / (std::exp(-t) * base));
      }
    }
    r.check_le("eigenmode heat control vs closed form", "derivative-decay-control", worst, 1e-6);
  }
  return r;
}

// ---------------------------------------------------------------- Picard

ExperimentReport run_picard_contraction(const ExperimentConfig& cfg) {
  ExperimentReport r;
  r.suite = "picard";
  const GridSpec g = cfg.grid();
  if (g.dim < 2) throw ConfigError("solver runs need grid.dim >= 2");
  const DyadicDecomposition dec(g);
  PicardConfig pc = cfg.picard;
  pc.p = cfg.p;
  pc.q = cfg.q;
  const auto [u0, d0] = make_initial_data(g, cfg.initial_data(), dec);

  PicardResult res = picard_solve(u0, d0, cfg.d_bar, pc, dec);
  for (int h = 0; h < cfg.max_halvings && res.trace.flagged_non_contraction(); ++h) {
    r.notes.push_back("horizon " + str(pc.horizon) + " did not contract (" + res.trace.note + "); halving");
    pc.horizon *= 0.5;
    res = picard_solve(u0, d0, cfg.d_bar, pc, dec);
  }
  r.info("initial size M0", "initial-size", res.trace.m0);
  r.info("horizon used", "picard-contraction", pc.horizon);
  r.info("weight A", "picard-contraction", res.trace.weight_a);
  r.info("weight B", "picard-contraction", res.trace.weight_b);
  double worst_ratio = 0.0;
  for (const auto& rec : res.trace.records) {
    r.series.push_back({double(rec.iterate), "iterate_bound", rec.bound});
    r.series.push_back({double(rec.iterate), "successive_difference", rec.difference});
    if (rec.iterate >= 2) {
      r.series.push_back({double(rec.iterate), "difference_ratio", rec.ratio});
      worst_ratio = std::max(worst_ratio, rec.ratio);
    }
  }
  r.check_true("Picard iteration converged", "picard-contraction", res.trace.converged,
               double(res.trace.records.size()));
  r.check_le("max successive-difference ratio from iterate 2", "picard-contraction", worst_ratio, pc.max_ratio);
  r.info("uniform bound of last iterate", "picard-bound",
         res.trace.records.empty() ? 0.0 : res.trace.records.back().bound);
  double div = 0.0;
  for (const auto& u : res.u) div = std::max(div, max_divergence(u));
  r.check_le("max divergence of Picard solution", "divergence-free", div, 1e-12);

  {
    MarchOptions opt;
    opt.dt = pc.horizon / pc.steps;
    opt.step.scheme = Scheme::etd_trapezoid;
    opt.step.cfl = cfg.cfl;
    std::vector<Field> mu, md;
    march(SolverState::make(0.0, u0, d0, cfg.d_bar), pc.horizon, opt, [&](const SolverState& s) {
      mu.push_back(s.u);
      md.push_back(s.delta);
    });
    if (mu.size() != res.t.size()) throw std::logic_error("march and Picard node counts differ");
    r.check_le("Picard vs marching distance", "picard-march-agreement",
               series_distance(res.t, res.u, res.delta, mu, md, cfg.p, cfg.q, dec), 1e-5);
  }
  {
    InitialDataSpec big = cfg.initial_data();
    big.m0 = cfg.large_m0;
    const auto [ub, db] = make_initial_data(g, big, dec);
    PicardConfig bc = cfg.picard;
    bc.p = cfg.p;
    bc.q = cfg.q;
    const PicardResult neg = picard_solve(ub, db, cfg.d_bar, bc, dec);
    double neg_ratio = 0.0;
    for (const auto& rec : neg.trace.records) {
      if (rec.iterate >= 2) neg_ratio = std::max(neg_ratio, rec.ratio);
      r.series.push_back({double(rec.iterate), "large_data_difference", rec.difference});
    }
    r.check_true("large-data negative control flagged", "picard-negative-control",
                 neg.trace.flagged_non_contraction(), neg_ratio);
    r.notes.push_back("large data: " + neg.trace.note);
  }
  return r;
}

}  // namespace gevlab
