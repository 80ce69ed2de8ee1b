#include "gevlab/el_solver.hpp"

#include "gevlab/gevrey_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gevlab {

namespace {

Field to_spectral(const GridArray<double>& values, const GridSpec& g) { return dealias(forward_transform(values, g)); }

/// Column c of the result is s * v[c] for a scalar field s.
Field times_vector(const Field& s, const Eigen::Vector3d& v) {
  Field out(s.grid(), 3, s.is_real());
  for (int c = 0; c < 3; ++c) out.component(c) = v[c] * s.component(0);
  return out;
}

/// out_c = sum_i a_i G_{c*dim+i}
GridArray<double> advect_physical(const GridArray<double>& a, const GridArray<double>& grad_b, int dim) {
  const Eigen::Index comps = grad_b.cols() / dim;
  GridArray<double> out = GridArray<double>::Zero(a.rows(), comps);
  for (Eigen::Index c = 0; c < comps; ++c)
    for (int i = 0; i < dim; ++i) out.col(c) += a.col(i) * grad_b.col(c * dim + i);
  return out;
}

/// M_{ij} = sum_k A_{k*dim+i} B_{k*dim+j}, stored at column i*dim+j
GridArray<double> stress_physical(const GridArray<double>& ga, const GridArray<double>& gb, int dim) {
  const Eigen::Index comps = ga.cols() / dim;
  GridArray<double> out = GridArray<double>::Zero(ga.rows(), dim * dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (Eigen::Index k = 0; k < comps; ++k) out.col(i * dim + j) += ga.col(k * dim + i) * gb.col(k * dim + j);
  return out;
}

void check_finite(const Field& f, const char* what) {
  if (!f.coeffs().allFinite()) throw SolverAbort(std::string("non-finite values in ") + what);
}

double max_velocity(const Field& u) {
  const GridArray<double> p = to_physical(u);
  return p.square().rowwise().sum().sqrt().maxCoeff();
}

/// h phi1(h Delta) f, with phi1(z) = (e^z - 1) / z.
Field phi1_apply(const Field& f, double h) {
  return apply_multiplier(f, [h](const Frequency& q) {
    const double k2 = q.l2_squared();
    return k2 == 0.0 ? h : -std::expm1(-h * k2) / k2;
  });
}

}  // namespace

SolverState SolverState::make(double t, Field u, Field delta, const Eigen::Vector3d& d_bar) {
  const GridSpec& g = u.grid();
  if (u.components() != g.dim) throw std::invalid_argument("SolverState: u must have dim components");
  if (delta.components() != 3) throw std::invalid_argument("SolverState: delta must have 3 components");
  if (!(delta.grid() == g)) throw std::invalid_argument("SolverState: u and delta grids differ");
  if (std::abs(d_bar.norm() - 1.0) > 1e-14) throw std::invalid_argument("SolverState: d_bar must be a unit vector");
  return SolverState{t, std::move(u), std::move(delta), d_bar};
}

Field advection(const Field& a, const Field& b) {
  const int dim = a.grid().dim;
  if (a.components() != dim) throw std::invalid_argument("advection: transporting field must have dim components");
  return to_spectral(advect_physical(to_physical(a), to_physical(gradient(b)), dim), a.grid());
}

Field stress_divergence(const Field& a, const Field& b) {
  a.check_compatible(b);
  const int dim = a.grid().dim;
  return divergence(to_spectral(stress_physical(to_physical(gradient(a)), to_physical(gradient(b)), dim), a.grid()));
}

Field stress_divergence_expanded(const Field& d) {
  const GridSpec& g = d.grid();
  const int dim = g.dim;
  // (Delta d . grad d)_i = sum_k Delta d_k d_i d_k
  const GridArray<double> lap = to_physical(laplacian(d));
  const GridArray<double> grad = to_physical(gradient(d));
  GridArray<double> first = GridArray<double>::Zero(g.points(), dim);
  for (int i = 0; i < dim; ++i)
    for (int k = 0; k < d.components(); ++k) first.col(i) += lap.col(k) * grad.col(k * dim + i);
  const Field energy = to_spectral(grad.square().rowwise().sum().eval(), g);
  return to_spectral(first, g) + 0.5 * gradient(energy);
}

Field gradient_contraction(const Field& a, const Field& b) {
  a.check_compatible(b);
  const GridArray<double> ga = to_physical(gradient(a)), gb = to_physical(gradient(b));
  return to_spectral((ga * gb).rowwise().sum().eval(), a.grid());
}

NonlinearTerms nonlinear_terms(const SolverState& s, bool zero_mean) {
  const GridSpec& g = s.grid();
  const int dim = g.dim;
  const GridArray<double> U = to_physical(s.u);
  const GridArray<double> GU = to_physical(gradient(s.u));
  const GridArray<double> D = to_physical(s.delta);
  const GridArray<double> GD = to_physical(gradient(s.delta));

  const Field u_adv = to_spectral(advect_physical(U, GU, dim), g);
  const Field stress = divergence(to_spectral(stress_physical(GD, GD, dim), g));
  const Field d_adv = to_spectral(advect_physical(U, GD, dim), g);
  const Field energy = to_spectral(GD.square().rowwise().sum().eval(), g);
  const GridArray<double> E = to_physical(energy);
  GridArray<double> cubic_phys(g.points(), 3);
  for (int c = 0; c < 3; ++c) cubic_phys.col(c) = E.col(0) * D.col(c);
  const Field cubic = to_spectral(cubic_phys, g);

  NonlinearTerms out{-leray_project(u_adv + stress), cubic + times_vector(energy, s.d_bar) - d_adv};
  if (zero_mean) {
    out.velocity = remove_mean(out.velocity);
    out.director = remove_mean(out.director);
  }
  return out;
}

Field nonlinear_velocity(const SolverState& s) { return nonlinear_terms(s).velocity; }
Field nonlinear_director(const SolverState& s) { return nonlinear_terms(s).director; }

Scheme parse_scheme(const std::string& name) {
  if (name == "etd1") return Scheme::etd1;
  if (name == "etd_midpoint") return Scheme::etd_midpoint;
  if (name == "etd_trapezoid") return Scheme::etd_trapezoid;
  throw std::invalid_argument("unknown scheme '" + name + "' (etd1, etd_midpoint, etd_trapezoid)");
}

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::etd1: return "etd1";
    case Scheme::etd_midpoint: return "etd_midpoint";
    case Scheme::etd_trapezoid: return "etd_trapezoid";
  }
  return "?";
}

SolverState step_mild(const SolverState& s, double dt, const StepOptions& opt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_mild: dt must be > 0");
  const double umax = max_velocity(s.u);
  if (umax > 0.0 && dt > opt.cfl / umax)
    throw SolverAbort("step guard violated: dt = " + std::to_string(dt) + " > " + std::to_string(opt.cfl / umax));

  const NonlinearTerms n0 = nonlinear_terms(s);
  SolverState next = s;
  next.t = s.t + dt;
  const Field eu = heat_semigroup(s.u, dt), ed = heat_semigroup(s.delta, dt);
  switch (opt.scheme) {
    case Scheme::etd1:
      next.u = eu + phi1_apply(n0.velocity, dt);
      next.delta = ed + phi1_apply(n0.director, dt);
      break;
    case Scheme::etd_midpoint: {
      const double h2 = 0.5 * dt;
      SolverState mid = s;
      mid.t = s.t + h2;
      mid.u = heat_semigroup(s.u, h2) + phi1_apply(n0.velocity, h2);
      mid.delta = heat_semigroup(s.delta, h2) + phi1_apply(n0.director, h2);
      const NonlinearTerms nm = nonlinear_terms(mid);
      next.u = eu + dt * heat_semigroup(nm.velocity, h2);
      next.delta = ed + dt * heat_semigroup(nm.director, h2);
      break;
    }
    case Scheme::etd_trapezoid: {
      SolverState pred = s;
      pred.t = next.t;
      pred.u = eu + phi1_apply(n0.velocity, dt);
      pred.delta = ed + phi1_apply(n0.director, dt);
      const NonlinearTerms np = nonlinear_terms(pred);
      next.u = eu + (0.5 * dt) * (heat_semigroup(n0.velocity, dt) + np.velocity);
      next.delta = ed + (0.5 * dt) * (heat_semigroup(n0.director, dt) + np.director);
      break;
    }
  }
  next.u = remove_mean(leray_project(next.u));
  next.delta = remove_mean(next.delta);
  check_finite(next.u, "velocity");
  check_finite(next.delta, "director");
  return next;
}

double director_drift(const SolverState& s) {
  GridArray<double> d = to_physical(s.delta);
  for (int c = 0; c < 3; ++c) d.col(c) += s.d_bar[c];
  return (d.square().rowwise().sum().sqrt() - 1.0).abs().maxCoeff();
}

RenormalizeResult renormalize_director(const SolverState& s) {
  const GridSpec& g = s.grid();
  GridArray<double> d = to_physical(s.delta);
  for (int c = 0; c < 3; ++c) d.col(c) += s.d_bar[c];
  const Eigen::ArrayXd len = d.square().rowwise().sum().sqrt();
  if (len.minCoeff() < 0.5) throw SolverAbort("renormalize_director: |d| < 0.5 on the grid");
  RenormalizeResult r{s, (len - 1.0).abs().maxCoeff()};
  for (int c = 0; c < 3; ++c) d.col(c) = d.col(c) / len - s.d_bar[c];
  r.state.delta = forward_transform(d, g);
  return r;
}

SolverState march(const SolverState& s, double t_end, const MarchOptions& opt,
                  const std::function<void(const SolverState&)>& observer) {
  if (!(opt.dt > 0.0)) throw std::invalid_argument("march: dt must be > 0");
  SolverState cur = s;
  if (observer) observer(cur);
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (cur.t < t_end - eps) {
    const double h = std::min(opt.dt, t_end - cur.t);
    cur = step_mild(cur, h, opt.step);
    if (t_end - cur.t <= eps) cur.t = t_end;
    if (opt.renormalize) cur = renormalize_director(cur).state;
    if (observer) observer(cur);
  }
  return cur;
}

LinearFlows linear_flows(const Field& u0, const Field& delta0, const std::vector<double>& t_grid) {
  LinearFlows out;
  out.t = t_grid;
  for (double t : t_grid) {
    if (!(t >= 0.0)) throw std::invalid_argument("linear_flows: times must be >= 0");
    out.u.push_back(t == 0.0 ? u0 : heat_semigroup(u0, t));
    out.delta.push_back(t == 0.0 ? delta0 : heat_semigroup(delta0, t));
  }
  return out;
}

Remainders remainder_terms(const Field& u_l, const Field& delta_l, const Field& u_bar, const Field& delta_bar,
                           const Eigen::Vector3d& d_bar) {
  const Field sll = gradient_contraction(delta_l, delta_l);
  const Field slb = gradient_contraction(delta_l, delta_bar);
  const Field sbb = gradient_contraction(delta_bar, delta_bar);
  Remainders r;
  r.r1 = advection(u_l, u_l) + advection(u_l, u_bar) + advection(u_bar, u_l);
  r.r2 = stress_divergence(delta_l, delta_l) + stress_divergence(delta_l, delta_bar) +
         stress_divergence(delta_bar, delta_l);
  r.r3 = advection(u_l, delta_l) + advection(u_l, delta_bar) + advection(u_bar, delta_l);
  r.r4 = times_vector(sll + 2.0 * slb, d_bar);
  r.r5 = product(sll, delta_l) + product(sll, delta_bar) + 2.0 * product(slb, delta_l) +
         2.0 * product(slb, delta_bar) + product(sbb, delta_l);
  return r;
}

void PicardConfig::validate() const {
  if (!(horizon > 0.0)) throw std::invalid_argument("PicardConfig: horizon must be > 0");
  if (!(contraction_tol > 0.0)) throw std::invalid_argument("PicardConfig: contraction_tol must be > 0");
  if (max_iters < 2) throw std::invalid_argument("PicardConfig: max_iters must be >= 2");
  if (steps < 1) throw std::invalid_argument("PicardConfig: steps must be >= 1");
  if (!(epsilon > 0.0) || !(zeta > 0.0)) throw std::invalid_argument("PicardConfig: epsilon, zeta must be > 0");
  if (!(max_ratio > 0.0)) throw std::invalid_argument("PicardConfig: max_ratio must be > 0");
  if (!(p > 1.0) || !(q > 1.0)) throw std::invalid_argument("PicardConfig: p, q must be > 1");
}

std::pair<double, double> picard_weights(double p, double q, double c0, double c1, double m0) {
  const double gap = 1.0 / q - 1.0 / p;
  const double lo = -std::min(1.0 / 3.0, 1.0 / (2.0 * p));
  const double tol = 1e-14;
  if (gap < lo - tol || gap > 1.0 / 3.0 + tol)
    throw std::invalid_argument("picard_weights: (p, q) outside the admissible region");
  const double boundary = 2.0 * c0 * c1 * m0;
  const double a = std::abs(gap - 1.0 / 3.0) <= tol ? boundary : 1.0;
  const double b = std::abs(gap - lo) <= tol ? boundary : 1.0;
  return {a, b};
}

SeriesNorms series_norms(const std::vector<double>& t, const std::vector<Field>& u, const std::vector<Field>& delta,
                         double p, double q, const DyadicDecomposition& dec) {
  if (t.size() != u.size() || t.size() != delta.size() || t.size() < 2)
    throw std::invalid_argument("series_norms: need aligned series of >= 2 samples");
  const double d = dec.grid().dim;
  NormAccumulator u_inf(kInfinity, dec.j_min(), dec.block_count()), u_one(1.0, dec.j_min(), dec.block_count());
  NormAccumulator d_inf(kInfinity, dec.j_min(), dec.block_count()), d_one(1.0, dec.j_min(), dec.block_count());
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double a = std::sqrt(t[k]);
    const Eigen::VectorXd bu = block_norms(u[k], p, dec, a), bd = block_norms(delta[k], q, dec, a);
    u_inf.add(t[k], bu);
    u_one.add(t[k], bu);
    d_inf.add(t[k], bd);
    d_one.add(t[k], bd);
  }
  return SeriesNorms{u_inf.value(d / p - 1, 1.0), u_one.value(d / p + 1, 1.0), d_inf.value(d / q, 1.0),
                     d_one.value(d / q + 2, 1.0)};
}

double initial_size(const Field& u0, const Field& delta0, double p, double q, const DyadicDecomposition& dec) {
  const double d = dec.grid().dim;
  return besov_norm(u0, BesovIndex::make(d / p - 1, p, 1.0), dec) +
         besov_norm(delta0, BesovIndex::make(d / q, q, 1.0), dec);
}

PicardResult picard_solve(const Field& u0, const Field& delta0, const Eigen::Vector3d& d_bar, const PicardConfig& cfg,
                          const DyadicDecomposition& dec) {
  cfg.validate();
  const SolverState probe = SolverState::make(0.0, u0, delta0, d_bar);
  const GridSpec& g = probe.grid();
  const int K = cfg.steps;
  const double h = cfg.horizon / K;

  PicardResult res;
  res.t.resize(K + 1);
  for (int k = 0; k <= K; ++k) res.t[k] = k * h;
  const LinearFlows lin = linear_flows(u0, delta0, res.t);

  res.trace.m0 = initial_size(u0, delta0, cfg.p, cfg.q, dec);
  std::tie(res.trace.weight_a, res.trace.weight_b) = picard_weights(cfg.p, cfg.q, cfg.c0, cfg.c1, res.trace.m0);
  const double A = res.trace.weight_a, B = res.trace.weight_b;

  std::vector<Field> ub(K + 1, Field(g, g.dim)), db(K + 1, Field(g, 3));
  double prev_diff = 0.0, first_diff = 0.0;
  for (int n = 1; n <= cfg.max_iters; ++n) {
    std::vector<Field> un(K + 1), dn(K + 1);
    un[0] = Field(g, g.dim);
    dn[0] = Field(g, 3);
    NonlinearTerms f_prev;
    try {
      for (int k = 0; k <= K; ++k) {
        const SolverState s{res.t[k], lin.u[k] + ub[k], lin.delta[k] + db[k], d_bar};
        NonlinearTerms f = nonlinear_terms(s);
        if (k > 0) {
          un[k] = heat_semigroup(un[k - 1] + (0.5 * h) * f_prev.velocity, h) + (0.5 * h) * f.velocity;
          dn[k] = heat_semigroup(dn[k - 1] + (0.5 * h) * f_prev.director, h) + (0.5 * h) * f.director;
          check_finite(un[k], "Picard velocity iterate");
          check_finite(dn[k], "Picard director iterate");
        }
        f_prev = std::move(f);
      }
    } catch (const SolverAbort& e) {
      res.trace.note = std::string("iterate ") + std::to_string(n) + ": " + e.what();
      res.trace.contraction_ok = false;
      break;
    }
    std::vector<Field> du(K + 1), dd(K + 1);
    for (int k = 0; k <= K; ++k) {
      du[k] = un[k] - ub[k];
      dd[k] = dn[k] - db[k];
    }
    IterationRecord rec;
    rec.iterate = n;
    rec.norms = series_norms(res.t, un, dn, cfg.p, cfg.q, dec);
    rec.bound = rec.norms.weighted(A, B);
    rec.difference = series_norms(res.t, du, dd, cfg.p, cfg.q, dec).weighted(A, B);
    rec.ratio = (n >= 2 && prev_diff > 0.0) ? rec.difference / prev_diff : 0.0;
    if (n == 1) first_diff = rec.difference;
    res.trace.records.push_back(rec);
    ub = std::move(un);
    db = std::move(dn);

    if (!std::isfinite(rec.difference)) {
      res.trace.note = "difference norm is not finite";
      res.trace.contraction_ok = false;
      break;
    }
    if (rec.difference <= cfg.contraction_tol * rec.bound || rec.difference == 0.0) {
      res.trace.converged = true;
      break;
    }
    if (n >= 2 && rec.ratio > cfg.max_ratio) res.trace.contraction_ok = false;
    if (n >= 2 && rec.difference > 1e6 * first_diff) {
      res.trace.note = "successive differences diverge";
      break;
    }
    prev_diff = rec.difference;
  }
  if (!res.trace.converged && res.trace.note.empty())
    res.trace.note = "no convergence within " + std::to_string(cfg.max_iters) + " iterates";
  if (!res.trace.contraction_ok && res.trace.note.empty())
    res.trace.note = "successive-difference ratio above " + std::to_string(cfg.max_ratio);

  res.u.resize(K + 1);
  res.delta.resize(K + 1);
  for (int k = 0; k <= K; ++k) {
    res.u[k] = lin.u[k] + ub[k];
    res.delta[k] = lin.delta[k] + db[k];
  }
  return res;
}

BlowupMonitor::BlowupMonitor(const DyadicDecomposition& dec, double p, double q, double theta)
    : dec_(&dec), p_(p), q_(q), theta_(theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("BlowupMonitor: theta must lie in (0, 1]");
  for (double rho : {1.0, 1.0 + theta, (1.0 + theta) / theta}) {
    u_acc_.emplace_back(rho, dec.j_min(), dec.block_count());
    d_acc_.emplace_back(rho, dec.j_min(), dec.block_count());
  }
}

void BlowupMonitor::add(const SolverState& s) {
  const double a = std::sqrt(s.t);
  const Eigen::VectorXd bu = block_norms(s.u, p_, *dec_, a), bd = block_norms(s.delta, q_, *dec_, a);
  for (auto& acc : u_acc_) acc.add(s.t, bu);
  for (auto& acc : d_acc_) acc.add(s.t, bd);
  t_.push_back(s.t);
  values_.push_back(value());
}

double BlowupMonitor::value() const {
  if (t_.empty()) return 0.0;
  const double d = dec_->grid().dim, th = theta_;
  const double su[3] = {d / p_ + 1, d / p_ + (1 - th) / (1 + th), d / p_ + (th - 1) / (1 + th)};
  const double sd[3] = {d / q_ + 2, d / q_ + 2 / (1 + th), d / q_ + 2 * th / (1 + th)};
  double v = 0.0;
  for (int i = 0; i < 3; ++i) v += u_acc_[i].value(su[i], 1.0) + d_acc_[i].value(sd[i], 1.0);
  return v;
}

BlowupMonitor::Report BlowupMonitor::report() const {
  Report r;
  r.t = t_;
  r.value = values_;
  const std::size_t n = t_.size();
  if (n < 4) return r;
  const std::size_t w = std::max<std::size_t>(1, n / 3);
  const auto rate = [&](std::size_t i0, std::size_t i1) {
    const double dt = t_[i1] - t_[i0];
    return dt > 0.0 ? (values_[i1] - values_[i0]) / dt : 0.0;
  };
  r.early_rate = rate(0, w);
  r.late_rate = rate(n - 1 - w, n - 1);
  const double scale = std::max(std::abs(values_.back()), 1e-300);
  r.increasing = r.late_rate > 2.0 * r.early_rate && r.late_rate > 1e-12 * scale;
  return r;
}

BlowupMonitor::Report blowup_monitor(const std::vector<SolverState>& series, double p, double q, double theta,
                                     const DyadicDecomposition& dec) {
  BlowupMonitor m(dec, p, q, theta);
  for (const auto& s : series) m.add(s);
  return m.report();
}

std::pair<Field, Field> make_initial_data(const GridSpec& g, const InitialDataSpec& spec,
                                          const DyadicDecomposition& dec) {
  if (!(spec.m0 >= 0.0) || !(spec.u_share >= 0.0 && spec.u_share <= 1.0) || !(spec.k_c > 0.0))
    throw std::invalid_argument("make_initial_data: need m0 >= 0, u_share in [0, 1], k_c > 0");
  if (std::abs(spec.d_bar.norm() - 1.0) > 1e-14) throw std::invalid_argument("make_initial_data: d_bar must be unit");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto shaped_noise = [&](int comps) {
    GridArray<double> w(g.points(), comps);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (int c = 0; c < comps; ++c) w(i, c) = normal(rng);
    return dealias(apply_multiplier(forward_transform(w, g), [&](const Frequency& q) {
      if (q.is_zero()) return 0.0;
      const double r = q.l2();
      return std::pow(r, -spec.alpha) * std::exp(-(r / spec.k_c) * (r / spec.k_c));
    }));
  };
  const double d = g.dim;
  Field u = remove_mean(leray_project(shaped_noise(g.dim)));
  const Field scalar = shaped_noise(1);
  Eigen::Vector3d e = std::abs(spec.d_bar.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  e = (e - e.dot(spec.d_bar) * spec.d_bar).normalized();
  Field delta = times_vector(scalar, e);

  const auto scale_to = [&](Field& f, double target, const BesovIndex& idx) {
    const double now = besov_norm(f, idx, dec);
    f *= now > 0.0 ? target / now : 0.0;
  };
  scale_to(u, spec.m0 * spec.u_share, BesovIndex::make(d / spec.p - 1, spec.p, 1.0));
  scale_to(delta, spec.m0 * (1.0 - spec.u_share), BesovIndex::make(d / spec.q, spec.q, 1.0));
  return {u, delta};
}

}  // namespace gevlab
