#include "gevlab/gevrey_ops.hpp"

#include "gevlab/besov.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace gevlab {

GevreyWeight GevreyWeight::make(double t, WeightMode mode) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("GevreyWeight: t must be finite and >= 0");
  return GevreyWeight{t, mode, 700.0};
}

double GevreyWeight::gamma() const { return std::sqrt(t); }

Field gevrey_multiply(const Field& f, const GevreyWeight& w, int sign) {
  if (sign != 1 && sign != -1) throw std::invalid_argument("gevrey_multiply: sign must be +1 or -1");
  const double a = sign * w.gamma();
  Field out = f;
  auto& c = out.coeffs();
  for_each_frequency(f.grid(), [&](const Frequency& q) {
    const double e = a * q.l1();
    if (w.mode == WeightMode::linear) {
      if (e > w.cap && c.row(q.index).squaredNorm() > 0.0)
        throw std::overflow_error("gevrey_multiply: exponent exceeds linear-mode cap; use log_domain");
      c.row(q.index) *= std::exp(e);
      return;
    }
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      std::complex<double>& z = c(q.index, k);
      if (z == 0.0) continue;
      const double mag = std::exp(std::log(std::abs(z)) + e);
      if (!std::isfinite(mag)) throw std::overflow_error("gevrey_multiply: weighted coefficient overflows");
      z = std::polar(mag, std::arg(z));
    }
  });
  return out;
}

Field heat_semigroup(const Field& f, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("heat_semigroup: t must be >= 0");
  return apply_multiplier(f, [t](const Frequency& q) { return std::exp(-t * q.l2_squared()); });
}

Field heat_gevrey(const Field& f, double t, double heat_factor) {
  if (!(t >= 0.0) || !(heat_factor > 0.0)) throw std::invalid_argument("heat_gevrey: need t >= 0, heat_factor > 0");
  const double a = std::sqrt(t);
  return apply_multiplier(
      f, [=](const Frequency& q) { return std::exp(-heat_factor * t * q.l2_squared() + a * q.l1()); });
}

double heat_gevrey_lp_ratio(const Field& f, double t, double p) {
  return lp_norm(heat_gevrey(f, t, 0.5), p) / lp_norm(f, p);
}

Field lambda_power(const Field& f, double m) {
  return apply_multiplier(f, [m](const Frequency& q) {
    if (q.touches_nyquist) return 0.0;
    return m == 0.0 ? 1.0 : std::pow(q.l2(), m);
  });
}

Field lambda1_power(const Field& f, double m) {
  return apply_multiplier(f, [m](const Frequency& q) {
    if (q.touches_nyquist) return 0.0;
    return m == 0.0 ? 1.0 : std::pow(q.l1(), m);
  });
}

KernelProbe KernelProbe::make(int m, double t, int n, double box_factor) {
  if (m < 0) throw std::invalid_argument("KernelProbe: m must be >= 0");
  if (!(t > 0.0)) throw std::invalid_argument("KernelProbe: t must be > 0");
  if (!(box_factor > 0.0)) throw std::invalid_argument("KernelProbe: box_factor must be > 0");
  GridSpec::make(3, n);
  return KernelProbe{m, t, n, box_factor, 1e-6};
}

namespace {

double periodic_distance(double x, double box) { return std::min(x, box - x); }

KernelResult poisson_tensor_l1(const KernelProbe& pr) {
  const double a = std::sqrt(pr.t);
  const double box = pr.box_factor * a;
  const GridSpec g = GridSpec::make(1, pr.n, box);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(pr.n);
  double edge = 0.0;
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.touches_nyquist) return;
    const double s = std::exp(-a * q.l1());
    c[q.index] = s / box;
    if (std::abs(q.k[0]) == pr.n / 2 - 1) edge = std::max(edge, s);
  });
  detail::fft_nd<double>(g, c, true);
  const Eigen::ArrayXd v = c.real().array();
  const double h = g.spacing();
  const double l1 = v.abs().sum() * h;
  double inner = 0.0;
  for (int i = 0; i < pr.n; ++i)
    if (periodic_distance(i * h, box) < box / 4) inner += std::abs(v[i]) * h;
  KernelResult r;
  r.l1 = l1 * l1 * l1;
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  r.min_value = lo >= 0.0 ? lo * lo * lo : lo * hi * hi;
  r.spectral_edge = edge;
  r.tail_fraction = 1.0 - std::pow(inner / l1, 3);
  r.resolution_ok = edge <= pr.edge_tolerance;
  return r;
}

}  // namespace

KernelResult kernel_l1_norm(const KernelProbe& pr) {
  if (pr.m == 0) return poisson_tensor_l1(pr);
  const double a = std::sqrt(pr.t);
  const double box = pr.box_factor * a;
  const GridSpec g = GridSpec::make(3, pr.n, box);
  const double inv_vol = 1.0 / g.volume();
  const double peak = std::pow(pr.m / (a * std::numbers::e), pr.m);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(g.points());
  double edge = 0.0;
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.touches_nyquist) return;
    const double s = std::pow(q.l2(), pr.m) * std::exp(-a * q.l1());
    c[q.index] = s * inv_vol;
    if (q.k_max() == pr.n / 2 - 1) edge = std::max(edge, s);
  });
  detail::fft_nd<double>(g, c, true);
  const double h3 = g.cell_volume();
  double l1 = 0.0, tail = 0.0, lo = 0.0;
  for (Eigen::Index i = 0; i < g.points(); ++i) {
    const double v = c[i].real();
    lo = std::min(lo, v);
    const double w = std::abs(v) * h3;
    l1 += w;
    const Eigen::Vector3d x = grid_point(g, i);
    const double dist = std::max({periodic_distance(x[0], box), periodic_distance(x[1], box),
                                  periodic_distance(x[2], box)});
    if (dist >= box / 4) tail += w;
  }
  KernelResult r;
  r.l1 = l1;
  r.min_value = lo;
  r.spectral_edge = edge / peak;
  r.tail_fraction = tail / l1;
  r.resolution_ok = r.spectral_edge <= pr.edge_tolerance;
  return r;
}

namespace {

double half_line_weight(double xi, int sign) {
  if (xi == 0.0) return 0.5;
  return (sign > 0) == (xi > 0.0) ? 1.0 : 0.0;
}

void check_sign(int s, const char* what) {
  if (s != 1 && s != -1) throw std::invalid_argument(std::string(what) + ": sign labels must be +1 or -1");
}

void check_axis(const Field& f, int axis, const char* what) {
  if (axis < 0 || axis >= f.grid().dim) throw std::invalid_argument(std::string(what) + ": axis out of range");
}

}  // namespace

Field half_line_project(const Field& f, int axis, int sign) {
  check_axis(f, axis, "half_line_project");
  check_sign(sign, "half_line_project");
  return apply_multiplier(
      f, [=](const Frequency& q) { return half_line_weight(q.xi[axis], sign); }, Symmetry::general);
}

Field damping_multiplier(const Field& f, int axis, double t, int k1, int k2) {
  check_axis(f, axis, "damping_multiplier");
  check_sign(k1, "damping_multiplier");
  check_sign(k2, "damping_multiplier");
  if (k1 == k2) return f;
  const double a = std::sqrt(t);
  return apply_multiplier(f, [=](const Frequency& q) { return std::exp(-2.0 * a * std::abs(q.xi[axis])); });
}

Field bilinear_direct(const Field& u, const Field& v, double t) {
  const GridSpec& g = u.grid();
  if (!(g == v.grid())) throw std::invalid_argument("bilinear_direct: grid mismatch");
  if (g.dim > 2 || g.n > 64) throw std::invalid_argument("bilinear_direct: limited to dim <= 2 and n <= 64");
  const int cu = u.components(), cv = v.components();
  if (cu != cv && cu != 1 && cv != 1) throw std::invalid_argument("bilinear_direct: component mismatch");
  const int cc = std::max(cu, cv);
  const double a = std::sqrt(t);
  const int cut = g.dealias_cutoff();
  struct Mode {
    Eigen::Index index;
    std::array<int, 3> k;
    double l1;
  };
  std::vector<Mode> modes;
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.k_max() <= cut) modes.push_back({q.index, q.k, q.l1()});
  });
  const double kappa = g.fundamental();
  const auto l1_of = [&](const std::array<int, 3>& k) {
    return kappa * (std::abs(k[0]) + std::abs(k[1]) + std::abs(k[2]));
  };
  const auto in_band = [&](const std::array<int, 3>& k) {
    return std::abs(k[0]) <= cut && std::abs(k[1]) <= cut && std::abs(k[2]) <= cut;
  };
  Field out(g, cc, u.is_real() && v.is_real());
  for (const Mode& xi : modes) {
    for (const Mode& eta : modes) {
      const std::array<int, 3> rest{xi.k[0] - eta.k[0], xi.k[1] - eta.k[1], xi.k[2] - eta.k[2]};
      if (!in_band(rest)) continue;
      const Eigen::Index ri = flat_index(g, rest);
      const double w = std::exp(a * (xi.l1 - l1_of(rest) - eta.l1));
      for (int c = 0; c < cc; ++c)
        out.coeffs()(xi.index, c) += w * u.coeffs()(ri, cu == 1 ? 0 : c) * v.coeffs()(eta.index, cv == 1 ? 0 : c);
    }
  }
  return out;
}

Field bilinear_decomposed(const Field& u, const Field& v, double t) {
  const GridSpec& g = u.grid();
  if (!(g == v.grid())) throw std::invalid_argument("bilinear_decomposed: grid mismatch");
  const int cu = u.components(), cv = v.components();
  if (cu != cv && cu != 1 && cv != 1) throw std::invalid_argument("bilinear_decomposed: component mismatch");
  const int cc = std::max(cu, cv);
  const double a = std::sqrt(t);
  const int octants = 1 << g.dim;
  const auto sign_of = [](int mask, int axis) { return (mask >> axis) & 1 ? -1 : 1; };

  // prod_i K_{s_i} L_{t, s_i, out_i}
  const auto factor = [&](const Field& f, int s, int out) {
    return apply_multiplier(
        f,
        [&](const Frequency& q) {
          double m = 1.0;
          for (int i = 0; i < g.dim; ++i) {
            const int si = sign_of(s, i);
            m *= half_line_weight(q.xi[i], si);
            if (si != sign_of(out, i)) m *= std::exp(-2.0 * a * std::abs(q.xi[i]));
          }
          return m;
        },
        Symmetry::general);
  };
  const Field ud = dealias(u), vd = dealias(v);
  std::vector<ComplexGridArray<double>> up(octants * octants), vp(octants * octants);
  for (int s = 0; s < octants; ++s)
    for (int o = 0; o < octants; ++o) {
      up[s * octants + o] = inverse_transform(factor(ud, s, o));
      vp[s * octants + o] = inverse_transform(factor(vd, s, o));
    }
  Field out(g, cc, false);
  ComplexGridArray<double> prod(g.points(), cc);
  for (int gamma = 0; gamma < octants; ++gamma) {
    for (int mu = 0; mu < octants; ++mu) {
      for (int lambda = 0; lambda < octants; ++lambda) {
        const auto& pu = up[mu * octants + gamma];
        const auto& pv = vp[lambda * octants + gamma];
        for (int c = 0; c < cc; ++c) prod.col(c) = pu.col(cu == 1 ? 0 : c) * pv.col(cv == 1 ? 0 : c);
        const Field term = dealias(forward_transform(prod, g));
        out += apply_multiplier(
            term,
            [&](const Frequency& q) {
              double m = 1.0;
              for (int i = 0; i < g.dim; ++i) m *= half_line_weight(q.xi[i], sign_of(gamma, i));
              return m;
            },
            Symmetry::general);
      }
    }
  }
  out.set_real(u.is_real() && v.is_real());
  return out;
}

double bilinear_lp_ratio(const Field& u, const Field& v, double t, double p) {
  const Field b = bilinear_decomposed(u, v, t);
  return lp_norm(b, p) / (lp_norm(u, 2.0 * p) * lp_norm(v, 2.0 * p));
}

OctantCheck octant_weight_check(int pairs, double t, int max_frequency, std::uint64_t seed) {
  if (pairs < 1 || max_frequency < 1) throw std::invalid_argument("octant_weight_check: need pairs, max_frequency >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(-max_frequency, max_frequency);
  const double a = std::sqrt(t);
  const auto sgn = [](double x) { return x >= 0.0 ? 1 : -1; };
  const auto close = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(y)); };
  OctantCheck out;
  out.pairs = pairs;
  out.max_exponent = -kInfinity;
  for (int s = 0; s < pairs; ++s) {
    double xi[3], eta[3];
    for (int i = 0; i < 3; ++i) {
      xi[i] = pick(rng);
      eta[i] = pick(rng);
    }
    double exponent = 0.0, predicted = 1.0;
    bool literal = true;
    for (int i = 0; i < 3; ++i) {
      const double rest = xi[i] - eta[i];
      const double e_i = std::abs(xi[i]) - std::abs(rest) - std::abs(eta[i]);
      exponent += e_i;
      const int mu = sgn(rest), lambda = sgn(eta[i]), gamma = sgn(xi[i]);
      double f;
      if (lambda == mu)
        f = 1.0;
      else if (gamma == mu)
        f = std::exp(-2.0 * a * std::abs(eta[i]));
      else
        f = std::exp(-2.0 * a * std::abs(rest));
      predicted *= f;
      const double w_i = std::exp(a * e_i);
      if (!close(w_i, 1.0) && !close(w_i, std::exp(-2.0 * a * std::abs(xi[i]))) &&
          !close(w_i, std::exp(-2.0 * a * (std::abs(rest) + std::abs(eta[i])))))
        literal = false;
    }
    const double actual = std::exp(a * exponent);
    out.max_error = std::max(out.max_error, std::abs(actual - predicted) / std::max(actual, 1e-300));
    out.max_exponent = std::max(out.max_exponent, exponent);
    if (!literal) ++out.literal_set_misses;
  }
  return out;
}

SlopeFit spectral_slope(const Field& f, const SlopeOptions& opt) {
  std::map<int, double> shell_max;
  for_each_frequency(f.grid(), [&](const Frequency& q) {
    if (q.is_zero()) return;
    const double m = f.coeffs().row(q.index).cwiseAbs().maxCoeff();
    double& slot = shell_max[q.k_l1()];
    slot = std::max(slot, m);
  });
  double top = 0.0;
  for (const auto& [shell, m] : shell_max) top = std::max(top, m);
  std::vector<double> xs, ys;
  for (const auto& [shell, m] : shell_max) {
    if (shell < opt.min_shell || (opt.max_shell >= 0 && shell > opt.max_shell)) continue;
    if (!(m > opt.floor * top) || m == 0.0) continue;
    xs.push_back(shell * f.grid().fundamental());
    ys.push_back(std::log(m));
  }
  if (xs.size() < 5) throw std::domain_error("spectral_slope: fewer than 5 usable shells");
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    A(i, 0) = xs[i];
    A(i, 1) = 1.0;
    y[i] = ys[i];
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(y);
  SlopeFit fit;
  fit.slope = coef[0];
  fit.intercept = coef[1];
  fit.residual = std::sqrt((A * coef - y).squaredNorm() / static_cast<double>(n));
  fit.shells = static_cast<int>(n);
  return fit;
}

bool looks_analytic(const SlopeFit& fit, double min_radius, double max_residual) {
  return fit.radius() > min_radius && fit.residual <= max_residual;
}

double duhamel_quadrature_error(double k_squared, double t, int steps) {
  if (!(k_squared > 0.0) || !(t > 0.0) || steps < 1)
    throw std::invalid_argument("duhamel_quadrature_error: need |k|^2 > 0, t > 0, steps >= 1");
  const double h = t / steps;
  const double e = std::exp(-k_squared * h);
  double integral = 0.0;
  for (int s = 0; s < steps; ++s) integral = e * integral + 0.5 * h * (e + 1.0);
  const double exact = -std::expm1(-k_squared * t) / k_squared;
  return std::abs(integral - exact) / exact;
}

}  // namespace gevlab
