#pragma once

#include "gevlab/fourier_grid.hpp"

#include <cmath>
#include <random>

namespace gevlab::testing {

/// Zero-mean, dealiased real field from seeded white noise; k_c > 0 adds a Gaussian spectral envelope.
inline Field random_field(const GridSpec& g, int comps, std::uint64_t seed, double k_c = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GridArray<double> w(g.points(), comps);
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (int c = 0; c < comps; ++c) w(i, c) = normal(rng);
  Field f = remove_mean(forward_transform(w, g));
  if (k_c > 0.0)
    f = apply_multiplier(f, [k_c](const Frequency& q) { return std::exp(-q.l2_squared() / (k_c * k_c)); });
  return dealias(f);
}

inline double rel_diff(const Field& a, const Field& b) {
  return max_abs(a - b) / std::max(max_abs(b), 1e-300);
}

/// Taylor-Green velocity amp (sin x cos y cos z, -cos x sin y cos z, 0).
inline Field taylor_green(const GridSpec& g, double amp) {
  return forward_transform(sample(g, 3, [amp](const Eigen::Vector3d& x) {
                             return Eigen::Vector3d(amp * std::sin(x[0]) * std::cos(x[1]) * std::cos(x[2]),
                                                    -amp * std::cos(x[0]) * std::sin(x[1]) * std::cos(x[2]), 0.0);
                           }),
                           g);
}

/// Navier-Stokes oracle written independently of the solver: rotational
/// form du/dt = Delta u + P(u x omega), integrating-factor RK4.
struct NseOracle {
  static Field curl(const Field& u) {
    const std::complex<double> I(0, 1);
    Field w = Field::zeros_like(u);
    for_each_frequency(u.grid(), [&](const Frequency& q) {
      if (q.touches_nyquist) return;
      const auto& c = u.coeffs();
      const auto i = q.index;
      w.coeffs()(i, 0) = I * (q.xi[1] * c(i, 2) - q.xi[2] * c(i, 1));
      w.coeffs()(i, 1) = I * (q.xi[2] * c(i, 0) - q.xi[0] * c(i, 2));
      w.coeffs()(i, 2) = I * (q.xi[0] * c(i, 1) - q.xi[1] * c(i, 0));
    });
    return w;
  }

  static Field rhs(const Field& u) {
    const GridSpec& g = u.grid();
    const GridArray<double> pu = to_physical(u), pw = to_physical(curl(u));
    GridArray<double> cross(g.points(), 3);
    cross.col(0) = pu.col(1) * pw.col(2) - pu.col(2) * pw.col(1);
    cross.col(1) = pu.col(2) * pw.col(0) - pu.col(0) * pw.col(2);
    cross.col(2) = pu.col(0) * pw.col(1) - pu.col(1) * pw.col(0);
    return remove_mean(leray_project(dealias(forward_transform(cross, g))));
  }

  static Field heat(const Field& u, double h) {
    return apply_multiplier(u, [h](const Frequency& q) { return std::exp(-h * q.l2_squared()); });
  }

  static Field step(const Field& u, double h) {
    const Field k1 = rhs(u);
    const Field eu = heat(u, 0.5 * h);
    const Field k2 = rhs(eu + (0.5 * h) * heat(k1, 0.5 * h));
    const Field k3 = rhs(eu + (0.5 * h) * k2);
    const Field k4 = rhs(heat(u, h) + h * heat(k3, 0.5 * h));
    return heat(u, h) + (h / 6.0) * (heat(k1, h) + 2.0 * heat(k2 + k3, 0.5 * h) + k4);
  }

  static Field solve(Field u, double t_end, int steps) {
    const double h = t_end / steps;
    for (int s = 0; s < steps; ++s) u = step(u, h);
    return u;
  }
};

}  // namespace gevlab::testing
