#pragma once

#include "gevlab/fourier_grid.hpp"

#include <cstdint>
#include <vector>

namespace gevlab {

enum class WeightMode { linear, log_domain };

/// The Gevrey weight e^{sqrt(t) |xi|_1}.
struct GevreyWeight {
  double t = 0.0;
  WeightMode mode = WeightMode::linear;
  /// Largest exponent accepted in linear mode.
  double cap = 700.0;

  static GevreyWeight make(double t, WeightMode mode = WeightMode::linear);
  double gamma() const;
};

/// Scales coefficients by e^{sign sqrt(t) |xi|_1}, sign = +1 or -1.
///
/// Linear mode throws std::overflow_error when the largest exponent at an
/// occupied frequency exceeds cap. Log-domain mode forms each coefficient
/// as exp(log|c| + exponent) and only throws when the coefficient itself
/// overflows.
Field gevrey_multiply(const Field& f, const GevreyWeight& w, int sign);

/// e^{t Delta}: multiplier e^{-t |xi|^2}.
Field heat_semigroup(const Field& f, double t);

/// e^{c t Delta + sqrt(t) Lambda_1}: multiplier e^{-c t |xi|^2 + sqrt(t) |xi|_1}.
/// The symbol is bounded by e^{dim / (4c)}.
Field heat_gevrey(const Field& f, double t, double heat_factor = 1.0);

/// ||e^{t/2 Delta + sqrt(t) Lambda_1} f||_{L^p} / ||f||_{L^p}.
double heat_gevrey_lp_ratio(const Field& f, double t, double p);

/// Lambda^m = |xi|^m (Euclidean); Nyquist coefficients are zeroed.
Field lambda_power(const Field& f, double m);

/// Lambda_1^m = |xi|_1^m.
Field lambda1_power(const Field& f, double m);

/// L^1 norm of k_m(t, .) = F^{-1}[|xi|^m e^{-sqrt(t) |xi|_1}] in three dimensions.
///
/// The kernel is periodized on a cube of side box_factor * sqrt(t) with n
/// points per axis, so every t maps to the same discrete problem and the
/// t^{-m/2} scaling holds to roundoff. For m = 0 the 1D Poisson factor is
/// computed once and the tensor L^1 norm is its cube. The periodized value
/// approaches the whole-space norm from below at rate O(1/box_factor).
struct KernelProbe {
  int m = 0;
  double t = 1.0;
  int n = 128;
  double box_factor = 16.0;
  /// Largest accepted symbol value on the box edge, relative to its maximum.
  double edge_tolerance = 1e-10;

  static KernelProbe make(int m, double t, int n = 128, double box_factor = 16.0);
};

struct KernelResult {
  double l1 = 0.0;
  /// min over the grid of k_m (negative values are legal for m >= 1)
  double min_value = 0.0;
  /// symbol magnitude on the box edge relative to its peak
  double spectral_edge = 0.0;
  /// fraction of L^1 mass at sup-distance >= box / 4 from the origin
  double tail_fraction = 0.0;
  bool resolution_ok = false;
};

KernelResult kernel_l1_norm(const KernelProbe& probe);

/// K_sign along `axis`: keeps sign * xi_axis > 0, halves xi_axis = 0.
Field half_line_project(const Field& f, int axis, int sign);

/// L_{t,k1,k2} along `axis`: identity if k1 == k2, else e^{-2 sqrt(t) |xi_axis|}.
Field damping_multiplier(const Field& f, int axis, double t, int k1, int k2);

/// B_t(u, v) = e^{sqrt t Lambda_1}(e^{-sqrt t Lambda_1} u . e^{-sqrt t Lambda_1} v) by an explicit
/// double sum over the dealiased lattice. dim in {1, 2}, n <= 64; componentwise.
Field bilinear_direct(const Field& u, const Field& v, double t);

/// B_t(u, v) as the sum over sign-octant triples (lambda, mu, gamma) of
/// K_gamma[(prod_i K_{mu_i} L_{t,mu_i,gamma_i}) u . (prod_i K_{lambda_i} L_{t,lambda_i,gamma_i}) v],
/// every product formed in physical space. Any dim; componentwise.
Field bilinear_decomposed(const Field& u, const Field& v, double t);

/// ||B_t(u, v)||_{L^p} / (||u||_{L^{2p}} ||v||_{L^{2p}}).
double bilinear_lp_ratio(const Field& u, const Field& v, double t, double p);

/// Sampled check that e^{sqrt t (|xi|_1 - |xi - eta|_1 - |eta|_1)} factors per axis
/// over each sign-octant triple.
struct OctantCheck {
  int pairs = 0;
  /// max relative error against the factor prescribed by the octant triple
  double max_error = 0.0;
  /// pairs with some per-axis weight outside {1, e^{-2a|xi_i|}, e^{-2a|xi_i - eta_i|} e^{-2a|eta_i|}}
  int literal_set_misses = 0;
  /// max of |xi|_1 - |xi - eta|_1 - |eta|_1 over the samples
  double max_exponent = 0.0;
};

OctantCheck octant_weight_check(int pairs, double t, int max_frequency, std::uint64_t seed);

/// Least-squares fit of log max_shell |f_hat| against |xi|_1 over l1 shells.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// root-mean-square fit residual (natural log units)
  double residual = 0.0;
  int shells = 0;

  double radius() const { return -slope; }
};

struct SlopeOptions {
  /// integer |k|_1 range used for the fit (max_shell < 0: no upper limit)
  int min_shell = 1;
  int max_shell = -1;
  /// shells whose maximum falls below floor * global max are dropped
  double floor = 1e-13;
};

/// Throws std::domain_error when fewer than 5 shells survive.
SlopeFit spectral_slope(const Field& f, const SlopeOptions& opt = {});

/// A fit is read as analytic when radius > min_radius and the residual is moderate.
bool looks_analytic(const SlopeFit& fit, double min_radius, double max_residual = 1.0);

/// Relative error of the exponential trapezoid Duhamel quadrature of
/// int_0^t e^{-(t-s)|k|^2} ds against (1 - e^{-|k|^2 t}) / |k|^2.
double duhamel_quadrature_error(double k_squared, double t, int steps);

}  // namespace gevlab
