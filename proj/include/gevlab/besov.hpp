#pragma once

#include "gevlab/fourier_grid.hpp"
#include "gevlab/littlewood_paley.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace gevlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Regularity / integrability / summability triple (s, p, r); p, r may be kInfinity.
struct BesovIndex {
  double s = 0.0;
  double p = 2.0;
  double r = 1.0;

  static BesovIndex make(double s, double p, double r);
};

/// Grid L^p norm (rectangle rule, grid max for p = inf). Vector fields use
/// the pointwise Euclidean magnitude.
double lp_norm(const Field& f, double p);
double lp_norm(const ComplexGridArray<double>& values, const GridSpec& g, double p);

/// Block norms ||Delta_j e^{a Lambda_1} f||_{L^p} for j = j_min .. j_max.
///
/// a = 0 gives plain block norms. Weights e^{a|xi|_1} are shifted by the
/// block's largest exponent before any transform, so large a never
/// overflows intermediate values; the result is +inf only when the norm
/// itself is not representable.
Eigen::VectorXd block_norms(const Field& f, double p, const DyadicDecomposition& dec, double a = 0.0);

/// (sum_j (2^{js} b_j)^r)^{1/r}, or sup_j for r = inf; b_j indexed from j_min.
double weighted_block_sum(const Eigen::VectorXd& blocks, int j_min, double s, double r);

double besov_norm(const Field& f, const BesovIndex& idx, const DyadicDecomposition& dec);

/// Besov norm of e^{a Lambda_1} f (log-domain safe).
double gevrey_besov_norm(const Field& f, double a, const BesovIndex& idx, const DyadicDecomposition& dec);

struct TimeNormSpec {
  double rho = 1.0;
  std::vector<double> t_grid;
  BesovIndex besov;
};

/// Running per-block time integrals of b_j(t)^rho (trapezoid rule), or
/// running maxima for rho = inf. Feed block-norm vectors in time order.
class NormAccumulator {
 public:
  NormAccumulator(double rho, int j_min, int blocks);

  void add(double t, const Eigen::VectorXd& block_norms);

  double rho() const { return rho_; }
  int samples() const { return samples_; }
  double last_time() const { return t_last_; }
  /// Per-block time norms (sum b^rho dt)^{1/rho}, or max b.
  Eigen::VectorXd time_norms() const;
  /// 2^{js}-weighted l^r sum of time_norms().
  double value(double s, double r) const;

 private:
  double rho_;
  int j_min_;
  Eigen::VectorXd acc_;
  Eigen::VectorXd prev_;
  double t_last_ = 0.0;
  int samples_ = 0;
};

/// ||u||_{L~^rho_T(B^s_{p,r})} from snapshots aligned with spec.t_grid.
/// With gevrey = true each snapshot is weighted by e^{sqrt(t) Lambda_1}.
double chemin_lerner_norm(const std::vector<Field>& snapshots, const TimeNormSpec& spec,
                          const DyadicDecomposition& dec, bool gevrey = false);

/// ||f||_{B^{theta s1 + (1-theta) s2}} / (||f||_{B^s1}^theta ||f||_{B^s2}^{1-theta}).
double interpolation_check(const Field& f, double s1, double s2, double theta, double p, double r,
                           const DyadicDecomposition& dec);

/// ||f||_{B^{s - dim(1/p1 - 1/p2)}_{p2,r}} / ||f||_{B^s_{p1,r}} for p1 <= p2.
double embedding_ratio(const Field& f, double s, double p1, double p2, double r, const DyadicDecomposition& dec);

/// ||grad f||_{B^{s-1}_{p,r}} / ||f||_{B^s_{p,r}}.
double gradient_equivalence_ratio(const Field& f, double s, double p, double r, const DyadicDecomposition& dec);

enum class ProductEstimate {
  /// ||fg||_{L~1 B^{d/p}_p} vs L~inf B^{d/q-1}_q x L~1 B^{d/q+1}_q (both orders)
  low_high,
  /// ||fg||_{L~1 B^{d/q}_q} vs L~2 B^{d/p}_p x L~2 B^{d/q}_q + L~1 B^{d/p+1}_p x L~inf B^{d/q-1}_q
  mixed
};

bool product_estimate_admissible(ProductEstimate mode, double p, double q);

/// Left side / right side of the Gevrey-weighted product estimate for
/// fields held constant on [0, horizon] with the Gevrey weight frozen at
/// time t. Every term is linear in the horizon, so the ratio does not
/// depend on it. Returns 0 when the left side vanishes.
double product_estimate_ratio(const Field& f, const Field& g, ProductEstimate mode, double p, double q, double t,
                              double horizon, const DyadicDecomposition& dec);

/// Same estimate on time series sampled on t_grid, weights e^{sqrt(t_k) Lambda_1}.
double product_estimate_ratio(const std::vector<Field>& f, const std::vector<Field>& g,
                              const std::vector<double>& t_grid, ProductEstimate mode, double p, double q,
                              const DyadicDecomposition& dec);

/// CSV rows "j,value" with value = 2^{js} ||Delta_j f||_{L^p}.
void write_block_norms_csv(std::ostream& os, const Field& f, double s, double p, const DyadicDecomposition& dec);

}  // namespace gevlab
