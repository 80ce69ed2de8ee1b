#pragma once

#include "gevlab/besov.hpp"
#include "gevlab/fourier_grid.hpp"
#include "gevlab/littlewood_paley.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gevlab {

/// Raised when a run leaves its validity regime (step guard, NaN, |d| collapse).
class SolverAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Velocity u (dim components), director deviation delta = d - d_bar (3 components), unit d_bar.
struct SolverState {
  double t = 0.0;
  Field u;
  Field delta;
  Eigen::Vector3d d_bar = Eigen::Vector3d::UnitZ();

  /// Validates shapes and normalizes nothing: |d_bar| must already be 1.
  static SolverState make(double t, Field u, Field delta, const Eigen::Vector3d& d_bar);
  const GridSpec& grid() const { return u.grid(); }
};

/// div(grad a (.) grad b) with (grad a (.) grad b)_{ij} = sum_k d_i a_k d_j b_k, dealiased.
Field stress_divergence(const Field& a, const Field& b);
/// Delta d . grad d + 1/2 grad |grad d|^2, the expanded form of stress_divergence(d, d).
Field stress_divergence_expanded(const Field& d);
/// a . grad b, dealiased (a has dim components).
Field advection(const Field& a, const Field& b);
/// grad a : grad b = sum_{i,k} d_i a_k d_i b_k, dealiased scalar.
Field gradient_contraction(const Field& a, const Field& b);

struct NonlinearTerms {
  Field velocity;  ///< -P[u . grad u + div(grad delta (.) grad delta)]
  Field director;  ///< -u . grad delta + |grad delta|^2 delta + |grad delta|^2 d_bar
};

/// Both right-hand sides in one pass. Products are dealiased stagewise
/// (the cubic term is P(P|grad delta|^2 delta)); with zero_mean the k = 0
/// mode of each output is removed.
NonlinearTerms nonlinear_terms(const SolverState& s, bool zero_mean = true);
Field nonlinear_velocity(const SolverState& s);
Field nonlinear_director(const SolverState& s);

enum class Scheme {
  etd1,          ///< u + h phi1(hL) N(u)
  etd_midpoint,  ///< exponential midpoint, second order
  etd_trapezoid  ///< exponential Heun, second order; the marching twin of the Picard quadrature
};

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);

struct StepOptions {
  Scheme scheme = Scheme::etd_midpoint;
  /// guard dt <= cfl / max|u|
  double cfl = 1.0;
};

/// One integrating-factor step of the mild formulation. u is re-projected
/// and both means re-zeroed. Throws SolverAbort on guard violation or NaN.
SolverState step_mild(const SolverState& s, double dt, const StepOptions& opt = {});

struct RenormalizeResult {
  SolverState state;
  /// max_x | |d_bar + delta(x)| - 1 | before renormalization
  double drift = 0.0;
};

/// d <- d / |d| pointwise, delta <- d - d_bar. Throws SolverAbort when |d| < 0.5 somewhere.
RenormalizeResult renormalize_director(const SolverState& s);

/// max_x | |d_bar + delta(x)| - 1 |.
double director_drift(const SolverState& s);

struct MarchOptions {
  double dt = 1e-3;
  StepOptions step;
  bool renormalize = false;
};

/// Marches from s to t_end (last step shortened to land exactly). The
/// observer, if set, sees the initial state and every accepted step.
SolverState march(const SolverState& s, double t_end, const MarchOptions& opt,
                  const std::function<void(const SolverState&)>& observer = {});

/// u_L = e^{t Delta} u0, delta_L = e^{t Delta} delta0 at every t of t_grid.
struct LinearFlows {
  std::vector<double> t;
  std::vector<Field> u;
  std::vector<Field> delta;
};
LinearFlows linear_flows(const Field& u0, const Field& delta0, const std::vector<double>& t_grid);

struct Remainders {
  Field r1, r2, r3, r4, r5;
};

/// R1..R5 coupling the linear flows (u_L, delta_L) to the corrections (u_bar, delta_bar).
Remainders remainder_terms(const Field& u_l, const Field& delta_l, const Field& u_bar, const Field& delta_bar,
                           const Eigen::Vector3d& d_bar);

struct PicardConfig {
  int max_iters = 12;
  /// stop when the weighted successive difference <= contraction_tol * weighted iterate norm
  double contraction_tol = 1e-10;
  double horizon = 0.25;
  int steps = 64;
  double epsilon = 0.1;
  double zeta = 0.01;
  double c0 = 1.0;
  double c1 = 1.0;
  double p = 2.0;
  double q = 2.0;
  /// ratios above this from iterate 2 on count as non-contraction
  double max_ratio = 0.75;

  void validate() const;
};

/// Weights (A, B) of the uniform bound and difference norm; both 1 strictly inside the
/// admissible (p, q) region, 2 c0 c1 M0 on the respective boundary.
std::pair<double, double> picard_weights(double p, double q, double c0, double c1, double m0);

/// Gevrey-weighted time norms of one (u, delta) series.
struct SeriesNorms {
  double u_linf = 0.0;  ///< L~inf(e^{sqrt t Lambda_1} B^{d/p-1}_{p,1})
  double u_l1 = 0.0;    ///< L~1(e^{sqrt t Lambda_1} B^{d/p+1}_{p,1})
  double delta_linf = 0.0;
  double delta_l1 = 0.0;

  double weighted(double a, double b) const { return a * (u_linf + delta_linf) + b * (u_l1 + delta_l1); }
};

SeriesNorms series_norms(const std::vector<double>& t, const std::vector<Field>& u, const std::vector<Field>& delta,
                         double p, double q, const DyadicDecomposition& dec);

struct IterationRecord {
  int iterate = 0;
  SeriesNorms norms;
  double bound = 0.0;       ///< A(...) + B(...) of the iterate
  double difference = 0.0;  ///< weighted norm of iterate n minus iterate n-1
  double ratio = 0.0;       ///< difference_n / difference_{n-1} (0 when undefined)
};

struct IterationTrace {
  std::vector<IterationRecord> records;
  double weight_a = 1.0;
  double weight_b = 1.0;
  double m0 = 0.0;
  bool converged = false;
  bool contraction_ok = true;
  std::string note;

  bool flagged_non_contraction() const { return !converged || !contraction_ok; }
};

struct PicardResult {
  std::vector<double> t;
  /// u = u_L + u_bar and delta = delta_L + delta_bar at every node
  std::vector<Field> u;
  std::vector<Field> delta;
  IterationTrace trace;
};

/// Picard iteration of the mild formulation from (u_bar, delta_bar) = (0, 0).
/// Iterate n solves the heat equation forced by the nonlinearity of
/// (u_L + u_bar_{n-1}, delta_L + delta_bar_{n-1}), integrated with the
/// exponential trapezoid rule on a uniform grid of cfg.steps intervals.
PicardResult picard_solve(const Field& u0, const Field& delta0, const Eigen::Vector3d& d_bar, const PicardConfig& cfg,
                          const DyadicDecomposition& dec);

/// Running value of the continuation quantity: Gevrey-weighted
/// L~1, L~{1+theta} and L~{(1+theta)/theta} norms of u and delta at the
/// regularities that keep each term scale-invariant.
class BlowupMonitor {
 public:
  BlowupMonitor(const DyadicDecomposition& dec, double p, double q, double theta);

  void add(const SolverState& s);
  double value() const;

  struct Report {
    std::vector<double> t;
    std::vector<double> value;
    double early_rate = 0.0;
    double late_rate = 0.0;
    bool increasing = false;
  };
  /// Growth trend: increasing when the late-window growth rate exceeds twice the early-window rate.
  Report report() const;

 private:
  const DyadicDecomposition* dec_;
  double p_, q_, theta_;
  std::vector<NormAccumulator> u_acc_, d_acc_;
  std::vector<double> t_, values_;
};

BlowupMonitor::Report blowup_monitor(const std::vector<SolverState>& series, double p, double q, double theta,
                                     const DyadicDecomposition& dec);

struct InitialDataSpec {
  /// target M0 = ||u0||_{B^{d/p-1}_{p,1}} + ||delta0||_{B^{d/q}_{q,1}}
  double m0 = 0.05;
  /// share of M0 carried by u0
  double u_share = 0.5;
  /// per-mode amplitude |xi|^{-alpha} e^{-(|xi|/k_c)^2}
  double alpha = 0.0;
  double k_c = 4.0;
  double p = 2.0;
  double q = 2.0;
  Eigen::Vector3d d_bar = Eigen::Vector3d::UnitZ();
  std::uint64_t seed = 42;
};

/// Seeded random data: divergence-free, zero-mean, dealiased u0; delta0 = g(x) e_perp with
/// e_perp orthogonal to d_bar. Each part is scaled to its share of M0.
std::pair<Field, Field> make_initial_data(const GridSpec& g, const InitialDataSpec& spec,
                                          const DyadicDecomposition& dec);

/// ||u0||_{B^{d/p-1}_{p,1}} + ||delta0||_{B^{d/q}_{q,1}}.
double initial_size(const Field& u0, const Field& delta0, double p, double q, const DyadicDecomposition& dec);

}  // namespace gevlab
