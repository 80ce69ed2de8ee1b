#pragma once

#include "gevlab/fourier_grid.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace gevlab {

namespace lp {

/// C-infinity step: 0 for x <= 0, 1 for x >= 1, built from exp(-1/x).
inline double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / x);
  const double b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

/// Un-normalized annulus bump: ramps up on [3/4, 1], plateau on [1, 2],
/// ramps down on [2, 8/3].
inline double annulus_bump(double r) {
  if (r <= 0.75 || r >= 8.0 / 3.0) return 0.0;
  if (r < 1.0) return smooth_step((r - 0.75) * 4.0);
  if (r <= 2.0) return 1.0;
  return smooth_step((8.0 / 3.0 - r) * 1.5);
}

/// sum_j bump(2^-j r); invariant under r -> 2r and strictly positive for r > 0.
inline double dyadic_bump_sum(double r) {
  const int lo = static_cast<int>(std::floor(std::log2(r / (8.0 / 3.0))));
  const int hi = static_cast<int>(std::ceil(std::log2(r / 0.75)));
  double s = 0.0;
  for (int j = lo; j <= hi; ++j) s += annulus_bump(std::ldexp(r, -j));
  return s;
}

/// Normalized annulus cutoff: sum_j phi(2^-j r) = 1 for every r > 0.
inline double phi(double r) {
  if (r <= 0.0) return 0.0;
  const double b = annulus_bump(r);
  return b == 0.0 ? 0.0 : b / dyadic_bump_sum(r);
}

/// Ball cutoff chi = 1 - sum_{j >= 0} phi(2^-j r), supported in r <= 4/3.
inline double chi(double r) {
  if (r <= 0.75) return 1.0;
  if (r >= 4.0 / 3.0) return 0.0;
  // Only the j = 0 block reaches below 4/3 from the annulus side.
  return 1.0 - phi(r);
}

}  // namespace lp

/// Homogeneous dyadic decomposition restricted to the blocks a grid resolves.
///
/// Block j keeps frequencies with 3/4 2^j <= |xi| <= 8/3 2^j. The block
/// range covers every nonzero lattice frequency, so the blocks sum to the
/// field minus its mean.
class DyadicDecomposition {
 public:
  DyadicDecomposition() = default;

  explicit DyadicDecomposition(const GridSpec& g) : grid_(g) {
    const double xi_min = g.fundamental();
    double xi_max = 0.0;
    for_each_frequency(g, [&](const Frequency& q) { xi_max = std::max(xi_max, q.l2()); });
    j_min_ = static_cast<int>(std::floor(std::log2(xi_min * 3.0 / 8.0)));
    while (8.0 / 3.0 * std::ldexp(1.0, j_min_) <= xi_min) ++j_min_;
    j_max_ = static_cast<int>(std::floor(std::log2(xi_max / 0.75)));
    while (0.75 * std::ldexp(1.0, j_max_) >= xi_max) --j_max_;
    if (j_max_ - j_min_ + 1 < 3)
      throw std::invalid_argument("DyadicDecomposition: grid too small to host 3 blocks");
    support_.resize(static_cast<std::size_t>(block_count()));
    for_each_frequency(g, [&](const Frequency& q) {
      if (q.is_zero()) return;
      const double r = q.l2();
      for (int j = j_min_; j <= j_max_; ++j) {
        const double w = block_weight(j, r);
        if (w > 0.0) support_[static_cast<std::size_t>(j - j_min_)].push_back({q.index, w});
      }
    });
  }

  struct Entry {
    Eigen::Index index;
    double weight;
  };
  /// Lattice frequencies where block j is nonzero, with the cutoff value.
  const std::vector<Entry>& support(int j) const { return support_.at(static_cast<std::size_t>(j - j_min_)); }

  const GridSpec& grid() const { return grid_; }
  int j_min() const { return j_min_; }
  int j_max() const { return j_max_; }
  int block_count() const { return j_max_ - j_min_ + 1; }
  bool contains(int j) const { return j >= j_min_ && j <= j_max_; }

  double block_weight(int j, double xi_norm) const { return lp::phi(std::ldexp(xi_norm, -j)); }
  /// Low-pass weight of S_j; zero at the origin (homogeneous convention).
  double low_pass_weight(int j, double xi_norm) const {
    return xi_norm == 0.0 ? 0.0 : lp::chi(std::ldexp(xi_norm, -j));
  }

 private:
  GridSpec grid_{};
  int j_min_ = 0;
  int j_max_ = 0;
  std::vector<std::vector<Entry>> support_;
};

inline DyadicDecomposition build_cutoffs(const GridSpec& g) { return DyadicDecomposition(g); }

/// Delta_j f = phi(2^-j D) f.
template <typename Real>
SpectralField<Real> delta_j(const SpectralField<Real>& f, int j, const DyadicDecomposition& dec) {
  if (!dec.contains(j)) throw std::out_of_range("delta_j: block index outside the resolved range");
  if (!(f.grid() == dec.grid())) throw std::invalid_argument("delta_j: grid mismatch");
  SpectralField<Real> out = SpectralField<Real>::zeros_like(f);
  for (const auto& e : dec.support(j)) out.coeffs().row(e.index) = Real(e.weight) * f.coeffs().row(e.index);
  return out;
}

/// S_j f = sum_{j' <= j-1} Delta_j' f (no mean; any j is accepted).
template <typename Real>
SpectralField<Real> s_j(const SpectralField<Real>& f, int j, const DyadicDecomposition& dec) {
  return apply_multiplier(f, [&](const Frequency& q) { return std::complex<Real>(dec.low_pass_weight(j, q.l2())); });
}

/// All blocks Delta_j f for j in [j_min, j_max]; element i is block j_min + i.
template <typename Real>
struct BlockSeries {
  int j_min = 0;
  std::vector<SpectralField<Real>> blocks;

  int j_max() const { return j_min + static_cast<int>(blocks.size()) - 1; }
  const SpectralField<Real>& at(int j) const { return blocks.at(static_cast<std::size_t>(j - j_min)); }
  SpectralField<Real> sum() const {
    SpectralField<Real> s = SpectralField<Real>::zeros_like(blocks.front());
    for (const auto& b : blocks) s += b;
    return s;
  }
};

template <typename Real>
BlockSeries<Real> decompose(const SpectralField<Real>& f, const DyadicDecomposition& dec) {
  BlockSeries<Real> out;
  out.j_min = dec.j_min();
  for (int j = dec.j_min(); j <= dec.j_max(); ++j) out.blocks.push_back(delta_j(f, j, dec));
  return out;
}

template <typename Real>
struct BonyParts {
  SpectralField<Real> paraproduct_uv;  ///< T_u v
  SpectralField<Real> paraproduct_vu;  ///< T_v u
  SpectralField<Real> remainder;       ///< R(u, v)
};

/// Bony decomposition u v = T_u v + T_v u + R(u, v), every product dealiased.
///
/// Operates componentwise when u and v have equal component counts. The
/// means act as the lowest block of the paraproducts: mean(u) (v - mean(v))
/// goes to T_u v, mean(v) (u - mean(u)) to T_v u, and mean(u) mean(v) to R.
template <typename Real>
BonyParts<Real> bony_decompose(const SpectralField<Real>& u, const SpectralField<Real>& v,
                               const DyadicDecomposition& dec) {
  u.check_compatible(v);
  const SpectralField<Real> u0 = remove_mean(u), v0 = remove_mean(v);
  const auto du = decompose(u0, dec), dv = decompose(v0, dec);
  BonyParts<Real> parts{SpectralField<Real>::zeros_like(u), SpectralField<Real>::zeros_like(u),
                        SpectralField<Real>::zeros_like(u)};
  const auto mean_field = [&](const SpectralField<Real>& f) {
    SpectralField<Real> m = SpectralField<Real>::zeros_like(f);
    m.coeffs().row(0) = f.coeffs().row(0);
    return m;
  };
  const SpectralField<Real> mu = mean_field(u), mv = mean_field(v);
  for (int j = dec.j_min(); j <= dec.j_max(); ++j) {
    const SpectralField<Real> low_u = s_j(u0, j - 1, dec) + mu;
    const SpectralField<Real> low_v = s_j(v0, j - 1, dec) + mv;
    parts.paraproduct_uv += product(low_u, dv.at(j));
    parts.paraproduct_vu += product(low_v, du.at(j));
    SpectralField<Real> tilde = SpectralField<Real>::zeros_like(v);
    for (int jj = j - 1; jj <= j + 1; ++jj)
      if (dec.contains(jj)) tilde += dv.at(jj);
    parts.remainder += product(du.at(j), tilde);
  }
  parts.remainder += product(mu, mv);
  return parts;
}

/// Measured Bernstein ratios for one dyadic block.
struct BernsteinRatios {
  /// sup_|a|=k ||d^a Delta_j f||_q / (2^{j(k + dim(1/p - 1/q))} ||Delta_j f||_p)
  double upper = 0.0;
  /// sup_|a|=k ||d^a Delta_j f||_p / (2^{jk} ||Delta_j f||_p), the annulus lower-bound companion
  double lower = 0.0;
};

namespace detail {

template <typename Real>
Real grid_lp_norm(const ComplexGridArray<Real>& values, double p, double cell_volume) {
  const Eigen::Array<Real, Eigen::Dynamic, 1> mag = values.abs().rowwise().norm();
  if (std::isinf(p)) return mag.maxCoeff();
  if (p == 2.0) return std::sqrt(mag.square().sum() * Real(cell_volume));
  return std::pow(mag.pow(Real(p)).sum() * Real(cell_volume), Real(1.0 / p));
}

inline void multi_indices(int dim, int order, std::array<int, 3>& cur, int axis,
                          std::vector<std::array<int, 3>>& out) {
  if (axis == dim - 1) {
    cur[axis] = order;
    out.push_back(cur);
    cur[axis] = 0;
    return;
  }
  for (int a = 0; a <= order; ++a) {
    cur[axis] = a;
    multi_indices(dim, order - a, cur, axis + 1, out);
  }
  cur[axis] = 0;
}

}  // namespace detail

/// Multi-indices alpha with |alpha| = order in `dim` variables.
inline std::vector<std::array<int, 3>> multi_indices(int dim, int order) {
  std::vector<std::array<int, 3>> out;
  std::array<int, 3> cur{0, 0, 0};
  detail::multi_indices(dim, order, cur, 0, out);
  return out;
}

/// Bernstein ratios of Delta_j f. Returns nullopt when the block is empty.
template <typename Real>
std::optional<BernsteinRatios> bernstein_ratio(const SpectralField<Real>& f, int j, double p, double q, int k,
                                               const DyadicDecomposition& dec) {
  if (!(q >= p && p >= 1.0) || k < 0)
    throw std::invalid_argument("bernstein_ratio: need q >= p >= 1 and k >= 0");
  const GridSpec& g = f.grid();
  const SpectralField<Real> block = delta_j(f, j, dec);
  const double vol = g.cell_volume();
  const Real base_p = detail::grid_lp_norm(inverse_transform(block), p, vol);
  if (!(base_p > Real(0))) return std::nullopt;
  Real sup_q = 0, sup_p = 0;
  const std::complex<Real> I(0, 1);
  for (const auto& alpha : multi_indices(g.dim, k)) {
    const SpectralField<Real> d = apply_multiplier(block, [&](const Frequency& fr) {
      if (fr.touches_nyquist) return std::complex<Real>(0);
      std::complex<Real> m(1);
      for (int a = 0; a < g.dim; ++a)
        for (int r = 0; r < alpha[a]; ++r) m *= I * Real(fr.xi[a]);
      return m;
    });
    const auto values = inverse_transform(d);
    sup_q = std::max(sup_q, detail::grid_lp_norm(values, q, vol));
    sup_p = std::max(sup_p, detail::grid_lp_norm(values, p, vol));
  }
  const double inv_p = 1.0 / p, inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  BernsteinRatios r;
  r.upper = static_cast<double>(sup_q / base_p) / std::pow(2.0, j * (k + g.dim * (inv_p - inv_q)));
  r.lower = static_cast<double>(sup_p / base_p) / std::pow(2.0, j * k);
  return r;
}

}  // namespace gevlab
