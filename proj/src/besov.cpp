#include "gevlab/besov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace gevlab {

BesovIndex BesovIndex::make(double s, double p, double r) {
  if (!std::isfinite(s)) throw std::invalid_argument("BesovIndex: s must be finite");
  if (!(p >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("BesovIndex: p and r must lie in [1, inf]");
  return BesovIndex{s, p, r};
}

double lp_norm(const ComplexGridArray<double>& values, const GridSpec& g, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must lie in [1, inf]");
  const Eigen::ArrayXd mag = values.abs2().rowwise().sum().sqrt();
  const double top = mag.maxCoeff();
  if (std::isinf(p) || top == 0.0) return top;
  const double cell = g.cell_volume();
  if (p == 2.0) return std::sqrt(mag.square().sum() * cell);
  return top * std::pow((mag / top).pow(p).sum() * cell, 1.0 / p);
}

double lp_norm(const Field& f, double p) { return lp_norm(inverse_transform(f), f.grid(), p); }

namespace {

Eigen::ArrayXd l1_table(const GridSpec& g) {
  Eigen::ArrayXd t(g.points());
  for_each_frequency(g, [&](const Frequency& q) { t[q.index] = q.l1(); });
  return t;
}

}  // namespace

Eigen::VectorXd block_norms(const Field& f, double p, const DyadicDecomposition& dec, double a) {
  if (!(f.grid() == dec.grid())) throw std::invalid_argument("block_norms: grid mismatch");
  if (!(p >= 1.0)) throw std::invalid_argument("block_norms: p must lie in [1, inf]");
  const GridSpec& g = f.grid();
  const Eigen::ArrayXd l1 = a != 0.0 ? l1_table(g) : Eigen::ArrayXd();
  const auto& c = f.coeffs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dec.block_count());
  for (int j = dec.j_min(); j <= dec.j_max(); ++j) {
    const auto& sup = dec.support(j);
    double shift = -kInfinity;
    const auto occupied = [&](const auto& e) { return c.row(e.index).cwiseAbs().maxCoeff() > 0.0; };
    for (const auto& e : sup)
      if (occupied(e)) shift = std::max(shift, a != 0.0 ? a * l1[e.index] : 0.0);
    if (shift == -kInfinity) continue;
    const auto weight = [&](const auto& e) {
      return e.weight * (a != 0.0 ? std::exp(a * l1[e.index] - shift) : 1.0);
    };
    double value;
    if (p == 2.0) {
      double sum = 0.0;
      for (const auto& e : sup) {
        if (!occupied(e)) continue;
        const double w = weight(e);
        sum += w * w * c.row(e.index).squaredNorm();
      }
      value = std::sqrt(g.volume() * sum);
    } else {
      Field block(g, f.components(), f.is_real());
      for (const auto& e : sup)
        if (occupied(e)) block.coeffs().row(e.index) = weight(e) * c.row(e.index);
      value = lp_norm(block, p);
    }
    out[j - dec.j_min()] = value > 0.0 ? std::exp(std::log(value) + shift) : 0.0;
  }
  return out;
}

double weighted_block_sum(const Eigen::VectorXd& blocks, int j_min, double s, double r) {
  if (!(r >= 1.0)) throw std::invalid_argument("weighted_block_sum: r must lie in [1, inf]");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < blocks.size(); ++i) {
    const double w = std::pow(2.0, (j_min + static_cast<int>(i)) * s) * blocks[i];
    if (std::isinf(r))
      acc = std::max(acc, w);
    else
      acc += std::pow(w, r);
  }
  return std::isinf(r) ? acc : std::pow(acc, 1.0 / r);
}

double besov_norm(const Field& f, const BesovIndex& idx, const DyadicDecomposition& dec) {
  return weighted_block_sum(block_norms(f, idx.p, dec), dec.j_min(), idx.s, idx.r);
}

double gevrey_besov_norm(const Field& f, double a, const BesovIndex& idx, const DyadicDecomposition& dec) {
  return weighted_block_sum(block_norms(f, idx.p, dec, a), dec.j_min(), idx.s, idx.r);
}

NormAccumulator::NormAccumulator(double rho, int j_min, int blocks)
    : rho_(rho), j_min_(j_min), acc_(Eigen::VectorXd::Zero(blocks)), prev_(Eigen::VectorXd::Zero(blocks)) {
  if (!(rho >= 1.0)) throw std::invalid_argument("NormAccumulator: rho must lie in [1, inf]");
}

void NormAccumulator::add(double t, const Eigen::VectorXd& b) {
  if (b.size() != acc_.size()) throw std::invalid_argument("NormAccumulator: block count mismatch");
  if (samples_ > 0 && !(t > t_last_)) throw std::invalid_argument("NormAccumulator: times must increase");
  if (std::isinf(rho_)) {
    acc_ = samples_ == 0 ? b : acc_.cwiseMax(b);
  } else {
    const Eigen::VectorXd cur = b.array().pow(rho_).matrix();
    if (samples_ > 0) acc_ += 0.5 * (t - t_last_) * (prev_ + cur);
    prev_ = cur;
  }
  t_last_ = t;
  ++samples_;
}

Eigen::VectorXd NormAccumulator::time_norms() const {
  if (std::isinf(rho_)) return acc_;
  return acc_.array().pow(1.0 / rho_).matrix();
}

double NormAccumulator::value(double s, double r) const { return weighted_block_sum(time_norms(), j_min_, s, r); }

double chemin_lerner_norm(const std::vector<Field>& snapshots, const TimeNormSpec& spec,
                          const DyadicDecomposition& dec, bool gevrey) {
  if (snapshots.size() != spec.t_grid.size() || snapshots.empty())
    throw std::invalid_argument("chemin_lerner_norm: snapshots must align with a nonempty t_grid");
  if (!std::isinf(spec.rho) && snapshots.size() < 2)
    throw std::invalid_argument("chemin_lerner_norm: finite rho needs at least 2 snapshots");
  if (spec.t_grid.front() < 0.0) throw std::invalid_argument("chemin_lerner_norm: t_grid must start at t >= 0");
  NormAccumulator acc(spec.rho, dec.j_min(), dec.block_count());
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const double t = spec.t_grid[k];
    acc.add(t, block_norms(snapshots[k], spec.besov.p, dec, gevrey ? std::sqrt(t) : 0.0));
  }
  return acc.value(spec.besov.s, spec.besov.r);
}

double interpolation_check(const Field& f, double s1, double s2, double theta, double p, double r,
                           const DyadicDecomposition& dec) {
  if (!(s1 < s2) || !(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("interpolation_check: need s1 < s2 and theta in (0, 1)");
  const Eigen::VectorXd b = block_norms(f, p, dec);
  const double n1 = weighted_block_sum(b, dec.j_min(), s1, r);
  const double n2 = weighted_block_sum(b, dec.j_min(), s2, r);
  if (n1 == 0.0 || n2 == 0.0) throw std::invalid_argument("interpolation_check: zero field");
  const double mid = weighted_block_sum(b, dec.j_min(), theta * s1 + (1.0 - theta) * s2, r);
  return mid / (std::pow(n1, theta) * std::pow(n2, 1.0 - theta));
}

double embedding_ratio(const Field& f, double s, double p1, double p2, double r, const DyadicDecomposition& dec) {
  if (!(p1 <= p2)) throw std::invalid_argument("embedding_ratio: need p1 <= p2");
  const double inv2 = std::isinf(p2) ? 0.0 : 1.0 / p2;
  const double shift = f.grid().dim * (1.0 / p1 - inv2);
  const double top = besov_norm(f, BesovIndex::make(s - shift, p2, r), dec);
  const double bottom = besov_norm(f, BesovIndex::make(s, p1, r), dec);
  return top / bottom;
}

double gradient_equivalence_ratio(const Field& f, double s, double p, double r, const DyadicDecomposition& dec) {
  return besov_norm(gradient(f), BesovIndex::make(s - 1.0, p, r), dec) /
         besov_norm(f, BesovIndex::make(s, p, r), dec);
}

bool product_estimate_admissible(ProductEstimate mode, double p, double q) {
  if (!(p > 1.0 && q > 1.0 && std::isfinite(p) && std::isfinite(q))) return false;
  const double gap = 1.0 / q - 1.0 / p;
  if (mode == ProductEstimate::low_high) return -std::min(1.0 / 3.0, 1.0 / (2.0 * p)) <= gap;
  return gap <= 1.0 / 3.0;
}

namespace {

double safe_ratio(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  return rhs == 0.0 ? kInfinity : lhs / rhs;
}

struct TimeSeriesAcc {
  NormAccumulator l1, l2, linf;
  TimeSeriesAcc(const DyadicDecomposition& dec)
      : l1(1.0, dec.j_min(), dec.block_count()),
        l2(2.0, dec.j_min(), dec.block_count()),
        linf(kInfinity, dec.j_min(), dec.block_count()) {}
  void add(double t, const Eigen::VectorXd& b) {
    l1.add(t, b);
    l2.add(t, b);
    linf.add(t, b);
  }
};

}  // namespace

double product_estimate_ratio(const Field& f, const Field& g, ProductEstimate mode, double p, double q, double t,
                              double horizon, const DyadicDecomposition& dec) {
  if (!product_estimate_admissible(mode, p, q))
    throw std::invalid_argument("product_estimate_ratio: (p, q) not admissible for this estimate");
  if (!(horizon > 0.0) || !(t >= 0.0)) throw std::invalid_argument("product_estimate_ratio: need t >= 0, horizon > 0");
  const double a = std::sqrt(t);
  const double d = f.grid().dim;
  const auto N = [&](const Field& h, double s, double pp) {
    return gevrey_besov_norm(h, a, BesovIndex::make(s, pp, 1.0), dec);
  };
  const Field fg = product(f, g);
  if (mode == ProductEstimate::low_high) {
    const double lhs = horizon * N(fg, d / p, p);
    const double rhs = horizon * (N(f, d / q - 1, q) * N(g, d / q + 1, q) + N(f, d / q + 1, q) * N(g, d / q - 1, q));
    return safe_ratio(lhs, rhs);
  }
  const double lhs = horizon * N(fg, d / q, q);
  const double rhs = std::sqrt(horizon) * N(f, d / p, p) * std::sqrt(horizon) * N(g, d / q, q) +
                     horizon * N(f, d / p + 1, p) * N(g, d / q - 1, q);
  return safe_ratio(lhs, rhs);
}

double product_estimate_ratio(const std::vector<Field>& f, const std::vector<Field>& g,
                              const std::vector<double>& t_grid, ProductEstimate mode, double p, double q,
                              const DyadicDecomposition& dec) {
  if (!product_estimate_admissible(mode, p, q))
    throw std::invalid_argument("product_estimate_ratio: (p, q) not admissible for this estimate");
  if (f.size() != t_grid.size() || g.size() != t_grid.size() || t_grid.size() < 2)
    throw std::invalid_argument("product_estimate_ratio: series must align with a t_grid of >= 2 samples");
  const double d = dec.grid().dim;
  const double pf = mode == ProductEstimate::low_high ? q : p;
  const double pfg = mode == ProductEstimate::low_high ? p : q;
  TimeSeriesAcc nf(dec), ng(dec), nfg(dec);
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double a = std::sqrt(t_grid[k]);
    nf.add(t_grid[k], block_norms(f[k], pf, dec, a));
    ng.add(t_grid[k], block_norms(g[k], q, dec, a));
    nfg.add(t_grid[k], block_norms(product(f[k], g[k]), pfg, dec, a));
  }
  if (mode == ProductEstimate::low_high) {
    const double lhs = nfg.l1.value(d / p, 1.0);
    const double rhs = nf.linf.value(d / q - 1, 1.0) * ng.l1.value(d / q + 1, 1.0) +
                       nf.l1.value(d / q + 1, 1.0) * ng.linf.value(d / q - 1, 1.0);
    return safe_ratio(lhs, rhs);
  }
  const double lhs = nfg.l1.value(d / q, 1.0);
  const double rhs = nf.l2.value(d / p, 1.0) * ng.l2.value(d / q, 1.0) +
                     nf.l1.value(d / p + 1, 1.0) * ng.linf.value(d / q - 1, 1.0);
  return safe_ratio(lhs, rhs);
}

void write_block_norms_csv(std::ostream& os, const Field& f, double s, double p, const DyadicDecomposition& dec) {
  const Eigen::VectorXd b = block_norms(f, p, dec);
  os << "j,value\n";
  for (int j = dec.j_min(); j <= dec.j_max(); ++j)
    os << j << ',' << std::pow(2.0, j * s) * b[j - dec.j_min()] << '\n';
}

}  // namespace gevlab
