#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace gevlab {

/// Uniform periodic grid on [0, box_length)^dim with n points per axis.
///
/// Storage order is row-major with axis 0 slowest. Along every axis the
/// storage index i maps to the integer frequency k = i for i < n/2 and
/// k = i - n otherwise, so the Nyquist index is k = -n/2.
struct GridSpec {
  int dim = 3;
  int n = 32;
  double box_length = 2.0 * std::numbers::pi;

  static GridSpec make(int dim, int n, double box_length = 2.0 * std::numbers::pi) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
    if (n < 8 || (n & (n - 1)) != 0)
      throw std::invalid_argument("GridSpec: n must be a power of two >= 8, got " + std::to_string(n));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
      throw std::invalid_argument("GridSpec: box_length must be positive");
    return GridSpec{dim, n, box_length};
  }

  Eigen::Index points() const {
    Eigen::Index p = 1;
    for (int a = 0; a < dim; ++a) p *= n;
    return p;
  }
  int extent(int axis) const { return axis < dim ? n : 1; }
  double fundamental() const { return 2.0 * std::numbers::pi / box_length; }
  double spacing() const { return box_length / n; }
  double cell_volume() const { return std::pow(spacing(), dim); }
  double volume() const { return std::pow(box_length, dim); }
  int nyquist() const { return n / 2; }
  /// Largest retained |k_i| under the 2/3 rule.
  int dealias_cutoff() const { return n / 3; }
  int frequency_of(int storage_index) const {
    return storage_index < n / 2 ? storage_index : storage_index - n;
  }
  int storage_of(int k) const { return k >= 0 ? k : k + n; }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && box_length == o.box_length;
  }
};

/// One lattice frequency: integer multi-index and physical wavevector.
struct Frequency {
  Eigen::Index index = 0;
  std::array<int, 3> k{0, 0, 0};
  Eigen::Vector3d xi = Eigen::Vector3d::Zero();
  bool touches_nyquist = false;

  double l1() const { return xi.lpNorm<1>(); }
  double l2() const { return xi.norm(); }
  double l2_squared() const { return xi.squaredNorm(); }
  int k_l1() const { return std::abs(k[0]) + std::abs(k[1]) + std::abs(k[2]); }
  int k_max() const { return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])}); }
  bool is_zero() const { return k[0] == 0 && k[1] == 0 && k[2] == 0; }
};

/// Visits every lattice frequency in storage order.
template <typename Fn>
void for_each_frequency(const GridSpec& g, Fn&& fn) {
  const double kappa = g.fundamental();
  const int half = g.n / 2;
  Frequency f;
  Eigen::Index idx = 0;
  for (int i0 = 0; i0 < g.extent(0); ++i0) {
    for (int i1 = 0; i1 < g.extent(1); ++i1) {
      for (int i2 = 0; i2 < g.extent(2); ++i2) {
        f.index = idx++;
        f.k[0] = g.dim > 0 ? g.frequency_of(i0) : 0;
        f.k[1] = g.dim > 1 ? g.frequency_of(i1) : 0;
        f.k[2] = g.dim > 2 ? g.frequency_of(i2) : 0;
        f.touches_nyquist = false;
        for (int a = 0; a < 3; ++a) {
          f.xi[a] = kappa * f.k[a];
          if (a < g.dim && f.k[a] == -half) f.touches_nyquist = true;
        }
        fn(static_cast<const Frequency&>(f));
      }
    }
  }
}

/// Flat storage index of an integer multi-index (components beyond dim ignored).
inline Eigen::Index flat_index(const GridSpec& g, const std::array<int, 3>& k) {
  Eigen::Index idx = 0;
  for (int a = 0; a < g.dim; ++a) {
    int s = ((k[a] % g.n) + g.n) % g.n;
    idx = idx * g.n + s;
  }
  return idx;
}

template <typename Real>
using GridArray = Eigen::Array<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexGridArray = Eigen::Array<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

enum class Symmetry { hermitian, general };

/// Fourier coefficients of a (possibly vector-valued) field on the torus.
///
/// `coeffs()` is points x components; column c holds component c in
/// frequency storage order. The real flag records whether the field is
/// the transform of a real-valued field (Hermitian coefficient symmetry).
template <typename Real = double>
class SpectralField {
 public:
  using RealScalar = Real;
  using Scalar = std::complex<Real>;
  using Coefficients = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  SpectralField() = default;
  SpectralField(const GridSpec& grid, int components, bool real = true)
      : grid_(grid), coeffs_(Coefficients::Zero(grid.points(), components)), real_(real) {
    if (components < 1) throw std::invalid_argument("SpectralField: components must be >= 1");
  }
  SpectralField(const GridSpec& grid, Coefficients coeffs, bool real)
      : grid_(grid), coeffs_(std::move(coeffs)), real_(real) {
    if (coeffs_.rows() != grid_.points() || coeffs_.cols() < 1)
      throw std::invalid_argument("SpectralField: coefficient array does not match grid");
  }

  const GridSpec& grid() const { return grid_; }
  int components() const { return static_cast<int>(coeffs_.cols()); }
  bool is_real() const { return real_; }
  void set_real(bool r) { real_ = r; }

  Coefficients& coeffs() { return coeffs_; }
  const Coefficients& coeffs() const { return coeffs_; }

  auto component(int c) { return coeffs_.col(c); }
  auto component(int c) const { return coeffs_.col(c); }

  SpectralField component_field(int c) const {
    return SpectralField(grid_, Coefficients(coeffs_.col(c)), real_);
  }
  SpectralField components_field(int first, int count) const {
    return SpectralField(grid_, Coefficients(coeffs_.middleCols(first, count)), real_);
  }

  Scalar mean(int c = 0) const { return coeffs_(0, c); }

  SpectralField& operator+=(const SpectralField& o) {
    check_compatible(o);
    coeffs_ += o.coeffs_;
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_compatible(o);
    coeffs_ -= o.coeffs_;
    real_ = real_ && o.real_;
    return *this;
  }
  SpectralField& operator*=(Real a) {
    coeffs_ *= a;
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(Real s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, Real s) { return a *= s; }
  SpectralField operator-() const { return Real(-1) * (*this); }

  static SpectralField zeros_like(const SpectralField& f) {
    return SpectralField(f.grid_, f.components(), f.real_);
  }

  void check_compatible(const SpectralField& o) const {
    if (!(grid_ == o.grid_) || components() != o.components())
      throw std::invalid_argument("SpectralField: incompatible operands");
  }

 private:
  GridSpec grid_{};
  Coefficients coeffs_{};
  bool real_ = true;
};

using Field = SpectralField<double>;

namespace detail {

template <typename Real>
Eigen::FFT<Real>& fft_engine() {
  static thread_local Eigen::FFT<Real> engine = [] {
    Eigen::FFT<Real> e;
    e.SetFlag(Eigen::FFT<Real>::Unscaled);
    return e;
  }();
  return engine;
}

/// Unnormalized in-place multidimensional DFT of one component column.
template <typename Real, typename Column>
void fft_nd(const GridSpec& g, Column&& data, bool inverse) {
  using C = std::complex<Real>;
  auto& engine = fft_engine<Real>();
  const Eigen::Index n = g.n;
  std::vector<C> line(n), out(n);
  Eigen::Index total = g.points();
  for (int axis = 0; axis < g.dim; ++axis) {
    Eigen::Index stride = 1;
    for (int a = axis + 1; a < g.dim; ++a) stride *= n;
    const Eigen::Index block = stride * n;
    for (Eigen::Index base = 0; base < total; base += block) {
      for (Eigen::Index off = 0; off < stride; ++off) {
        const Eigen::Index start = base + off;
        for (Eigen::Index i = 0; i < n; ++i) line[i] = data[start + i * stride];
        if (inverse)
          engine.inv(out, line);
        else
          engine.fwd(out, line);
        for (Eigen::Index i = 0; i < n; ++i) data[start + i * stride] = out[i];
      }
    }
  }
}

}  // namespace detail

/// Real values (points x components) to Fourier coefficients.
/// c_k = (1/N) sum_x f(x) e^{-i k.x}
template <typename Real>
SpectralField<Real> forward_transform(const GridArray<Real>& values, const GridSpec& spec) {
  if (values.rows() != spec.points() || values.cols() < 1)
    throw std::invalid_argument("forward_transform: array shape does not match grid");
  using Coeffs = typename SpectralField<Real>::Coefficients;
  Coeffs c = values.matrix().template cast<std::complex<Real>>();
  const Real scale = Real(1) / static_cast<Real>(spec.points());
  for (Eigen::Index col = 0; col < c.cols(); ++col) {
    detail::fft_nd<Real>(spec, c.col(col), false);
  }
  c *= scale;
  return SpectralField<Real>(spec, std::move(c), true);
}

template <typename Real>
SpectralField<Real> forward_transform(const ComplexGridArray<Real>& values, const GridSpec& spec) {
  if (values.rows() != spec.points() || values.cols() < 1)
    throw std::invalid_argument("forward_transform: array shape does not match grid");
  typename SpectralField<Real>::Coefficients c = values.matrix();
  const Real scale = Real(1) / static_cast<Real>(spec.points());
  for (Eigen::Index col = 0; col < c.cols(); ++col) detail::fft_nd<Real>(spec, c.col(col), false);
  c *= scale;
  return SpectralField<Real>(spec, std::move(c), false);
}

/// Complex grid values f(x) = sum_k c_k e^{i k.x}.
template <typename Real>
ComplexGridArray<Real> inverse_transform(const SpectralField<Real>& f) {
  typename SpectralField<Real>::Coefficients c = f.coeffs();
  for (Eigen::Index col = 0; col < c.cols(); ++col) detail::fft_nd<Real>(f.grid(), c.col(col), true);
  return c.array();
}

/// Real part of the inverse transform; exact for fields flagged real.
template <typename Real>
GridArray<Real> to_physical(const SpectralField<Real>& f) {
  return inverse_transform(f).real();
}

/// Physical-space coordinates of grid point `index` (only the first dim entries are meaningful).
inline Eigen::Vector3d grid_point(const GridSpec& g, Eigen::Index index) {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  for (int a = g.dim - 1; a >= 0; --a) {
    x[a] = g.spacing() * static_cast<double>(index % g.n);
    index /= g.n;
  }
  return x;
}

/// Samples fn(x) -> Eigen vector of `components` values on the grid.
template <typename Real = double, typename Fn>
GridArray<Real> sample(const GridSpec& g, int components, Fn&& fn) {
  GridArray<Real> out(g.points(), components);
  for (Eigen::Index i = 0; i < g.points(); ++i) {
    const Eigen::Vector3d x = grid_point(g, i);
    const auto v = fn(x);
    for (int c = 0; c < components; ++c) out(i, c) = static_cast<Real>(v[c]);
  }
  return out;
}

/// coeffs_out(k) = m(k) coeffs_in(k) for every component.
///
/// Throws std::overflow_error when m is non-finite at a frequency carrying
/// a nonzero coefficient; large exponential weights go through the
/// log-domain helpers in gevrey_ops instead.
template <typename Real, typename Symbol>
SpectralField<Real> apply_multiplier(const SpectralField<Real>& f, Symbol&& m,
                                     Symmetry symmetry = Symmetry::hermitian) {
  SpectralField<Real> out = f;
  auto& c = out.coeffs();
  for_each_frequency(f.grid(), [&](const Frequency& q) {
    const std::complex<Real> mk = static_cast<std::complex<Real>>(m(q));
    if (!std::isfinite(mk.real()) || !std::isfinite(mk.imag())) {
      if (c.row(q.index).squaredNorm() != Real(0))
        throw std::overflow_error("apply_multiplier: non-finite multiplier at occupied frequency");
      c.row(q.index).setZero();
      return;
    }
    c.row(q.index) *= mk;
  });
  out.set_real(f.is_real() && symmetry == Symmetry::hermitian);
  return out;
}

/// Zeroes every coefficient with some |k_i| > n/3.
template <typename Real>
SpectralField<Real> dealias(const SpectralField<Real>& f) {
  SpectralField<Real> out = f;
  const int cut = f.grid().dealias_cutoff();
  for_each_frequency(f.grid(), [&](const Frequency& q) {
    if (q.k_max() > cut) out.coeffs().row(q.index).setZero();
  });
  return out;
}

template <typename Real>
SpectralField<Real> remove_mean(SpectralField<Real> f) {
  f.coeffs().row(0).setZero();
  return f;
}

/// Gradient of every component; output component c*dim + a holds d_a f_c.
template <typename Real>
SpectralField<Real> gradient(const SpectralField<Real>& f) {
  const GridSpec& g = f.grid();
  SpectralField<Real> out(g, f.components() * g.dim, f.is_real());
  const std::complex<Real> I(0, 1);
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.touches_nyquist) return;
    for (int c = 0; c < f.components(); ++c)
      for (int a = 0; a < g.dim; ++a)
        out.coeffs()(q.index, c * g.dim + a) = I * Real(q.xi[a]) * f.coeffs()(q.index, c);
  });
  return out;
}

/// Divergence of consecutive groups of dim components; components must be a multiple of dim.
template <typename Real>
SpectralField<Real> divergence(const SpectralField<Real>& u) {
  const GridSpec& g = u.grid();
  if (u.components() % g.dim != 0)
    throw std::invalid_argument("divergence: component count must be a multiple of dim");
  const int groups = u.components() / g.dim;
  SpectralField<Real> out(g, groups, u.is_real());
  const std::complex<Real> I(0, 1);
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.touches_nyquist) return;
    for (int r = 0; r < groups; ++r) {
      std::complex<Real> s(0);
      for (int a = 0; a < g.dim; ++a) s += I * Real(q.xi[a]) * u.coeffs()(q.index, r * g.dim + a);
      out.coeffs()(q.index, r) = s;
    }
  });
  return out;
}

template <typename Real>
SpectralField<Real> laplacian(const SpectralField<Real>& f) {
  return apply_multiplier(f, [](const Frequency& q) {
    return q.touches_nyquist ? std::complex<Real>(0) : std::complex<Real>(Real(-q.l2_squared()));
  });
}

/// Leray projector I - xi xi^T / |xi|^2; the k = 0 mode passes through.
template <typename Real>
SpectralField<Real> leray_project(const SpectralField<Real>& u) {
  const GridSpec& g = u.grid();
  if (u.components() != g.dim)
    throw std::invalid_argument("leray_project: components must equal dim");
  SpectralField<Real> out = u;
  for_each_frequency(g, [&](const Frequency& q) {
    if (q.is_zero()) return;
    if (q.touches_nyquist) {
      out.coeffs().row(q.index).setZero();
      return;
    }
    const Real k2 = Real(q.l2_squared());
    std::complex<Real> dot(0);
    for (int a = 0; a < g.dim; ++a) dot += Real(q.xi[a]) * u.coeffs()(q.index, a);
    for (int a = 0; a < g.dim; ++a) out.coeffs()(q.index, a) -= Real(q.xi[a]) * dot / k2;
  });
  return out;
}

/// L^2 norm from the coefficients: ||f||^2 = L^dim sum |c_k|^2 (all components).
template <typename Real>
Real parseval_l2(const SpectralField<Real>& f) {
  return std::sqrt(Real(f.grid().volume()) * f.coeffs().squaredNorm());
}

/// Dealiased pointwise product of two fields. Either operand may be scalar
/// (broadcast); otherwise component counts must agree.
template <typename Real>
SpectralField<Real> product(const SpectralField<Real>& a, const SpectralField<Real>& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("product: grid mismatch");
  const bool real = a.is_real() && b.is_real();
  const int ca = a.components(), cb = b.components();
  if (ca != cb && ca != 1 && cb != 1) throw std::invalid_argument("product: component mismatch");
  const int cc = std::max(ca, cb);
  if (real) {
    const GridArray<Real> pa = to_physical(a), pb = to_physical(b);
    GridArray<Real> out(a.grid().points(), cc);
    for (int c = 0; c < cc; ++c) out.col(c) = pa.col(ca == 1 ? 0 : c) * pb.col(cb == 1 ? 0 : c);
    return dealias(forward_transform(out, a.grid()));
  }
  const ComplexGridArray<Real> pa = inverse_transform(a), pb = inverse_transform(b);
  ComplexGridArray<Real> out(a.grid().points(), cc);
  for (int c = 0; c < cc; ++c) out.col(c) = pa.col(ca == 1 ? 0 : c) * pb.col(cb == 1 ? 0 : c);
  return dealias(forward_transform(out, a.grid()));
}

/// Largest coefficient modulus over all components.
template <typename Real>
Real max_abs(const SpectralField<Real>& f) {
  return f.coeffs().cwiseAbs().maxCoeff();
}

}  // namespace gevlab
