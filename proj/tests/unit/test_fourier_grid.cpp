#include "gevlab/fourier_grid.hpp"
#include "gevlab/snapshot.hpp"

#include "../support/test_support.hpp"

#include <doctest.h>

#include <sstream>

using namespace gevlab;
using gevlab::testing::random_field;
using gevlab::testing::rel_diff;

namespace {

Field scalar(const GridSpec& g, double (*fn)(const Eigen::Vector3d&)) {
  return forward_transform(sample(g, 1, [fn](const Eigen::Vector3d& x) { return Eigen::Matrix<double, 1, 1>(fn(x)); }), g);
}

}  // namespace

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec::make(4, 16), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(3, 12), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(3, 4), std::invalid_argument);
  const GridSpec g = GridSpec::make(3, 16);
  CHECK(g.points() == 4096);
  CHECK(g.dealias_cutoff() == 5);
  CHECK(g.frequency_of(8) == -8);
  CHECK(flat_index(g, {1, -1, 2}) == (1 * 16 + 15) * 16 + 2);
}

TEST_CASE("forward transform of simple fields") {
  const GridSpec g = GridSpec::make(3, 16);
  const Field zero = forward_transform(GridArray<double>(GridArray<double>::Zero(g.points(), 1)), g);
  CHECK(max_abs(zero) == 0.0);

  const Field c = scalar(g, [](const Eigen::Vector3d& x) { return std::cos(x[0]); });
  CHECK(std::abs(c.coeffs()(flat_index(g, {1, 0, 0}), 0) - 0.5) < 1e-15);
  CHECK(std::abs(c.coeffs()(flat_index(g, {-1, 0, 0}), 0) - 0.5) < 1e-15);
  Field rest = c;
  rest.coeffs()(flat_index(g, {1, 0, 0}), 0) = 0.0;
  rest.coeffs()(flat_index(g, {-1, 0, 0}), 0) = 0.0;
  CHECK(max_abs(rest) < 1e-15);
}

TEST_CASE("round trip and Parseval") {
  const GridSpec g = GridSpec::make(3, 16);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  GridArray<double> v(g.points(), 2);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = normal(rng);
  const Field f = forward_transform(v, g);
  CHECK((to_physical(f) - v).abs().maxCoeff() <= 1e-12);
  const double quad = std::sqrt(v.square().sum() * g.cell_volume());
  CHECK(std::abs(parseval_l2(f) - quad) / quad < 1e-13);

  ComplexGridArray<double> z = v.cast<std::complex<double>>();
  z.col(1) *= std::complex<double>(0.3, -1.2);
  const Field fz = forward_transform(z, g);
  CHECK_FALSE(fz.is_real());
  CHECK((inverse_transform(fz) - z).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("Fourier multipliers") {
  const GridSpec g = GridSpec::make(3, 16);
  const Field f = random_field(g, 2, 5);
  CHECK(max_abs(apply_multiplier(f, [](const Frequency&) { return 1.0; }) - f) == 0.0);

  const Field c = scalar(g, [](const Eigen::Vector3d& x) { return std::cos(x[0]); });
  CHECK(rel_diff(apply_multiplier(c, [](const Frequency& q) { return -q.l2_squared(); }), -1.0 * c) < 1e-14);

  Field mode(g, 1, false);
  mode.coeffs()(flat_index(g, {1, 1, 0}), 0) = 1.0;
  CHECK(rel_diff(apply_multiplier(mode, [](const Frequency& q) { return q.l1(); }), 2.0 * mode) < 1e-15);

  Field big(g, 1);
  big.coeffs()(flat_index(g, {3, 0, 0}), 0) = 1.0;
  CHECK_THROWS_AS(apply_multiplier(big, [](const Frequency& q) { return std::exp(1000.0 * q.l1()); }),
                  std::overflow_error);
}

TEST_CASE("derivatives") {
  const GridSpec g = GridSpec::make(3, 16);
  const Field s = scalar(g, [](const Eigen::Vector3d& x) { return std::sin(x[0]); });
  const Field grad = gradient(s);
  REQUIRE(grad.components() == 3);
  const Field cos_x = scalar(g, [](const Eigen::Vector3d& x) { return std::cos(x[0]); });
  CHECK(rel_diff(grad.component_field(0), cos_x) < 1e-14);
  CHECK(max_abs(grad.components_field(1, 2)) < 1e-15);

  const Field c2 = scalar(g, [](const Eigen::Vector3d& x) { return std::cos(2.0 * x[1]); });
  CHECK(rel_diff(laplacian(c2), -4.0 * c2) < 1e-14);

  const Field f = random_field(g, 1, 11);
  CHECK(rel_diff(divergence(gradient(f)), laplacian(f)) <= 1e-12);
}

TEST_CASE("Leray projection") {
  const GridSpec g = GridSpec::make(3, 16);
  const Field f = random_field(g, 1, 17);
  CHECK(max_abs(leray_project(gradient(f))) < 1e-14 * max_abs(gradient(f)) + 1e-300);

  const Field u = random_field(g, 3, 19);
  const Field pu = leray_project(u);
  CHECK(to_physical(divergence(pu)).abs().maxCoeff() <= 1e-13);
  CHECK(rel_diff(leray_project(pu), pu) <= 1e-13);
  CHECK(rel_diff(leray_project(testing::taylor_green(g, 1.0)), testing::taylor_green(g, 1.0)) <= 1e-13);
  CHECK_THROWS_AS(leray_project(f), std::invalid_argument);
}

TEST_CASE("dealiasing") {
  const GridSpec g = GridSpec::make(3, 16);
  const Field f = random_field(g, 1, 23);
  CHECK(max_abs(dealias(f) - f) == 0.0);
  Field hi(g, 1, false);
  hi.coeffs()(flat_index(g, {7, 0, 0}), 0) = 1.0;
  CHECK(max_abs(dealias(hi)) == 0.0);
}

TEST_CASE("dealiased product equals the truncated convolution") {
  const GridSpec g = GridSpec::make(2, 16);
  const Field a = random_field(g, 1, 29), b = random_field(g, 1, 31);
  const Field prod = product(a, b);
  const int cut = g.dealias_cutoff();
  Field conv(g, 1);
  for (int k0 = -cut; k0 <= cut; ++k0)
    for (int k1 = -cut; k1 <= cut; ++k1) {
      std::complex<double> s = 0.0;
      for (int p0 = -cut; p0 <= cut; ++p0)
        for (int p1 = -cut; p1 <= cut; ++p1) {
          const int q0 = k0 - p0, q1 = k1 - p1;
          if (std::abs(q0) > cut || std::abs(q1) > cut) continue;
          s += a.coeffs()(flat_index(g, {p0, p1, 0}), 0) * b.coeffs()(flat_index(g, {q0, q1, 0}), 0);
        }
      conv.coeffs()(flat_index(g, {k0, k1, 0}), 0) = s;
    }
  CHECK(rel_diff(prod, conv) < 1e-13);
  // broadcasting a scalar against a vector
  const Field v = random_field(g, 2, 37);
  const Field pv = product(a, v);
  CHECK(rel_diff(pv.component_field(1), product(a, v.component_field(1))) < 1e-15);
}

TEST_CASE("snapshot round trip and corrupt input") {
  const GridSpec g = GridSpec::make(3, 8);
  const Field f = random_field(g, 3, 41);
  std::stringstream ss;
  write_snapshot(ss, f);
  const std::string bytes = ss.str();
  CHECK(bytes.size() == 4 + 4 * 4 + 8 + 512 * 3 * 16);
  CHECK(bytes.substr(0, 4) == "GVLC");
  std::stringstream in(bytes);
  const Field back = read_snapshot(in);
  CHECK(back.grid() == g);
  CHECK(back.components() == 3);
  CHECK(max_abs(back - f) == 0.0);

  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(read_snapshot(truncated), SnapshotFormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream bad_magic(bad);
  CHECK_THROWS_AS(read_snapshot(bad_magic), SnapshotFormatError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  std::stringstream bv(bad_version);
  CHECK_THROWS_AS(read_snapshot(bv), SnapshotFormatError);
}
