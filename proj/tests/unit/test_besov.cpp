#include "gevlab/besov.hpp"
#include "gevlab/gevrey_ops.hpp"

#include "../support/test_support.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace gevlab;
using gevlab::testing::random_field;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field cos_mode(const GridSpec& g, std::array<int, 3> k) {
  Field f(g, 1);
  f.coeffs()(flat_index(g, k), 0) += 0.5;
  f.coeffs()(flat_index(g, {-k[0], -k[1], -k[2]}), 0) += 0.5;
  return f;
}

}  // namespace

TEST_CASE("Lebesgue norms") {
  const GridSpec g = GridSpec::make(3, 16);
  Field c(g, 1);
  c.coeffs()(0, 0) = 2.5;
  for (double p : {1.0, 2.0, 3.0, 4.0})
    CHECK(lp_norm(c, p) == doctest::Approx(2.5 * std::pow(kTwoPi, 3.0 / p)).epsilon(1e-13));
  CHECK(lp_norm(c, kInfinity) == doctest::Approx(2.5));

  const Field cx = cos_mode(g, {1, 0, 0});
  CHECK(lp_norm(cx, 2.0) == doctest::Approx(std::pow(kTwoPi, 1.5) / std::sqrt(2.0)).epsilon(1e-13));
  CHECK(lp_norm(cx, 2.0) == doctest::Approx(11.1367).epsilon(1e-5));

  // 1D fine quadrature of cos^4 at n = 256 as the oracle for p = 4
  double s = 0.0;
  for (int i = 0; i < 256; ++i) s += std::pow(std::cos(kTwoPi * i / 256.0), 4);
  const double oracle = std::pow(s * kTwoPi / 256.0 * kTwoPi * kTwoPi, 0.25);
  CHECK(lp_norm(cx, 4.0) == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(oracle == doctest::Approx(std::pow(3.0 / 8.0 * std::pow(kTwoPi, 3), 0.25)).epsilon(1e-13));

  Field vec(g, 3);
  vec.coeffs()(0, 0) = 3.0;
  vec.coeffs()(0, 1) = 4.0;
  CHECK(lp_norm(vec, kInfinity) == doctest::Approx(5.0));
}

TEST_CASE("Besov norms of simple fields") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  CHECK(besov_norm(Field(g, 1), BesovIndex::make(0.5, 2, 1), dec) == 0.0);

  Field e(g, 1, false);
  e.coeffs()(flat_index(g, {1, 0, 0}), 0) = 1.0;
  CHECK(besov_norm(e, BesovIndex::make(0, 2, 1), dec) == doctest::Approx(std::pow(kTwoPi, 1.5)).epsilon(1e-13));
  CHECK(besov_norm(e, BesovIndex::make(0, 2, 1), dec) == doctest::Approx(15.7496).epsilon(1e-5));

  // |k| = 4 sits in blocks 1 and 2; the s-scaling factor falls inside [2^{s-s'}, 2^{2(s-s')}]
  const Field m4 = cos_mode(g, {4, 0, 0});
  const double r = besov_norm(m4, BesovIndex::make(1, 2, 1), dec) / besov_norm(m4, BesovIndex::make(0, 2, 1), dec);
  CHECK(r >= 2.0);
  CHECK(r <= 4.0);
  CHECK(r == doctest::Approx(3.0).epsilon(1e-13));

  const Field f = random_field(g, 1, 3);
  const BesovIndex idx = BesovIndex::make(0.5, 2, 1);
  CHECK(besov_norm(-2.0 * f, idx, dec) == doctest::Approx(2.0 * besov_norm(f, idx, dec)).epsilon(1e-14));
  const double a = besov_norm(f, idx, dec), b = besov_norm(random_field(g, 1, 4), idx, dec);
  CHECK(besov_norm(f + random_field(g, 1, 4), idx, dec) <= a + b + 1e-12);
  CHECK_THROWS_AS(BesovIndex::make(0, 0.5, 1), std::invalid_argument);

  std::ostringstream os;
  write_block_norms_csv(os, f, 0.5, 2.0, dec);
  CHECK(os.str().rfind("j,value\n", 0) == 0);
}

TEST_CASE("block norms: Parseval path matches quadrature") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  const Field f = random_field(g, 3, 9);
  const Eigen::VectorXd fast = block_norms(f, 2.0, dec);
  for (int j = dec.j_min(); j <= dec.j_max(); ++j)
    CHECK(fast[j - dec.j_min()] == doctest::Approx(lp_norm(delta_j(f, j, dec), 2.0)).epsilon(1e-12));
  const Eigen::VectorXd p3 = block_norms(f, 3.0, dec);
  for (int j = dec.j_min(); j <= dec.j_max(); ++j)
    CHECK(p3[j - dec.j_min()] == doctest::Approx(lp_norm(delta_j(f, j, dec), 3.0)).epsilon(1e-12));
}

TEST_CASE("Gevrey-weighted Besov norms") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  const Field f = random_field(g, 1, 21);
  const BesovIndex idx = BesovIndex::make(0.5, 2, 1);
  const double a = 0.7;
  const Field weighted = gevrey_multiply(f, GevreyWeight::make(a * a), 1);
  CHECK(gevrey_besov_norm(f, a, idx, dec) == doctest::Approx(besov_norm(weighted, idx, dec)).epsilon(1e-12));
  const BesovIndex i3 = BesovIndex::make(0.5, 3, 2);
  CHECK(gevrey_besov_norm(f, a, i3, dec) == doctest::Approx(besov_norm(weighted, i3, dec)).epsilon(1e-12));

  // weight e^{720} overflows on its own; the weighted coefficient e^{720} 1e-10 does not
  const GridSpec g32 = GridSpec::make(3, 32);
  const DyadicDecomposition d32(g32);
  Field m(g32, 1, false);
  m.coeffs()(flat_index(g32, {10, 10, 10}), 0) = 1e-10;
  const Eigen::VectorXd plain = block_norms(m, 2.0, d32);
  const double expected_log = std::log(plain.maxCoeff()) + 720.0;
  const double got = gevrey_besov_norm(m, 24.0, BesovIndex::make(0, 2, kInfinity), d32);
  CHECK(std::isfinite(got));
  CHECK(std::log(got) == doctest::Approx(expected_log).epsilon(1e-13));
  CHECK_THROWS_AS(gevrey_multiply(m, GevreyWeight::make(576.0), 1), std::overflow_error);
}

TEST_CASE("time norms") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  const Field f = random_field(g, 1, 33, 4.0);
  const BesovIndex idx = BesovIndex::make(0.5, 2, 1);
  const double b = besov_norm(f, idx, dec);
  CHECK(chemin_lerner_norm({f}, TimeNormSpec{kInfinity, {0.0}, idx}, dec) == doctest::Approx(b).epsilon(1e-15));
  CHECK(chemin_lerner_norm({f, f, f}, TimeNormSpec{1.0, {0.0, 0.3, 0.7}, idx}, dec) ==
        doctest::Approx(0.7 * b).epsilon(1e-13));

  Field e(g, 1, false);
  e.coeffs()(flat_index(g, {1, 0, 0}), 0) = 1.0;
  std::vector<Field> snaps;
  std::vector<double> ts;
  for (int k = 0; k < 64; ++k) {
    ts.push_back(k / 63.0);
    snaps.push_back(heat_semigroup(e, ts.back()));
  }
  const double exact = besov_norm(e, idx, dec) * (1.0 - std::exp(-1.0));
  CHECK(std::abs(chemin_lerner_norm(snaps, TimeNormSpec{1.0, ts, idx}, dec) - exact) / exact <= 1e-4);

  // trapezoid rule is exact for block norms linear in t
  NormAccumulator acc(1.0, -1, 2);
  for (double t : {0.0, 0.5, 2.0}) acc.add(t, Eigen::Vector2d(1.0 + t, 2.0 * t));
  CHECK(acc.time_norms()[0] == doctest::Approx(4.0));
  CHECK(acc.time_norms()[1] == doctest::Approx(4.0));
  CHECK(acc.value(1.0, 1.0) == doctest::Approx(0.5 * 4.0 + 1.0 * 4.0));
  NormAccumulator mx(kInfinity, 0, 1);
  double t = 0.0;
  for (double v : {1.0, 3.0, 2.0}) mx.add(t++, Eigen::VectorXd::Constant(1, v));
  CHECK(mx.time_norms()[0] == 3.0);
  CHECK(mx.samples() == 3);
  CHECK(mx.last_time() == 2.0);
}

TEST_CASE("interpolation, embedding and derivative equivalence") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  const Field b1 = cos_mode(g, {3, 0, 0});  // block 1 only
  const Field b3 = cos_mode(g, {0, 0, 5});
  REQUIRE(dec.block_weight(1, 3.0) == 1.0);
  CHECK(interpolation_check(b1, -1, 1, 0.5, 2, 1, dec) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(interpolation_check(b1 + b3, -1, 1, 0.5, 2, 1, dec) <= 1.0 + 1e-14);
  CHECK(embedding_ratio(random_field(g, 1, 2), 0.5, 2, 2, 1, dec) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(gradient_equivalence_ratio(b1, 0.5, 2, 1, dec) == doctest::Approx(1.5).epsilon(1e-13));
}

TEST_CASE("product estimate monitor") {
  const GridSpec g = GridSpec::make(3, 16);
  const DyadicDecomposition dec(g);
  const Field z(g, 1);
  const Field f = random_field(g, 1, 41, 3.0);
  CHECK(product_estimate_ratio(z, f, ProductEstimate::low_high, 2, 2, 0.1, 1.0, dec) == 0.0);
  CHECK(product_estimate_admissible(ProductEstimate::low_high, 2, 2));
  CHECK(product_estimate_admissible(ProductEstimate::mixed, 2, 2));
  const Field h = random_field(g, 1, 43, 3.0);
  const double r1 = product_estimate_ratio(f, h, ProductEstimate::mixed, 2, 2, 0.1, 1.0, dec);
  const double r2 = product_estimate_ratio(f, h, ProductEstimate::mixed, 2, 2, 0.1, 5.0, dec);
  CHECK(r1 > 0.0);
  CHECK(r1 == doctest::Approx(r2).epsilon(1e-12));
  const double series =
      product_estimate_ratio(std::vector<Field>{f, f}, std::vector<Field>{h, h}, {0.0, 0.1}, ProductEstimate::mixed,
                             2, 2, dec);
  CHECK(std::isfinite(series));
  CHECK(series > 0.0);
}
