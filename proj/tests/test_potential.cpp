#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dss/potential.hpp"

using namespace dss;

namespace {

GridMeasure dirac(int d) { return new_grid_measure(d, 1.0, Point(d, 0.0), {{Index(d, 0), 1.0}}); }

SampledField indicator(int cells, double h) {
  GridSpec g{{0.0}, h, {cells + 4}};
  SampledField f{g, std::vector<double>(g.size(), 0.0)};
  for (int i = 2; i < cells + 2; ++i) f.values[i] = 1.0;
  return f;
}

}  // namespace

TEST_CASE("riesz normalization") {
  // d = 1, alpha = 1/2: pi^{1/2} 2^{1/2} Gamma(1/4) / Gamma(1/4).
  CHECK(riesz_normalization(1, 0.5) == doctest::Approx(std::sqrt(2 * std::numbers::pi)));
  // d = 2, alpha = 1: pi * 2 * Gamma(1/2) / Gamma(1/2).
  CHECK(riesz_normalization(2, 1.0) == doctest::Approx(2 * std::numbers::pi));
  CHECK_THROWS_AS(RieszConfig::make(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RieszConfig::make(2, 0.0), std::invalid_argument);
}

TEST_CASE("riesz kernel values") {
  auto cfg = RieszConfig::make(2, 0.5);
  std::vector<Point> pts{{0.6, 0.8}, {1.2, 1.6}, {0.0, 0.0}};
  auto v = riesz_kernel(cfg, dirac(2), pts);
  CHECK(v[0] == doctest::Approx(1.0 / cfg.gamma));
  CHECK(v[1] / v[0] == doctest::Approx(std::pow(2.0, 0.5 - 2)));
  CHECK(std::isinf(v[2]));

  auto zero = new_grid_measure(2, 1.0, {0.0, 0.0}, {});
  for (double x : riesz_kernel(cfg, zero, std::span<const Point>(pts).first(2))) CHECK(x == 0.0);
  auto hz = riesz_heat(cfg, zero, std::span<const Point>(pts).first(2));
  for (double x : hz.values) CHECK(x == 0.0);
}

TEST_CASE("heat route equals kernel route") {
  for (int d : {1, 2}) {
    for (double alpha : {0.3, 0.5, 1.2}) {
      if (alpha >= d) continue;
      auto cfg = RieszConfig::make(d, alpha);
      std::vector<Point> pts;
      for (int i = 0; i <= 20; ++i) {
        Point x(d, 0.0);
        x[0] = 0.1 * std::pow(100.0, i / 20.0);
        pts.push_back(x);
      }
      auto k = riesz_kernel(cfg, dirac(d), pts);
      auto h = riesz_heat(cfg, dirac(d), pts);
      CHECK_FALSE(h.flagged);
      for (std::size_t i = 0; i < pts.size(); ++i) CHECK(std::abs(h.values[i] / k[i] - 1.0) <= 1e-3);
    }
  }
}

TEST_CASE("heat route on a signed measure away from the support") {
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> idx(0, 31);
  std::normal_distribution<double> w(0.0, 1.0);
  std::vector<PointMass> m;
  for (int i = 0; i < 30; ++i) m.push_back({{idx(rng), idx(rng)}, w(rng)});
  const double h = 1.0 / 32;
  auto mu = new_grid_measure(2, h, {0.0, 0.0}, m);
  auto cfg = RieszConfig::make(2, 0.7);
  std::vector<Point> pts;
  for (int i = 0; i < 12; ++i) pts.push_back({1.0 + 10 * h + 0.3 * i, -0.2 * i});
  auto k = riesz_kernel(cfg, mu, pts);
  auto r = riesz_heat(cfg, mu, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(r.values[i] - k[i]) <= 1e-3 * std::abs(k[i]) + 1e-12);
}

TEST_CASE("positive measures have positive potentials") {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> idx(0, 15);
  std::uniform_real_distribution<double> w(0.0, 1.0);
  std::vector<PointMass> m;
  for (int i = 0; i < 10; ++i) m.push_back({{idx(rng)}, w(rng)});
  auto mu = new_grid_measure(1, 1.0 / 16, {0.0}, m);
  auto cfg = RieszConfig::make(1, 0.4);
  GridSpec g{{-1.03}, 0.05, {60}};
  for (double v : riesz_kernel(cfg, mu, g).values) CHECK(v >= 0.0);
}

TEST_CASE("lorentz norm") {
  const double h = 1.0 / 64;
  auto one = indicator(64, h);
  for (double p : {1.5, 2.0, 4.0}) {
    CHECK(lorentz_norm(one, p) == doctest::Approx(p).epsilon(1e-12));
    SampledField scaled = one;
    for (auto& v : scaled.values) v *= -3.0;
    CHECK(lorentz_norm(scaled, p) == doctest::Approx(3 * lorentz_norm(one, p)).epsilon(1e-12));
  }
  // Two separated halves against one block of the same total volume.
  GridSpec g{{0.0}, h, {200}};
  SampledField split{g, std::vector<double>(200, 0.0)};
  for (int i = 0; i < 32; ++i) {
    split.values[10 + i] = 1.0;
    split.values[120 + i] = 1.0;
  }
  CHECK(lorentz_norm(split, 2.5) == doctest::Approx(lorentz_norm(one, 2.5)).epsilon(1e-12));
  CHECK(lorentz_norm({}, 1.0, 2.0) == 0.0);
  CHECK_THROWS(lorentz_norm(one, 1.0));

  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  SampledField r{GridSpec{{0.0, 0.0}, 0.1, {20, 20}}, std::vector<double>(400)};
  for (auto& v : r.values) v = n(rng);
  for (double p : {1.2, 2.0, 3.0}) CHECK(lp_norm(r, p) <= lorentz_norm(r, p));
}

TEST_CASE("heat-Besov functional") {
  auto a = make_frostman_atom(kCantorDimension, 6);
  AtomCandidate zero = a;
  zero.a = new_grid_measure(1, a.a.spacing(), {0.0}, {});
  CHECK(heat_besov_functional(zero, 0.5).value == 0.0);

  auto base = heat_besov_functional(a, 0.5);
  CHECK(std::isfinite(base.value));
  CHECK_FALSE(base.flagged);
  CHECK(base.small_t > 0.0);
  CHECK(base.large_t > 0.0);
  CHECK(base.small_t > base.large_t);
  for (int j = 1; j <= 6; j += 1) {
    const double f = std::ldexp(1.0, -j);
    AtomCandidate b = a;
    b.a = dilate(a.a, {0.3}, f);
    b.Q = {{(0.0 - 0.3) * f}, f};
    auto r = heat_besov_functional(b, 0.5);
    CHECK(std::abs(r.value / base.value - 1.0) <= 0.02);
  }
  auto s = heat_besov_functional(normalize_to_standard(a), 0.5);
  CHECK(std::abs(s.value / base.value - 1.0) <= 0.02);
  // Mean-zero measures: the norm decays like t^{-(alpha+1)/2} at large t.
  CHECK(base.tail_exponent == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("trace integral") {
  auto nu = cantor_measure(5, 2.5);
  SampledField ones{GridSpec{{-1.0}, 0.01, {400}}, std::vector<double>(400, 1.0)};
  CHECK(trace_integral(ones, nu) == doctest::Approx(2.5));
  SampledField zeros{ones.grid, std::vector<double>(400, 0.0)};
  CHECK(trace_integral(zeros, nu) == 0.0);
  auto neg = new_grid_measure(1, 0.1, {0.0}, {{{1}, -1.0}});
  CHECK_THROWS_AS(trace_integral(ones, neg), std::invalid_argument);
  std::vector<double> vals(nu.size(), 2.0);
  CHECK(trace_integral(vals, nu) == doctest::Approx(5.0));
}
