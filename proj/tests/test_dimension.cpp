#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dss/dimension.hpp"

using namespace dss;

namespace {

// Cell-centered discretization of Lebesgue measure on [0,1]^d.
GridMeasure lebesgue(int d, int n) {
  const double h = 1.0 / n;
  std::vector<PointMass> m;
  if (d == 1) {
    for (int i = 0; i < n; ++i) m.push_back({{i}, h});
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.push_back({{i, j}, h * h});
  }
  return GridMeasure(d, h, Point(d, h / 2), std::move(m), "lebesgue");
}

GridMeasure dirac(int d, double at) {
  return GridMeasure(d, 1.0 / 1024, Point(d, 0.0), {{Index(d, std::llround(at * 1024)), 1.0}}, "dirac");
}

GridMeasure random_measure(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<std::int64_t> idx(0, 4095);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::vector<PointMass> m;
  for (int i = 0; i < n; ++i) m.push_back({{idx(rng)}, w(rng)});
  return GridMeasure(1, 1.0 / 4096, {0.0}, std::move(m));
}

AtomicDecomposition four_cantor_atoms(int depth) {
  const auto atom = make_frostman_atom(kCantorDimension, depth);
  auto small = atom;
  small.a = dilate(atom.a, {0.0}, 0.25);
  const std::int64_t shift = 4 * std::llround(std::pow(3.0, depth));
  AtomicDecomposition dec;
  for (int i = 0; i < 4; ++i) {
    auto c = small;
    c.a = translate_cells(small.a, {shift * i});
    c.Q = {{0.25 * i}, 0.25};
    add_term(dec, 0.25, c);
  }
  return dec;
}

}  // namespace

TEST_CASE("greedy capture: cost budget, disjoint selection, exact cases") {
  const auto leb = lebesgue(1, 1024);
  const auto lat = DyadicLattice::unit(1);
  for (double delta : {0.5, 0.1, 1.0 / 64, 1e-3}) {
    const auto r = greedy_mass_capture(leb, lat, 1.0, delta, 10);
    CHECK(r.cost <= delta * (1 + 1e-12));
    // beta = d: every cube carries exactly its cost.
    CHECK(r.captured == doctest::Approx(r.cost).epsilon(1e-12));
    double vol = 0.0;
    for (const auto& q : r.cubes.cubes) vol += cube_side(lat, q.level);
    CHECK(vol == doctest::Approx(r.captured).epsilon(1e-12));
    CHECK(r.cubes.size() == r.cubes.cubes.size());
  }
  // A point mass is captured once the finest cube fits the budget.
  const auto pt = dirac(1, 0.3);
  CHECK(greedy_mass_capture(pt, lat, 0.5, std::pow(2.0, -0.5 * 12), 12).captured == 1.0);
  CHECK(greedy_mass_capture(pt, lat, 0.5, 0.99 * std::pow(2.0, -0.5 * 12), 12).captured == 0.0);
  CHECK_THROWS_AS(greedy_mass_capture(pt, lat, 0.0, 0.1, 4), std::invalid_argument);
  CHECK_THROWS_AS(greedy_mass_capture(pt, lat, 0.5, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(greedy_mass_capture(pt, DyadicLattice::unit(2), 0.5, 0.1, 4), std::invalid_argument);
}

TEST_CASE("modulus curves are monotone in delta and beta") {
  std::mt19937_64 rng(7);
  const auto lat = DyadicLattice::unit(1);
  for (int trial = 0; trial < 6; ++trial) {
    const auto mu = random_measure(rng, 40);
    std::vector<double> prev;
    for (double b : {0.2, 0.4, 0.6, 0.8, 1.0}) {
      const auto c = modulus_curve(mu, lat, b, 12);
      REQUIRE(c.deltas.size() == 12);
      for (std::size_t j = 1; j < c.captured.size(); ++j) {
        CHECK(c.deltas[j] < c.deltas[j - 1]);
        CHECK(c.captured[j] <= c.captured[j - 1]);
      }
      if (!prev.empty())
        for (std::size_t j = 0; j < prev.size(); ++j) CHECK(c.captured[j] >= prev[j] - 1e-12);
      prev = c.captured;
    }
  }
}

TEST_CASE("separation and resolvable depth") {
  const auto lat = DyadicLattice::unit(1);
  CHECK(min_separation(lebesgue(1, 1024)) == doctest::Approx(1.0 / 1024));
  CHECK(std::isinf(min_separation(dirac(1, 0.5))));
  CHECK(resolvable_depth(lebesgue(1, 1024), lat) == 10);
  CHECK(resolvable_depth(lebesgue(2, 64), DyadicLattice::unit(2)) == 6);
  // Sibling intervals at depth n have centers 2 * 3^-n apart in [0,1];
  // the measure lives on [0, 1/2].
  const auto c = cantor_measure(6, 1.0);
  CHECK(min_separation(c) == doctest::Approx(std::pow(3.0, -6)));
}

TEST_CASE("dimension estimate: Lebesgue, Dirac, Cantor") {
  const auto lat1 = DyadicLattice::unit(1);
  const auto lat2 = DyadicLattice::unit(2);
  const auto l1 = lower_dim_estimate(lebesgue(1, 1024), lat1, default_beta_grid(1));
  CHECK(l1.beta_hat >= 1 - 0.05);
  const auto l2 = lower_dim_estimate(lebesgue(2, 128), lat2, default_beta_grid(2));
  CHECK(l2.beta_hat >= 2 - 0.05);
  for (int d : {1, 2}) {
    const auto r = lower_dim_estimate(dirac(d, 0.3), d == 1 ? lat1 : lat2, default_beta_grid(d), 20);
    CHECK(r.beta_hat <= 0.05);
  }
  const auto c = lower_dim_estimate(cantor_measure(10, 1.0), lat1, default_beta_grid(1));
  CHECK(c.beta_hat == doctest::Approx(kCantorDimension).epsilon(0.05 / kCantorDimension));
  // Report shape.
  CHECK(c.curves.size() == c.betas.size());
  CHECK(c.slopes.size() == c.betas.size());
  REQUIRE(c.level_ratios.size() == c.betas.size());
  CHECK(c.level_ratios.front().size() == static_cast<std::size_t>(c.depth) + 1);
  CHECK(std::is_sorted(c.slopes.begin(), c.slopes.end()));
  CHECK_THROWS_AS(lower_dim_estimate(cantor_measure(4, 1.0), lat1, {}), std::invalid_argument);
  CHECK_THROWS_AS(lower_dim_estimate(cantor_measure(4, 1.0), lat1, {0.5, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(lower_dim_estimate(cantor_measure(4, 1.0), lat1, {1.5}), std::invalid_argument);
}

TEST_CASE("dimension estimate: scaling, translation, sums") {
  const auto lat = DyadicLattice::unit(1);
  const auto grid = default_beta_grid(1);
  const auto mu = cantor_measure(8, 1.0);
  const auto base = lower_dim_estimate(mu, lat, grid);
  CHECK(lower_dim_estimate(mu.scaled(-3.5), lat, grid).beta_hat == base.beta_hat);
  // Shifts by whole dyadic cubes of the finest level leave the estimate unchanged.
  const double finest = cube_side(lat, base.depth);
  const auto shift = static_cast<std::int64_t>(std::llround(7 * finest / mu.spacing()));
  if (std::abs(shift * mu.spacing() - 7 * finest) < 1e-15) {
    CHECK(lower_dim_estimate(translate_cells(mu, {shift}), lat, grid).beta_hat == base.beta_hat);
  }
  for (double s : {0.1, 0.23, 0.37}) {
    const auto t = translate_cells(mu, {std::llround(s / mu.spacing())});
    CHECK(std::abs(lower_dim_estimate(t, lat, grid, base.depth).beta_hat - base.beta_hat) <= 0.05);
  }
  // The sum is at least as regular as its worse part.
  const double h = mu.spacing();
  const int n = static_cast<int>(std::llround(1.0 / h));
  std::vector<PointMass> leb;
  for (int i = 0; i < n; ++i) leb.push_back({{i}, h});
  const GridMeasure nu(1, h, mu.origin(), std::move(leb));
  const auto sum = combine(mu, 1.0, nu, 1.0);
  const auto bs = lower_dim_estimate(sum, lat, grid, base.depth).beta_hat;
  const auto bn = lower_dim_estimate(nu, lat, grid, base.depth).beta_hat;
  CHECK(bs >= std::min(base.beta_hat, bn) - 0.05);
}

TEST_CASE("Choquet test of the truncated dyadic maximal function") {
  const auto lat = DyadicLattice::unit(1);
  const GridMeasure zero(1, 1.0 / 1024, {0.0}, {});
  CHECK(choquet_maximal_test(zero, lat, 0.5, 1.0 / 64) == 0.0);
  // Lebesgue, beta < d: bounded in l.
  const auto leb = lebesgue(1, 1024);
  std::vector<double> vals;
  for (int k = 3; k <= 8; ++k) vals.push_back(choquet_maximal_test(leb, lat, 0.5, std::ldexp(1.0, -k)));
  const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
  CHECK(*lo > 0.0);
  CHECK(*hi / *lo <= 2.0);
  // Dirac: nondecreasing as l shrinks.
  const auto pt = dirac(1, 0.3);
  double prev = 0.0;
  for (int k = 1; k <= 8; ++k) {
    const double v = choquet_maximal_test(pt, lat, 0.5, std::ldexp(1.0, -k));
    CHECK(v >= prev * (1 - 1e-12));
    prev = v;
  }
  CHECK_THROWS_AS(choquet_maximal_test(pt, lat, 0.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(choquet_maximal_test(pt, lat, 0.5, 2.0), std::invalid_argument);
}

TEST_CASE("dyadic level sums stabilize and bracket the Choquet integral") {
  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> ln(0.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    CellFunction f{DyadicLattice::unit(1 + trial % 2), 5, {}};
    f.values.resize(f.cell_count());
    for (auto& v : f.values) v = ln(rng);
    for (double beta : {0.3, 0.9}) {
      const auto p = level_sum_partials(f, beta, 40);
      REQUIRE(p.size() > 20);
      CHECK(std::abs(p.back() - p[p.size() - 21]) <= 0.01 * p.back());
      const double c = choquet_integral(f, beta, 512);
      CHECK(p.back() >= 0.95 * c);
      CHECK(p.back() <= 2.05 * c);
    }
  }
  CellFunction z{DyadicLattice::unit(1), 3, std::vector<double>(8, 0.0)};
  CHECK(level_sum_partials(z, 0.5).empty());
}

TEST_CASE("atom sums: Choquet bound and dimension") {
  const auto lat = DyadicLattice::unit(1);
  const double beta = kCantorDimension;
  AtomSumOptions opt;
  opt.bound = 0.01;
  AtomicDecomposition one;
  add_term(one, 1.0, make_frostman_atom(beta, 6));
  const auto r1 = atom_sum_dimension_check(one, beta, lat, opt);
  CHECK(r1.passed());
  CHECK(r1.ratio > 0.0);
  CHECK(r1.dimension.beta_hat >= beta - 0.1);
  const auto r4 = atom_sum_dimension_check(four_cantor_atoms(6), beta, lat, opt);
  CHECK(r4.passed());
  CHECK(r4.lambda_sum == doctest::Approx(1.0));
  CHECK(r4.ratio <= 2.0 * r1.ratio);
  CHECK(r4.ratio >= 0.5 * r1.ratio);
  REQUIRE(r4.level_sums.size() > 20);
  CHECK(std::abs(r4.level_sums.back() - r4.level_sums[r4.level_sums.size() - 21]) <=
        0.01 * r4.level_sums.back());

  // Rejections.
  auto bad = one;
  bad.terms.front().certificate.sup_ok = false;
  CHECK_THROWS_AS(atom_sum_dimension_check(bad, beta, lat), std::invalid_argument);
  CHECK_THROWS_AS(atom_sum_dimension_check(one, 0.5, lat), std::invalid_argument);
  CHECK_THROWS_AS(atom_sum_dimension_check(AtomicDecomposition{}, beta, lat), std::invalid_argument);
}
