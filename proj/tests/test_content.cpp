#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "dss/content.hpp"

using namespace dss;

namespace {

CubeUnion random_union(std::mt19937_64& rng, int d, int max_level, int n) {
  std::uniform_int_distribution<int> lv(0, max_level);
  std::vector<DyadicCube> cubes;
  for (int i = 0; i < n; ++i) {
    const int level = lv(rng);
    std::uniform_int_distribution<std::int64_t> idx(0, (std::int64_t{1} << level) - 1);
    Index j(d);
    for (auto& v : j) v = idx(rng);
    cubes.push_back({level, j});
  }
  return make_cube_union(DyadicLattice::unit(d), cubes);
}

// All dyadic sub-cubes of [0,1)^d down to the given level.
std::vector<DyadicCube> all_cubes(int d, int depth) {
  std::vector<DyadicCube> out{{0, Index(d, 0)}};
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].level < depth)
      for (auto& c : children(out[i])) out.push_back(c);
  return out;
}

// Minimum of sum l^beta over every subset of cubes covering the cells of E,
// one value per beta.
std::vector<double> brute_content(const CubeUnion& e, const std::vector<double>& betas, int depth) {
  const int d = e.lattice.dim();
  const auto cubes = all_cubes(d, depth);
  std::vector<DyadicCube> cells;
  for (const auto& q : cubes)
    if (q.level == depth) cells.push_back(q);
  std::uint32_t need = 0;
  std::vector<std::uint32_t> hits(cubes.size(), 0);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (const auto& p : e.cubes)
      if (is_within(cells[c], p)) need |= 1u << c;
    for (std::size_t i = 0; i < cubes.size(); ++i)
      if (is_within(cells[c], cubes[i])) hits[i] |= 1u << c;
  }
  std::vector<double> best(betas.size(), std::numeric_limits<double>::infinity());
  const std::size_t n = cubes.size();
  std::vector<std::vector<double>> cost(betas.size(), std::vector<double>(n));
  for (std::size_t b = 0; b < betas.size(); ++b)
    for (std::size_t i = 0; i < n; ++i) cost[b][i] = std::pow(std::ldexp(1.0, -cubes[i].level), betas[b]);
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::uint32_t got = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) got |= hits[i];
    if ((got & need) != need) continue;
    for (std::size_t b = 0; b < betas.size(); ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1) s += cost[b][i];
      best[b] = std::min(best[b], s);
    }
  }
  return best;
}

BallFamily random_balls(std::mt19937_64& rng, int d, int n, double rmin, double rmax) {
  std::uniform_real_distribution<double> u(0.0, 1.0), r(std::log(rmin), std::log(rmax));
  BallFamily f;
  for (int i = 0; i < n; ++i) {
    Point c(d);
    for (auto& v : c) v = u(rng);
    f.push_back({c, std::exp(r(rng))});
  }
  return f;
}

bool ball_inside(const Ball& inner, const Ball& outer) {
  return distance(inner.center, outer.center) + inner.radius <= outer.radius * (1 + 1e-12);
}

// Every sample point of every ball lies in some cover cube.
bool cover_contains_balls(const CubeUnion& cover, const BallFamily& f, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& b : f)
    for (int s = 0; s < 200; ++s) {
      Point x = b.center, off(x.size());
      double n = 0.0;
      for (auto& v : off) {
        v = u(rng);
        n += v * v;
      }
      if (n >= 1.0) continue;
      for (std::size_t k = 0; k < x.size(); ++k) x[k] += b.radius * off[k];
      bool in = false;
      for (const auto& q : cover.cubes)
        if (cube_contains(cover.lattice, q, x)) in = true;
      if (!in) return false;
    }
  return true;
}

}  // namespace

TEST_CASE("cube unions reduce") {
  auto lat = DyadicLattice::unit(2);
  auto u = make_cube_union(lat, {{1, {0, 0}}, {2, {0, 1}}, {2, {3, 3}}, {1, {0, 0}}, {3, {7, 7}}});
  REQUIRE(u.size() == 2);
  CHECK(u.volume() == doctest::Approx(0.25 + 1.0 / 16));
  CHECK(covers(u, make_cube_union(lat, {{3, {7, 7}}})));
  CHECK_FALSE(covers(u, make_cube_union(lat, {{1, {1, 0}}})));
  CHECK_THROWS_AS(make_cube_union(lat, {{1, {0}}}), std::invalid_argument);
}

TEST_CASE("dyadic content of single cubes is exact") {
  std::mt19937_64 rng(1);
  for (int d : {1, 2, 3}) {
    auto lat = DyadicLattice{Point(d, -0.3), 2.0};
    std::uniform_int_distribution<int> lv(-3, 12);
    std::uniform_int_distribution<std::int64_t> idx(-50, 50);
    for (int i = 0; i < 50; ++i) {
      DyadicCube q{lv(rng), Index(d)};
      for (auto& v : q.index) v = idx(rng);
      const auto u = make_cube_union(lat, {q});
      for (double beta : {0.3, 0.63, 1.0, static_cast<double>(d)}) {
        if (beta > d) continue;
        const double expect = std::pow(cube_side(lat, q.level), beta);
        const double got = dyadic_content(u, beta);
        CHECK(std::abs(got - expect) <= 4 * std::numeric_limits<double>::epsilon() * expect);
      }
    }
  }
  CHECK(dyadic_content(CubeUnion{DyadicLattice::unit(1), {}}, 0.5) == 0.0);
  CHECK_THROWS_AS(dyadic_content(make_cube_union(DyadicLattice::unit(1), {{0, {0}}}), 1.5), std::invalid_argument);
}

TEST_CASE("dyadic content against exhaustive covers") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = trial % 2 ? 2 : 1;
    const int depth = d == 1 ? 3 : 2;
    auto e = random_union(rng, d, depth, 1 + trial % 5);
    const std::vector<double> betas{0.3, 0.7, d - 0.2};
    const auto brutes = brute_content(e, betas, depth);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double beta = betas[b], brute = brutes[b];
      CHECK(dyadic_content(e, beta) == doctest::Approx(brute).epsilon(1e-12));
      const auto cov = optimal_dyadic_cover(e, beta);
      CHECK(covers(cov, e));
      double s = 0.0;
      for (const auto& q : cov.cubes) s += std::pow(cube_side(cov.lattice, q.level), beta);
      CHECK(s == doctest::Approx(brute).epsilon(1e-12));
    }
  }
}

TEST_CASE("dyadic content properties") {
  std::mt19937_64 rng(3);
  auto lat = DyadicLattice::unit(2);
  // Far apart cubes separate.
  auto a = make_cube_union(lat, {{3, {0, 0}}});
  auto b = make_cube_union(lat, {{4, {-200, 90}}});
  CHECK(dyadic_content(unite(a, b), 0.8) == doctest::Approx(dyadic_content(a, 0.8) + dyadic_content(b, 0.8)));
  for (int i = 0; i < 40; ++i) {
    auto e = random_union(rng, 2, 6, 8);
    auto f = random_union(rng, 2, 6, 8);
    const double beta = 0.4 + 0.04 * i;
    const double ce = dyadic_content(e, beta), cf = dyadic_content(f, beta), cu = dyadic_content(unite(e, f), beta);
    CHECK(cu <= ce + cf + 1e-12);
    CHECK(cu >= std::max(ce, cf) - 1e-12);
    // Content is below the volume-free bound l0^beta and above the volume.
    CHECK(ce <= 1.0 + 1e-12);
    CHECK(ce >= e.volume() - 1e-12);
  }
}

TEST_CASE("dyadic content of a snapped cantor set") {
  const double beta = std::log(2.0) / std::log(3.0);
  auto snapped = [&](int depth) {
    const int level = static_cast<int>(std::ceil(depth * std::log2(3.0))) + 2;
    const double l = std::ldexp(1.0, -level);
    std::vector<DyadicCube> cells;
    for (std::int64_t m = 0; m < (std::int64_t{1} << depth); ++m) {
      double a = 0.0, w = 1.0;
      for (int k = depth - 1; k >= 0; --k) {
        w /= 3.0;
        if (m >> k & 1) a += 2 * w;
      }
      for (auto i = static_cast<std::int64_t>(std::floor(a / l)); i * l < a + w; ++i) cells.push_back({level, {i}});
    }
    return dyadic_content(make_cube_union(DyadicLattice::unit(1), cells), beta);
  };
  const double c8 = snapped(8), c10 = snapped(10);
  CHECK(c8 >= 0.25);
  CHECK(c8 <= 1.5);
  CHECK(std::abs(c10 / c8 - 1.0) <= 0.15);
}

TEST_CASE("regularization constants follow the balance equation") {
  for (int d : {1, 2}) {
    for (double beta : {0.3, 0.63, 0.9}) {
      const double c = regularization_c(d, beta);
      CHECK(std::ldexp(1.0, d) * std::pow(4.0, beta) == doctest::Approx(omega(d) / (2 * std::pow(c, d - beta))));
      CHECK(regularization_c_prime(d, beta) == doctest::Approx(std::ldexp(1.0, d) * std::pow(4.0, beta)));
    }
  }
  CHECK(omega(2.0) == doctest::Approx(std::numbers::pi));
  CHECK(omega(1.0) == doctest::Approx(2.0));
}

TEST_CASE("regularized cover postconditions") {
  std::mt19937_64 rng(4);
  CHECK(regularized_cover({}, 0.5).cubes->empty());
  CHECK_THROWS_AS(regularized_cover({{{0.5}, 0.1}}, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(regularized_cover({{{0.5}, -0.1}}, 0.5), std::invalid_argument);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 2;
    const double beta = d == 1 ? 0.6 : 1.3;
    auto f = random_balls(rng, d, trial < 4 ? 1 : 40, 0.01, 0.15);
    auto cov = regularized_cover(f, beta);
    CHECK(cover_contains_balls(*cov.cubes, f, rng));
    REQUIRE(cov.witnesses.size() == f.size());
    for (const auto& w : cov.witnesses) CHECK(w.ratio >= cov.c);
    CHECK(cov.sum <= cov.initial_sum + 1e-12);
    CHECK(cov.max_replacement <= (std::size_t{1} << d));
    CHECK(cov.content_inner > 0.0);
    worst = std::max(worst, cov.sum / cov.content_inner);
  }
  MESSAGE("sum l^beta / inner content, worst: " << worst);
  CHECK(worst <= 4.0);
}

TEST_CASE("ball cover") {
  std::mt19937_64 rng(5);
  CHECK(ball_cover({}, 0.5).balls.empty());
  Ball one{{0.3, 0.6}, 0.05};
  auto c1 = ball_cover({one}, 1.2);
  bool inside = false;
  for (const auto& b : c1.balls) inside = inside || ball_inside(one, b);
  CHECK(inside);
  BallFamily tangent{{{0.3, 0.5}, 0.1}, {{0.5, 0.5}, 0.1}};
  auto c2 = ball_cover(tangent, 1.2);
  CHECK(c2.balls.size() <= 2 * 4);
  for (std::size_t i = 0; i < tangent.size(); ++i) CHECK(ball_inside(tangent[i], c2.balls[c2.witnesses[i].element]));
  for (int trial = 0; trial < 10; ++trial) {
    auto f = random_balls(rng, 2, 30, 0.01, 0.1);
    auto c = ball_cover(f, 1.5);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(ball_inside(f[i], c.balls[c.witnesses[i].element]));
    CHECK(c.sum <= 100.0 * spherical_content_upper(f, 1.5));
  }
}

TEST_CASE("spherical content upper bounds") {
  std::mt19937_64 rng(6);
  CHECK(spherical_content_upper(BallFamily{}, 0.5) == 0.0);
  Ball b{{0.2, 0.1}, 0.3};
  CHECK(spherical_content_upper({b}, 1.4) == doctest::Approx(omega(1.4) * std::pow(0.3, 1.4)));
  // Small balls packed inside a larger one.
  BallFamily pack;
  for (int i = -3; i <= 3; ++i)
    for (int j = -3; j <= 3; ++j) pack.push_back({{0.5 + 0.05 * i, 0.5 + 0.05 * j}, 0.03});
  const double cpack = spherical_content_upper(pack, 1.0) / (omega(1.0) * std::pow(0.2, 1.0));
  MESSAGE("packing constant: " << cpack);
  CHECK(cpack <= 2.0);
  // Equivalence band with the dyadic content.
  for (int i = 0; i < 100; ++i) {
    const int d = 1 + i % 2;
    auto e = random_union(rng, d, 6, 1 + i % 7);
    const double beta = d == 1 ? 0.5 : 1.2;
    const double s = spherical_content_upper(e, beta), c = dyadic_content(e, beta);
    CHECK(s <= omega(beta) * std::pow(std::sqrt(static_cast<double>(d)) / 2, beta) * c * (1 + 1e-12));
    CHECK(c <= std::ldexp(1.0, d) * std::pow(4.0, beta) / omega(beta) * s);
  }
}

TEST_CASE("choquet integral") {
  std::mt19937_64 rng(7);
  auto lat = DyadicLattice::unit(2);
  for (int i = 0; i < 20; ++i) {
    auto e = random_union(rng, 2, 5, 6);
    auto f = indicator(e, 5);
    CHECK(choquet_integral(f, 1.1) == doctest::Approx(dyadic_content(e, 1.1)).epsilon(1e-14));
  }
  auto q1 = make_cube_union(lat, {{2, {0, 0}}}), q2 = make_cube_union(lat, {{3, {6, 5}}});
  auto f = indicator(q1, 4);
  auto g = indicator(q2, 4);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = 2 * f.values[i] + g.values[i];
  const double beta = 0.9;
  CHECK(choquet_integral(f, beta) ==
        doctest::Approx(dyadic_content(unite(q1, q2), beta) + dyadic_content(q1, beta)).epsilon(1e-14));

  // Homogeneity and monotonicity on a random function.
  CellFunction h{lat, 5, std::vector<double>(1024)};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : h.values) v = u(rng) * u(rng);
  const double base = choquet_integral(h, 1.2, 256);
  CellFunction h3 = h, hbig = h;
  for (auto& v : h3.values) v *= 3.0;
  for (auto& v : hbig.values) v += 0.1 * u(rng);
  CHECK(choquet_integral(h3, 1.2, 256) == doctest::Approx(3 * base).epsilon(1e-3));
  CHECK(choquet_integral(hbig, 1.2, 256) >= base);
  CHECK(choquet_integral(h, 1.5, 256) <= base);
  // Refining thresholds converges from above.
  CHECK(choquet_integral(h, 1.2, 512) <= choquet_integral(h, 1.2, 16) + 1e-12);

  CellFunction bad = h;
  bad.values[3] = -1.0;
  CHECK_THROWS_AS(choquet_integral(bad, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(choquet_integral(h, 1.0, std::vector<double>{0.0, 0.5}), std::invalid_argument);
  CellFunction zero{lat, 3, std::vector<double>(64, 0.0)};
  CHECK(choquet_integral(zero, 1.0) == 0.0);
}
