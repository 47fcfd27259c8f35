#pragma once

// Hausdorff contents (exact dyadic, spherical upper bounds), Choquet
// integrals against the dyadic content, and the covering regularization of
// ball families.

#include <cstddef>
#include <optional>
#include <vector>

#include "dss/grid_measure.hpp"

namespace dss {

/// Reduced finite union of dyadic cubes: sorted, no cube inside another.
struct CubeUnion {
  DyadicLattice lattice;
  std::vector<DyadicCube> cubes;

  bool empty() const { return cubes.empty(); }
  std::size_t size() const { return cubes.size(); }
  double volume() const;
};

CubeUnion make_cube_union(const DyadicLattice& lat, std::vector<DyadicCube> cubes);
CubeUnion unite(const CubeUnion& a, const CubeUnion& b);
/// True when every cube of `inner` lies inside some cube of `outer`.
bool covers(const CubeUnion& outer, const CubeUnion& inner);

/// omega_beta = pi^{beta/2} / Gamma(beta/2 + 1).
double omega(double beta);

/// Exact dyadic content: bottom-up min(l(Q)^beta, sum over children) on the
/// smallest cube forest containing E.
double dyadic_content(const CubeUnion& e, double beta);
/// A cover attaining dyadic_content.
CubeUnion optimal_dyadic_cover(const CubeUnion& e, double beta);

struct Ball {
  Point center;
  double radius = 0.0;
};
using BallFamily = std::vector<Ball>;

/// Cubes of the given level whose closure meets some closed ball (outer) or
/// that lie inside some ball (inner).
CubeUnion outer_cells(const BallFamily& f, const DyadicLattice& lat, int level);
CubeUnion inner_cells(const BallFamily& f, const DyadicLattice& lat, int level);

struct Witness {
  std::size_t element = 0;  // index into the cover's cubes or balls
  double ratio = 0.0;       // l / r for cubes, R / r for balls
};

struct ContentCover {
  double beta = 0.0;
  std::optional<CubeUnion> cubes;
  BallFamily balls;
  double sum = 0.0;  // sum l^beta over cubes, or sum omega_beta R^beta over balls
  std::vector<Witness> witnesses;
  // Regularization diagnostics.
  double c = 0.0;
  double c_prime = 0.0;
  int level = 0;                // discretization level of the initial cover
  std::size_t swaps = 0;
  std::size_t max_replacement = 0;  // largest number of cubes added in one swap
  double initial_sum = 0.0;
  double content_outer = 0.0;   // dyadic content of the outer cells
  double content_inner = 0.0;   // dyadic content of the inner cells (<= true content)
};

/// c with 2^d 4^beta = omega_d / (2 c^{d - beta}); c' = omega_d / (2 c^{d - beta}).
double regularization_c(int dim, double beta);
double regularization_c_prime(int dim, double beta);

/// Dyadic cover of the union of the balls in which every ball meets a cube of
/// side >= c r. Throws unless 0 < beta < d.
ContentCover regularized_cover(const BallFamily& f, double beta,
                               const DyadicLattice& lat = DyadicLattice{});
/// Balls circumscribing the regularized witness cubes, inflated so that each
/// input ball lies inside its witness; cubes witnessing no ball are dropped.
ContentCover ball_cover(const BallFamily& f, double beta, const DyadicLattice& lat = DyadicLattice{});

/// Upper bounds for the spherical content: the least of the self cover, the
/// converted dyadic cover and one enclosing ball.
double spherical_content_upper(const BallFamily& f, double beta);
double spherical_content_upper(const CubeUnion& e, double beta);

/// Non-negative function constant on the level-J cells of the base cube
/// [corner, corner + side)^d, row-major with the last axis fastest.
struct CellFunction {
  DyadicLattice lattice;
  int level = 0;
  std::vector<double> values;

  std::size_t cells_per_axis() const { return std::size_t{1} << level; }
  std::size_t cell_count() const;
  DyadicCube cell(std::size_t flat) const;
  std::vector<Point> centers() const;
};

CellFunction indicator(const CubeUnion& e, int level);

/// {f > t} as a union of cells.
CubeUnion level_set(const CellFunction& f, double t);

/// 0 followed by n geometric levels from the smallest positive value to the
/// maximum.
std::vector<double> default_thresholds(const CellFunction& f, int n = 64);

/// Layer cake sum_j (t_{j+1} - t_j) content({f > t_j}); thresholds must be
/// increasing from 0. Upper Riemann sum of the Choquet integral.
double choquet_integral(const CellFunction& f, double beta, const std::vector<double>& thresholds);
double choquet_integral(const CellFunction& f, double beta, int levels = 64);

}  // namespace dss
