#pragma once

// Lower Hausdorff dimension at desk scale: greedy mass capture under a
// content budget, modulus curves, a per-level Frostman slope estimate, the
// Choquet test of the truncated dyadic maximal function, and the dimension
// check for sums of atoms.

#include <optional>
#include <vector>

#include "dss/atoms.hpp"
#include "dss/content.hpp"
#include "dss/grid_measure.hpp"
#include "dss/heat.hpp"

namespace dss {

struct CaptureResult {
  CubeUnion cubes;
  double captured = 0.0;  // |mu| of the selected cubes
  double cost = 0.0;      // sum l(Q)^beta
};

/// Greedy selection among dyadic cubes of levels 0..J by |mu|(Q)/l(Q)^beta,
/// skipping cubes nested in (or containing) selected ones, within cost delta.
CaptureResult greedy_mass_capture(const GridMeasure& mu, const DyadicLattice& lat, double beta,
                                  double delta, int depth);

struct ModulusCurve {
  double beta = 0.0;
  std::vector<double> deltas;    // decreasing: 2^-1 .. 2^-12
  std::vector<double> captured;  // best capture within each budget
};

/// Budgets 2^-1..2^-n; each value is the best greedy capture over budgets
/// up to that one, which makes the curve nondecreasing in delta.
ModulusCurve modulus_curve(const GridMeasure& mu, const DyadicLattice& lat, double beta, int depth,
                           int n_deltas = 12);

/// Smallest distance between two masses (infinity for fewer than two).
double min_separation(const GridMeasure& mu);
/// floor(log2(l0 / min separation)), at least 1.
int resolvable_depth(const GridMeasure& mu, const DyadicLattice& lat);

struct DimensionReport {
  std::vector<double> betas;
  std::vector<ModulusCurve> curves;
  /// Least-squares slope in k of log2 max_Q |mu|(Q) / l(Q)^beta over levels
  /// k = 0..depth, one per beta.
  std::vector<double> slopes;
  std::vector<std::vector<double>> level_ratios;  // [beta][k] log2 of the max ratio
  int depth = 0;
  double tolerance = 0.02;
  double total_variation = 0.0;
  /// Largest beta whose slope is <= 0; 0 when none.
  double beta_hat = 0.0;
  /// Largest beta whose modulus curve at the smallest budget is at most
  /// tolerance |mu|; reported for comparison.
  double beta_hat_modulus = 0.0;
};

std::vector<double> default_beta_grid(int dim, double step = 0.01);

DimensionReport lower_dim_estimate(const GridMeasure& mu, const DyadicLattice& lat,
                                   const std::vector<double>& betas,
                                   std::optional<int> depth = std::nullopt, double tolerance = 0.02);

/// Choquet integral over the base cube of truncated_dyadic_maximal(mu,
/// d - beta, l), sampled exactly on cells of the finest admissible level.
double choquet_maximal_test(const GridMeasure& mu, const DyadicLattice& lat, double beta, double l);

/// Partial sums of sum_k 2^-k content({f >= 2^-k}) from the first nonempty
/// level set up to k = k_max.
std::vector<double> level_sum_partials(const CellFunction& f, double beta, int k_max = 40);

struct AtomSumOptions {
  int cell_level = 8;         // sample cells of the base cube
  int nodes_per_decade = 8;   // grand maximal t-grid
  double bound = 0.0;         // C; 0 means report only
  double dimension_slack = 0.1;
};

struct AtomSumReport {
  double beta = 0.0;
  double lambda_sum = 0.0;
  double choquet = 0.0;  // integral of M_{F, d - beta} over the base cube
  double ratio = 0.0;    // choquet / lambda_sum
  bool bound_ok = true;
  DimensionReport dimension;
  bool dimension_ok = true;
  std::vector<double> level_sums;
  bool passed() const { return bound_ok && dimension_ok; }
};

/// Check for a decomposition certified at beta: the Choquet
/// integral of the grand maximal function of the sum against lambda_sum, and
/// the estimated dimension of the sum.
AtomSumReport atom_sum_dimension_check(const AtomicDecomposition& dec, double beta,
                                       const DyadicLattice& lat, const AtomSumOptions& opt = {});

}  // namespace dss
