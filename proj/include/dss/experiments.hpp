#pragma once

// Desk-check experiments shared by the `verify` subcommands and the
// acceptance suite. Each returns tables (written as CSV) and a JSON summary
// with the constants it used or measured.

#include <string>
#include <utility>
#include <vector>

#include "dss/atoms.hpp"
#include "dss/io.hpp"

namespace dss {

struct Outcome {
  std::string name;
  bool passed = true;
  std::vector<std::string> failures;  // names of the violated checks
  Json summary = Json::object();
  std::vector<std::pair<std::string, Table>> tables;  // file stem, table

  void require(bool ok, const std::string& check);
};

// Standard examples.
/// +-1/n on the two halves of [0, 1], n cells.
AtomCandidate make_linf_atom(int n);
/// (delta_0 - delta_{1/2}) / 2 on the grid of spacing 1/64.
AtomCandidate make_dirac_difference(double beta);
const std::vector<Point>& square_loop();
const std::vector<Point>& triangle_loop();
std::vector<Point> circle_loop(int sides);

/// Radial measure with density |x - center|^{s - d}, exact cell integrals on
/// cells of side h tiling [-R, R] around the center (d = 1), or cell-center
/// values times h^d (d = 2). nu(B(center, r)) is proportional to r^s.
GridMeasure power_density_measure(int dim, double s, double radius, double spacing);
/// Length measure on the diagonal {x = y}, |x| <= half_extent, sampled at
/// (i + 1/3) h so that no sample sits on a dyadic grid line.
GridMeasure diagonal_measure(double half_extent, double spacing);

struct Thm13Params {
  double alpha = 0.5;
  int scales = 7;  // dilations 2^0 .. 2^-(scales-1)
  int cantor_depth = 6;
  double invariance_tol = 0.02;
  double kinds_ratio = 10.0;
};
Outcome verify_thm13(const Thm13Params& p = {});

struct TraceParams {
  int cantor_depth = 8;
  int scales = 5;             // 2^0 .. 2^-(scales-1)
  double alpha = 0.7;         // thm14 only; thm15 uses d - beta
  double nu_radius = 8.0;
  int nu_cells_per_finest = 16;  // nu cells across the finest atom
  int nodes_per_decade = 8;
  double spread = 2.0;
};
Outcome verify_thm14(const TraceParams& p = {});
Outcome verify_thm15(const TraceParams& p = {});

struct Cor16Params {
  double spacing = 1.0 / 128;     // loop discretization, relative to the loop size
  double nu_spacing = 1.0 / 64;   // relative to the smallest loop
  int nodes_per_decade = 8;
  double C = 0.25;
  double spread = 2.0;  // per component, across loop scales 1, 1/4, 1/16
};
Outcome verify_cor16(const Cor16Params& p = {});

struct Thm18Params {
  int depth = 6;
  double bound = 0.01;
  int cell_level = 8;
};
Outcome verify_thm18(const Thm18Params& p = {});

struct Thm19Params {
  int cantor_depth = 10;
  double lebesgue_tol = 0.05;
  double dirac_tol = 0.05;
  double cantor_tol = 0.05;
};
Outcome verify_thm19(const Thm19Params& p = {});

}  // namespace dss
