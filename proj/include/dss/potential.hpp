#pragma once

// Riesz potentials (kernel and heat routes), Lorentz L^{p,1} norms, the
// heat-Besov functional of an atom, and trace integrals.

#include <optional>
#include <vector>

#include "dss/atoms.hpp"
#include "dss/field.hpp"
#include "dss/heat.hpp"

namespace dss {

/// pi^{d/2} 2^alpha Gamma(alpha/2) / Gamma((d - alpha)/2).
double riesz_normalization(int dim, double alpha);

struct RieszConfig {
  int dim = 1;
  double alpha = 0.5;
  double gamma = 0.0;
  /// Quadrature grid for the heat route; when empty each point gets
  /// t in [(r_min/8)^2, (8 r_max)^2] from its distances to the support.
  std::optional<TGrid> tgrid;
  double tolerance = 1e-4;  // relative quadrature error above which results are flagged

  static RieszConfig make(int dim, double alpha);
};

/// (1/gamma) sum_y w(y) |x - y|^{alpha - d}; +infinity on a mass point.
std::vector<double> riesz_kernel(const RieszConfig& cfg, const GridMeasure& mu,
                                 std::span<const Point> points);
SampledField riesz_kernel(const RieszConfig& cfg, const GridMeasure& mu, const GridSpec& grid);

struct RieszHeatResult {
  std::vector<double> values;
  std::vector<double> error_estimate;  // |I_h - I_{2h}| per point
  bool flagged = false;
};

/// (1/Gamma(alpha/2)) int t^{alpha/2-1} e^{t}mu dt: trapezoid in log t with an
/// endpoint derivative correction, plus exact incomplete-gamma tails per mass.
RieszHeatResult riesz_heat(const RieszConfig& cfg, const GridMeasure& mu,
                           std::span<const Point> points);

/// int_0^inf s^{1/p - 1} f*(s) ds for the step function with the given cell
/// volume; exact finite sum over sorted cells.
double lorentz_norm(std::vector<double> values, double cell_volume, double p);
double lorentz_norm(const SampledField& f, double p);
double lp_norm(const SampledField& f, double p);

struct BesovOptions {
  int nodes_per_decade = 16;
  double spacing_factor = 0.5;  // grid spacing = factor * sqrt(t)
  double pad_factor = 12.0;     // field window = supp + factor * sqrt(t)
  /// t range; defaults to (h/2)^2 .. (8 l(Q))^2.
  std::optional<double> t_min;
  std::optional<double> t_max;
};

struct BesovResult {
  double value = 0.0;
  double small_t = 0.0;  // t <= l(Q)^2
  double large_t = 0.0;  // t > l(Q)^2, including the tail beyond t_max
  double upper_tail = 0.0;
  double tail_exponent = 0.0;  // fitted decay of the norm near t_max
  double p = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t nodes = 0;
  bool flagged = false;
};

/// int t^{alpha/2 - 1} ||e^{t}a||_{L^{d/(d-alpha),1}} dt from t_min (the grid
/// resolution) with a power-law tail beyond t_max. Fields are sampled on grids
/// of spacing proportional to sqrt(t) anchored at the center of Q, so the value
/// is invariant under mass-preserving dilation up to rounding.
BesovResult heat_besov_functional(const AtomCandidate& a, double alpha,
                                  const BesovOptions& opt = {});

/// sum_y |f(y)| nu({y}) with f interpolated at nu's points.
double trace_integral(const SampledField& f, const GridMeasure& nu);
/// Values already evaluated at nu's points, in nu's order.
double trace_integral(std::span<const double> values_at_nu, const GridMeasure& nu);

}  // namespace dss
