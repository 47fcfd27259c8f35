#pragma once

// Heat semigroup e^{t Laplacian} acting on grid measures.

#include <span>
#include <vector>

#include "dss/field.hpp"
#include "dss/grid_measure.hpp"

namespace dss {

inline constexpr double kDefaultTailEps = 1e-12;

/// Geometrically spaced heat times covering [t_min, t_max].
class TGrid {
 public:
  TGrid(double t_min, double t_max, int nodes_per_decade);

  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  int nodes_per_decade() const { return per_decade_; }
  const std::vector<double>& nodes() const { return nodes_; }
  /// Ratio between consecutive nodes.
  double ratio() const;

  /// (h/4)^2 .. (4 diam)^2, 32 nodes per decade.
  static TGrid for_measure(const GridMeasure& mu);

 private:
  double t_min_;
  double t_max_;
  int per_decade_;
  std::vector<double> nodes_;
};

/// Kernel truncation radius 8 sqrt(t ln(1/eps)).
double truncation_radius(double t, double eps = kDefaultTailEps);

double heat_kernel(int dim, double t, double r2);

/// e^{t Laplacian} mu at each point, kernel truncated at truncation_radius.
std::vector<double> heat_extension(const GridMeasure& mu, double t,
                                   std::span<const Point> points);
double heat_extension_at(const GridMeasure& mu, double t,
                         std::span<const double> x);

/// Heat extension sampled on a regular grid (separable evaluation).
SampledField heat_on_grid(const GridMeasure& mu, double t, const GridSpec& grid);

/// Grid spacing sqrt(t)/2 over supp(mu) padded by the truncation radius:
/// the Riemann sum over this grid reproduces the integral of the field to
/// better than 1e-30 relative (Poisson summation).
GridSpec conservation_grid(const GridMeasure& mu, double t);

struct HeatSup {
  double value = 0.0;
  double argmax_t = 0.0;
};

/// sup_t t^{gamma/2} |e^{t Laplacian} mu(x)| over the t-grid, refined once by
/// golden-section search around the best node. A lower bound for the true
/// supremum.
std::vector<HeatSup> heat_sup_field(const GridMeasure& mu, double gamma,
                                    std::span<const Point> points,
                                    const TGrid& tg);
HeatSup heat_sup_at(const GridMeasure& mu, double gamma,
                    std::span<const double> x, const TGrid& tg);

/// Values of e^{t Laplacian} mu at the points for every t-node, laid out as
/// [point][node]; used for CSV export.
struct HeatField {
  std::vector<Point> points;
  std::vector<double> t_nodes;
  std::vector<double> values;
};
HeatField heat_field(const GridMeasure& mu, std::span<const Point> points,
                     const TGrid& tg);

}  // namespace dss
