#pragma once

// Fractional maximal functions (dyadic, truncated dyadic, grand, anti-local),
// smoothed Littlewood-Paley projectors and log-log decay fits.
//
// Scale convention: the grand and anti-local functions dilate profiles by
// s = sqrt(t) for heat times t of the supplied TGrid, and weight by s^gamma.
// With gamma = d - beta this matches the heat-time weight t^{(d-beta)/2}.

#include <optional>
#include <string>
#include <vector>

#include "dss/field.hpp"
#include "dss/grid_measure.hpp"
#include "dss/heat.hpp"
#include "dss/test_family.hpp"

namespace dss {

struct MaximalField {
  std::vector<Point> points;
  std::vector<double> values;
  /// Attainment per point: profile name (empty for dyadic variants), the
  /// dilation s (or cube side for dyadic variants) and the dyadic level.
  std::vector<std::string> profile;
  std::vector<double> scale;
  std::vector<int> level;
  std::optional<double> truncation;  // l for truncated, rho for anti-local
  double gamma = 0.0;
};

/// max over k_min <= k <= k_max of |mu(Q_k(x))| / l(Q_k)^{d - gamma}.
MaximalField dyadic_maximal(const GridMeasure& mu, const DyadicLattice& lat, double gamma,
                            int k_min, int k_max, std::span<const Point> points);
/// Same over cubes with side >= l, from level k_min.
MaximalField truncated_dyadic_maximal(const GridMeasure& mu, const DyadicLattice& lat,
                                      double gamma, double l, std::span<const Point> points,
                                      int k_min = 0);

/// max over profiles and s = sqrt(t), t in tg, of s^gamma |mu * Phi_s(x)|,
/// Phi_s(x) = s^{-d} Phi(x/s).
MaximalField grand_maximal(const GridMeasure& mu, const TestFamily& fam, double gamma,
                           std::span<const Point> points, const TGrid& tg);
/// Grand maximal function with gamma = alpha over scales s >= rho; the scale
/// s = rho itself is included when it lies inside the grid range.
MaximalField anti_local_maximal(const GridMeasure& mu, const TestFamily& fam, double alpha,
                                double rho, std::span<const Point> points, const TGrid& tg);

struct LpField {
  SampledField field;
  bool above_nyquist = false;  // 2^k beyond the Nyquist frequency of the grid
};

struct LpValues {
  std::vector<double> values;
  bool above_nyquist = false;
};

/// f * Xi_k with Xi_k(x) = 2^{kd} Xi(2^k x).
LpField lp_lowpass(const GridMeasure& mu, int k, const GridSpec& out);
LpField lp_lowpass(const SampledField& f, int k, const GridSpec& out);
LpValues lp_lowpass(const GridMeasure& mu, int k, std::span<const Point> points);
/// lowpass(k) - lowpass(k - 1).
LpField lp_band(const GridMeasure& mu, int k, const GridSpec& out);
LpField lp_band(const SampledField& f, int k, const GridSpec& out);
LpValues lp_band(const GridMeasure& mu, int k, std::span<const Point> points);
/// f * Xi~_k with Xi~_k(x) = 2^{kd} Xi~(2^k x); acts as the identity on band k.
LpField lp_band_tilde(const SampledField& f, int k, const GridSpec& out);

struct DecayFit {
  double exponent = 0.0;  // slope of log value against log radius
  double residual = 0.0;  // relative residual SS_res / SS_tot (= 1 - R^2)
  double rms = 0.0;       // raw RMS in natural-log units
  double r_lo = 0.0;
  double r_hi = 0.0;
  std::size_t bins = 0;
  bool valid = false;  // false when fewer than 8 bins carry nonzero values
};

/// Fit over geometric shells of ratio sqrt(2) between r_lo and r_hi; each
/// shell contributes its largest |value| at the radius where it occurs.
DecayFit decay_fit(std::span<const Point> points, std::span<const double> values,
                   const Point& center, double r_lo, double r_hi);
DecayFit decay_fit(const MaximalField& m, const Point& center, double r_lo, double r_hi);
DecayFit decay_fit(const SampledField& f, const Point& center, double r_lo, double r_hi);

}  // namespace dss
