#pragma once

// Finite families of smooth test profiles standing in for the Schwartz
// family F: Gaussian, the bump rho, Psi(x) = 2 (4 pi)^d rho(4 pi x), and the
// Littlewood-Paley profiles Xi (low-pass) and Xi~ (band).
//
// Fourier convention: f^(xi) = int f(x) exp(-2 pi i x.xi) dx.

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dss {

/// 1D symbol: 1 on [0, 1/2], 0 beyond 1, smooth monotone in between.
double smooth_step_symbol(double u);

/// rho(x) = c exp(-1/(1 - |x|^2)) on |x| < 1 with int rho = 1.
double bump_rho(std::span<const double> x);
double bump_rho_constant(int dim);
double rho_hat(double xi_norm, int dim);
double psi(std::span<const double> x);
double psi_hat(double xi_norm, int dim);

/// Xi(x) = prod_i Xi1(x_i), Xi1^ = smooth_step_symbol(|xi|).
double xi1(double x);
double xi1_derivative(double x);
double xi_lowpass(std::span<const double> x);
double xi_lowpass_hat(std::span<const double> xi);
/// Xi~(x) = 2^d Xi(2x) - 4^-d Xi(x/4): symbol 1 on 1/4 <= |xi|_inf <= 1,
/// supported in 1/8 <= |xi|_inf <= 2.
double xi_band(std::span<const double> x);
double xi_band_hat(std::span<const double> xi);

struct Profile {
  std::string name;
  std::function<double(std::span<const double>)> raw;
  double factor = 1.0;        // normalized profile = factor * raw
  double raw_seminorm = 0.0;  // max_{|k|<=nu_der} sup (1+|x|)^nu_wt |d^k raw|
  double seminorm = 0.0;      // factor * raw_seminorm
  double window = 1.0;        // |x|_inf beyond which the profile is treated as 0
  bool compact_support = false;
  bool fourier_annulus = false;
  double annulus_lo = 0.0;
  double annulus_hi = 0.0;

  double operator()(std::span<const double> x) const { return factor * raw(x); }
};

struct TestFamily {
  int dim = 1;
  int nu_der = 4;
  int nu_wt = 4;
  std::vector<Profile> profiles;
  std::vector<std::string> names() const;
};

/// {gaussian, rho, psi, xi, xi_band}, each scaled to seminorm budget 1.
const TestFamily& standard_family(int dim);
/// The standard family restricted to the named profiles.
TestFamily subfamily(const TestFamily& fam, const std::vector<std::string>& names);

/// Finite-difference estimate of the seminorm budget on a cube grid.
double seminorm_budget(const std::function<double(std::span<const double>)>& f, int dim,
                       double half_width, double step, int nu_der, int nu_wt);

}  // namespace dss
