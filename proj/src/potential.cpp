#include "dss/potential.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace dss {

double riesz_normalization(int dim, double alpha) {
  return std::pow(std::numbers::pi, 0.5 * dim) * std::pow(2.0, alpha) *
         std::tgamma(alpha / 2) / std::tgamma((dim - alpha) / 2);
}

RieszConfig RieszConfig::make(int dim, double alpha) {
  if (!(alpha > 0.0) || !(alpha < dim))
    throw std::invalid_argument("RieszConfig: alpha must lie in (0, d)");
  RieszConfig c;
  c.dim = dim;
  c.alpha = alpha;
  c.gamma = riesz_normalization(dim, alpha);
  return c;
}

namespace {

void check_config(const RieszConfig& cfg, const GridMeasure& mu) {
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < cfg.dim))
    throw std::invalid_argument("riesz: alpha must lie in (0, d)");
  if (mu.dim() != cfg.dim) throw std::invalid_argument("riesz: dimension mismatch");
}

double kernel_sum(const RieszConfig& cfg, const GridMeasure& mu, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double r = distance(x, mu.position(i));
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    s += mu.weight(i) * std::pow(r, cfg.alpha - cfg.dim);
  }
  return s / cfg.gamma;
}

}  // namespace

std::vector<double> riesz_kernel(const RieszConfig& cfg, const GridMeasure& mu,
                                 std::span<const Point> points) {
  check_config(cfg, mu);
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = kernel_sum(cfg, mu, points[i]);
  return out;
}

SampledField riesz_kernel(const RieszConfig& cfg, const GridMeasure& mu, const GridSpec& grid) {
  check_config(cfg, mu);
  SampledField f{grid, std::vector<double>(grid.size())};
  for (std::size_t i = 0; i < grid.size(); ++i) f.values[i] = kernel_sum(cfg, mu, grid.point(i));
  return f;
}

RieszHeatResult riesz_heat(const RieszConfig& cfg, const GridMeasure& mu,
                           std::span<const Point> points) {
  check_config(cfg, mu);
  RieszHeatResult res;
  res.values.assign(points.size(), 0.0);
  res.error_estimate.assign(points.size(), 0.0);
  if (mu.empty()) return res;

  const int d = cfg.dim;
  const double a2 = cfg.alpha / 2;
  const double p = (cfg.alpha - d) / 2;  // negative
  const double norm = std::pow(4 * std::numbers::pi, -0.5 * d);
  const double g_half = std::tgamma(a2);
  const std::size_t n = mu.size();
  std::vector<double> c(n);

  for (std::size_t ip = 0; ip < points.size(); ++ip) {
    const auto& x = points[ip];
    double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0, scale = 0.0;
    bool hit = false;
    for (std::size_t j = 0; j < n; ++j) {
      const double r = distance(x, mu.position(j));
      if (r == 0.0) hit = true;
      c[j] = r * r / 4;
      rmin = std::min(rmin, r);
      rmax = std::max(rmax, r);
      if (r > 0.0) scale += std::abs(mu.weight(j)) * std::pow(r, cfg.alpha - d);
    }
    if (hit) {
      res.values[ip] = std::numeric_limits<double>::infinity();
      continue;
    }
    const TGrid tg = cfg.tgrid ? *cfg.tgrid : TGrid((rmin / 8) * (rmin / 8), (8 * rmax) * (8 * rmax), 32);
    const auto& t = tg.nodes();
    const std::size_t m = t.size();
    const double hs = std::log(tg.ratio());

    // Integrand in s = ln t: t^{alpha/2} e^{t}mu(x), and its s-derivative.
    auto f = [&](double tt, double* deriv) {
      double v = 0.0, dv = 0.0;
      const double pre = std::pow(tt, a2) * std::pow(tt, -0.5 * d) * norm;
      for (std::size_t j = 0; j < n; ++j) {
        const double e = mu.weight(j) * std::exp(-c[j] / tt);
        v += e;
        dv += e * (p + c[j] / tt);
      }
      if (deriv) *deriv = pre * dv;
      return pre * v;
    };
    std::vector<double> fv(m);
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      fv[i] = f(t[i], i == 0 ? &d0 : (i + 1 == m ? &d1 : nullptr));

    auto trap = [&](std::size_t last, std::size_t stride, double dl, double dr) {
      double s = 0.0;
      for (std::size_t i = 0; i <= last; i += stride) s += fv[i];
      s -= 0.5 * (fv[0] + fv[last]);
      const double h = hs * static_cast<double>(stride);
      return h * s - h * h / 12 * (dr - dl);
    };
    const double mid = trap(m - 1, 1, d0, d1);
    double err = 0.0;
    if (m >= 5) {
      const std::size_t last = (m - 1) - ((m - 1) % 2);
      double dl = d0, dr = 0.0;
      f(t[last], &dr);
      err = std::abs(trap(last, 1, dl, dr) - trap(last, 2, dl, dr));
    }

    double lower = 0.0, upper = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double cp = std::pow(c[j], p) * mu.weight(j) * norm;
      lower += cp * boost::math::tgamma(-p, c[j] / tg.t_min());
      upper += cp * boost::math::tgamma_lower(-p, c[j] / tg.t_max());
    }
    res.values[ip] = (lower + mid + upper) / g_half;
    res.error_estimate[ip] = err / g_half;
    if (err / g_half > cfg.tolerance * scale / cfg.gamma) res.flagged = true;
  }
  return res;
}

double lorentz_norm(std::vector<double> values, double cell_volume, double p) {
  if (!(p > 1.0)) throw std::invalid_argument("lorentz_norm: p must exceed 1");
  for (auto& v : values) v = std::abs(v);
  std::sort(values.begin(), values.end(), std::greater<>());
  const double q = 1.0 / p;
  double s = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < values.size() && values[i] > 0.0; ++i) {
    const double next = std::pow(static_cast<double>(i + 1) * cell_volume, q);
    s += values[i] * (next - prev);
    prev = next;
  }
  return p * s;
}

double lorentz_norm(const SampledField& f, double p) {
  return lorentz_norm(f.values, f.grid.cell_volume(), p);
}

double lp_norm(const SampledField& f, double p) {
  double s = 0.0;
  for (double v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * f.grid.cell_volume(), 1.0 / p);
}

BesovResult heat_besov_functional(const AtomCandidate& a, double alpha, const BesovOptions& opt) {
  const int d = a.a.dim();
  if (!(alpha > 0.0) || !(alpha < d))
    throw std::invalid_argument("heat_besov_functional: alpha must lie in (0, d)");
  BesovResult res;
  res.p = d / (d - alpha);
  const double l = a.Q.side;
  const double h = a.a.spacing();
  res.t_min = opt.t_min.value_or((h / 2) * (h / 2));
  res.t_max = opt.t_max.value_or((8 * l) * (8 * l));
  if (a.a.empty()) return res;

  const TGrid tg(res.t_min, res.t_max, opt.nodes_per_decade);
  const auto& t = tg.nodes();
  res.nodes = t.size();
  const Box box = a.a.support_box();
  const Point anchor = a.Q.center();
  std::vector<double> F(t.size()), N(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double rt = std::sqrt(t[i]);
    const auto grid = GridSpec::covering(box, opt.pad_factor * rt, opt.spacing_factor * rt, anchor);
    N[i] = lorentz_norm(heat_on_grid(a.a, t[i], grid), res.p);
    F[i] = std::pow(t[i], alpha / 2) * N[i];
  }

  const double split = std::log(l * l);
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double s0 = std::log(t[i]), s1 = std::log(t[i + 1]);
    if (s1 <= split) {
      res.small_t += 0.5 * (s1 - s0) * (F[i] + F[i + 1]);
    } else if (s0 >= split) {
      res.large_t += 0.5 * (s1 - s0) * (F[i] + F[i + 1]);
    } else {
      const double w = (split - s0) / (s1 - s0);
      const double fm = F[i] + w * (F[i + 1] - F[i]);
      res.small_t += 0.5 * (split - s0) * (F[i] + fm);
      res.large_t += 0.5 * (s1 - split) * (fm + F[i + 1]);
    }
  }

  const std::size_t m = t.size();
  if (m >= 2 && N[m - 1] > 0.0 && N[m - 2] > 0.0) {
    res.tail_exponent = -std::log(N[m - 1] / N[m - 2]) / std::log(t[m - 1] / t[m - 2]);
    if (res.tail_exponent > alpha / 2 + 1e-3) {
      res.upper_tail = F[m - 1] / (res.tail_exponent - alpha / 2);
    } else {
      res.upper_tail = std::numeric_limits<double>::infinity();
      res.flagged = true;
    }
  }
  res.large_t += res.upper_tail;
  res.value = res.small_t + res.large_t;
  if (!std::isfinite(res.value)) res.flagged = true;
  return res;
}

double trace_integral(const SampledField& f, const GridMeasure& nu) {
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu.weight(i) < 0.0) throw std::invalid_argument("trace_integral: nu must be non-negative");
    s += std::abs(f.interpolate(nu.position(i))) * nu.weight(i);
  }
  return s;
}

double trace_integral(std::span<const double> values_at_nu, const GridMeasure& nu) {
  if (values_at_nu.size() != nu.size())
    throw std::invalid_argument("trace_integral: one value per point of nu expected");
  double s = 0.0;
  for (std::size_t i = 0; i < nu.size(); ++i) {
    if (nu.weight(i) < 0.0) throw std::invalid_argument("trace_integral: nu must be non-negative");
    s += std::abs(values_at_nu[i]) * nu.weight(i);
  }
  return s;
}

}  // namespace dss
