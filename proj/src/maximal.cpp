#include "dss/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace dss {

namespace {

MaximalField empty_field(std::span<const Point> points, double gamma) {
  MaximalField m;
  m.points.assign(points.begin(), points.end());
  m.values.assign(points.size(), 0.0);
  m.profile.assign(points.size(), std::string{});
  m.scale.assign(points.size(), 0.0);
  m.level.assign(points.size(), 0);
  m.gamma = gamma;
  return m;
}

void check_gamma(double gamma, int d, const char* who) {
  if (!(gamma >= 0.0) || gamma > d) throw std::invalid_argument(std::string(who) + ": gamma must lie in [0, d]");
}

// Dyadic maximal function over an explicit level range.
MaximalField dyadic_levels(const GridMeasure& mu, const DyadicLattice& lat, double gamma,
                           int k_min, int k_max, std::span<const Point> points) {
  MaximalField m = empty_field(points, gamma);
  const int d = lat.dim();
  for (std::size_t i = 0; i < points.size(); ++i) m.level[i] = k_min;
  for (int k = k_min; k <= k_max; ++k) {
    std::map<Index, double> cells;
    for (std::size_t j = 0; j < mu.size(); ++j) cells[cube_at(lat, k, mu.position(j)).index] += mu.weight(j);
    const double side = cube_side(lat, k);
    const double denom = std::pow(side, d - gamma);
    for (std::size_t i = 0; i < points.size(); ++i) {
      auto it = cells.find(cube_at(lat, k, points[i]).index);
      if (it == cells.end()) continue;
      const double v = std::abs(it->second) / denom;
      if (v > m.values[i]) {
        m.values[i] = v;
        m.scale[i] = side;
        m.level[i] = k;
      }
    }
  }
  return m;
}

// Grand maximal function over an explicit list of dilations.
MaximalField grand_over_scales(const GridMeasure& mu, const TestFamily& fam, double gamma,
                               std::span<const Point> points, const std::vector<double>& scales) {
  MaximalField m = empty_field(points, gamma);
  if (mu.empty()) return m;
  const int d = mu.dim();
  if (fam.dim != d) throw std::invalid_argument("grand_maximal: family dimension mismatch");
  const auto& first = mu.first_coords();
  std::vector<double> u(d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& x = points[i];
    for (const double s : scales) {
      const double weight = std::pow(s, gamma - d);
      for (const auto& p : fam.profiles) {
        const double R = p.window * s;
        const auto lo = std::lower_bound(first.begin(), first.end(), x[0] - R) - first.begin();
        const auto hi = std::upper_bound(first.begin(), first.end(), x[0] + R) - first.begin();
        double acc = 0.0;
        for (auto j = lo; j < hi; ++j) {
          const auto y = mu.position(static_cast<std::size_t>(j));
          bool inside = true;
          for (int c = 0; c < d; ++c) {
            u[c] = (x[c] - y[c]) / s;
            if (std::abs(u[c]) > p.window) inside = false;
          }
          if (inside) acc += mu.weight(static_cast<std::size_t>(j)) * p(u);
        }
        const double v = weight * std::abs(acc);
        if (v > m.values[i]) {
          m.values[i] = v;
          m.profile[i] = p.name;
          m.scale[i] = s;
        }
      }
    }
  }
  return m;
}

std::vector<double> dilations(const TGrid& tg) {
  std::vector<double> s;
  for (double t : tg.nodes()) s.push_back(std::sqrt(t));
  return s;
}

// Adds amp * sum_y w(y) prod_i Xi1(c (x_i - y_i)) over the grid.
void add_lowpass(const GridMeasure& mu, double c, double amp, const GridSpec& grid,
                 std::vector<double>& out) {
  const int d = grid.dim();
  if (d != mu.dim()) throw std::invalid_argument("lp: dimension mismatch");
  const double R = 128.0 / c;
  std::vector<std::size_t> stride(d, 1);
  for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * static_cast<std::size_t>(grid.counts[k + 1]);
  std::vector<std::int64_t> j0(d), len(d), cur(d);
  std::vector<std::vector<double>> prof(d);
  for (std::size_t m = 0; m < mu.size(); ++m) {
    const auto y = mu.position(m);
    bool empty = false;
    for (int k = 0; k < d; ++k) {
      const double a = std::ceil((y[k] - R - grid.origin[k]) / grid.spacing);
      const double b = std::floor((y[k] + R - grid.origin[k]) / grid.spacing);
      const auto ja = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::max(a, -1.0)));
      const auto jb = std::min<std::int64_t>(grid.counts[k] - 1,
                                             static_cast<std::int64_t>(std::min(b, 9e15)));
      if (jb < ja) {
        empty = true;
        break;
      }
      j0[k] = ja;
      len[k] = jb - ja + 1;
      prof[k].resize(static_cast<std::size_t>(len[k]));
      for (std::int64_t j = 0; j < len[k]; ++j) {
        const double v = grid.origin[k] + grid.spacing * static_cast<double>(ja + j) - y[k];
        prof[k][static_cast<std::size_t>(j)] = xi1(c * v);
      }
    }
    if (empty) continue;
    const double w = amp * mu.weight(m);
    std::fill(cur.begin(), cur.end(), 0);
    while (true) {
      double v = w;
      std::size_t flat = 0;
      for (int k = 0; k < d; ++k) {
        v *= prof[k][static_cast<std::size_t>(cur[k])];
        flat += static_cast<std::size_t>(j0[k] + cur[k]) * stride[k];
      }
      out[flat] += v;
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++cur[k] < len[k]) break;
        cur[k] = 0;
      }
      if (k < 0) break;
    }
  }
}

double lowpass_at(const GridMeasure& mu, double c, double amp, std::span<const double> x) {
  const int d = mu.dim();
  const double R = 128.0 / c;
  const auto& first = mu.first_coords();
  const auto lo = std::lower_bound(first.begin(), first.end(), x[0] - R) - first.begin();
  const auto hi = std::upper_bound(first.begin(), first.end(), x[0] + R) - first.begin();
  double s = 0.0;
  for (auto j = lo; j < hi; ++j) {
    const auto y = mu.position(static_cast<std::size_t>(j));
    double v = mu.weight(static_cast<std::size_t>(j));
    for (int k = 0; k < d && v != 0.0; ++k) v *= xi1(c * (x[k] - y[k]));
    s += v;
  }
  return amp * s;
}

// Kernel as a signed sum of low-pass kernels Xi_j, given as (j, sign).
using Terms = std::vector<std::pair<int, double>>;

LpField lp_grid(const GridMeasure& mu, const Terms& terms, int top, const GridSpec& out) {
  LpField r{SampledField{out, std::vector<double>(out.size(), 0.0)}, false};
  const int d = out.dim();
  for (const auto& [j, sign] : terms) {
    const double c = std::ldexp(1.0, j);
    add_lowpass(mu, c, sign * std::pow(c, d), out, r.field.values);
  }
  r.above_nyquist = std::ldexp(1.0, top) * 2.0 * out.spacing > 1.0;
  return r;
}

LpValues lp_points(const GridMeasure& mu, const Terms& terms, int top, std::span<const Point> points) {
  LpValues r;
  r.values.assign(points.size(), 0.0);
  const int d = mu.dim();
  for (std::size_t i = 0; i < points.size(); ++i)
    for (const auto& [j, sign] : terms) {
      const double c = std::ldexp(1.0, j);
      r.values[i] += lowpass_at(mu, c, sign * std::pow(c, d), points[i]);
    }
  r.above_nyquist = std::ldexp(1.0, top) * 2.0 * mu.spacing() > 1.0;
  return r;
}

Terms low_terms(int k) { return {{k, 1.0}}; }
Terms band_terms(int k) { return {{k, 1.0}, {k - 1, -1.0}}; }

}  // namespace

MaximalField dyadic_maximal(const GridMeasure& mu, const DyadicLattice& lat, double gamma,
                            int k_min, int k_max, std::span<const Point> points) {
  if (k_min > k_max) throw std::invalid_argument("dyadic_maximal: k_min > k_max");
  check_gamma(gamma, lat.dim(), "dyadic_maximal");
  return dyadic_levels(mu, lat, gamma, k_min, k_max, points);
}

MaximalField truncated_dyadic_maximal(const GridMeasure& mu, const DyadicLattice& lat,
                                      double gamma, double l, std::span<const Point> points,
                                      int k_min) {
  if (!(l > 0.0)) throw std::invalid_argument("truncated_dyadic_maximal: l must be positive");
  check_gamma(gamma, lat.dim(), "truncated_dyadic_maximal");
  int k_max = k_min - 1;
  while (cube_side(lat, k_max + 1) >= l * (1.0 - 1e-12)) ++k_max;
  MaximalField m = k_max >= k_min ? dyadic_levels(mu, lat, gamma, k_min, k_max, points)
                                  : empty_field(points, gamma);
  m.truncation = l;
  return m;
}

MaximalField grand_maximal(const GridMeasure& mu, const TestFamily& fam, double gamma,
                           std::span<const Point> points, const TGrid& tg) {
  check_gamma(gamma, fam.dim, "grand_maximal");
  return grand_over_scales(mu, fam, gamma, points, dilations(tg));
}

MaximalField anti_local_maximal(const GridMeasure& mu, const TestFamily& fam, double alpha,
                                double rho, std::span<const Point> points, const TGrid& tg) {
  if (!(rho > 0.0)) throw std::invalid_argument("anti_local_maximal: rho must be positive");
  check_gamma(alpha, fam.dim, "anti_local_maximal");
  std::vector<double> scales;
  const auto all = dilations(tg);
  if (rho > all.front() && rho <= all.back()) scales.push_back(rho);
  for (double s : all)
    if (s >= rho) scales.push_back(s);
  MaximalField m = grand_over_scales(mu, fam, alpha, points, scales);
  m.truncation = rho;
  return m;
}

LpField lp_lowpass(const GridMeasure& mu, int k, const GridSpec& out) {
  return lp_grid(mu, low_terms(k), k, out);
}
LpField lp_lowpass(const SampledField& f, int k, const GridSpec& out) {
  return lp_grid(f.as_measure(), low_terms(k), k, out);
}
LpValues lp_lowpass(const GridMeasure& mu, int k, std::span<const Point> points) {
  return lp_points(mu, low_terms(k), k, points);
}
LpField lp_band(const GridMeasure& mu, int k, const GridSpec& out) {
  return lp_grid(mu, band_terms(k), k, out);
}
LpField lp_band(const SampledField& f, int k, const GridSpec& out) {
  return lp_grid(f.as_measure(), band_terms(k), k, out);
}
LpValues lp_band(const GridMeasure& mu, int k, std::span<const Point> points) {
  return lp_points(mu, band_terms(k), k, points);
}
LpField lp_band_tilde(const SampledField& f, int k, const GridSpec& out) {
  // Xi~_k = Xi_{k+1} - Xi_{k-2}.
  return lp_grid(f.as_measure(), {{k + 1, 1.0}, {k - 2, -1.0}}, k + 1, out);
}

DecayFit decay_fit(std::span<const Point> points, std::span<const double> values,
                   const Point& center, double r_lo, double r_hi) {
  if (points.size() != values.size()) throw std::invalid_argument("decay_fit: size mismatch");
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw std::invalid_argument("decay_fit: need 0 < r_lo < r_hi");
  DecayFit fit;
  fit.r_lo = r_lo;
  fit.r_hi = r_hi;
  const double step = 0.5 * std::log(2.0);
  const auto nb = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::log(r_hi / r_lo) / step)));
  std::vector<double> best(nb, 0.0), at(nb, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double r = distance(points[i], center);
    if (r < r_lo || r > r_hi) continue;
    auto b = static_cast<std::size_t>(std::log(r / r_lo) / step);
    b = std::min(b, nb - 1);
    const double v = std::abs(values[i]);
    if (v > best[b]) {
      best[b] = v;
      at[b] = r;
    }
  }
  std::vector<double> lx, ly;
  for (std::size_t b = 0; b < nb; ++b)
    if (best[b] > 0.0) {
      lx.push_back(std::log(at[b]));
      ly.push_back(std::log(best[b]));
    }
  fit.bins = lx.size();
  if (fit.bins < 8) return fit;
  const double n = static_cast<double>(fit.bins);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.exponent = sxy / sxx;
  double ss = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double e = ly[i] - (my + fit.exponent * (lx[i] - mx));
    ss += e * e;
  }
  fit.rms = std::sqrt(ss / n);
  fit.residual = syy > 0.0 ? ss / syy : 0.0;
  fit.valid = true;
  return fit;
}

DecayFit decay_fit(const MaximalField& m, const Point& center, double r_lo, double r_hi) {
  return decay_fit(m.points, m.values, center, r_lo, r_hi);
}

DecayFit decay_fit(const SampledField& f, const Point& center, double r_lo, double r_hi) {
  return decay_fit(f.grid.points(), f.values, center, r_lo, r_hi);
}

}  // namespace dss
