#include "dss/heat.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dss {

TGrid::TGrid(double t_min, double t_max, int nodes_per_decade)
    : t_min_(t_min), t_max_(t_max), per_decade_(nodes_per_decade) {
  if (!(t_min > 0.0) || !(t_max > t_min) || nodes_per_decade < 1)
    throw std::invalid_argument("TGrid: need 0 < t_min < t_max and nodes_per_decade >= 1");
  const int n = std::max(
      1, static_cast<int>(std::ceil(std::log10(t_max / t_min) * nodes_per_decade - 1e-9)));
  nodes_.resize(n + 1);
  const double lr = std::log(t_max / t_min);
  for (int i = 0; i <= n; ++i) nodes_[i] = t_min * std::exp(lr * i / n);
  nodes_.front() = t_min;
  nodes_.back() = t_max;
}

double TGrid::ratio() const {
  return nodes_.size() < 2 ? 1.0 : nodes_[1] / nodes_[0];
}

TGrid TGrid::for_measure(const GridMeasure& mu) {
  const double h = mu.spacing();
  double diam = mu.empty() ? 0.0 : mu.support_diameter();
  if (diam <= 0.0) diam = h;
  return TGrid((h / 4) * (h / 4), (4 * diam) * (4 * diam), 32);
}

double truncation_radius(double t, double eps) {
  return 8.0 * std::sqrt(t * std::log(1.0 / eps));
}

double heat_kernel(int dim, double t, double r2) {
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * dim) * std::exp(-r2 / (4.0 * t));
}

double heat_extension_at(const GridMeasure& mu, double t, std::span<const double> x) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_extension: t must be positive");
  if (mu.empty()) return 0.0;
  const int d = mu.dim();
  const double R = truncation_radius(t);
  const double R2 = R * R;
  const auto& first = mu.first_coords();
  const auto lo = std::lower_bound(first.begin(), first.end(), x[0] - R) - first.begin();
  const auto hi = std::upper_bound(first.begin(), first.end(), x[0] + R) - first.begin();
  const double inv4t = 1.0 / (4.0 * t);
  double s = 0.0;
  for (auto i = lo; i < hi; ++i) {
    const auto y = mu.position(static_cast<std::size_t>(i));
    double r2 = 0.0;
    for (int k = 0; k < d; ++k) {
      const double u = x[k] - y[k];
      r2 += u * u;
    }
    if (r2 <= R2) s += mu.weight(static_cast<std::size_t>(i)) * std::exp(-r2 * inv4t);
  }
  return s * std::pow(4.0 * std::numbers::pi * t, -0.5 * d);
}

std::vector<double> heat_extension(const GridMeasure& mu, double t,
                                   std::span<const Point> points) {
  std::vector<double> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = heat_extension_at(mu, t, points[i]);
  return out;
}

SampledField heat_on_grid(const GridMeasure& mu, double t, const GridSpec& grid) {
  if (!(t > 0.0)) throw std::invalid_argument("heat_on_grid: t must be positive");
  SampledField f{grid, std::vector<double>(grid.size(), 0.0)};
  if (mu.empty() || grid.size() == 0) return f;
  const int d = grid.dim();
  if (d != mu.dim()) throw std::invalid_argument("heat_on_grid: dimension mismatch");
  const double R = truncation_radius(t);
  const double norm1 = 1.0 / std::sqrt(4.0 * std::numbers::pi * t);
  const double inv4t = 1.0 / (4.0 * t);

  std::vector<std::size_t> stride(d, 1);
  for (int k = d - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * static_cast<std::size_t>(grid.counts[k + 1]);

  std::vector<std::int64_t> j0(d), len(d);
  std::vector<std::vector<double>> prof(d);
  std::vector<std::int64_t> cur(d);
  for (std::size_t m = 0; m < mu.size(); ++m) {
    const auto y = mu.position(m);
    bool empty = false;
    for (int k = 0; k < d; ++k) {
      const double a = std::ceil((y[k] - R - grid.origin[k]) / grid.spacing);
      const double b = std::floor((y[k] + R - grid.origin[k]) / grid.spacing);
      const auto ja = std::max<std::int64_t>(0, static_cast<std::int64_t>(a));
      const auto jb = std::min<std::int64_t>(grid.counts[k] - 1, static_cast<std::int64_t>(b));
      if (jb < ja) {
        empty = true;
        break;
      }
      j0[k] = ja;
      len[k] = jb - ja + 1;
      prof[k].resize(static_cast<std::size_t>(len[k]));
      for (std::int64_t j = 0; j < len[k]; ++j) {
        const double u = grid.origin[k] + grid.spacing * static_cast<double>(ja + j) - y[k];
        prof[k][static_cast<std::size_t>(j)] = norm1 * std::exp(-u * u * inv4t);
      }
    }
    if (empty) continue;
    const double w = mu.weight(m);
    // Outer product of the 1D profiles; the last axis is contiguous.
    std::fill(cur.begin(), cur.end(), 0);
    while (true) {
      double c = w;
      std::size_t base = 0;
      for (int k = 0; k < d - 1; ++k) {
        c *= prof[k][static_cast<std::size_t>(cur[k])];
        base += static_cast<std::size_t>(j0[k] + cur[k]) * stride[k];
      }
      base += static_cast<std::size_t>(j0[d - 1]);
      const auto& p = prof[d - 1];
      double* out = f.values.data() + base;
      for (std::size_t j = 0; j < p.size(); ++j) out[j] += c * p[j];
      int k = d - 2;
      for (; k >= 0; --k) {
        if (++cur[k] < len[k]) break;
        cur[k] = 0;
      }
      if (k < 0) break;
    }
  }
  return f;
}

GridSpec conservation_grid(const GridMeasure& mu, double t) {
  const double g = std::sqrt(t) / 2.0;
  Box box = mu.empty() ? Box{Point(mu.dim(), 0.0), Point(mu.dim(), 0.0)} : mu.support_box();
  return GridSpec::covering(box, truncation_radius(t), g, box.lo);
}

namespace {

double weighted(const GridMeasure& mu, double gamma, std::span<const double> x, double t) {
  return std::pow(t, 0.5 * gamma) * std::abs(heat_extension_at(mu, t, x));
}

}  // namespace

HeatSup heat_sup_at(const GridMeasure& mu, double gamma, std::span<const double> x,
                    const TGrid& tg) {
  HeatSup best;
  if (mu.empty()) return best;
  const auto& nodes = tg.nodes();
  std::size_t arg = 0;
  best.value = -1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double v = weighted(mu, gamma, x, nodes[i]);
    if (v > best.value) {
      best.value = v;
      arg = i;
    }
  }
  best.argmax_t = nodes[arg];
  if (nodes.size() < 2 || best.value <= 0.0) return best;

  // Golden-section search in log t between the neighbouring nodes.
  double a = std::log(nodes[arg == 0 ? 0 : arg - 1]);
  double b = std::log(nodes[std::min(arg + 1, nodes.size() - 1)]);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a);
  double e = a + g * (b - a);
  double fc = weighted(mu, gamma, x, std::exp(c));
  double fe = weighted(mu, gamma, x, std::exp(e));
  for (int it = 0; it < 20; ++it) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - g * (b - a);
      fc = weighted(mu, gamma, x, std::exp(c));
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + g * (b - a);
      fe = weighted(mu, gamma, x, std::exp(e));
    }
  }
  if (fc > best.value) {
    best.value = fc;
    best.argmax_t = std::exp(c);
  }
  if (fe > best.value) {
    best.value = fe;
    best.argmax_t = std::exp(e);
  }
  return best;
}

std::vector<HeatSup> heat_sup_field(const GridMeasure& mu, double gamma,
                                    std::span<const Point> points, const TGrid& tg) {
  std::vector<HeatSup> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out[i] = heat_sup_at(mu, gamma, points[i], tg);
  return out;
}

HeatField heat_field(const GridMeasure& mu, std::span<const Point> points,
                     const TGrid& tg) {
  HeatField hf;
  hf.points.assign(points.begin(), points.end());
  hf.t_nodes = tg.nodes();
  hf.values.reserve(points.size() * hf.t_nodes.size());
  for (const auto& x : points)
    for (double t : hf.t_nodes) hf.values.push_back(heat_extension_at(mu, t, x));
  return hf;
}

}  // namespace dss
