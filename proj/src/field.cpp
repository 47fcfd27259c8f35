#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dss/field.hpp"

namespace dss {

std::size_t GridSpec::size() const {
  std::size_t n = 1;
  for (auto c : counts) n *= static_cast<std::size_t>(c);
  return counts.empty() ? 0 : n;
}

double GridSpec::cell_volume() const { return std::pow(spacing, dim()); }

Point GridSpec::point(std::size_t flat) const {
  Point p(dim());
  for (int k = dim() - 1; k >= 0; --k) {
    const auto c = static_cast<std::size_t>(counts[k]);
    p[k] = origin[k] + spacing * static_cast<double>(flat % c);
    flat /= c;
  }
  return p;
}

std::vector<Point> GridSpec::points() const {
  std::vector<Point> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back(point(i));
  return out;
}

GridSpec GridSpec::covering(const Box& box, double pad, double spacing,
                            const Point& anchor) {
  if (!(spacing > 0.0)) throw std::invalid_argument("GridSpec: spacing must be positive");
  GridSpec g;
  g.spacing = spacing;
  const int d = static_cast<int>(box.lo.size());
  g.origin.resize(d);
  g.counts.resize(d);
  for (int k = 0; k < d; ++k) {
    const double j0 = std::floor((box.lo[k] - pad - anchor[k]) / spacing);
    const double j1 = std::ceil((box.hi[k] + pad - anchor[k]) / spacing);
    g.origin[k] = anchor[k] + j0 * spacing;
    g.counts[k] = static_cast<std::int64_t>(j1 - j0) + 1;
  }
  return g;
}

double SampledField::grid_sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * grid.cell_volume();
}

double SampledField::interpolate(std::span<const double> x) const {
  const int d = grid.dim();
  std::vector<std::int64_t> base(d);
  std::vector<double> frac(d);
  for (int k = 0; k < d; ++k) {
    const double u = (x[k] - grid.origin[k]) / grid.spacing;
    if (u < 0.0 || u > static_cast<double>(grid.counts[k] - 1)) return 0.0;
    if (grid.counts[k] == 1) {
      base[k] = 0;
      frac[k] = 0.0;
      continue;
    }
    auto j = std::min(static_cast<std::int64_t>(std::floor(u)), grid.counts[k] - 2);
    base[k] = j;
    frac[k] = u - static_cast<double>(j);
  }
  double out = 0.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    double w = 1.0;
    std::size_t flat = 0;
    for (int k = 0; k < d; ++k) {
      const unsigned bit = (mask >> k) & 1u;
      w *= bit ? frac[k] : 1.0 - frac[k];
      flat = flat * static_cast<std::size_t>(grid.counts[k]) +
             static_cast<std::size_t>(base[k] + (grid.counts[k] == 1 ? 0 : bit));
    }
    if (w != 0.0) out += w * values[flat];
  }
  return out;
}

GridMeasure SampledField::as_measure() const {
  const int d = grid.dim();
  const double vol = grid.cell_volume();
  std::vector<PointMass> m;
  m.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == 0.0) continue;
    Index idx(d);
    std::size_t flat = i;
    for (int k = d - 1; k >= 0; --k) {
      const auto c = static_cast<std::size_t>(grid.counts[k]);
      idx[k] = static_cast<std::int64_t>(flat % c);
      flat /= c;
    }
    m.push_back({std::move(idx), values[i] * vol});
  }
  return GridMeasure(d, grid.spacing, grid.origin, std::move(m));
}

}  // namespace dss
