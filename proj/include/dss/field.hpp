#pragma once

#include <cstdint>
#include <vector>

#include "dss/grid_measure.hpp"

namespace dss {

/// Regular sample grid: point j has coordinates origin + spacing * j,
/// 0 <= j[k] < counts[k]; row-major with the last axis fastest.
struct GridSpec {
  Point origin;
  double spacing = 1.0;
  std::vector<std::int64_t> counts;

  int dim() const { return static_cast<int>(origin.size()); }
  std::size_t size() const;
  double cell_volume() const;
  Point point(std::size_t flat) const;
  std::vector<Point> points() const;

  /// Grid with the given spacing covering [lo - pad, hi + pad] per axis,
  /// anchored at `anchor` (grid points are anchor + spacing * integer).
  static GridSpec covering(const Box& box, double pad, double spacing,
                           const Point& anchor);
};

struct SampledField {
  GridSpec grid;
  std::vector<double> values;

  double grid_sum() const;  // sum of values times cell volume
  /// Multilinear interpolation; zero outside the grid.
  double interpolate(std::span<const double> x) const;
  /// Point masses with weights value * cell volume, on the sample grid.
  GridMeasure as_measure() const;
};

}  // namespace dss
