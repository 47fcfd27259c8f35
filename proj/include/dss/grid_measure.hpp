#pragma once

// Discretized finite signed measures on regular grids, dyadic lattices, and
// Frostman-type generators.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dss {

using Index = std::vector<std::int64_t>;
using Point = std::vector<double>;

struct PointMass {
  Index index;
  double weight = 0.0;
};

struct Box {
  Point lo;
  Point hi;
};

double distance(std::span<const double> a, std::span<const double> b);

/// A finite signed measure given as weighted point masses on the grid
/// origin + spacing * index. Masses are kept sorted by index (lexicographic),
/// so positions are sorted by their first coordinate.
class GridMeasure {
 public:
  GridMeasure() = default;
  GridMeasure(int dim, double spacing, Point origin,
              std::vector<PointMass> masses, std::string name = {});

  int dim() const { return dim_; }
  double spacing() const { return spacing_; }
  const Point& origin() const { return origin_; }
  const std::string& name() const { return name_; }

  std::size_t size() const { return masses_.size(); }
  bool empty() const { return masses_.empty(); }
  std::span<const PointMass> masses() const { return masses_; }
  double weight(std::size_t i) const { return masses_[i].weight; }
  std::span<const double> position(std::size_t i) const {
    return {coords_.data() + i * static_cast<std::size_t>(dim_),
            static_cast<std::size_t>(dim_)};
  }
  /// First coordinates of all masses, nondecreasing.
  const std::vector<double>& first_coords() const { return first_; }

  double total_mass() const;
  double total_variation() const;
  Box support_box() const;
  double support_diameter() const;

  GridMeasure scaled(double factor) const;
  GridMeasure renamed(std::string name) const;

 private:
  int dim_ = 1;
  double spacing_ = 1.0;
  Point origin_;
  std::string name_;
  std::vector<PointMass> masses_;
  std::vector<double> coords_;
  std::vector<double> first_;
};

GridMeasure new_grid_measure(int dim, double spacing, Point origin,
                             std::vector<PointMass> masses,
                             std::string name = {});

double total_variation(const GridMeasure& mu);

/// a*mu + b*nu; both measures must live on the same grid.
GridMeasure combine(const GridMeasure& mu, double a, const GridMeasure& nu,
                    double b);

/// Shift by an integer number of grid cells.
GridMeasure translate_cells(const GridMeasure& mu, const Index& shift);

/// Mass-preserving push-forward under y -> factor * (y - center).
GridMeasure dilate(const GridMeasure& mu, const Point& center, double factor);

/// The cube system generated by a base cube Q0 (whole lattice Z^d at every
/// level, not only sub-cubes of Q0).
struct DyadicLattice {
  Point corner;
  double side = 1.0;
  int dim() const { return static_cast<int>(corner.size()); }
  static DyadicLattice unit(int dim) { return {Point(dim, 0.0), 1.0}; }
};

struct DyadicCube {
  int level = 0;
  Index index;

  bool operator==(const DyadicCube&) const = default;
  auto operator<=>(const DyadicCube&) const = default;
};

double cube_side(const DyadicLattice& lat, int level);
Point cube_corner(const DyadicLattice& lat, const DyadicCube& q);
Point cube_center(const DyadicLattice& lat, const DyadicCube& q);
/// Half-open membership [a, b)^d.
bool cube_contains(const DyadicLattice& lat, const DyadicCube& q,
                   std::span<const double> x);
DyadicCube cube_at(const DyadicLattice& lat, int level,
                   std::span<const double> x);
DyadicCube parent(const DyadicCube& q);
std::vector<DyadicCube> children(const DyadicCube& q);
/// True when `inner` is `outer` or one of its descendants.
bool is_within(const DyadicCube& inner, const DyadicCube& outer);

double measure_of_cube(const GridMeasure& mu, const DyadicLattice& lat,
                       const DyadicCube& q);
/// |mu|(Q).
double variation_of_cube(const GridMeasure& mu, const DyadicLattice& lat,
                         const DyadicCube& q);

struct FrostmanCertificate {
  double beta = 0.0;
  double constant = 0.0;
  std::vector<double> radii;
  Point worst_center;
  double worst_radius = 0.0;
  std::size_t centers_probed = 0;
};

/// C = max over probe centers (support points and midpoints of consecutive
/// support points) and radii of |mu|(B(x, r)) / r^beta, closed balls. The
/// value is a lower bound for the true supremum.
FrostmanCertificate frostman_constant(const GridMeasure& mu, double beta,
                                      std::span<const double> radii);

/// Geometric radius grid from r_min to r_max with `per_octave` nodes per
/// factor of two.
std::vector<double> radius_grid(double r_min, double r_max, int per_octave);

/// Middle-thirds Cantor measure on [0, 1/2] at the given construction depth:
/// one point mass at the center of each of the 2^depth triadic intervals.
/// The grid spacing is 3^-depth / 4 so every center is a grid point.
GridMeasure cantor_measure(int depth, double normalization);

struct CantorFrostman {
  GridMeasure measure;
  FrostmanCertificate certificate;
};

inline constexpr double kCantorDimension = 0.63092975357145743710;  // log2/log3

CantorFrostman cantor_frostman(int depth, double normalization);

/// Radii probed for a depth-n Cantor certificate.
std::vector<double> cantor_radii(int depth);

/// Vector measure: d components on a shared grid.
struct VectorGridMeasure {
  std::vector<GridMeasure> components;
  int dim() const { return components.empty() ? 0 : components.front().dim(); }
  double total_variation() const;
};

/// One vector point mass (segment direction x length) per polyline segment,
/// at the segment midpoint snapped to the grid of spacing h (origin 0).
/// Vertices are first rounded to multiples of 2^-32 so that component sums
/// telescope to exactly zero.
VectorGridMeasure curve_measure(const std::vector<Point>& closed_polyline,
                                double spacing);

/// Splits each segment into pieces of length at most max_len.
std::vector<Point> refine_polyline(const std::vector<Point>& polyline,
                                   double max_len);

}  // namespace dss
