#include "dss/grid_measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace dss {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

GridMeasure::GridMeasure(int dim, double spacing, Point origin,
                         std::vector<PointMass> masses, std::string name)
    : dim_(dim), spacing_(spacing), origin_(std::move(origin)),
      name_(std::move(name)) {
  if (dim < 1) throw std::invalid_argument("GridMeasure: dim must be >= 1");
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw std::invalid_argument("GridMeasure: spacing must be positive and finite");
  if (origin_.empty()) origin_.assign(dim, 0.0);
  if (static_cast<int>(origin_.size()) != dim)
    throw std::invalid_argument("GridMeasure: origin has wrong length");

  std::map<Index, double> merged;
  for (auto& m : masses) {
    if (static_cast<int>(m.index.size()) != dim)
      throw std::invalid_argument("GridMeasure: index has wrong length");
    if (!std::isfinite(m.weight))
      throw std::invalid_argument("GridMeasure: non-finite weight");
    merged[m.index] += m.weight;
  }
  masses_.reserve(merged.size());
  for (auto& [idx, w] : merged)
    if (w != 0.0) masses_.push_back({idx, w});

  coords_.resize(masses_.size() * dim_);
  first_.resize(masses_.size());
  for (std::size_t i = 0; i < masses_.size(); ++i) {
    for (int k = 0; k < dim_; ++k)
      coords_[i * dim_ + k] =
          origin_[k] + spacing_ * static_cast<double>(masses_[i].index[k]);
    first_[i] = coords_[i * dim_];
  }
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (const auto& m : masses_) s += m.weight;
  return s;
}

double GridMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& m : masses_) s += std::abs(m.weight);
  return s;
}

Box GridMeasure::support_box() const {
  Box b{Point(dim_, 0.0), Point(dim_, 0.0)};
  if (masses_.empty()) return b;
  b.lo.assign(dim_, std::numeric_limits<double>::infinity());
  b.hi.assign(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < size(); ++i) {
    auto p = position(i);
    for (int k = 0; k < dim_; ++k) {
      b.lo[k] = std::min(b.lo[k], p[k]);
      b.hi[k] = std::max(b.hi[k], p[k]);
    }
  }
  return b;
}

double GridMeasure::support_diameter() const {
  if (masses_.empty()) return 0.0;
  const Box b = support_box();
  return distance(b.lo, b.hi);
}

GridMeasure GridMeasure::scaled(double factor) const {
  std::vector<PointMass> m(masses_.begin(), masses_.end());
  for (auto& pm : m) pm.weight *= factor;
  return GridMeasure(dim_, spacing_, origin_, std::move(m), name_);
}

GridMeasure GridMeasure::renamed(std::string name) const {
  GridMeasure g = *this;
  g.name_ = std::move(name);
  return g;
}

GridMeasure new_grid_measure(int dim, double spacing, Point origin,
                             std::vector<PointMass> masses, std::string name) {
  return GridMeasure(dim, spacing, std::move(origin), std::move(masses),
                     std::move(name));
}

double total_variation(const GridMeasure& mu) { return mu.total_variation(); }

GridMeasure combine(const GridMeasure& mu, double a, const GridMeasure& nu,
                    double b) {
  if (mu.dim() != nu.dim() || mu.spacing() != nu.spacing() ||
      mu.origin() != nu.origin())
    throw std::invalid_argument("combine: measures live on different grids");
  std::vector<PointMass> m;
  m.reserve(mu.size() + nu.size());
  for (const auto& pm : mu.masses()) m.push_back({pm.index, a * pm.weight});
  for (const auto& pm : nu.masses()) m.push_back({pm.index, b * pm.weight});
  return GridMeasure(mu.dim(), mu.spacing(), mu.origin(), std::move(m),
                     mu.name());
}

GridMeasure translate_cells(const GridMeasure& mu, const Index& shift) {
  std::vector<PointMass> m(mu.masses().begin(), mu.masses().end());
  for (auto& pm : m)
    for (int k = 0; k < mu.dim(); ++k) pm.index[k] += shift[k];
  return GridMeasure(mu.dim(), mu.spacing(), mu.origin(), std::move(m),
                     mu.name());
}

GridMeasure dilate(const GridMeasure& mu, const Point& center, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("dilate: factor must be positive");
  Point origin(mu.dim());
  for (int k = 0; k < mu.dim(); ++k)
    origin[k] = factor * (mu.origin()[k] - center[k]);
  std::vector<PointMass> m(mu.masses().begin(), mu.masses().end());
  return GridMeasure(mu.dim(), mu.spacing() * factor, std::move(origin),
                     std::move(m), mu.name());
}

// ---------------------------------------------------------------- lattice

double cube_side(const DyadicLattice& lat, int level) {
  return std::ldexp(lat.side, -level);
}

Point cube_corner(const DyadicLattice& lat, const DyadicCube& q) {
  const double l = cube_side(lat, q.level);
  Point c(lat.dim());
  for (int k = 0; k < lat.dim(); ++k)
    c[k] = lat.corner[k] + static_cast<double>(q.index[k]) * l;
  return c;
}

Point cube_center(const DyadicLattice& lat, const DyadicCube& q) {
  Point c = cube_corner(lat, q);
  const double l = cube_side(lat, q.level);
  for (auto& v : c) v += 0.5 * l;
  return c;
}

bool cube_contains(const DyadicLattice& lat, const DyadicCube& q,
                   std::span<const double> x) {
  const double l = cube_side(lat, q.level);
  for (int k = 0; k < lat.dim(); ++k) {
    const double a = lat.corner[k] + static_cast<double>(q.index[k]) * l;
    if (x[k] < a || x[k] >= a + l) return false;
  }
  return true;
}

DyadicCube cube_at(const DyadicLattice& lat, int level,
                   std::span<const double> x) {
  const double l = cube_side(lat, level);
  DyadicCube q{level, Index(lat.dim())};
  for (int k = 0; k < lat.dim(); ++k)
    q.index[k] = static_cast<std::int64_t>(std::floor((x[k] - lat.corner[k]) / l));
  return q;
}

namespace {
std::int64_t floor_div2(std::int64_t n) { return n >= 0 ? n / 2 : -((-n + 1) / 2); }
}  // namespace

DyadicCube parent(const DyadicCube& q) {
  DyadicCube p{q.level - 1, q.index};
  for (auto& n : p.index) n = floor_div2(n);
  return p;
}

std::vector<DyadicCube> children(const DyadicCube& q) {
  const int d = static_cast<int>(q.index.size());
  std::vector<DyadicCube> out;
  out.reserve(std::size_t{1} << d);
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    DyadicCube c{q.level + 1, q.index};
    for (int k = 0; k < d; ++k) c.index[k] = 2 * q.index[k] + ((mask >> k) & 1u);
    out.push_back(std::move(c));
  }
  return out;
}

bool is_within(const DyadicCube& inner, const DyadicCube& outer) {
  if (inner.level < outer.level) return false;
  const int shift = inner.level - outer.level;
  for (std::size_t k = 0; k < inner.index.size(); ++k) {
    std::int64_t n = inner.index[k];
    for (int s = 0; s < shift; ++s) n = floor_div2(n);
    if (n != outer.index[k]) return false;
  }
  return true;
}

namespace {
template <class F>
void for_masses_in_cube(const GridMeasure& mu, const DyadicLattice& lat,
                        const DyadicCube& q, F&& f) {
  const double l = cube_side(lat, q.level);
  const double a0 = lat.corner[0] + static_cast<double>(q.index[0]) * l;
  const auto& xs = mu.first_coords();
  auto it = std::lower_bound(xs.begin(), xs.end(), a0);
  for (auto i = static_cast<std::size_t>(it - xs.begin()); i < xs.size(); ++i) {
    if (xs[i] >= a0 + l) break;
    if (cube_contains(lat, q, mu.position(i))) f(i);
  }
}
}  // namespace

double measure_of_cube(const GridMeasure& mu, const DyadicLattice& lat,
                       const DyadicCube& q) {
  double s = 0.0;
  for_masses_in_cube(mu, lat, q, [&](std::size_t i) { s += mu.weight(i); });
  return s;
}

double variation_of_cube(const GridMeasure& mu, const DyadicLattice& lat,
                         const DyadicCube& q) {
  double s = 0.0;
  for_masses_in_cube(mu, lat, q, [&](std::size_t i) { s += std::abs(mu.weight(i)); });
  return s;
}

// --------------------------------------------------------------- frostman

std::vector<double> radius_grid(double r_min, double r_max, int per_octave) {
  if (!(r_min > 0.0) || !(r_max >= r_min) || per_octave < 1)
    throw std::invalid_argument("radius_grid: bad range");
  std::vector<double> r;
  const double step = std::pow(2.0, 1.0 / per_octave);
  for (double v = r_min; v <= r_max * (1.0 + 1e-12); v *= step) r.push_back(v);
  return r;
}

FrostmanCertificate frostman_constant(const GridMeasure& mu, double beta,
                                      std::span<const double> radii) {
  if (!(beta > 0.0) || beta > mu.dim())
    throw std::invalid_argument("frostman_constant: beta must lie in (0, d]");
  if (radii.empty()) throw std::invalid_argument("frostman_constant: empty radius grid");
  FrostmanCertificate cert;
  cert.beta = beta;
  cert.radii.assign(radii.begin(), radii.end());
  if (mu.empty()) return cert;

  const int d = mu.dim();
  std::vector<Point> centers;
  centers.reserve(2 * mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto p = mu.position(i);
    centers.emplace_back(p.begin(), p.end());
    if (i + 1 < mu.size()) {
      auto q = mu.position(i + 1);
      Point m(d);
      for (int k = 0; k < d; ++k) m[k] = 0.5 * (p[k] + q[k]);
      centers.push_back(std::move(m));
    }
  }
  cert.centers_probed = centers.size();

  const auto& xs = mu.first_coords();
  for (const auto& c : centers) {
    for (double r : radii) {
      const double reach = r * (1.0 + 1e-12);
      auto it = std::lower_bound(xs.begin(), xs.end(), c[0] - reach);
      double mass = 0.0;
      for (auto i = static_cast<std::size_t>(it - xs.begin()); i < xs.size(); ++i) {
        if (xs[i] > c[0] + reach) break;
        if (distance(mu.position(i), c) <= reach) mass += std::abs(mu.weight(i));
      }
      const double ratio = mass / std::pow(r, beta);
      if (ratio > cert.constant) {
        cert.constant = ratio;
        cert.worst_center = c;
        cert.worst_radius = r;
      }
    }
  }
  return cert;
}

std::vector<double> cantor_radii(int depth) {
  return radius_grid(0.25 * std::pow(3.0, -depth), 1.0, 8);
}

GridMeasure cantor_measure(int depth, double normalization) {
  if (depth < 1) throw std::invalid_argument("cantor: depth must be >= 1");
  if (depth > 24) throw std::invalid_argument("cantor: depth too large for a point-mass grid");
  if (!std::isfinite(normalization))
    throw std::invalid_argument("cantor: non-finite normalization");
  const double w = std::ldexp(normalization, -depth);
  if (normalization != 0.0 && (w == 0.0 || !std::isnormal(w)))
    throw std::invalid_argument("cantor: weights underflow at this depth");

  const double h = 0.25 * std::pow(3.0, -depth);
  std::vector<PointMass> masses;
  masses.reserve(std::size_t{1} << depth);
  if (normalization != 0.0) {
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << depth); ++code) {
      // Left endpoint in units of 3^-depth: digits eps_k in {0,1}, most
      // significant first.
      std::int64_t m = 0;
      for (int k = 1; k <= depth; ++k) {
        const auto eps = static_cast<std::int64_t>((code >> (depth - k)) & 1u);
        m = 3 * m + eps;
      }
      masses.push_back({Index{4 * m + 1}, w});
    }
  }
  return GridMeasure(1, h, Point{0.0}, std::move(masses),
                     "cantor_depth_" + std::to_string(depth));
}

CantorFrostman cantor_frostman(int depth, double normalization) {
  GridMeasure mu = cantor_measure(depth, normalization);
  const auto radii = cantor_radii(depth);
  FrostmanCertificate cert = frostman_constant(mu, kCantorDimension, radii);
  return {std::move(mu), std::move(cert)};
}

// ------------------------------------------------------------------ curves

double VectorGridMeasure::total_variation() const {
  double s = 0.0;
  for (const auto& c : components) s += c.total_variation();
  return s;
}

std::vector<Point> refine_polyline(const std::vector<Point>& polyline,
                                   double max_len) {
  if (polyline.size() < 2 || !(max_len > 0.0)) return polyline;
  std::vector<Point> out;
  out.push_back(polyline.front());
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const Point& a = polyline[i];
    const Point& b = polyline[i + 1];
    const double len = distance(a, b);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_len)));
    for (int j = 1; j <= pieces; ++j) {
      if (j == pieces) {
        out.push_back(b);
        continue;
      }
      Point p(a.size());
      const double s = static_cast<double>(j) / pieces;
      for (std::size_t k = 0; k < a.size(); ++k) p[k] = a[k] + s * (b[k] - a[k]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

VectorGridMeasure curve_measure(const std::vector<Point>& closed_polyline,
                                double spacing) {
  if (closed_polyline.size() < 4)
    throw std::invalid_argument("curve_measure: need at least 3 distinct points");
  const int d = static_cast<int>(closed_polyline.front().size());
  if (closed_polyline.front() != closed_polyline.back())
    throw std::invalid_argument("curve_measure: polyline is not closed");
  if (!(spacing > 0.0)) throw std::invalid_argument("curve_measure: spacing must be positive");

  constexpr double kQuantum = 0x1p-32;
  std::vector<Point> v;
  v.reserve(closed_polyline.size());
  for (const auto& p : closed_polyline) {
    if (static_cast<int>(p.size()) != d)
      throw std::invalid_argument("curve_measure: inconsistent point dimension");
    Point q(d);
    for (int k = 0; k < d; ++k) q[k] = std::nearbyint(p[k] / kQuantum) * kQuantum;
    v.push_back(std::move(q));
  }
  std::vector<Point> distinct(v.begin(), v.end() - 1);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw std::invalid_argument("curve_measure: need at least 3 distinct points");

  std::vector<std::vector<PointMass>> comp(d);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    Index idx(d);
    for (int k = 0; k < d; ++k)
      idx[k] = static_cast<std::int64_t>(
          std::floor(0.5 * (v[i][k] + v[i + 1][k]) / spacing + 0.5));
    for (int k = 0; k < d; ++k) {
      const double w = v[i + 1][k] - v[i][k];
      if (w != 0.0) comp[k].push_back({idx, w});
    }
  }
  VectorGridMeasure out;
  for (int k = 0; k < d; ++k)
    out.components.emplace_back(d, spacing, Point(d, 0.0), std::move(comp[k]),
                                "curve_component_" + std::to_string(k));
  return out;
}

}  // namespace dss
