#include "dss/content.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <stdexcept>

namespace dss {

namespace {

DyadicLattice resolve(const DyadicLattice& lat, int dim) {
  if (lat.corner.empty()) return DyadicLattice::unit(dim);
  if (lat.dim() != dim) throw std::invalid_argument("lattice dimension mismatch");
  return lat;
}

// Squared distance from x to the closed cube.
double dist2_to_cube(const DyadicLattice& lat, const DyadicCube& q, std::span<const double> x) {
  const double l = cube_side(lat, q.level);
  const Point a = cube_corner(lat, q);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = std::max({a[k] - x[k], 0.0, x[k] - a[k] - l});
    s += u * u;
  }
  return s;
}

// Squared distance from x to the farthest point of the closed cube.
double far2_to_cube(const DyadicLattice& lat, const DyadicCube& q, std::span<const double> x) {
  const double l = cube_side(lat, q.level);
  const Point a = cube_corner(lat, q);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double u = std::max(std::abs(x[k] - a[k]), std::abs(x[k] - a[k] - l));
    s += u * u;
  }
  return s;
}

// Bottom-up content tree: per level, cube index -> (value, uses itself).
struct ContentTree {
  int top = 0;  // coarsest level reached
  std::map<int, std::map<Index, std::pair<double, bool>>> levels;
  double total = 0.0;
};

ContentTree build_tree(const CubeUnion& e, double beta) {
  ContentTree t;
  if (e.empty()) return t;
  const int d = e.lattice.dim();
  if (!(beta > 0.0) || beta > d) throw std::invalid_argument("dyadic_content: beta must lie in (0, d]");
  std::map<int, std::vector<const DyadicCube*>> by_level;
  for (const auto& q : e.cubes) by_level[q.level].push_back(&q);
  const int finest = by_level.rbegin()->first;
  const int coarsest = by_level.begin()->first;
  std::map<Index, std::pair<double, bool>> cur;
  int k = finest;
  while (true) {
    const double own = std::pow(cube_side(e.lattice, k), beta);
    if (auto it = by_level.find(k); it != by_level.end())
      for (const auto* q : it->second) cur[q->index] = {own, true};
    t.levels[k] = cur;
    bool settled = k <= coarsest;
    if (settled)
      for (const auto& [idx, v] : cur)
        for (auto n : idx)
          if (n != 0 && n != -1) settled = false;
    if (settled) break;
    std::map<Index, double> sums;
    for (const auto& [idx, v] : cur) sums[parent(DyadicCube{k, idx}).index] += v.first;
    --k;
    const double up = std::pow(cube_side(e.lattice, k), beta);
    cur.clear();
    for (const auto& [idx, s] : sums) cur[idx] = up <= s ? std::pair{up, true} : std::pair{s, false};
  }
  t.top = k;
  for (const auto& [idx, v] : t.levels[k]) t.total += v.first;
  return t;
}

void extract(const ContentTree& t, int level, const Index& idx, std::vector<DyadicCube>& out) {
  const auto& node = t.levels.at(level).at(idx);
  if (node.second) {
    out.push_back({level, idx});
    return;
  }
  const auto& next = t.levels.at(level + 1);
  for (const auto& c : children(DyadicCube{level, idx}))
    if (next.count(c.index)) extract(t, level + 1, c.index, out);
}

void check_balls(const BallFamily& f, int dim) {
  for (const auto& b : f) {
    if (static_cast<int>(b.center.size()) != dim) throw std::invalid_argument("ball dimension mismatch");
    if (!(b.radius > 0.0) || !std::isfinite(b.radius)) throw std::invalid_argument("ball radius must be positive");
  }
}

// Level-`level` cells passing `keep`, found by descending from cubes of side
// about the ball's diameter. A cube strictly inside the ball is emitted whole,
// which is valid for keep predicates implied by containment.
template <class Keep>
void descend(const DyadicLattice& lat, const DyadicCube& q, const Ball& b, int level, Keep& keep,
             std::vector<DyadicCube>& out) {
  const double r2 = b.radius * b.radius;
  if (dist2_to_cube(lat, q, b.center) > r2) return;
  if (q.level == level) {
    if (keep(q, b)) out.push_back(q);
    return;
  }
  if (far2_to_cube(lat, q, b.center) < r2) {
    out.push_back(q);
    return;
  }
  for (const auto& c : children(q)) descend(lat, c, b, level, keep, out);
}

template <class Keep>
CubeUnion cells_for_balls(const BallFamily& f, const DyadicLattice& lat, int level, Keep keep) {
  std::vector<DyadicCube> cells;
  const int d = lat.dim();
  for (const auto& b : f) {
    const int start =
        std::min(level, static_cast<int>(std::floor(std::log2(lat.side / (2 * b.radius)))));
    const double l = cube_side(lat, start);
    Index lo(d), hi(d);
    for (int k = 0; k < d; ++k) {
      lo[k] = static_cast<std::int64_t>(std::floor((b.center[k] - b.radius - lat.corner[k]) / l));
      hi[k] = static_cast<std::int64_t>(std::floor((b.center[k] + b.radius - lat.corner[k]) / l));
    }
    Index cur = lo;
    while (true) {
      descend(lat, DyadicCube{start, cur}, b, level, keep, cells);
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++cur[k] <= hi[k]) break;
        cur[k] = lo[k];
      }
      if (k < 0) break;
    }
  }
  return make_cube_union(lat, std::move(cells));
}

double cube_sum(const CubeUnion& e, double beta) {
  double s = 0.0;
  for (const auto& q : e.cubes) s += std::pow(cube_side(e.lattice, q.level), beta);
  return s;
}

// Largest cube of the cover meeting the open ball, as (index, side).
std::pair<std::size_t, double> best_meeting(const CubeUnion& cover, const Ball& b) {
  std::pair<std::size_t, double> best{0, 0.0};
  const double r2 = b.radius * b.radius;
  for (std::size_t i = 0; i < cover.cubes.size(); ++i) {
    const double l = cube_side(cover.lattice, cover.cubes[i].level);
    if (l > best.second && dist2_to_cube(cover.lattice, cover.cubes[i], b.center) < r2) best = {i, l};
  }
  return best;
}

}  // namespace

double CubeUnion::volume() const {
  double v = 0.0;
  for (const auto& q : cubes) v += std::pow(cube_side(lattice, q.level), lattice.dim());
  return v;
}

CubeUnion make_cube_union(const DyadicLattice& lat, std::vector<DyadicCube> cubes) {
  for (const auto& q : cubes)
    if (static_cast<int>(q.index.size()) != lat.dim()) throw std::invalid_argument("cube dimension mismatch");
  std::sort(cubes.begin(), cubes.end());
  cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
  std::set<DyadicCube> all(cubes.begin(), cubes.end());
  int coarsest = 0;
  if (!cubes.empty()) {
    coarsest = cubes.front().level;
    for (const auto& q : cubes) coarsest = std::min(coarsest, q.level);
  }
  CubeUnion u{lat, {}};
  for (const auto& q : cubes) {
    bool nested = false;
    DyadicCube p = q;
    while (p.level > coarsest && !nested) {
      p = parent(p);
      nested = all.count(p) > 0;
    }
    if (!nested) u.cubes.push_back(q);
  }
  return u;
}

CubeUnion unite(const CubeUnion& a, const CubeUnion& b) {
  auto cubes = a.cubes;
  cubes.insert(cubes.end(), b.cubes.begin(), b.cubes.end());
  return make_cube_union(a.lattice, std::move(cubes));
}

bool covers(const CubeUnion& outer, const CubeUnion& inner) {
  for (const auto& q : inner.cubes) {
    bool inside = false;
    for (const auto& p : outer.cubes)
      if (is_within(q, p)) {
        inside = true;
        break;
      }
    if (!inside) return false;
  }
  return true;
}

double omega(double beta) { return std::pow(std::numbers::pi, beta / 2) / std::tgamma(beta / 2 + 1); }

double dyadic_content(const CubeUnion& e, double beta) { return build_tree(e, beta).total; }

CubeUnion optimal_dyadic_cover(const CubeUnion& e, double beta) {
  const auto t = build_tree(e, beta);
  std::vector<DyadicCube> out;
  if (!e.empty())
    for (const auto& [idx, v] : t.levels.at(t.top)) extract(t, t.top, idx, out);
  return make_cube_union(e.lattice, std::move(out));
}

CubeUnion outer_cells(const BallFamily& f, const DyadicLattice& lat, int level) {
  return cells_for_balls(f, lat, level, [&](const DyadicCube& q, const Ball& b) {
    return dist2_to_cube(lat, q, b.center) <= b.radius * b.radius;
  });
}

CubeUnion inner_cells(const BallFamily& f, const DyadicLattice& lat, int level) {
  return cells_for_balls(f, lat, level, [&](const DyadicCube& q, const Ball& b) {
    return far2_to_cube(lat, q, b.center) < b.radius * b.radius;
  });
}

double regularization_c(int dim, double beta) {
  return std::pow(omega(dim) / (2.0 * std::ldexp(1.0, dim) * std::pow(4.0, beta)), 1.0 / (dim - beta));
}

double regularization_c_prime(int dim, double beta) {
  return omega(dim) / (2.0 * std::pow(regularization_c(dim, beta), dim - beta));
}

ContentCover regularized_cover(const BallFamily& f, double beta, const DyadicLattice& lattice) {
  if (f.empty()) {
    ContentCover out;
    out.beta = beta;
    out.cubes = CubeUnion{lattice, {}};
    return out;
  }
  const int d = static_cast<int>(f.front().center.size());
  if (!(beta > 0.0) || !(beta < d)) throw std::invalid_argument("regularized_cover: beta must lie in (0, d)");
  check_balls(f, d);
  const DyadicLattice lat = resolve(lattice, d);

  ContentCover out;
  out.beta = beta;
  out.c = regularization_c(d, beta);
  out.c_prime = regularization_c_prime(d, beta);
  double r_min = f.front().radius;
  for (const auto& b : f) r_min = std::min(r_min, b.radius);
  int level = 0;
  while (cube_side(lat, level) > r_min / 4) ++level;
  while (cube_side(lat, level - 1) <= r_min / 4) --level;
  out.level = level;

  const CubeUnion outer = outer_cells(f, lat, level);
  out.content_outer = dyadic_content(outer, beta);
  out.content_inner = dyadic_content(inner_cells(f, lat, level), beta);
  CubeUnion cover = optimal_dyadic_cover(outer, beta);
  out.initial_sum = cube_sum(cover, beta);

  std::vector<std::size_t> order(f.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (f[a].radius != f[b].radius) return f[a].radius > f[b].radius;
    return f[a].center < f[b].center;
  });
  const std::size_t budget = 64 * f.size();
  while (true) {
    const Ball* pick = nullptr;
    for (std::size_t i : order)
      if (best_meeting(cover, f[i]).second < out.c * f[i].radius) {
        pick = &f[i];
        break;
      }
    if (!pick) break;
    if (++out.swaps > budget) throw std::runtime_error("regularized_cover: swap budget exhausted");
    const int k = static_cast<int>(std::floor(std::log2(lat.side / (2 * pick->radius))));
    const CubeUnion fresh = cells_for_balls({*pick}, lat, k, [&](const DyadicCube& q, const Ball& b) {
      return dist2_to_cube(lat, q, b.center) < b.radius * b.radius;
    });
    std::vector<DyadicCube> next;
    std::size_t added = 0;
    for (const auto& q : fresh.cubes) {
      bool inside_old = false;
      for (const auto& p : cover.cubes)
        if (is_within(q, p)) inside_old = true;
      if (!inside_old) {
        next.push_back(q);
        ++added;
      }
    }
    for (const auto& p : cover.cubes) {
      bool swallowed = false;
      for (const auto& q : next)
        if (is_within(p, q)) swallowed = true;
      if (!swallowed) next.push_back(p);
    }
    out.max_replacement = std::max(out.max_replacement, added);
    cover = make_cube_union(lat, std::move(next));
  }

  out.sum = cube_sum(cover, beta);
  for (const auto& b : f) {
    const auto [i, l] = best_meeting(cover, b);
    out.witnesses.push_back({i, l / b.radius});
  }
  out.cubes = std::move(cover);
  return out;
}

ContentCover ball_cover(const BallFamily& f, double beta, const DyadicLattice& lattice) {
  ContentCover out = regularized_cover(f, beta, lattice);
  if (f.empty()) return out;
  const auto& cubes = *out.cubes;
  const double rt = std::sqrt(static_cast<double>(cubes.lattice.dim()));
  for (const auto& q : cubes.cubes) out.balls.push_back({cube_center(cubes.lattice, q), cube_side(cubes.lattice, q.level) * rt / 2});
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& b = out.balls[out.witnesses[i].element];
    b.radius = std::max(b.radius, distance(b.center, f[i].center) + f[i].radius);
  }
  // Only witness balls are kept: they already contain every input ball.
  std::vector<std::size_t> remap(out.balls.size(), SIZE_MAX);
  BallFamily kept;
  for (auto& w : out.witnesses) {
    if (remap[w.element] == SIZE_MAX) {
      remap[w.element] = kept.size();
      kept.push_back(out.balls[w.element]);
    }
    w.element = remap[w.element];
  }
  out.balls = std::move(kept);
  out.sum = 0.0;
  for (const auto& b : out.balls) out.sum += omega(beta) * std::pow(b.radius, beta);
  for (std::size_t i = 0; i < f.size(); ++i)
    out.witnesses[i].ratio = out.balls[out.witnesses[i].element].radius / f[i].radius;
  return out;
}

double spherical_content_upper(const BallFamily& f, double beta) {
  if (f.empty()) return 0.0;
  const int d = static_cast<int>(f.front().center.size());
  if (!(beta > 0.0) || beta > d) throw std::invalid_argument("spherical_content_upper: beta must lie in (0, d]");
  check_balls(f, d);
  const double w = omega(beta);
  double self = 0.0;
  Point lo = f.front().center, hi = lo;
  for (const auto& b : f) {
    self += w * std::pow(b.radius, beta);
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], b.center[k] - b.radius);
      hi[k] = std::max(hi[k], b.center[k] + b.radius);
    }
  }
  Point mid(d);
  for (int k = 0; k < d; ++k) mid[k] = 0.5 * (lo[k] + hi[k]);
  double R = 0.0;
  for (const auto& b : f) R = std::max(R, distance(mid, b.center) + b.radius);
  double best = std::min(self, w * std::pow(R, beta));
  if (beta < d) {
    const auto cov = regularized_cover(f, beta);
    const double rt = std::sqrt(static_cast<double>(d));
    double s = 0.0;
    for (const auto& q : cov.cubes->cubes) s += w * std::pow(cube_side(cov.cubes->lattice, q.level) * rt / 2, beta);
    best = std::min(best, s);
  }
  return best;
}

double spherical_content_upper(const CubeUnion& e, double beta) {
  if (e.empty()) return 0.0;
  const int d = e.lattice.dim();
  if (!(beta > 0.0) || beta > d) throw std::invalid_argument("spherical_content_upper: beta must lie in (0, d]");
  const double w = omega(beta);
  const double rt = std::sqrt(static_cast<double>(d));
  auto converted = [&](const CubeUnion& u) {
    double s = 0.0;
    for (const auto& q : u.cubes) s += w * std::pow(cube_side(u.lattice, q.level) * rt / 2, beta);
    return s;
  };
  Point lo = cube_corner(e.lattice, e.cubes.front()), hi = lo;
  for (const auto& q : e.cubes) {
    const Point a = cube_corner(e.lattice, q);
    const double l = cube_side(e.lattice, q.level);
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], a[k]);
      hi[k] = std::max(hi[k], a[k] + l);
    }
  }
  double R2 = 0.0;
  for (int k = 0; k < d; ++k) R2 += 0.25 * (hi[k] - lo[k]) * (hi[k] - lo[k]);
  return std::min({converted(e), converted(optimal_dyadic_cover(e, beta)), w * std::pow(std::sqrt(R2), beta)});
}

DyadicCube CellFunction::cell(std::size_t flat) const {
  const int d = lattice.dim();
  const std::size_t n = cells_per_axis();
  DyadicCube q{level, Index(d)};
  for (int k = d - 1; k >= 0; --k) {
    q.index[k] = static_cast<std::int64_t>(flat % n);
    flat /= n;
  }
  return q;
}

std::size_t CellFunction::cell_count() const {
  std::size_t total = 1;
  for (int k = 0; k < lattice.dim(); ++k) total *= cells_per_axis();
  return total;
}

std::vector<Point> CellFunction::centers() const {
  std::vector<Point> out(cell_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cube_center(lattice, cell(i));
  return out;
}

CellFunction indicator(const CubeUnion& e, int level) {
  const int d = e.lattice.dim();
  CellFunction f{e.lattice, level, {}};
  const std::size_t n = f.cells_per_axis();
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= n;
  f.values.assign(total, 0.0);
  for (const auto& q : e.cubes) {
    if (q.level > level) throw std::invalid_argument("indicator: cube finer than the cell level");
    const std::int64_t span = std::int64_t{1} << (level - q.level);
    Index lo(d);
    bool outside = false;
    for (int k = 0; k < d; ++k) {
      lo[k] = q.index[k] * span;
      if (lo[k] < 0 || lo[k] + span > static_cast<std::int64_t>(n)) outside = true;
    }
    if (outside) throw std::invalid_argument("indicator: cube outside the base cube");
    Index cur(d, 0);
    while (true) {
      std::size_t flat = 0;
      for (int k = 0; k < d; ++k) flat = flat * n + static_cast<std::size_t>(lo[k] + cur[k]);
      f.values[flat] = 1.0;
      int k = d - 1;
      for (; k >= 0; --k) {
        if (++cur[k] < span) break;
        cur[k] = 0;
      }
      if (k < 0) break;
    }
  }
  return f;
}

CubeUnion level_set(const CellFunction& f, double t) {
  std::vector<DyadicCube> cells;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    if (f.values[i] > t) cells.push_back(f.cell(i));
  return make_cube_union(f.lattice, std::move(cells));
}

std::vector<double> default_thresholds(const CellFunction& f, int n) {
  double lo = 0.0, hi = 0.0;
  for (double v : f.values)
    if (v > 0.0) {
      lo = lo == 0.0 ? v : std::min(lo, v);
      hi = std::max(hi, v);
    }
  std::vector<double> t{0.0};
  if (hi == 0.0) return t;
  if (lo == hi || n < 2) {
    t.push_back(hi);
    return t;
  }
  for (int i = 0; i < n; ++i) t.push_back(i + 1 == n ? hi : lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1)));
  return t;
}

double choquet_integral(const CellFunction& f, double beta, const std::vector<double>& thresholds) {
  double top = 0.0;
  for (double v : f.values) {
    if (v < 0.0 || std::isnan(v)) throw std::invalid_argument("choquet_integral: values must be non-negative");
    top = std::max(top, v);
  }
  if (thresholds.empty() || thresholds.front() != 0.0)
    throw std::invalid_argument("choquet_integral: thresholds must start at 0");
  for (std::size_t j = 1; j < thresholds.size(); ++j)
    if (!(thresholds[j] > thresholds[j - 1])) throw std::invalid_argument("choquet_integral: thresholds must increase");
  if (thresholds.back() < top) throw std::invalid_argument("choquet_integral: thresholds must reach max f");
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < thresholds.size(); ++j) {
    const auto e = level_set(f, thresholds[j]);
    if (e.empty()) break;
    s += (thresholds[j + 1] - thresholds[j]) * dyadic_content(e, beta);
  }
  return s;
}

double choquet_integral(const CellFunction& f, double beta, int levels) {
  return choquet_integral(f, beta, default_thresholds(f, levels));
}

}  // namespace dss
