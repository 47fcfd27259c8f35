#include "dss/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dss {

Point Cube::center() const {
  Point c = corner;
  for (auto& v : c) v += side / 2;
  return c;
}

bool Cube::contains(std::span<const double> x, double slack) const {
  for (std::size_t k = 0; k < corner.size(); ++k)
    if (x[k] < corner[k] - slack || x[k] > corner[k] + side + slack) return false;
  return true;
}

TGrid default_atom_tgrid(const AtomCandidate& c) {
  const double h = c.a.spacing();
  double diam = c.Q.side;
  if (!c.a.empty()) diam = std::max(diam, c.a.support_diameter());
  return TGrid((h / 2) * (h / 2), (4 * diam) * (4 * diam), 32);
}

std::vector<Point> default_atom_xgrid(const AtomCandidate& c) {
  const int d = c.a.dim();
  const double l = c.Q.side;
  const Point ctr = c.Q.center();
  std::vector<Point> xs;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    auto p = c.a.position(i);
    xs.emplace_back(p.begin(), p.end());
    if (i + 1 < c.a.size()) {
      auto q = c.a.position(i + 1);
      Point m(d);
      for (int k = 0; k < d; ++k) m[k] = (p[k] + q[k]) / 2;
      xs.push_back(std::move(m));
    }
  }
  const int per_side = d == 1 ? 64 : 32;
  GridSpec g;
  g.spacing = l / per_side;
  g.origin.resize(d);
  g.counts.assign(d, 4 * per_side + 1);
  for (int k = 0; k < d; ++k) g.origin[k] = ctr[k] - 2 * l;
  for (std::size_t i = 0; i < g.size(); ++i) xs.push_back(g.point(i));

  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int j = 0; j < 64; ++j) {
    const double r = 2 * l * std::pow(8.0, j / 63.0);
    Point p = ctr;
    if (d == 1) {
      p[0] += (j % 2 ? -r : r);
    } else {
      const double th = golden * j;
      p[0] += r * std::cos(th);
      p[1] += r * std::sin(th);
    }
    xs.push_back(std::move(p));
  }
  return xs;
}

AtomCertificate check_beta_atom(const AtomCandidate& c, const TGrid& tg,
                                std::span<const Point> xgrid, const AtomTolerances& tol) {
  const int d = c.a.dim();
  if (!(c.beta > 0.0) || c.beta > d + 1e-12)
    throw std::invalid_argument("check_beta_atom: beta must lie in (0, d]");
  AtomCertificate cert;
  cert.beta = c.beta;
  cert.tol = tol;
  cert.x_samples = xgrid.size();
  cert.t_min = tg.t_min();
  cert.t_max = tg.t_max();
  cert.nodes_per_decade = tg.nodes_per_decade();

  const double slack = 1e-12 * c.Q.side;
  double inside = 0.0;
  for (std::size_t i = 0; i < c.a.size(); ++i) {
    if (c.Q.contains(c.a.position(i), slack))
      inside += c.a.weight(i);
    else
      cert.support_overflow += std::abs(c.a.weight(i));
  }
  cert.total_variation = c.a.total_variation();
  cert.cancellation_residual = std::abs(inside);
  cert.support_ok = cert.support_overflow == 0.0;
  cert.cancellation_ok = cert.cancellation_residual <= tol.cancellation * cert.total_variation;
  cert.variation_ok = cert.total_variation <= 1.0 + 1e-12;

  const double gamma = d - c.beta;
  const double lb = std::pow(c.Q.side, c.beta);
  if (!c.a.empty() && !xgrid.empty()) {
    auto sups = heat_sup_field(c.a, gamma, xgrid, tg);
    std::size_t arg = 0;
    for (std::size_t i = 1; i < sups.size(); ++i)
      if (sups[i].value > sups[arg].value) arg = i;
    cert.sup_ratio = sups[arg].value * lb;
    cert.sup_location = xgrid[arg];
    cert.sup_t = sups[arg].argmax_t;

    std::vector<double> lt, lv;
    for (double t : tg.nodes()) {
      if (t > 10.0 * tg.t_min() * (1 + 1e-9) && lt.size() >= 2) break;
      double m = 0.0;
      for (const auto& x : xgrid)
        m = std::max(m, std::pow(t, gamma / 2) * std::abs(heat_extension_at(c.a, t, x)));
      if (m > 0.0) {
        lt.push_back(std::log(t));
        lv.push_back(std::log(m));
      }
    }
    if (lt.size() >= 2) {
      const double n = static_cast<double>(lt.size());
      double mt = 0, mv = 0;
      for (std::size_t i = 0; i < lt.size(); ++i) {
        mt += lt[i] / n;
        mv += lv[i] / n;
      }
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < lt.size(); ++i) {
        sxy += (lt[i] - mt) * (lv[i] - mv);
        sxx += (lt[i] - mt) * (lt[i] - mt);
      }
      cert.small_t_slope = sxy / sxx;
    }
  }
  cert.sup_ok = cert.sup_ratio <= 1.0 + tol.sup_slack;
  return cert;
}

AtomCertificate check_beta_atom(const AtomCandidate& c, const AtomTolerances& tol) {
  auto xs = default_atom_xgrid(c);
  return check_beta_atom(c, default_atom_tgrid(c), xs, tol);
}

double series_bound(double c, double beta, int dim) {
  double s = 0.0;
  for (int k = -600; k <= 40; ++k)
    s += std::exp(-std::ldexp(1.0, 2 * k - 2)) * std::pow(2.0, (k + 1) * beta);
  return std::pow(4 * std::numbers::pi, -0.5 * dim) * c * s;
}

AtomCandidate make_frostman_atom(double beta, int depth) {
  if (depth < 1) throw std::invalid_argument("make_frostman_atom: depth must be >= 1");
  if (std::abs(beta - kCantorDimension) > 1e-3)
    throw std::invalid_argument("make_frostman_atom: only beta = log2/log3 (Cantor) is supported");
  const auto unit = cantor_frostman(depth, 1.0);
  const double S = series_bound(1.0, kCantorDimension, 1);
  const double c2 = std::min(0.5, 0.9 / (2.0 * unit.certificate.constant * S));
  const auto mu = cantor_measure(depth, c2);
  const auto shifted = translate_cells(mu, {2 * static_cast<std::int64_t>(std::llround(std::pow(3.0, depth)))});
  AtomCandidate out;
  out.a = combine(mu, 1.0, shifted, -1.0).renamed("cantor_atom_depth" + std::to_string(depth));
  out.Q = {{0.0}, 1.0};
  out.beta = kCantorDimension;
  return out;
}

AtomCandidate make_loop_atom(const std::vector<Point>& polyline, int component,
                             double scale, const LoopAtomOptions& opt) {
  if (polyline.size() < 4)
    throw std::invalid_argument("make_loop_atom: need a closed polyline with >= 3 distinct points");
  const int d = static_cast<int>(polyline.front().size());
  if (component < 0 || component >= d)
    throw std::invalid_argument("make_loop_atom: component out of range");
  if (!(scale > 0.0)) throw std::invalid_argument("make_loop_atom: scale must be positive");
  std::vector<Point> scaled = polyline;
  for (auto& p : scaled)
    for (auto& v : p) {
      v *= scale;
      if (v < -1e-12 || v > 1.0 + 1e-12)
        throw std::invalid_argument("make_loop_atom: curve leaves the unit cube");
    }
  auto vm = curve_measure(refine_polyline(scaled, opt.spacing), opt.spacing);
  const GridMeasure& comp = vm.components[static_cast<std::size_t>(component)];

  Point lo = scaled.front(), hi = scaled.front();
  for (const auto& p : scaled)
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  for (std::size_t i = 0; i < comp.size(); ++i) {
    auto p = comp.position(i);
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], p[k]);
      hi[k] = std::max(hi[k], p[k]);
    }
  }
  double side = 0.0;
  for (int k = 0; k < d; ++k) side = std::max(side, hi[k] - lo[k]);
  if (!(side > 0.0)) throw std::invalid_argument("make_loop_atom: degenerate curve");

  double s = 0.0;
  if (!comp.empty()) {
    auto radii = radius_grid(opt.spacing / 2, 2 * side, 8);
    const double C = frostman_constant(comp, 1.0, radii).constant;
    const double S = series_bound(1.0, 1.0, d);
    s = std::min(opt.target / (side * C * S), 1.0 / comp.total_variation());
  }
  AtomCandidate out;
  out.a = comp.scaled(s).renamed("loop_atom_component" + std::to_string(component));
  out.Q = {lo, side};
  out.beta = 1.0;
  return out;
}

AtomCertificate downgrade_check(const AtomCandidate& c, double alpha, const TGrid& tg,
                                std::span<const Point> xgrid) {
  if (!(alpha > 0.0) || !(alpha < c.beta))
    throw std::invalid_argument("downgrade_check: need 0 < alpha < beta");
  AtomCandidate lowered = c;
  lowered.beta = alpha;
  return check_beta_atom(lowered, tg, xgrid);
}

AtomCertificate downgrade_check(const AtomCandidate& c, double alpha) {
  auto xs = default_atom_xgrid(c);
  return downgrade_check(c, alpha, default_atom_tgrid(c), xs);
}

AtomCandidate normalize_to_standard(const AtomCandidate& c) {
  const int d = c.a.dim();
  AtomCandidate out;
  out.beta = c.beta;
  out.Q = {Point(d, -1.0), 2.0};
  out.a = dilate(c.a, c.Q.center(), 2.0 / c.Q.side);
  return out;
}

double AtomicDecomposition::budget() const {
  double s = 0.0;
  for (const auto& t : terms) s += std::abs(t.lambda);
  return s;
}

void add_term(AtomicDecomposition& dec, double lambda, AtomCandidate atom) {
  auto cert = check_beta_atom(atom);
  dec.terms.push_back({lambda, std::move(atom), std::move(cert)});
}

namespace {

struct TestCube {
  Point lo, hi;
};

double pair(const GridMeasure& mu, const TestCube& q, double w) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto x = mu.position(i);
    double phi = 1.0;
    for (std::size_t k = 0; k < q.lo.size(); ++k)
      phi *= 0.5 * (std::erf((x[k] - q.lo[k]) / w) - std::erf((x[k] - q.hi[k]) / w));
    s += mu.weight(i) * phi;
  }
  return s;
}

}  // namespace

DsBound ds_norm_upper_bound(const AtomicDecomposition& dec, const GridMeasure& target,
                            double tolerance) {
  DsBound out;
  out.all_certified = true;
  for (const auto& t : dec.terms) {
    if (std::abs(t.atom.beta - dec.terms.front().atom.beta) > 1e-12)
      throw std::invalid_argument("ds_norm_upper_bound: atoms certified at different beta");
    out.all_certified = out.all_certified && t.certificate.passed();
  }
  out.bound = dec.budget();

  std::vector<const GridMeasure*> all{&target};
  for (const auto& t : dec.terms) all.push_back(&t.atom.a);
  const int d = target.dim();
  Point lo(d, INFINITY), hi(d, -INFINITY);
  for (auto* m : all) {
    if (m->empty()) continue;
    auto b = m->support_box();
    for (int k = 0; k < d; ++k) {
      lo[k] = std::min(lo[k], b.lo[k]);
      hi[k] = std::max(hi[k], b.hi[k]);
    }
  }
  if (!std::isfinite(lo[0])) {
    out.within_tolerance = true;
    return out;
  }
  double L = 0.0;
  for (int k = 0; k < d; ++k) L = std::max(L, hi[k] - lo[k]);
  L = 1.25 * L + 4 * target.spacing();
  Point corner(d);
  for (int k = 0; k < d; ++k) corner[k] = (lo[k] + hi[k]) / 2 - L / 2;
  const double w = L / 64;

  // Breadth-first dyadic sub-cubes of the enclosing cube.
  std::vector<TestCube> cubes;
  for (int level = 0; cubes.size() < 16; ++level) {
    const std::int64_t n = std::int64_t{1} << level;
    const double s = L / static_cast<double>(n);
    std::int64_t total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    for (std::int64_t f = 0; f < total && cubes.size() < 16; ++f) {
      TestCube q{Point(d), Point(d)};
      std::int64_t r = f;
      for (int k = d - 1; k >= 0; --k) {
        q.lo[k] = corner[k] + s * static_cast<double>(r % n);
        q.hi[k] = q.lo[k] + s;
        r /= n;
      }
      cubes.push_back(std::move(q));
    }
  }
  for (const auto& q : cubes) {
    double v = pair(target, q, w);
    for (const auto& t : dec.terms) v -= t.lambda * pair(t.atom.a, q, w);
    out.residual = std::max(out.residual, std::abs(v));
  }
  out.within_tolerance = out.residual <= tolerance;
  return out;
}

}  // namespace dss
