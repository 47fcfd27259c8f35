#include "dss/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "dss/maximal.hpp"
#include "dss/test_family.hpp"

namespace dss {

namespace {

void check_lattice(const GridMeasure& mu, const DyadicLattice& lat, const char* what) {
  if (lat.dim() != mu.dim())
    throw std::invalid_argument(std::string(what) + ": lattice and measure dimensions differ");
  if (!(lat.side > 0.0)) throw std::invalid_argument(std::string(what) + ": lattice side must be positive");
}

// |mu| summed over the occupied cubes of each level 0..depth.
std::vector<std::map<Index, double>> level_variations(const GridMeasure& mu,
                                                      const DyadicLattice& lat, int depth) {
  std::vector<std::map<Index, double>> out(static_cast<std::size_t>(depth) + 1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = std::abs(mu.weight(i));
    if (w == 0.0) continue;
    const auto x = mu.position(i);
    for (int k = 0; k <= depth; ++k) out[static_cast<std::size_t>(k)][cube_at(lat, k, x).index] += w;
  }
  return out;
}

struct Candidate {
  double ratio;
  double cost;
  double mass;
  DyadicCube cube;
};

std::vector<Candidate> candidates(const std::vector<std::map<Index, double>>& var,
                                  const DyadicLattice& lat, double beta) {
  std::vector<Candidate> c;
  for (std::size_t k = 0; k < var.size(); ++k) {
    const double cost = std::pow(cube_side(lat, static_cast<int>(k)), beta);
    for (const auto& [idx, m] : var[k]) c.push_back({m / cost, cost, m, {static_cast<int>(k), idx}});
  }
  std::sort(c.begin(), c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    if (a.cube.level != b.cube.level) return a.cube.level > b.cube.level;
    return a.cube.index < b.cube.index;
  });
  return c;
}

CaptureResult run_greedy(const std::vector<Candidate>& cand, const DyadicLattice& lat, double delta) {
  double min_cost = std::numeric_limits<double>::infinity();
  for (const auto& c : cand) min_cost = std::min(min_cost, c.cost);
  std::set<DyadicCube> selected;
  std::set<DyadicCube> covered_ancestors;  // strict ancestors of selected cubes
  CaptureResult r;
  std::vector<DyadicCube> cubes;
  for (const auto& c : cand) {
    if (delta - r.cost < min_cost) break;
    if (r.cost + c.cost > delta) continue;
    if (covered_ancestors.count(c.cube)) continue;
    bool nested = false;
    DyadicCube a = c.cube;
    while (true) {
      if (selected.count(a)) {
        nested = true;
        break;
      }
      if (a.level == 0) break;
      a = parent(a);
    }
    if (nested) continue;
    selected.insert(c.cube);
    cubes.push_back(c.cube);
    for (DyadicCube p = c.cube; p.level > 0;) {
      p = parent(p);
      if (!covered_ancestors.insert(p).second) break;
    }
    r.cost += c.cost;
    r.captured += c.mass;
  }
  r.cubes = make_cube_union(lat, std::move(cubes));
  return r;
}

std::vector<double> budgets(int n) {
  std::vector<double> d;
  for (int j = 1; j <= n; ++j) d.push_back(std::ldexp(1.0, -j));
  return d;
}

ModulusCurve curve_from(const std::vector<std::map<Index, double>>& var, const DyadicLattice& lat,
                        double beta, int n_deltas) {
  const auto cand = candidates(var, lat, beta);
  ModulusCurve c;
  c.beta = beta;
  c.deltas = budgets(n_deltas);
  c.captured.assign(c.deltas.size(), 0.0);
  double best = 0.0;
  for (std::size_t j = c.deltas.size(); j-- > 0;) {
    best = std::max(best, run_greedy(cand, lat, c.deltas[j]).captured);
    c.captured[j] = best;
  }
  return c;
}

}  // namespace

CaptureResult greedy_mass_capture(const GridMeasure& mu, const DyadicLattice& lat, double beta,
                                  double delta, int depth) {
  check_lattice(mu, lat, "greedy_mass_capture");
  if (!(beta > 0.0) || beta > mu.dim()) throw std::invalid_argument("greedy_mass_capture: beta must lie in (0, d]");
  if (!(delta > 0.0)) throw std::invalid_argument("greedy_mass_capture: delta must be positive");
  if (depth < 0) throw std::invalid_argument("greedy_mass_capture: depth must be >= 0");
  return run_greedy(candidates(level_variations(mu, lat, depth), lat, beta), lat, delta);
}

ModulusCurve modulus_curve(const GridMeasure& mu, const DyadicLattice& lat, double beta, int depth,
                           int n_deltas) {
  check_lattice(mu, lat, "modulus_curve");
  if (!(beta > 0.0) || beta > mu.dim()) throw std::invalid_argument("modulus_curve: beta must lie in (0, d]");
  if (depth < 0 || n_deltas < 1) throw std::invalid_argument("modulus_curve: bad depth or budget count");
  return curve_from(level_variations(mu, lat, depth), lat, beta, n_deltas);
}

double min_separation(const GridMeasure& mu) {
  const auto& first = mu.first_coords();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = i + 1; j < mu.size() && first[j] - first[i] < best; ++j) {
      const double r = distance(mu.position(i), mu.position(j));
      if (r > 0.0) best = std::min(best, r);
    }
  return best;
}

int resolvable_depth(const GridMeasure& mu, const DyadicLattice& lat) {
  const double sep = min_separation(mu);
  if (!std::isfinite(sep)) return 1;
  return std::max(1, static_cast<int>(std::floor(std::log2(lat.side / sep))));
}

std::vector<double> default_beta_grid(int dim, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("default_beta_grid: step must be positive");
  std::vector<double> b;
  const int n = static_cast<int>(std::floor(dim / step + 1e-9));
  for (int j = 1; j <= n; ++j) b.push_back(j * step);
  return b;
}

DimensionReport lower_dim_estimate(const GridMeasure& mu, const DyadicLattice& lat,
                                   const std::vector<double>& betas, std::optional<int> depth,
                                   double tolerance) {
  check_lattice(mu, lat, "lower_dim_estimate");
  if (betas.empty()) throw std::invalid_argument("lower_dim_estimate: empty beta grid");
  if (!std::is_sorted(betas.begin(), betas.end()))
    throw std::invalid_argument("lower_dim_estimate: beta grid must be increasing");
  for (double b : betas)
    if (!(b > 0.0) || b > mu.dim()) throw std::invalid_argument("lower_dim_estimate: beta must lie in (0, d]");
  DimensionReport r;
  r.betas = betas;
  r.tolerance = tolerance;
  r.total_variation = mu.total_variation();
  r.depth = depth ? *depth : resolvable_depth(mu, lat);
  if (r.depth < 1) throw std::invalid_argument("lower_dim_estimate: depth must be >= 1");
  if (mu.empty() || r.total_variation == 0.0) throw std::invalid_argument("lower_dim_estimate: zero measure");

  const auto var = level_variations(mu, lat, r.depth);
  std::vector<double> log_max(var.size());
  for (std::size_t k = 0; k < var.size(); ++k) {
    double m = 0.0;
    for (const auto& [idx, v] : var[k]) m = std::max(m, v);
    log_max[k] = std::log2(m);
  }
  // Least-squares slope of log2 max |mu|(Q) against k; the beta term adds beta.
  const double n = static_cast<double>(log_max.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < log_max.size(); ++k) {
    const double x = static_cast<double>(k);
    sx += x;
    sy += log_max[k];
    sxx += x * x;
    sxy += x * log_max[k];
  }
  const double s0 = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  for (double b : betas) {
    std::vector<double> row(var.size());
    for (std::size_t k = 0; k < var.size(); ++k)
      row[k] = log_max[k] - b * std::log2(cube_side(lat, static_cast<int>(k)));
    r.level_ratios.push_back(std::move(row));
    const double slope = s0 + b;
    r.slopes.push_back(slope);
    if (slope <= 1e-9) r.beta_hat = b;
    r.curves.push_back(curve_from(var, lat, b, 12));
    if (r.curves.back().captured.back() <= tolerance * r.total_variation) r.beta_hat_modulus = b;
  }
  return r;
}

double choquet_maximal_test(const GridMeasure& mu, const DyadicLattice& lat, double beta, double l) {
  check_lattice(mu, lat, "choquet_maximal_test");
  const int d = mu.dim();
  if (!(beta > 0.0 && beta <= d)) throw std::invalid_argument("choquet_maximal_test: beta must lie in (0, d]");
  if (!(l > 0.0) || l > lat.side) throw std::invalid_argument("choquet_maximal_test: l must lie in (0, l0]");
  const int level = std::max(0, static_cast<int>(std::floor(std::log2(lat.side / l) + 1e-12)));
  CellFunction f{lat, level, {}};
  const auto pts = f.centers();
  const auto m = truncated_dyadic_maximal(mu, lat, d - beta, l, pts);
  f.values = m.values;
  for (auto& v : f.values) v = std::abs(v);
  return choquet_integral(f, beta, 64);
}

std::vector<double> level_sum_partials(const CellFunction& f, double beta, int k_max) {
  double top = 0.0;
  for (double v : f.values) top = std::max(top, v);
  std::vector<double> out;
  if (!(top > 0.0)) return out;
  const int k0 = static_cast<int>(std::ceil(-std::log2(top) - 1e-12));
  double s = 0.0;
  for (int k = k0; k <= k_max; ++k) {
    const double t = std::ldexp(1.0, -k);
    const auto e = level_set(f, std::nextafter(t, 0.0));
    if (!e.empty()) s += t * dyadic_content(e, beta);
    out.push_back(s);
  }
  return out;
}

AtomSumReport atom_sum_dimension_check(const AtomicDecomposition& dec, double beta,
                                       const DyadicLattice& lat, const AtomSumOptions& opt) {
  if (dec.terms.empty()) throw std::invalid_argument("atom_sum_dimension_check: empty decomposition");
  const auto& first = dec.terms.front().atom.a;
  std::vector<PointMass> masses;
  for (const auto& t : dec.terms) {
    if (!t.certificate.passed())
      throw std::invalid_argument("atom_sum_dimension_check: decomposition contains an uncertified atom");
    if (std::abs(t.atom.beta - beta) > 1e-9 || std::abs(t.certificate.beta - beta) > 1e-9)
      throw std::invalid_argument("atom_sum_dimension_check: atoms certified at a different beta");
    const auto& a = t.atom.a;
    if (a.dim() != first.dim() || a.spacing() != first.spacing() || a.origin() != first.origin())
      throw std::invalid_argument("atom_sum_dimension_check: atoms live on different grids");
    for (const auto& pm : a.masses()) masses.push_back({pm.index, t.lambda * pm.weight});
  }
  const GridMeasure mu(first.dim(), first.spacing(), first.origin(), std::move(masses), "atom_sum");
  check_lattice(mu, lat, "atom_sum_dimension_check");
  const int d = mu.dim();
  if (!(beta > 0.0 && beta < d)) throw std::invalid_argument("atom_sum_dimension_check: beta must lie in (0, d)");

  AtomSumReport r;
  r.beta = beta;
  r.lambda_sum = dec.budget();

  CellFunction f{lat, opt.cell_level, {}};
  const auto pts = f.centers();
  const double cell = cube_side(lat, opt.cell_level);
  const double reach = 4.0 * (mu.support_diameter() + lat.side * std::sqrt(static_cast<double>(d)));
  const TGrid tg(0.25 * cell * cell, reach * reach, opt.nodes_per_decade);
  const auto m = grand_maximal(mu, standard_family(d), d - beta, pts, tg);
  f.values = m.values;
  r.choquet = choquet_integral(f, beta, 64);
  r.ratio = r.lambda_sum > 0.0 ? r.choquet / r.lambda_sum : 0.0;
  r.bound_ok = !(opt.bound > 0.0) || r.ratio <= opt.bound;
  r.level_sums = level_sum_partials(f, beta);

  if (!mu.empty() && mu.total_variation() > 0.0) {
    r.dimension = lower_dim_estimate(mu, lat, default_beta_grid(d));
    r.dimension_ok = r.dimension.beta_hat >= beta - opt.dimension_slack;
  } else {
    r.dimension_ok = false;
  }
  return r;
}

}  // namespace dss
