#include "dss/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"

#include "dss/atoms.hpp"
#include "dss/content.hpp"
#include "dss/dimension.hpp"
#include "dss/experiments.hpp"
#include "dss/heat.hpp"
#include "dss/io.hpp"
#include "dss/maximal.hpp"
#include "dss/potential.hpp"
#include "dss/test_family.hpp"

namespace fs = std::filesystem;

namespace dss {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

constexpr double kCImpl = 4.0;  // regularized cover sum / inner dyadic content

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Report {
  std::string command;
  Json constants = Json::object();
  Json results = Json::object();
  std::vector<std::string> failures;
  std::vector<std::pair<std::string, Table>> tables;
  std::vector<std::pair<std::string, std::string>> files;  // extra raw outputs

  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

// Options shared by all subcommands; each subcommand binds what it uses.
struct Opts {
  std::string config;
  std::string out;
  std::uint64_t seed = 1;

  // Measure and atom sources.
  std::string measure;
  std::string atom;
  std::string kind;
  int dim = 1;
  int depth = 8;
  int n = 256;
  int count = 40;
  int component = 0;
  double scale = 0.5;
  double spacing = 1.0 / 128;
  std::string name = "atom";

  double beta = kCantorDimension;
  double alpha = 0.5;
  double gamma = 0.5;
  double rho = 0.1;
  double l = 1.0 / 64;
  int k = 0;
  int k_min = 0;
  int k_max = 10;
  int level = 8;
  int points = 64;
  int per_decade = 8;
  double t_min = 0.0;
  double t_max = 0.0;
  double r_min = 0.1;
  double r_max = 10.0;
  double fit_lo = 0.0;
  double fit_hi = 0.0;
  double radius = 8.0;
  double tol = 1e-3;
  std::string route = "kernel";
  std::string balls;
  std::string nu;
  double nu_spacing = 1.0 / 256;
  int thresholds = 64;
  double beta_step = 0.01;
  double tolerance = 0.02;
  int scales = 0;
  double bound = 0.0;
  std::string cover_kind = "cubes";
};

// ---- sources --------------------------------------------------------------

GridMeasure random_measure(int dim, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> idx(0, 255);
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  std::vector<PointMass> m;
  for (int i = 0; i < count; ++i) {
    Index j(static_cast<std::size_t>(dim));
    for (auto& v : j) v = idx(rng);
    m.push_back({j, w(rng)});
  }
  return GridMeasure(dim, 1.0 / 256, Point(dim, 0.0), std::move(m), "random");
}

GridMeasure lebesgue(int dim, int n) {
  const double h = 1.0 / n;
  std::vector<PointMass> m;
  if (dim == 1) {
    for (int i = 0; i < n; ++i) m.push_back({{i}, h});
  } else if (dim == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m.push_back({{i, j}, h * h});
  } else {
    throw std::invalid_argument("lebesgue: dim must be 1 or 2");
  }
  return GridMeasure(dim, h, Point(dim, h / 2), std::move(m), "lebesgue");
}

AtomCandidate atom_of_kind(const Opts& o) {
  const std::string k = o.kind.empty() ? "cantor" : o.kind;
  if (k == "cantor") return make_frostman_atom(o.beta, o.depth);
  if (k == "linf") return make_linf_atom(o.n);
  if (k == "loop") return make_loop_atom(square_loop(), o.component, o.scale, {o.spacing, 0.9});
  if (k == "dirac") return make_dirac_difference(o.beta);
  throw std::invalid_argument("unknown atom kind '" + k + "' (cantor, linf, loop, dirac)");
}

void write_atom(const fs::path& path, const AtomCandidate& a, const std::string& kind) {
  write_text(path, measure_table(a.a).csv());
  Json meta = measure_meta(a.a);
  meta["cube"] = {{"corner", a.Q.corner}, {"side", a.Q.side}};
  meta["beta"] = a.beta;
  meta["kind"] = kind;
  write_text(path.string() + ".json", meta.dump(2) + "\n");
}

AtomCandidate read_atom(const fs::path& path) {
  AtomCandidate a;
  a.a = read_measure(path);
  const auto meta = Json::parse(read_text(path.string() + ".json"));
  if (!meta.contains("cube")) throw std::runtime_error(path.string() + ".json: missing cube");
  a.Q.corner = meta["cube"].at("corner").get<Point>();
  a.Q.side = meta["cube"].at("side").get<double>();
  a.beta = meta.value("beta", 1.0);
  return a;
}

AtomCandidate atom_source(const Opts& o) {
  return o.atom.empty() ? atom_of_kind(o) : read_atom(o.atom);
}

GridMeasure measure_source(const Opts& o) {
  if (!o.measure.empty()) return read_measure(o.measure);
  if (!o.atom.empty()) return read_atom(o.atom).a;
  const std::string k = o.kind.empty() ? "cantor" : o.kind;
  if (k == "cantor") return cantor_measure(o.depth, 1.0);
  if (k == "lebesgue") return lebesgue(o.dim, o.n);
  if (k == "dirac")
    return GridMeasure(o.dim, 1.0 / 1024, Point(o.dim, 0.0), {{Index(o.dim, 307), 1.0}}, "dirac");
  if (k == "random") return random_measure(o.dim, o.count, o.seed);
  if (k == "cantor_atom") return make_frostman_atom(o.beta, o.depth).a;
  if (k == "linf_atom") return make_linf_atom(o.n).a;
  if (k == "loop") return make_loop_atom(square_loop(), o.component, o.scale, {o.spacing, 0.9}).a;
  throw std::invalid_argument("unknown measure kind '" + k +
                              "' (cantor, lebesgue, dirac, random, cantor_atom, linf_atom, loop)");
}

BallFamily ball_source(const Opts& o) {
  if (!o.balls.empty()) return read_balls(o.balls);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  std::uniform_real_distribution<double> lr(std::log(0.01), std::log(0.2));
  BallFamily f;
  for (int i = 0; i < o.count; ++i) {
    Ball b;
    for (int k = 0; k < o.dim; ++k) b.center.push_back(c(rng));
    b.radius = std::exp(lr(rng));
    f.push_back(std::move(b));
  }
  return f;
}

TGrid tgrid_for(const Opts& o, const GridMeasure& mu) {
  const TGrid def = TGrid::for_measure(mu);
  return TGrid(o.t_min > 0 ? o.t_min : def.t_min(), o.t_max > 0 ? o.t_max : def.t_max(), o.per_decade);
}

// Grid of `per_axis` points per axis over the support box padded by `pad`.
std::vector<Point> box_points(const GridMeasure& mu, int per_axis, double pad) {
  if (per_axis < 1) throw std::invalid_argument("points must be >= 1");
  const Box b = mu.empty() ? Box{Point(mu.dim(), 0.0), Point(mu.dim(), 1.0)} : mu.support_box();
  const int d = mu.dim();
  std::vector<Point> pts;
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(per_axis);
  for (std::size_t f = 0; f < total; ++f) {
    Point x(d);
    std::size_t r = f;
    for (int k = d - 1; k >= 0; --k) {
      const auto j = static_cast<double>(r % static_cast<std::size_t>(per_axis));
      r /= static_cast<std::size_t>(per_axis);
      const double lo = b.lo[k] - pad, hi = b.hi[k] + pad;
      x[k] = per_axis == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * j / (per_axis - 1);
    }
    pts.push_back(std::move(x));
  }
  return pts;
}

// Points center + r e_1 at geometric radii.
std::vector<Point> ray_points(const GridMeasure& mu, double r_min, double r_max, int count) {
  if (!(r_min > 0.0 && r_max > r_min) || count < 2) throw std::invalid_argument("ray needs 0 < r-min < r-max and points >= 2");
  Point c(mu.dim(), 0.0);
  if (!mu.empty()) {
    const Box b = mu.support_box();
    for (int k = 0; k < mu.dim(); ++k) c[k] = 0.5 * (b.lo[k] + b.hi[k]);
  }
  std::vector<Point> pts;
  for (int i = 0; i < count; ++i) {
    Point x = c;
    x[0] += r_min * std::pow(r_max / r_min, static_cast<double>(i) / (count - 1));
    pts.push_back(std::move(x));
  }
  return pts;
}

Point support_center(const GridMeasure& mu) {
  Point c(mu.dim(), 0.0);
  if (mu.empty()) return c;
  const Box b = mu.support_box();
  for (int k = 0; k < mu.dim(); ++k) c[k] = 0.5 * (b.lo[k] + b.hi[k]);
  return c;
}

// ---- commands -------------------------------------------------------------

Report cmd_atom_gen(const Opts& o, const fs::path& dir) {
  Report r;
  const auto a = atom_of_kind(o);
  const std::string kind = o.kind.empty() ? "cantor" : o.kind;
  const fs::path path = dir / (o.name + ".csv");
  write_atom(path, a, kind);
  r.results = {{"kind", kind},
               {"file", path.filename().string()},
               {"masses", a.a.size()},
               {"beta", a.beta},
               {"cube", {{"corner", a.Q.corner}, {"side", a.Q.side}}},
               {"total_variation", a.a.total_variation()},
               {"total_mass", a.a.total_mass()}};
  return r;
}

Report cmd_atom_check(const Opts& o, const fs::path&) {
  Report r;
  auto a = atom_source(o);
  const auto cert = check_beta_atom(a);
  r.results["certificate"] = to_json(cert);
  if (a.a.dim() == 1 && std::abs(a.beta - kCantorDimension) < 1e-9)
    r.constants["series_bound_S"] = series_bound(1.0, kCantorDimension, 1);
  r.require(cert.support_ok, "support in Q");
  r.require(cert.cancellation_ok, "cancellation");
  r.require(cert.sup_ok, "heat extension bound");
  r.require(cert.variation_ok, "total variation <= 1");
  return r;
}

Report cmd_heat(const Opts& o, const fs::path&) {
  Report r;
  const auto mu = measure_source(o);
  const auto tg = tgrid_for(o, mu);
  const auto pts = box_points(mu, o.points, 2.0 * std::sqrt(tg.t_max()));
  r.tables.push_back({"field", heat_table(heat_field(mu, pts, tg))});
  Table cons;
  cons.columns = {"t", "grid_sum", "total_mass", "abs_error"};
  const double tv = mu.total_variation();
  double worst = 0.0;
  for (double t : tg.nodes()) {
    const double s = heat_on_grid(mu, t, conservation_grid(mu, t)).grid_sum();
    const double e = std::abs(s - mu.total_mass());
    worst = std::max(worst, e);
    cons.add({fmt(t), fmt(s), fmt(mu.total_mass()), fmt(e)});
  }
  r.tables.push_back({"conservation", std::move(cons)});
  r.results = {{"total_mass", mu.total_mass()}, {"total_variation", tv}, {"max_conservation_error", worst},
               {"t_min", tg.t_min()}, {"t_max", tg.t_max()}, {"nodes", tg.nodes().size()}};
  r.require(worst <= 1e-6 * std::max(tv, 1e-300), "mass conservation within 1e-6 |mu|");
  return r;
}

Report cmd_riesz(const Opts& o, const fs::path&) {
  Report r;
  const auto mu = o.measure.empty() && o.atom.empty() && o.kind.empty()
                      ? GridMeasure(o.dim, 1.0, Point(o.dim, 0.0), {{Index(o.dim, 0), 1.0}}, "dirac")
                      : measure_source(o);
  if (!(o.alpha > 0.0 && o.alpha < mu.dim())) throw std::invalid_argument("alpha must lie in (0, d)");
  const auto cfg = RieszConfig::make(mu.dim(), o.alpha);
  const auto pts = ray_points(mu, o.r_min, o.r_max, o.points);
  const auto kv = riesz_kernel(cfg, mu, pts);
  const auto hv = riesz_heat(cfg, mu, pts);
  Table t;
  t.columns = {};
  for (int k = 0; k < mu.dim(); ++k) t.columns.push_back("x" + std::to_string(k));
  t.columns.insert(t.columns.end(), {"kernel", "heat", "relative_error"});
  double worst = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double rel = std::abs(hv.values[i] - kv[i]) / std::max(std::abs(kv[i]), 1e-300);
    worst = std::max(worst, rel);
    std::vector<std::string> row;
    for (double x : pts[i]) row.push_back(fmt(x));
    row.insert(row.end(), {fmt(kv[i]), fmt(hv.values[i]), fmt(rel)});
    t.add(std::move(row));
  }
  r.tables.push_back({"riesz", std::move(t)});
  r.constants["gamma_normalization"] = riesz_normalization(mu.dim(), o.alpha);
  r.results = {{"alpha", o.alpha}, {"max_relative_error", worst}, {"flagged", hv.flagged}};
  r.require(worst <= o.tol, "kernel and heat routes agree within " + fmt(o.tol));
  return r;
}

Report cmd_besov(const Opts& o, const fs::path&) {
  Report r;
  const auto a = atom_source(o);
  const auto b = heat_besov_functional(a, o.alpha);
  r.results = to_json(b);
  r.require(std::isfinite(b.value), "functional finite");
  r.require(!b.flagged, "quadrature not flagged");
  return r;
}

Report cmd_trace(const Opts& o, const fs::path&) {
  Report r;
  const auto a = atom_source(o);
  const int d = a.a.dim();
  if (!(o.alpha > 0.0 && o.alpha < d)) throw std::invalid_argument("alpha must lie in (0, d)");
  const double s = d - o.alpha;
  const GridMeasure nu = o.nu.empty() ? power_density_measure(d, s, o.radius, o.nu_spacing) : read_measure(o.nu);
  const auto cert = frostman_constant(nu, s, radius_grid(nu.spacing(), o.radius, 4));
  std::vector<Point> pts;
  for (std::size_t i = 0; i < nu.size(); ++i) pts.emplace_back(nu.position(i).begin(), nu.position(i).end());
  std::vector<double> v;
  if (o.route == "heat") {
    const double h = a.a.spacing();
    const double tmax = 4.0 * (o.radius + 1.0);
    for (const auto& hs : heat_sup_field(a.a, o.alpha, pts, TGrid(0.25 * h * h, tmax * tmax, o.per_decade)))
      v.push_back(hs.value);
  } else if (o.route == "kernel") {
    v = riesz_kernel(RieszConfig::make(d, o.alpha), a.a, pts);
  } else {
    throw std::invalid_argument("route must be kernel or heat");
  }
  const double tr = trace_integral(v, nu);
  r.results = {{"alpha", o.alpha}, {"route", o.route}, {"trace", fmt(tr)}, {"nu_certificate", to_json(cert)}};
  r.require(std::isfinite(tr), "trace finite");
  r.require(std::isfinite(cert.constant), "nu Frostman constant finite");
  return r;
}

std::optional<DecayFit> maybe_fit(const Opts& o, const MaximalField& m, const Point& c) {
  if (!(o.fit_lo > 0.0 && o.fit_hi > o.fit_lo)) return std::nullopt;
  return decay_fit(m, c, o.fit_lo, o.fit_hi);
}

Report cmd_maximal(const std::string& which, const Opts& o, const fs::path&) {
  Report r;
  const auto mu = measure_source(o);
  const int d = mu.dim();
  const auto lat = DyadicLattice::unit(d);
  MaximalField m;
  if (which == "dyadic") {
    CellFunction cells{lat, o.level, {}};
    const auto pts = cells.centers();
    m = o.l > 0 && o.k_max < 0 ? truncated_dyadic_maximal(mu, lat, o.gamma, o.l, pts, o.k_min)
                                : dyadic_maximal(mu, lat, o.gamma, o.k_min, o.k_max, pts);
  } else {
    const auto tg = tgrid_for(o, mu);
    const auto pts = o.fit_hi > 0 ? ray_points(mu, o.fit_lo * 0.5, o.fit_hi * 1.5, o.points)
                                  : box_points(mu, o.points, 0.25);
    const auto& fam = standard_family(d);
    m = which == "grand" ? grand_maximal(mu, fam, o.gamma, pts, tg)
                         : anti_local_maximal(mu, fam, o.alpha, o.rho, pts, tg);
    r.constants["family"] = fam.names();
  }
  r.tables.push_back({"field", maximal_table(m)});
  double top = 0.0;
  for (double v : m.values) top = std::max(top, v);
  r.results = {{"points", m.values.size()}, {"max", top}, {"gamma", m.gamma}};
  if (auto f = maybe_fit(o, m, support_center(mu))) {
    r.results["decay_fit"] = to_json(*f);
    r.constants["fitted_exponent"] = f->exponent;
    r.require(f->valid, "decay fit has enough nonzero shells");
  }
  return r;
}

Report cmd_lp(const Opts& o, const fs::path&) {
  Report r;
  const auto mu = measure_source(o);
  const double lo = o.fit_lo > 0 ? o.fit_lo : 4.0;
  const double hi = o.fit_hi > lo ? o.fit_hi : 64.0;
  const auto pts = ray_points(mu, 0.5 * lo, 1.5 * hi, o.points);
  const auto band = lp_band(mu, o.k, pts);
  r.tables.push_back({"band", points_table(pts, band.values)});
  const auto f = decay_fit(pts, band.values, support_center(mu), lo, hi);
  r.results = {{"k", o.k}, {"above_nyquist", band.above_nyquist}, {"decay_fit", to_json(f)}};
  r.constants["fitted_exponent"] = f.exponent;
  r.require(f.valid, "decay fit has enough nonzero shells");
  return r;
}

Report cmd_content(const std::string& which, const Opts& o, const fs::path&) {
  Report r;
  if (which == "choquet") {
    const auto mu = measure_source(o);
    const double v = choquet_maximal_test(mu, DyadicLattice::unit(mu.dim()), o.beta, o.l);
    r.results = {{"beta", o.beta}, {"l", o.l}, {"choquet", v}};
    r.require(std::isfinite(v), "Choquet integral finite");
    return r;
  }
  const auto f = ball_source(o);
  const int d = f.empty() ? o.dim : static_cast<int>(f.front().center.size());
  r.constants["c"] = regularization_c(d, o.beta);
  r.constants["c_prime"] = regularization_c_prime(d, o.beta);
  r.constants["C_impl"] = kCImpl;
  const auto lat = DyadicLattice::unit(d);
  const auto cover = o.cover_kind == "balls" ? ball_cover(f, o.beta, lat) : regularized_cover(f, o.beta, lat);
  if (o.cover_kind != "balls" && o.cover_kind != "cubes") throw std::invalid_argument("cover kind must be cubes or balls");
  r.results = to_json(cover);
  r.results["input_balls"] = f.size();
  if (!f.empty()) r.results["spherical_upper"] = spherical_content_upper(f, o.beta);
  if (which == "cover") {
    r.tables.push_back({"cover", cover_table(cover, f.size())});
    if (o.cover_kind == "cubes" && !f.empty()) {
      r.require(cover.sum <= kCImpl * cover.content_inner, "sum <= C_impl * dyadic content");
      r.require(cover.max_replacement <= (std::size_t{1} << d), "at most 2^d cubes per swap");
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& w : cover.witnesses) worst = std::min(worst, w.ratio);
      r.require(worst >= cover.c * (1 - 1e-12), "every ball witnessed at ratio >= c");
    }
  }
  return r;
}

Report cmd_dim_estimate(const Opts& o, const fs::path&) {
  Report r;
  const auto mu = measure_source(o);
  const auto lat = DyadicLattice::unit(mu.dim());
  std::optional<int> depth;
  if (o.k_max > 0) depth = o.k_max;
  const auto rep = lower_dim_estimate(mu, lat, default_beta_grid(mu.dim(), o.beta_step), depth, o.tolerance);
  r.results = to_json(rep);
  r.tables.push_back({"modulus", modulus_table(rep)});
  Table lv;
  lv.columns = {"beta", "k", "log2_max_ratio"};
  for (std::size_t b = 0; b < rep.betas.size(); ++b)
    for (std::size_t k = 0; k < rep.level_ratios[b].size(); ++k)
      lv.add({fmt(rep.betas[b]), std::to_string(k), fmt(rep.level_ratios[b][k])});
  r.tables.push_back({"levels", std::move(lv)});
  return r;
}

Report cmd_dim_atomsum(const Opts& o, const fs::path&) {
  Report r;
  Thm18Params p;
  p.depth = o.depth;
  p.bound = o.bound > 0 ? o.bound : p.bound;
  p.cell_level = o.level;
  AtomicDecomposition dec;
  const double beta = kCantorDimension;
  if (o.count == 1) {
    add_term(dec, 1.0, make_frostman_atom(beta, p.depth));
  } else if (o.count == 4) {
    const auto atom = make_frostman_atom(beta, p.depth);
    auto small = atom;
    small.a = dilate(atom.a, {0.0}, 0.25);
    const std::int64_t shift = 4 * std::llround(std::pow(3.0, p.depth));
    for (int i = 0; i < 4; ++i) {
      auto c = small;
      c.a = translate_cells(small.a, {shift * i});
      c.Q = {{0.25 * i}, 0.25};
      add_term(dec, 0.25, c);
    }
  } else {
    throw std::invalid_argument("count must be 1 or 4");
  }
  AtomSumOptions opt;
  opt.bound = p.bound;
  opt.cell_level = p.cell_level;
  const auto rep = atom_sum_dimension_check(dec, beta, DyadicLattice::unit(1), opt);
  r.constants["C"] = p.bound;
  r.results = to_json(rep);
  r.require(rep.bound_ok, "Choquet norm <= C sum |lambda|");
  r.require(rep.dimension_ok, "beta_hat >= beta - 0.1");
  return r;
}

Report from_outcome(const Outcome& out) {
  Report r;
  r.results = out.summary;
  r.failures = out.failures;
  r.tables = out.tables;
  return r;
}

Report cmd_verify(const std::string& which, const Opts& o, const fs::path&) {
  if (which == "thm13") {
    Thm13Params p;
    p.alpha = o.alpha;
    if (o.scales > 0) p.scales = o.scales;
    p.cantor_depth = o.depth;
    return from_outcome(verify_thm13(p));
  }
  if (which == "thm14" || which == "thm15") {
    TraceParams p;
    p.cantor_depth = o.depth;
    if (o.scales > 0) p.scales = o.scales;
    if (which == "thm14") p.alpha = o.alpha;
    p.nodes_per_decade = o.per_decade;
    return from_outcome(which == "thm14" ? verify_thm14(p) : verify_thm15(p));
  }
  if (which == "cor16") {
    Cor16Params p;
    p.nodes_per_decade = o.per_decade;
    if (o.bound > 0) p.C = o.bound;
    return from_outcome(verify_cor16(p));
  }
  if (which == "thm18") {
    Thm18Params p;
    p.depth = o.depth;
    if (o.bound > 0) p.bound = o.bound;
    p.cell_level = o.level;
    return from_outcome(verify_thm18(p));
  }
  Thm19Params p;
  p.cantor_depth = o.depth;
  return from_outcome(verify_thm19(p));
}

// ---- plumbing -------------------------------------------------------------

std::string json_scalar(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) return fmt(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw UsageError("config values must be scalars or arrays of scalars");
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> w;
  for (std::string x; in >> x;) w.push_back(x);
  return w;
}

// Merges a JSON config into the argument list. Command-line flags win; the
// config's "command" supplies the subcommand path when none is given.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  Json cfg;
  try {
    cfg = Json::parse(read_text(path));
  } catch (const std::exception& e) {
    throw UsageError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config " + path + ": top level must be an object");
  const bool has_command = !args.empty() && args.front().rfind("-", 0) != 0;
  std::vector<std::string> merged;
  if (!has_command) {
    if (!cfg.contains("command")) throw UsageError("config " + path + ": no subcommand given");
    const auto& c = cfg["command"];
    if (c.is_string()) {
      for (auto& w : split_words(c.get<std::string>())) merged.push_back(w);
    } else if (c.is_array()) {
      for (const auto& w : c) merged.push_back(json_scalar(w));
    } else {
      throw UsageError("config " + path + ": command must be a string or array");
    }
  }
  merged.insert(merged.end(), args.begin(), args.end());
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (key == "out" && std::getenv("DSS_OUT_DIR")) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        merged.push_back(flag);
        merged.push_back(json_scalar(v));
      }
    } else {
      merged.push_back(flag);
      merged.push_back(json_scalar(value));
    }
  }
  return merged;
}

std::string underscore(std::string s) {
  for (auto& c : s)
    if (c == ' ') c = '_';
  return s;
}

Json effective_config(const CLI::App* sub) {
  Json cfg = Json::object();
  auto opts = sub->get_options();
  std::vector<std::pair<std::string, std::string>> kv;
  for (const auto* opt : opts) {
    const std::string nm = opt->get_name();
    if (nm.empty() || nm == "--help" || nm == "-h" || nm == "--out" || nm == "--config") continue;
    std::string v;
    if (opt->count() > 0) {
      const auto& res = opt->results();
      for (std::size_t i = 0; i < res.size(); ++i) v += (i ? " " : "") + res[i];
    } else {
      v = opt->get_default_str();
    }
    kv.push_back({nm.substr(nm.rfind('-') == std::string::npos ? 0 : nm.find_first_not_of('-')), v});
  }
  std::sort(kv.begin(), kv.end());
  for (auto& [k, v] : kv) cfg[k] = v;
  return cfg;
}

int finish(Report& r, const std::string& command, const Json& cfg, const Opts& o, const fs::path& dir,
           std::ostream& out) {
  const std::string stem = underscore(command);
  const std::string cfg_text = Json{{"command", command}, {"config", cfg}}.dump();
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(cfg_text)));
  Json constants = {{"heat_tail_eps", kDefaultTailEps},
                    {"atom_cancellation_tol", AtomTolerances{}.cancellation},
                    {"atom_sup_slack", AtomTolerances{}.sup_slack},
                    {"C_impl", kCImpl},
                    {"atom_sum_C", Thm18Params{}.bound},
                    {"loop_C", Cor16Params{}.C}};
  for (const auto& [k, v] : r.constants.items()) constants[k] = v;
  Json files = Json::array();
  for (const auto& [name, table] : r.tables) {
    const std::string file = stem + "_" + name + ".csv";
    write_text(dir / file, table.csv());
    files.push_back(file);
  }
  const bool passed = r.failures.empty();
  Json report = {{"tool", "dss"},
                 {"version", kToolVersion},
                 {"command", command},
                 {"config", cfg},
                 {"config_hash", hash},
                 {"seed", o.seed},
                 {"constants", constants},
                 {"passed", passed},
                 {"failures", r.failures},
                 {"files", files},
                 {"results", r.results}};
  write_text(dir / (stem + ".json"), report.dump(2) + "\n");
  out << command << ": " << (passed ? "PASS" : "FAIL") << " (" << (dir / (stem + ".json")).string() << ")\n";
  for (const auto& f : r.failures) out << "  failed: " << f << "\n";
  return passed ? 0 : 1;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = merge_config(raw_args);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  Opts o;
  CLI::App app{"Dimension-stable spaces of measures: desk-scale experiments", "dss"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  using Handler = std::function<Report(const Opts&, const fs::path&)>;
  std::map<const CLI::App*, std::pair<std::string, Handler>> handlers;

  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "JSON config file (keys are option names)");
    s->add_option("--out", o.out, "output directory");
    s->add_option("--seed", o.seed, "random seed")->capture_default_str();
  };
  auto source = [&](CLI::App* s) {
    s->add_option("--measure", o.measure, "measure CSV with JSON sidecar");
    s->add_option("--atom", o.atom, "atom CSV written by `atom gen`");
    s->add_option("--kind", o.kind, "built-in measure or atom kind");
    s->add_option("--dim", o.dim, "dimension for built-in kinds")->capture_default_str();
    s->add_option("--depth", o.depth, "construction depth")->capture_default_str();
    s->add_option("--n", o.n, "cells per axis (lebesgue, linf)")->capture_default_str();
    s->add_option("--count", o.count, "number of random masses or balls")->capture_default_str();
    s->add_option("--component", o.component, "loop component")->capture_default_str();
    s->add_option("--scale", o.scale, "loop scale")->capture_default_str();
    s->add_option("--spacing", o.spacing, "loop discretization spacing")->capture_default_str();
    s->add_option("--beta", o.beta, "atom / content exponent")->capture_default_str();
  };
  auto tgrid = [&](CLI::App* s) {
    s->add_option("--t-min", o.t_min, "smallest heat time (0: automatic)")->capture_default_str();
    s->add_option("--t-max", o.t_max, "largest heat time (0: automatic)")->capture_default_str();
    s->add_option("--per-decade", o.per_decade, "t nodes per decade")->capture_default_str();
  };
  auto add = [&](CLI::App* parent, const std::string& name, const std::string& desc, const std::string& cmd,
                 Handler h) {
    auto* s = parent->add_subcommand(name, desc);
    common(s);
    handlers[s] = {cmd, std::move(h)};
    return s;
  };

  // atom
  auto* atom = app.add_subcommand("atom", "generate and certify beta-atoms");
  atom->require_subcommand(1);
  {
    auto* s = add(atom, "gen", "write a standard atom", "atom gen", cmd_atom_gen);
    source(s);
    s->add_option("--name", o.name, "output file stem")->capture_default_str();
    s = add(atom, "check", "certify support, cancellation, heat bound and variation", "atom check", cmd_atom_check);
    source(s);
  }
  // heat
  {
    auto* s = add(&app, "heat", "heat extension field and mass conservation", "heat", cmd_heat);
    source(s);
    tgrid(s);
    s->add_option("--points", o.points, "sample points per axis")->capture_default_str();
  }
  // potential
  auto* pot = app.add_subcommand("potential", "Riesz potentials, Besov functional, traces");
  pot->require_subcommand(1);
  {
    auto* s = add(pot, "riesz", "kernel vs heat route", "potential riesz", cmd_riesz);
    source(s);
    s->add_option("--alpha", o.alpha)->capture_default_str();
    s->add_option("--r-min", o.r_min)->capture_default_str();
    s->add_option("--r-max", o.r_max)->capture_default_str();
    s->add_option("--points", o.points)->capture_default_str();
    s->add_option("--tol", o.tol)->capture_default_str();
    s = add(pot, "besov", "heat-Besov-Lorentz functional of an atom", "potential besov", cmd_besov);
    source(s);
    s->add_option("--alpha", o.alpha)->capture_default_str();
    s = add(pot, "trace", "trace integral against a Frostman measure", "potential trace", cmd_trace);
    source(s);
    s->add_option("--alpha", o.alpha)->capture_default_str();
    s->add_option("--route", o.route, "kernel or heat")->capture_default_str();
    s->add_option("--nu", o.nu, "nu measure CSV (default: radial power density)");
    s->add_option("--radius", o.radius, "extent of the default nu")->capture_default_str();
    s->add_option("--nu-spacing", o.nu_spacing)->capture_default_str();
    s->add_option("--per-decade", o.per_decade)->capture_default_str();
  }
  // maximal
  auto* mx = app.add_subcommand("maximal", "maximal functions and Littlewood-Paley bands");
  mx->require_subcommand(1);
  for (const std::string w : {"dyadic", "grand", "antilocal"}) {
    auto* s = add(mx, w, w + " maximal function", "maximal " + w,
                  [w](const Opts& oo, const fs::path& d) { return cmd_maximal(w, oo, d); });
    source(s);
    s->add_option("--gamma", o.gamma)->capture_default_str();
    if (w == "dyadic") {
      s->add_option("--k-min", o.k_min)->capture_default_str();
      s->add_option("--k-max", o.k_max, "finest level; negative selects truncation at --l")->capture_default_str();
      s->add_option("--l", o.l, "truncation side")->capture_default_str();
      s->add_option("--level", o.level, "sample cell level")->capture_default_str();
    } else {
      tgrid(s);
      s->add_option("--points", o.points)->capture_default_str();
      s->add_option("--fit-lo", o.fit_lo, "decay fit inner radius (0: no fit)")->capture_default_str();
      s->add_option("--fit-hi", o.fit_hi)->capture_default_str();
      if (w == "antilocal") {
        s->add_option("--alpha", o.alpha)->capture_default_str();
        s->add_option("--rho", o.rho)->capture_default_str();
      }
    }
  }
  {
    auto* s = add(mx, "lp", "Littlewood-Paley band and its tail fit", "maximal lp", cmd_lp);
    source(s);
    s->add_option("--k", o.k)->capture_default_str();
    s->add_option("--points", o.points)->capture_default_str();
    s->add_option("--fit-lo", o.fit_lo)->capture_default_str();
    s->add_option("--fit-hi", o.fit_hi)->capture_default_str();
  }
  // content
  auto* ct = app.add_subcommand("content", "Hausdorff contents, covers, Choquet integrals");
  ct->require_subcommand(1);
  for (const std::string w : {"value", "cover", "choquet"}) {
    auto* s = add(ct, w, "content " + w, "content " + w,
                  [w](const Opts& oo, const fs::path& d) { return cmd_content(w, oo, d); });
    source(s);
    if (w == "choquet") {
      s->add_option("--l", o.l, "truncation side")->capture_default_str();
    } else {
      s->add_option("--balls", o.balls, "ball CSV `center..., radius` (default: random family)");
      s->add_option("--type", o.cover_kind, "cubes or balls")->capture_default_str();
    }
  }
  // dim
  auto* dm = app.add_subcommand("dim", "lower Hausdorff dimension");
  dm->require_subcommand(1);
  {
    auto* s = add(dm, "estimate", "modulus curves and beta_hat", "dim estimate", cmd_dim_estimate);
    source(s);
    s->add_option("--k-max", o.k_max, "depth J (<= 0: from the mass separation)");
    s->add_option("--beta-step", o.beta_step)->capture_default_str();
    s->add_option("--tolerance", o.tolerance)->capture_default_str();
    s = add(dm, "atomsum", "Choquet bound and dimension of Cantor atom sums", "dim atomsum", cmd_dim_atomsum);
    s->add_option("--depth", o.depth)->capture_default_str();
    s->add_option("--count", o.count, "1 or 4 atoms")->capture_default_str();
    s->add_option("--bound", o.bound, "C (0: default)")->capture_default_str();
    s->add_option("--level", o.level, "sample cell level")->capture_default_str();
  }
  // verify
  auto* vf = app.add_subcommand("verify", "theorem desk checks");
  vf->require_subcommand(1);
  for (const std::string w : {"thm13", "thm14", "thm15", "cor16", "thm18", "thm19"}) {
    auto* s = add(vf, w, "desk check " + w, "verify " + w,
                  [w](const Opts& oo, const fs::path& d) { return cmd_verify(w, oo, d); });
    s->add_option("--depth", o.depth, "construction depth")->capture_default_str();
    s->add_option("--alpha", o.alpha)->capture_default_str();
    s->add_option("--scales", o.scales, "number of dilation scales (0: default)")->capture_default_str();
    s->add_option("--per-decade", o.per_decade)->capture_default_str();
    s->add_option("--bound", o.bound, "constant C (0: default)")->capture_default_str();
    s->add_option("--level", o.level, "sample cell level")->capture_default_str();
  }

  // Per-command defaults that differ from the shared ones.
  const bool verify_cmd = !args.empty() && args.front() == "verify";
  if (verify_cmd && args.size() > 1) {
    const auto& w = args[1];
    if (w == "thm13") o.depth = 6;
    if (w == "thm14" || w == "thm15") o.alpha = 0.7;
    if (w == "thm18") o.depth = 6;
    if (w == "thm19") o.depth = 10;
  }
  if (args.size() > 1 && args[0] == "dim" && args[1] == "atomsum") {
    o.depth = 6;
    o.count = 1;
  }
  if (args.size() > 1 && args[0] == "dim" && args[1] == "estimate") o.k_max = 0;

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  const CLI::App* chosen = nullptr;
  for (const auto& [s, h] : handlers)
    if (s->parsed()) chosen = s;
  if (!chosen) {
    err << "error: no command selected\n";
    return 2;
  }
  const auto& [command, handler] = handlers.at(chosen);

  fs::path dir = o.out;
  if (dir.empty()) {
    if (const char* env = std::getenv("DSS_OUT_DIR"); env && *env) dir = env;
    else dir = "dss_out";
  }
  try {
    Report r = handler(o, dir);
    return finish(r, command, effective_config(chosen), o, dir, out);
  } catch (const std::invalid_argument& e) {
    err << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dss
