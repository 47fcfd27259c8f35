#include "dss/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dss {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add(std::vector<std::string> row) {
  if (row.size() != columns.size()) throw std::logic_error("Table::add: row width differs from header");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

namespace {

std::vector<std::string> axis_names(const std::string& stem, int d) {
  std::vector<std::string> v;
  for (int k = 0; k < d; ++k) v.push_back(stem + std::to_string(k));
  return v;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    out.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  return out;
}

std::vector<std::vector<std::string>> data_rows(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(split(line));
  }
  return rows;
}

double parse_double(const std::string& s, const std::filesystem::path& path) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw std::runtime_error(path.string() + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> point_cells(std::span<const double> x) {
  std::vector<std::string> v;
  for (double c : x) v.push_back(fmt(c));
  return v;
}

}  // namespace

Table measure_table(const GridMeasure& mu) {
  Table t;
  t.columns = axis_names("index", mu.dim());
  t.columns.push_back("weight");
  for (const auto& pm : mu.masses()) {
    std::vector<std::string> r;
    for (auto i : pm.index) r.push_back(std::to_string(i));
    r.push_back(fmt(pm.weight));
    t.add(std::move(r));
  }
  return t;
}

Json measure_meta(const GridMeasure& mu) {
  return Json{{"dim", mu.dim()}, {"spacing", mu.spacing()}, {"origin", mu.origin()}, {"name", mu.name()}};
}

void write_measure(const std::filesystem::path& csv, const GridMeasure& mu) {
  write_text(csv, measure_table(mu).csv());
  write_text(csv.string() + ".json", measure_meta(mu).dump(2) + "\n");
}

GridMeasure read_measure(const std::filesystem::path& csv) {
  const auto meta = Json::parse(read_text(csv.string() + ".json"));
  const int d = meta.at("dim").get<int>();
  const double h = meta.at("spacing").get<double>();
  const auto origin = meta.at("origin").get<Point>();
  if (d < 1 || static_cast<int>(origin.size()) != d)
    throw std::runtime_error(csv.string() + ".json: dim and origin disagree");
  std::vector<PointMass> masses;
  for (const auto& r : data_rows(csv)) {
    if (static_cast<int>(r.size()) != d + 1) throw std::runtime_error(csv.string() + ": expected index..., weight");
    PointMass pm;
    for (int k = 0; k < d; ++k) pm.index.push_back(std::stoll(r[static_cast<std::size_t>(k)]));
    pm.weight = parse_double(r.back(), csv);
    masses.push_back(std::move(pm));
  }
  return GridMeasure(d, h, origin, std::move(masses), meta.value("name", std::string{}));
}

BallFamily read_balls(const std::filesystem::path& csv) {
  BallFamily f;
  std::size_t width = 0;
  for (const auto& r : data_rows(csv)) {
    if (r.size() < 2) throw std::runtime_error(csv.string() + ": expected center..., radius");
    if (width == 0) width = r.size();
    if (r.size() != width) throw std::runtime_error(csv.string() + ": ragged rows");
    Ball b;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) b.center.push_back(parse_double(r[k], csv));
    b.radius = parse_double(r.back(), csv);
    if (!(b.radius > 0.0)) throw std::runtime_error(csv.string() + ": radius must be positive");
    f.push_back(std::move(b));
  }
  return f;
}

Table heat_table(const HeatField& f) {
  Table t;
  const int d = f.points.empty() ? 1 : static_cast<int>(f.points.front().size());
  t.columns = axis_names("x", d);
  t.columns.insert(t.columns.end(), {"t", "value"});
  const std::size_t nt = f.t_nodes.size();
  for (std::size_t i = 0; i < f.points.size(); ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      auto r = point_cells(f.points[i]);
      r.push_back(fmt(f.t_nodes[j]));
      r.push_back(fmt(f.values[i * nt + j]));
      t.add(std::move(r));
    }
  return t;
}

Table points_table(std::span<const Point> pts, std::span<const double> values) {
  if (pts.size() != values.size()) throw std::invalid_argument("points_table: size mismatch");
  Table t;
  t.columns = axis_names("x", pts.empty() ? 1 : static_cast<int>(pts.front().size()));
  t.columns.push_back("value");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    auto r = point_cells(pts[i]);
    r.push_back(fmt(values[i]));
    t.add(std::move(r));
  }
  return t;
}

Table sampled_table(const SampledField& f) {
  const auto pts = f.grid.points();
  return points_table(pts, f.values);
}

Table maximal_table(const MaximalField& m) {
  Table t;
  t.columns = axis_names("x", m.points.empty() ? 1 : static_cast<int>(m.points.front().size()));
  t.columns.insert(t.columns.end(), {"value", "profile", "scale", "level"});
  for (std::size_t i = 0; i < m.points.size(); ++i) {
    auto r = point_cells(m.points[i]);
    r.push_back(fmt(m.values[i]));
    r.push_back(i < m.profile.size() && !m.profile[i].empty() ? m.profile[i] : "dyadic");
    r.push_back(i < m.scale.size() ? fmt(m.scale[i]) : "");
    r.push_back(i < m.level.size() ? std::to_string(m.level[i]) : "");
    t.add(std::move(r));
  }
  return t;
}

Table cover_table(const ContentCover& c, std::size_t n_input_balls) {
  const std::size_t elements = c.cubes ? c.cubes->size() : c.balls.size();
  std::vector<long long> witness(elements, -1);
  for (std::size_t i = 0; i < std::min(n_input_balls, c.witnesses.size()); ++i) {
    auto& w = witness[c.witnesses[i].element];
    if (w < 0) w = static_cast<long long>(i);
  }
  int d = 1;
  if (c.cubes) d = c.cubes->lattice.dim();
  else if (!c.balls.empty()) d = static_cast<int>(c.balls.front().center.size());
  Table t;
  t.columns = {"type"};
  for (const auto& a : axis_names("x", d)) t.columns.push_back(a);
  t.columns.insert(t.columns.end(), {"size", "witness_ball_id"});
  for (std::size_t e = 0; e < elements; ++e) {
    std::vector<std::string> r;
    if (c.cubes) {
      const auto& q = c.cubes->cubes[e];
      r.push_back("cube");
      for (auto& v : point_cells(cube_corner(c.cubes->lattice, q))) r.push_back(v);
      r.push_back(fmt(cube_side(c.cubes->lattice, q.level)));
    } else {
      r.push_back("ball");
      for (auto& v : point_cells(c.balls[e].center)) r.push_back(v);
      r.push_back(fmt(c.balls[e].radius));
    }
    r.push_back(std::to_string(witness[e]));
    t.add(std::move(r));
  }
  return t;
}

Table modulus_table(const DimensionReport& r) {
  Table t;
  t.columns = {"beta", "delta", "captured_mass"};
  for (const auto& c : r.curves)
    for (std::size_t j = 0; j < c.deltas.size(); ++j) t.add({fmt(c.beta), fmt(c.deltas[j]), fmt(c.captured[j])});
  return t;
}

namespace {

Json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

}  // namespace

Json to_json(const FrostmanCertificate& c) {
  return Json{{"beta", c.beta},
              {"constant", num(c.constant)},
              {"worst_center", c.worst_center},
              {"worst_radius", c.worst_radius},
              {"radii", c.radii.size()},
              {"centers_probed", c.centers_probed}};
}

Json to_json(const AtomCertificate& c) {
  return Json{{"beta", c.beta},
              {"passed", c.passed()},
              {"support_ok", c.support_ok},
              {"cancellation_ok", c.cancellation_ok},
              {"sup_ok", c.sup_ok},
              {"variation_ok", c.variation_ok},
              {"support_overflow", c.support_overflow},
              {"cancellation_residual", c.cancellation_residual},
              {"sup_ratio", num(c.sup_ratio)},
              {"total_variation", c.total_variation},
              {"sup_location", c.sup_location},
              {"sup_t", c.sup_t},
              {"small_t_slope", c.small_t_slope},
              {"sampling",
               {{"x_samples", c.x_samples},
                {"t_min", c.t_min},
                {"t_max", c.t_max},
                {"nodes_per_decade", c.nodes_per_decade}}},
              {"tolerances", {{"cancellation", c.tol.cancellation}, {"sup_slack", c.tol.sup_slack}}}};
}

Json to_json(const DsBound& b) {
  return Json{{"bound", b.bound},
              {"residual", b.residual},
              {"within_tolerance", b.within_tolerance},
              {"all_certified", b.all_certified}};
}

Json to_json(const BesovResult& r) {
  return Json{{"value", num(r.value)},
              {"small_t", num(r.small_t)},
              {"large_t", num(r.large_t)},
              {"upper_tail", num(r.upper_tail)},
              {"tail_exponent", r.tail_exponent},
              {"p", r.p},
              {"t_min", r.t_min},
              {"t_max", r.t_max},
              {"nodes", r.nodes},
              {"flagged", r.flagged}};
}

Json to_json(const DecayFit& f) {
  return Json{{"exponent", f.exponent}, {"residual", f.residual}, {"rms", f.rms},
              {"r_lo", f.r_lo},         {"r_hi", f.r_hi},         {"bins", f.bins},
              {"valid", f.valid}};
}

Json to_json(const ContentCover& c) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& w : c.witnesses) worst = std::min(worst, w.ratio);
  return Json{{"beta", c.beta},
              {"kind", c.cubes ? "cubes" : "balls"},
              {"elements", c.cubes ? c.cubes->size() : c.balls.size()},
              {"sum", c.sum},
              {"c", c.c},
              {"c_prime", c.c_prime},
              {"level", c.level},
              {"swaps", c.swaps},
              {"max_replacement", c.max_replacement},
              {"initial_sum", c.initial_sum},
              {"content_outer", c.content_outer},
              {"content_inner", c.content_inner},
              {"min_witness_ratio", num(worst)}};
}

Json to_json(const DimensionReport& r) {
  Json curves = Json::array();
  for (const auto& c : r.curves) curves.push_back({{"beta", c.beta}, {"captured", c.captured}});
  Json levels = Json::array();
  for (const auto& row : r.level_ratios) levels.push_back(row);
  return Json{{"beta_hat", r.beta_hat},
              {"beta_hat_modulus", r.beta_hat_modulus},
              {"depth", r.depth},
              {"tolerance", r.tolerance},
              {"total_variation", r.total_variation},
              {"betas", r.betas},
              {"slopes", r.slopes},
              {"deltas", r.curves.empty() ? std::vector<double>{} : r.curves.front().deltas},
              {"curves", curves},
              {"level_log2_ratios", levels}};
}

Json to_json(const AtomSumReport& r) {
  return Json{{"beta", r.beta},
              {"lambda_sum", r.lambda_sum},
              {"choquet", r.choquet},
              {"ratio", r.ratio},
              {"bound_ok", r.bound_ok},
              {"dimension_ok", r.dimension_ok},
              {"beta_hat", r.dimension.beta_hat},
              {"level_sums", r.level_sums},
              {"passed", r.passed()}};
}

}  // namespace dss
