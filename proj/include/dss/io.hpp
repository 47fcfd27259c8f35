#pragma once

// CSV and JSON serialization. Numbers are written with %.17g so that equal
// doubles always produce equal bytes.

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dss/atoms.hpp"
#include "dss/content.hpp"
#include "dss/dimension.hpp"
#include "dss/field.hpp"
#include "dss/heat.hpp"
#include "dss/maximal.hpp"
#include "dss/potential.hpp"

namespace dss {

using Json = nlohmann::ordered_json;

std::string fmt(double v);

/// Rectangular table rendered as CSV (no quoting; cells must not contain
/// commas).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string csv() const;
};

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// `index..., weight` rows; the sidecar `<path>.json` holds dim, spacing,
/// origin and name.
Table measure_table(const GridMeasure& mu);
Json measure_meta(const GridMeasure& mu);
void write_measure(const std::filesystem::path& csv, const GridMeasure& mu);
GridMeasure read_measure(const std::filesystem::path& csv);

/// Rows `center..., radius` after a header line.
BallFamily read_balls(const std::filesystem::path& csv);

Table heat_table(const HeatField& f);                 // x..., t, value
Table sampled_table(const SampledField& f);           // x..., value
Table points_table(std::span<const Point> pts, std::span<const double> values);  // x..., value
Table maximal_table(const MaximalField& m);           // x..., value, profile, scale, level
Table cover_table(const ContentCover& c, std::size_t n_input_balls);  // type, center/corner..., size, witness_ball_id
Table modulus_table(const DimensionReport& r);        // beta, delta, captured_mass

Json to_json(const FrostmanCertificate& c);
Json to_json(const AtomCertificate& c);
Json to_json(const DsBound& b);
Json to_json(const BesovResult& r);
Json to_json(const DecayFit& f);
Json to_json(const ContentCover& c);
Json to_json(const DimensionReport& r);
Json to_json(const AtomSumReport& r);

}  // namespace dss
