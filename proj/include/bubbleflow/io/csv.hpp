#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bubbleflow/analyzer/timeline.hpp"

namespace bubbleflow::io {

/// Shortest round-trip decimal form; identical bits give identical text.
inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return infinity;
  if (s == "-inf") return -infinity;
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
  return x;
}

inline const std::string trajectory_header = "t,dt,energy,enorm,linf,tension_l2_sq,dissipation_cum,blowup_flag";

inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  os << trajectory_header << '\n';
  for (const auto& r : tr.records)
    os << fmt(r.t) << ',' << fmt(r.dt) << ',' << fmt(r.energy) << ',' << fmt(r.enorm) << ',' << fmt(r.linf) << ','
       << fmt(r.tension_l2_sq) << ',' << fmt(r.dissipation_cum) << ',' << (r.blowup ? 1 : 0) << '\n';
}

inline std::string timeline_header(std::size_t n_max) {
  std::string h = "t,d,N_fit";
  for (std::size_t j = 1; j <= n_max; ++j) h += ",lambda_" + std::to_string(j);
  for (std::size_t j = 1; j <= n_max; ++j) h += ",a_minus_" + std::to_string(j);
  return h + ",ratio_sum,E_inner,E_annulus,E_outer,class_tag";
}

/// Unused lambda/a_minus columns are left empty.
inline void write_timeline_csv(std::ostream& os, const ResolutionTimeline& tl) {
  os << timeline_header(tl.n_max) << '\n';
  const std::string tag = to_string(tl.outcome);
  for (const auto& r : tl.rows) {
    os << fmt(r.t) << ',' << fmt(r.d) << ',' << r.n_fit;
    for (std::size_t j = 0; j < tl.n_max; ++j) os << ',' << (j < r.fitted.size() ? fmt(r.fitted.scales[j]) : "");
    for (std::size_t j = 0; j < tl.n_max; ++j) os << ',' << (j < r.a_minus.size() ? fmt(r.a_minus[j]) : "");
    os << ',' << fmt(r.ratio_sum) << ',' << fmt(r.e_inner) << ',' << fmt(r.e_annulus) << ',' << fmt(r.e_outer) << ','
       << tag << '\n';
  }
}

inline const std::string windowed_header = "t,tau,alpha,E_inner,E_annulus,E_outer";

inline void write_windowed_csv(std::ostream& os, const std::vector<WindowedEnergyRow>& rows) {
  os << windowed_header << '\n';
  for (const auto& r : rows)
    os << fmt(r.t) << ',' << fmt(r.tau) << ',' << fmt(r.alpha) << ',' << fmt(r.inner) << ',' << fmt(r.annulus) << ','
       << fmt(r.outer) << '\n';
}

inline nlohmann::json grid_json(const GridSpec& s) {
  return {{"dimension", s.dimension},
          {"points", s.points},
          {"r_max", s.r_max},
          {"grading", to_string(s.grading)},
          {"ratio", s.ratio}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec s;
  try {
    s.dimension = j.at("dimension").get<int>();
    s.points = j.at("points").get<std::size_t>();
    s.r_max = j.at("r_max").get<double>();
    const auto g = j.at("grading").get<std::string>();
    if (g == "uniform")
      s.grading = Grading::uniform;
    else if (g == "geometric")
      s.grading = Grading::geometric;
    else
      throw ConfigError("grid.grading: unknown grading '" + g + "'");
    s.ratio = j.value("ratio", 1.0);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  return s;
}

/// Field file: "# {json}" header line with D and the grid descriptor (plus `extra`), then r,value rows.
inline void write_field_csv(std::ostream& os, const RadialField& u, const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json head = extra;
  head["D"] = u.dim();
  head["grid"] = grid_json(u.grid().spec());
  os << "# " << head.dump() << '\n' << "r,value\n";
  const auto r = u.grid().nodes();
  for (std::size_t i = 0; i < u.size(); ++i) os << fmt(r[i]) << ',' << fmt(u[i]) << '\n';
}

inline RadialField read_field_csv(std::istream& is, nlohmann::json* header = nullptr) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw ConfigError("field file: missing '# {json}' header line");
  nlohmann::json head;
  try {
    head = nlohmann::json::parse(line.substr(2));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("field file header: ") + e.what());
  }
  const auto grid = make_grid(grid_from_json(head.at("grid")));
  if (!std::getline(is, line) || line != "r,value") throw ConfigError("field file: expected 'r,value' column header");
  std::vector<double> vals;
  std::size_t lineno = 2;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("field file line " + std::to_string(lineno) + ": expected r,value");
    vals.push_back(parse_double(line.substr(comma + 1)));
  }
  if (vals.size() != grid->size())
    throw ConfigError("field file: " + std::to_string(vals.size()) + " rows for a grid of " + std::to_string(grid->size()));
  if (header) *header = head;
  return RadialField(grid, std::move(vals));
}

/// Splits one CSV line (no quoting is ever written).
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

} // namespace bubbleflow::io
