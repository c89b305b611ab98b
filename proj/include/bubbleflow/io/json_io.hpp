#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "bubbleflow/io/csv.hpp"
#include "bubbleflow/modulation/fit.hpp"
#include "bubbleflow/spectral/coercivity.hpp"

namespace bubbleflow {

inline constexpr const char* tool_version = "0.3.0";

namespace io {

using json = nlohmann::json;

/// Non-finite doubles become the strings "inf", "-inf", "nan" (JSON has no literal for them).
inline json num(double x) { return std::isfinite(x) ? json(x) : json(fmt(x)); }

inline double num_from(const json& j) { return j.is_string() ? parse_double(j.get<std::string>()) : j.get<double>(); }

/// 64-bit FNV-1a, printed as 16 hex digits.
inline std::string fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline json to_json(const BubbleConfig& c) {
  json s = json::array();
  for (double x : c.scales) s.push_back(x);
  return {{"M", c.size()}, {"signs", c.signs}, {"scales", s}};
}

inline BubbleConfig config_from_json(const json& j) {
  BubbleConfig c;
  c.signs = j.at("signs").get<std::vector<int>>();
  c.scales = j.at("scales").get<std::vector<double>>();
  c.validate();
  return c;
}

inline json to_json(const ProximityReport& r, int dim) {
  return {{"schema", "bubbleflow.proximity/1"},
          {"value", r.value},
          {"config", to_json(r.config)},
          {"window", {num(r.r_lo), num(r.r_hi)}},
          {"lower_scale", num(r.lower_scale)},
          {"upper_scale", num(r.upper_scale)},
          {"ratio_sum", r.ratio_sum(dim)},
          {"evaluations", r.evaluations}};
}

inline json to_json(const ModulationState& s) {
  return {{"schema", "bubbleflow.modulation/1"},
          {"config", to_json(s.config)},
          {"g_enorm", enorm(s.g)},
          {"a_minus", s.a_minus},
          {"ortho_residuals", s.ortho_residuals},
          {"iterations", s.iterations},
          {"converged", s.converged},
          {"singular", s.singular},
          {"condition", num(s.condition)},
          {"tolerance", s.tolerance}};
}

inline json to_json(const CollisionIntervalReport& r) {
  json iv = json::array();
  for (const auto& c : r.intervals)
    iv.push_back({{"a", c.a}, {"b", c.b}, {"t", c.times}, {"d", c.d}, {"rho", c.rho}, {"d_K", c.d_k}});
  return {{"schema", "bubbleflow.collisions/1"},
          {"K", r.k},
          {"N", r.n},
          {"epsilon", r.epsilon},
          {"eta", r.eta},
          {"intervals", iv}};
}

inline json to_json(const SolverConfig& c) {
  return {{"t_end", c.t_end},
          {"dt_init", c.dt_init},
          {"dt_min", c.dt_min},
          {"dt_max", c.dt_max},
          {"tolerance", c.tolerance},
          {"blowup_threshold", c.blowup_threshold},
          {"snapshot_every", c.snapshot_every},
          {"stability_factor", c.stability_factor},
          {"adaptive", c.adaptive},
          {"boundary", "dirichlet"}};
}

/// Computed constants for one dimension: kappa^2, the calibrated c0, eta and the Z profile.
struct ConstantsManifest {
  int dim = 0;
  GridSpec grid;
  double kappa2 = 0.0;
  double c0 = 0.0;
  double min_ratio = 0.0;
  double eta = 0.1;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
  Bump z_first, z_second;
  double z_beta = 0.0, z_sign = 1.0;
  std::string provenance;
};

inline ConstantsManifest make_constants(const SpectrumReport& spec, const ZProfile& z, const CoercivityCalibration& cal,
                                        double eta, const std::string& provenance) {
  ConstantsManifest m;
  m.dim = spec.dim;
  m.grid = spec.eigen.y.grid().spec();
  m.kappa2 = spec.kappa2;
  m.c0 = cal.c0;
  m.min_ratio = cal.min_ratio;
  m.eta = eta;
  m.samples = cal.samples;
  m.seed = cal.seed;
  m.z_first = z.first();
  m.z_second = z.second();
  m.z_beta = z.beta();
  m.z_sign = z.sign();
  m.provenance = provenance;
  return m;
}

inline json to_json(const ConstantsManifest& m) {
  return {{"schema", "bubbleflow.constants/1"},
          {"D", m.dim},
          {"grid", grid_json(m.grid)},
          {"kappa2", m.kappa2},
          {"c0", m.c0},
          {"c0_min_ratio", m.min_ratio},
          {"eta", m.eta},
          {"z_profile",
           {{"first", {m.z_first.lo, m.z_first.hi}},
            {"second", {m.z_second.lo, m.z_second.hi}},
            {"beta", m.z_beta},
            {"sign", m.z_sign}}},
          {"calibration", {{"samples", m.samples}, {"seed", m.seed}}},
          {"provenance", m.provenance},
          {"tool_version", tool_version}};
}

inline ConstantsManifest constants_from_json(const json& j) {
  ConstantsManifest m;
  try {
    if (j.at("schema") != "bubbleflow.constants/1") throw ConfigError("constants: unsupported schema");
    m.dim = j.at("D").get<int>();
    m.grid = grid_from_json(j.at("grid"));
    m.kappa2 = j.at("kappa2").get<double>();
    m.c0 = j.at("c0").get<double>();
    m.min_ratio = j.value("c0_min_ratio", 2.0 * m.c0);
    m.eta = j.at("eta").get<double>();
    const auto& z = j.at("z_profile");
    m.z_first = {z.at("first")[0].get<double>(), z.at("first")[1].get<double>()};
    m.z_second = {z.at("second")[0].get<double>(), z.at("second")[1].get<double>()};
    m.z_beta = z.at("beta").get<double>();
    m.z_sign = z.at("sign").get<double>();
    m.samples = j.at("calibration").at("samples").get<std::size_t>();
    m.seed = j.at("calibration").at("seed").get<std::uint64_t>();
    m.provenance = j.value("provenance", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("constants: ") + e.what());
  }
  return m;
}

/// A constants file may hold one manifest or an array of them (one per dimension).
inline std::optional<ConstantsManifest> load_constants(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("constants file " + path + ": " + e.what());
  }
  if (!j.is_array()) j = json::array({j});
  for (const auto& e : j) {
    auto m = constants_from_json(e);
    if (m.dim == dim) return m;
  }
  return std::nullopt;
}

/// Merges `m` into the file at `path`, replacing an entry with the same D.
inline void store_constants(const std::string& path, const ConstantsManifest& m) {
  json all = json::array();
  {
    std::ifstream in(path);
    if (in) {
      try {
        all = json::parse(in);
      } catch (const json::exception&) {
        all = json::array();
      }
      if (!all.is_array()) all = json::array({all});
    }
  }
  json out = json::array();
  for (const auto& e : all)
    if (e.value("D", 0) != m.dim) out.push_back(e);
  out.push_back(to_json(m));
  std::sort(out.begin(), out.end(), [](const json& a, const json& b) { return a.value("D", 0) < b.value("D", 0); });
  std::ofstream os(path);
  os << out.dump(2) << '\n';
}

} // namespace io
} // namespace bubbleflow
