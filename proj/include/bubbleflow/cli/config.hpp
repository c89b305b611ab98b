#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bubbleflow/io/json_io.hpp"

namespace bubbleflow::cli {

using io::json;

struct InitialData {
  std::string kind = "bubble";  ///< bubble | scaled-bubble | two-bubble | gaussian | from-file
  double amplitude = 1.0;
  std::vector<double> scales{1.0};
  std::vector<int> signs{1};
  double width = 1.0;
  std::string file;
};

struct RunConfig {
  int dimension = 5;
  GridSpec grid{5, 1024, 1e3, Grading::geometric, 1.01};
  SolverConfig solver;
  InitialData initial;
  std::size_t n_max = 3;
  std::string output_dir = "bubbleflow_out";
  bool plots = false;
};

inline const std::vector<std::string> initial_kinds = {"bubble", "scaled-bubble", "two-bubble", "gaussian", "from-file"};

namespace detail {

/// "line L, column C" for a byte offset into `text`.
inline std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

/// Reads members of one JSON object, reporting the dotted field path on any mismatch.
class Fields {
public:
  Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.push_back(key);
    if (!j_.contains(key)) return;
    const auto& v = j_.at(key);
    const auto where = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(where + ": expected true/false, got " + v.dump());
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer, got " + v.dump());
      if constexpr (std::is_unsigned_v<T>)
        if (v.get<long long>() < 0) throw ConfigError(where + ": must be non-negative, got " + v.dump());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(where + ": expected a number, got " + v.dump());
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(where + ": expected a string, got " + v.dump());
    } else {
      if (!v.is_array()) throw ConfigError(where + ": expected an array, got " + v.dump());
      for (std::size_t i = 0; i < v.size(); ++i) {
        const auto& e = v[i];
        using E = typename T::value_type;
        if (std::is_integral_v<E> ? !e.is_number_integer() : !e.is_number())
          throw ConfigError(where + "[" + std::to_string(i) + "]: expected a number, got " + e.dump());
      }
    }
    out = v.get<T>();
  }

  const json& child(const std::string& key) {
    seen_.push_back(key);
    static const json empty = json::object();
    return j_.contains(key) ? j_.at(key) : empty;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), k) == seen_.end()) throw ConfigError(path_ + "." + k + ": unknown field");
  }

private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

} // namespace detail

inline constexpr const char* config_schema = "bubbleflow.config/1";

inline void apply_json(RunConfig& c, const json& j) {
  detail::Fields top(j, "config");
  std::string schema = config_schema;
  top.get("schema", schema);
  if (schema != config_schema) throw ConfigError("config.schema: unsupported '" + schema + "'");
  top.get("dimension", c.dimension);

  detail::Fields g(top.child("grid"), "config.grid");
  g.get("points", c.grid.points);
  g.get("r_max", c.grid.r_max);
  std::string grading = to_string(c.grid.grading);
  g.get("grading", grading);
  if (grading == "uniform")
    c.grid.grading = Grading::uniform;
  else if (grading == "geometric")
    c.grid.grading = Grading::geometric;
  else
    throw ConfigError("config.grid.grading: expected \"uniform\" or \"geometric\", got \"" + grading + "\"");
  g.get("ratio", c.grid.ratio);
  g.finish();

  detail::Fields s(top.child("solver"), "config.solver");
  s.get("t_max", c.solver.t_end);
  s.get("dt_init", c.solver.dt_init);
  s.get("dt_min", c.solver.dt_min);
  s.get("dt_max", c.solver.dt_max);
  s.get("tolerance", c.solver.tolerance);
  s.get("blowup_threshold", c.solver.blowup_threshold);
  s.get("snapshot_every", c.solver.snapshot_every);
  s.finish();

  detail::Fields in(top.child("initial"), "config.initial");
  in.get("kind", c.initial.kind);
  in.get("amplitude", c.initial.amplitude);
  in.get("scales", c.initial.scales);
  in.get("signs", c.initial.signs);
  in.get("width", c.initial.width);
  in.get("file", c.initial.file);
  in.finish();

  detail::Fields an(top.child("analyzer"), "config.analyzer");
  an.get("n_max", c.n_max);
  an.finish();

  detail::Fields out(top.child("output"), "config.output");
  out.get("dir", c.output_dir);
  out.get("plots", c.plots);
  out.finish();
  top.finish();
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file " + path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + detail::locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON");
  }
  apply_json(base, j);
  return base;
}

inline void validate(const RunConfig& c) {
  require_domain(c.dimension >= 3, "dimension must be at least 3 (got " + std::to_string(c.dimension) + ")");
  c.solver.validate();
  if (std::find(initial_kinds.begin(), initial_kinds.end(), c.initial.kind) == initial_kinds.end())
    throw ConfigError("initial.kind: unknown initial data '" + c.initial.kind + "'");
  if (c.initial.kind != "from-file" && c.initial.kind != "gaussian") {
    if (c.initial.scales.empty()) throw ConfigError("initial.scales: at least one scale is required");
    if (c.initial.signs.size() != c.initial.scales.size())
      throw ConfigError("initial.signs: need one sign per scale");
  }
  if (c.initial.kind == "two-bubble" && c.initial.scales.size() != 2)
    throw ConfigError("initial.scales: two-bubble needs exactly two scales");
  if (c.initial.kind == "gaussian" && !(c.initial.width > 0.0)) throw ConfigError("initial.width must be positive");
  if (c.initial.kind == "from-file" && c.initial.file.empty()) throw ConfigError("initial.file: required for from-file");
  if (c.n_max < 1) throw ConfigError("analyzer.n_max must be at least 1");
}

inline json to_json(const InitialData& d) {
  json j = {{"kind", d.kind}};
  if (d.kind == "gaussian") {
    j["amplitude"] = d.amplitude;
    j["width"] = d.width;
  } else if (d.kind == "from-file") {
    j["file"] = d.file;
  } else {
    j["amplitude"] = d.amplitude;
    j["scales"] = d.scales;
    j["signs"] = d.signs;
  }
  return j;
}

/// Canonical form: every field that affects the numbers, keys sorted.
inline json canonical_json(const RunConfig& c) {
  return {{"schema", config_schema},
          {"dimension", c.dimension},
          {"grid", {{"points", c.grid.points}, {"r_max", c.grid.r_max}, {"grading", to_string(c.grid.grading)}, {"ratio", c.grid.ratio}}},
          {"solver",
           {{"t_max", c.solver.t_end},
            {"dt_init", c.solver.dt_init},
            {"dt_min", c.solver.dt_min},
            {"dt_max", c.solver.dt_max},
            {"tolerance", c.solver.tolerance},
            {"blowup_threshold", c.solver.blowup_threshold},
            {"snapshot_every", c.solver.snapshot_every}}},
          {"initial", to_json(c.initial)},
          {"analyzer", {{"n_max", c.n_max}}}};
}

inline std::string config_hash(const RunConfig& c) { return io::fnv1a(canonical_json(c).dump()); }

/// The initial field; from-file data brings its own grid.
inline RadialField initial_field(const RunConfig& c) {
  const auto& d = c.initial;
  if (d.kind == "from-file") {
    std::ifstream in(d.file);
    if (!in) throw ConfigError("initial.file: cannot open " + d.file);
    auto u = io::read_field_csv(in);
    if (u.dim() != c.dimension)
      throw ConfigError("initial.file: field has D=" + std::to_string(u.dim()) + ", run has D=" + std::to_string(c.dimension));
    return u;
  }
  GridSpec gs = c.grid;
  gs.dimension = c.dimension;
  const auto grid = make_grid(gs);
  if (d.kind == "gaussian") {
    const double a = d.amplitude, w = d.width;
    return RadialField::sample(grid, [a, w](double r) { return a * std::exp(-(r / w) * (r / w)); });
  }
  if (d.kind == "bubble") return bubble_field(grid, d.scales.front(), d.signs.front());
  if (d.kind == "scaled-bubble") {
    auto u = bubble_field(grid, d.scales.front(), d.signs.front());
    u *= d.amplitude;
    return u;
  }
  BubbleConfig bc;
  bc.signs = d.signs;
  bc.scales = d.scales;
  auto u = multi_bubble(bc, grid);
  u *= d.amplitude;
  return u;
}

/// Path of the constants manifest named by BUBBLEFLOW_CONSTANTS, if any.
inline std::optional<std::string> constants_path() {
  const char* p = std::getenv("BUBBLEFLOW_CONSTANTS");
  if (!p || !*p) return std::nullopt;
  return std::string(p);
}

inline std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::stringstream ss;
  ss << in.rdbuf();
  return io::fnv1a(ss.str());
}

struct RunManifest {
  std::string config_hash;
  RunConfig config;
  GridSpec grid;  ///< the grid actually used (differs from config.grid for from-file data)
  std::optional<std::string> constants;
  std::map<std::string, std::string> outputs;
  double wall_clock = 0.0;
  Termination termination = Termination::completed;
  double t_final = 0.0;
  std::size_t steps = 0, rejected = 0;
  std::optional<BlowupEstimate> blowup;
  std::string outcome;
  std::string error;
};

inline json to_json(const RunManifest& m) {
  json j = {{"schema", "bubbleflow.manifest/1"},
            {"tool_version", tool_version},
            {"config_hash", m.config_hash},
            {"config", canonical_json(m.config)},
            {"D", m.config.dimension},
            {"grid", io::grid_json(m.grid)},
            {"solver", io::to_json(m.config.solver)},
            {"initial", to_json(m.config.initial)},
            {"outputs", m.outputs},
            {"wall_clock_s", m.wall_clock},
            {"termination",
             {{"reason", to_string(m.termination)}, {"t_final", m.t_final}, {"steps", m.steps}, {"rejected_steps", m.rejected}}}};
  j["constants"] = m.constants ? json{{"path", *m.constants}, {"hash", file_hash(*m.constants)}} : json(nullptr);
  if (m.blowup)
    j["termination"]["blowup"] = {{"t_plus", m.blowup->t_plus},
                                  {"t_plus_fit", io::num(m.blowup->t_plus_fit)},
                                  {"slope", io::num(m.blowup->slope)},
                                  {"fit_residual", io::num(m.blowup->fit_residual)}};
  if (!m.outcome.empty()) j["outcome"] = m.outcome;
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

inline void write_json(const std::filesystem::path& p, const json& j) {
  std::ofstream os(p);
  if (!os) throw ConfigError("cannot write " + p.string());
  os << j.dump(2) << '\n';
}

} // namespace bubbleflow::cli
