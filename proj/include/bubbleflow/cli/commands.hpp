#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bubbleflow/cli/checks.hpp"
#include "bubbleflow/cli/config.hpp"
#include "bubbleflow/io/svg.hpp"

namespace bubbleflow::cli {

namespace fs = std::filesystem;

enum ExitCode { exit_ok = 0, exit_check_failed = 1, exit_config = 2, exit_solver = 3 };

/// Flags that override the config file; unset ones leave it alone.
struct Overrides {
  std::optional<std::string> config;
  std::optional<int> dimension;
  std::optional<std::size_t> grid_points;
  std::optional<double> r_max;
  std::optional<std::string> grading;
  std::optional<double> grid_ratio;
  std::optional<double> t_max, dt_init, dt_min, blowup_threshold, snapshot_every;
  std::optional<std::string> initial;
  std::optional<double> amplitude, width;
  std::vector<double> scales;
  std::vector<std::string> signs;
  std::optional<std::string> file;
  std::optional<std::string> output_dir;
  bool plots = false;
  std::optional<std::size_t> n_max;
  std::vector<double> collisions;

  void add_grid(CLI::App* app) {
    app->add_option("--dimension,-D", dimension, "spatial dimension D >= 3");
    app->add_option("--grid-points", grid_points, "number of grid cells");
    app->add_option("--r-max", r_max, "outer radius");
    app->add_option("--grading", grading, "uniform | geometric")->check(CLI::IsMember({"uniform", "geometric"}));
    app->add_option("--grid-ratio", grid_ratio, "cell growth factor of a geometric grid");
    app->add_option("--output-dir,-o", output_dir, "output directory");
  }

  void add_run(CLI::App* app) {
    app->add_option("--config,-c", config, "JSON config file (flags override it)");
    add_grid(app);
    app->add_option("--t-max", t_max, "final time");
    app->add_option("--dt-init", dt_init, "initial time step");
    app->add_option("--dt-min", dt_min, "smallest time step before flagging blow-up");
    app->add_option("--blowup-threshold", blowup_threshold, "sup-norm blow-up threshold");
    app->add_option("--snapshot-every", snapshot_every, "snapshot cadence in t");
    app->add_option("--initial", initial, "bubble | scaled-bubble | two-bubble | gaussian | from-file");
    app->add_option("--amplitude", amplitude, "amplitude a of a*W or the gaussian");
    app->add_option("--width", width, "gaussian width");
    app->add_option("--scales", scales, "bubble scales, comma separated")->delimiter(',');
    app->add_option("--signs", signs, "bubble signs (+,- or 1,-1), comma separated")->delimiter(',');
    app->add_option("--file", file, "field CSV for from-file");
    app->add_option("--n-max", n_max, "largest bubble count tried by the analyzer");
    app->add_flag("--plots", plots, "write SVG figures");
    app->add_option("--collisions", collisions, "eps,eta[,K]: scan the timeline for collision intervals")
        ->delimiter(',')
        ->expected(2, 3);
  }

  RunConfig resolve() const {
    RunConfig c;
    if (config) c = load_config(*config);
    if (dimension) c.dimension = *dimension;
    c.grid.dimension = c.dimension;
    if (grid_points) c.grid.points = *grid_points;
    if (r_max) c.grid.r_max = *r_max;
    if (grading) c.grid.grading = *grading == "uniform" ? Grading::uniform : Grading::geometric;
    if (grid_ratio) c.grid.ratio = *grid_ratio;
    if (t_max) c.solver.t_end = *t_max;
    if (dt_init) c.solver.dt_init = *dt_init;
    if (dt_min) c.solver.dt_min = *dt_min;
    if (blowup_threshold) c.solver.blowup_threshold = *blowup_threshold;
    if (snapshot_every) c.solver.snapshot_every = *snapshot_every;
    if (initial) c.initial.kind = *initial;
    if (amplitude) c.initial.amplitude = *amplitude;
    if (width) c.initial.width = *width;
    if (!scales.empty()) {
      c.initial.scales = scales;
      if (signs.empty()) c.initial.signs.assign(scales.size(), 1);
    }
    if (!signs.empty()) {
      c.initial.signs.clear();
      for (const auto& s : signs) {
        if (s == "+" || s == "1" || s == "+1")
          c.initial.signs.push_back(1);
        else if (s == "-" || s == "-1")
          c.initial.signs.push_back(-1);
        else
          throw ConfigError("--signs: expected + or -, got '" + s + "'");
      }
    }
    if (file) c.initial.file = *file;
    if (output_dir) c.output_dir = *output_dir;
    if (plots) c.plots = true;
    if (n_max) c.n_max = *n_max;
    validate(c);
    return c;
  }
};

struct CollisionRequest {
  double eps = 0.0, eta = 0.0;
  std::size_t k = 0;
};

inline std::optional<CollisionRequest> collision_request(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  if (v.size() < 2 || v.size() > 3) throw ConfigError("--collisions: expected eps,eta[,K]");
  CollisionRequest r{v[0], v[1], 0};
  if (v.size() == 3) {
    if (v[2] < 0 || v[2] != std::floor(v[2])) throw ConfigError("--collisions: K must be a non-negative integer");
    r.k = static_cast<std::size_t>(v[2]);
  }
  return r;
}

struct SimulationResult {
  RunManifest manifest;
  std::optional<ResolutionTimeline> timeline;
};

/// evolve + analyze + outputs into `dir`. Throws on solver failure after writing what exists.
inline SimulationResult run_simulation(const RunConfig& cfg, const fs::path& dir, unsigned jobs,
                                       std::optional<CollisionRequest> collisions = std::nullopt) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(dir);
  SimulationResult res;
  auto& m = res.manifest;
  m.config = cfg;
  m.config_hash = config_hash(cfg);
  m.constants = constants_path();

  const auto u0 = initial_field(cfg);
  m.grid = u0.grid().spec();
  const auto tr = evolve(u0, cfg.solver);
  m.termination = tr.termination;
  m.t_final = tr.final_time();
  m.steps = tr.records.empty() ? 0 : tr.records.size() - 1;
  m.rejected = tr.rejected_steps;
  m.blowup = tr.blowup;

  auto emit = [&](const std::string& key, const std::string& name, auto&& writer) {
    std::ofstream os(dir / name);
    if (!os) throw ConfigError("cannot write " + (dir / name).string());
    writer(os);
    m.outputs[key] = name;
  };
  emit("trajectory", "trajectory.csv", [&](std::ostream& os) { io::write_trajectory_csv(os, tr); });
  if (!tr.snapshots.empty())
    emit("final_field", "final_field.csv", [&](std::ostream& os) {
      io::write_field_csv(os, tr.snapshots.back().u, {{"t", tr.snapshots.back().t}});
    });

  if (tr.termination == Termination::nonfinite) {
    m.error = "solver produced non-finite values at t=" + io::fmt(m.t_final);
  } else {
    AnalyzerOptions opt;
    opt.n_max = cfg.n_max;
    opt.jobs = jobs;
    auto tl = analyze(tr, opt);
    tl.outcome = classify(tl, opt);
    m.outcome = to_string(tl.outcome);
    emit("timeline", "timeline.csv", [&](std::ostream& os) { io::write_timeline_csv(os, tl); });
    const std::vector<double> alphas = {0.5, 1.0, 2.0};
    const auto windowed = windowed_energy_scan(tr, alphas, opt.A, tl.blowup ? std::optional<double>(tl.t_plus) : std::nullopt);
    emit("windowed", "windowed.csv", [&](std::ostream& os) { io::write_windowed_csv(os, windowed); });
    if (!tl.rows.empty()) {
      const auto& last = tl.rows.back();
      const RadialField v = tl.fields.back() - tl.u_star;
      const std::size_t n = std::max<std::size_t>(last.n_fit, 1);
      const auto prox = proximity_dM(v, n, opt.search);
      json fs_json = {{"t", last.t}, {"N_fit", last.n_fit}, {"proximity", io::to_json(prox, cfg.dimension)}};
      const auto spec = solve_spectrum(cfg.dimension);
      const auto z = build_z_profile(cfg.dimension, spec.eigen).profile;
      fs_json["modulation"] = io::to_json(fit_modulation(v, prox.config, spec.eigen, z));
      emit("final_state", "final_state.json", [&](std::ostream& os) { os << fs_json.dump(2) << '\n'; });
    }
    if (collisions) {
      const auto rep = detect_collisions(tl, collisions->eps, collisions->eta, collisions->k, opt.search);
      emit("collisions", "collisions.json", [&](std::ostream& os) { os << io::to_json(rep).dump(2) << '\n'; });
    }
    if (tl.blowup)
      emit("u_star", "u_star.csv", [&](std::ostream& os) {
        io::write_field_csv(os, tl.u_star, {{"extraction_radius", tl.u_star_radius}});
      });
    if (cfg.plots) {
      emit("plot_d", "d.svg", [&](std::ostream& os) { io::write_svg(os, io::distance_plot(tl)); });
      emit("plot_scales", "scales.svg", [&](std::ostream& os) { io::write_svg(os, io::scales_plot(tl)); });
      emit("plot_energy", "energy.svg", [&](std::ostream& os) { io::write_svg(os, io::energy_partition_plot(tl)); });
    }
    res.timeline = std::move(tl);
  }
  m.outputs["manifest"] = "manifest.json";
  m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(dir / "manifest.json", to_json(m));
  if (!m.error.empty()) throw NumericalError(m.error);
  return res;
}

inline int cmd_simulate(const Overrides& ov, unsigned jobs, std::ostream& out) {
  const auto cfg = ov.resolve();
  const auto res = run_simulation(cfg, cfg.output_dir, jobs, collision_request(ov.collisions));
  const auto& m = res.manifest;
  out << "termination=" << to_string(m.termination) << " t_final=" << io::fmt(m.t_final) << " steps=" << m.steps;
  if (m.blowup) out << " t_plus=" << io::fmt(m.blowup->t_plus) << " fit_residual=" << io::fmt(m.blowup->fit_residual);
  out << " outcome=" << m.outcome;
  if (res.timeline && !res.timeline->rows.empty())
    out << " N=" << res.timeline->rows.back().n_fit << " d=" << io::fmt(res.timeline->rows.back().d);
  out << " hash=" << m.config_hash << '\n';
  return exit_ok;
}

inline int cmd_spectrum(const Overrides& ov, std::ostream& out) {
  const int D = ov.dimension.value_or(5);
  require_domain(D >= 3, "dimension must be at least 3 (got " + std::to_string(D) + ")");
  EigenGridSpec gs;
  if (ov.grid_points) gs.points = *ov.grid_points;
  if (ov.r_max) gs.r_max = *ov.r_max;
  if (ov.grid_ratio) gs.ratio = *ov.grid_ratio;
  const auto spec = solve_spectrum(D, gs);
  if (spec.negative_count_coarse != 1 || spec.negative_count_fine != 1)
    throw NumericalError("expected exactly one negative eigenvalue, found " + std::to_string(spec.negative_count_coarse) +
                         " (coarse) / " + std::to_string(spec.negative_count_fine) + " (fine)");
  const auto z = build_z_profile(D, spec.eigen);
  const auto cal = calibrate_c0(spec.eigen, z.profile);
  const auto m = io::make_constants(spec, z.profile, cal, 0.1, "bubbleflow spectrum " + std::string(tool_version));
  fs::path path;
  if (auto env = constants_path()) {
    path = *env;
  } else {
    const fs::path dir = ov.output_dir.value_or("bubbleflow_out");
    fs::create_directories(dir);
    path = dir / "constants.json";
  }
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  io::store_constants(path.string(), m);
  out << "D=" << D << " kappa2=" << io::fmt(spec.kappa2) << " negative_eigenvalues=1 Y_LambdaW=" << io::fmt(spec.y_lambda_w)
      << " c0=" << io::fmt(cal.c0) << " constants=" << path.string() << '\n';
  return exit_ok;
}

inline int cmd_check(const Overrides& ov, const std::vector<std::string>& suites, std::size_t samples,
                     const std::optional<std::string>& junit, std::ostream& out) {
  std::vector<std::string> selected = suites.empty() ? suite_names : suites;
  for (const auto& s : selected)
    if (std::find(suite_names.begin(), suite_names.end(), s) == suite_names.end())
      throw ConfigError("--suite: unknown suite '" + s + "'");
  CheckContext ctx;
  ctx.dim = ov.dimension.value_or(5);
  require_domain(ctx.dim >= 3, "dimension must be at least 3 (got " + std::to_string(ctx.dim) + ")");
  GridSpec gs{ctx.dim, ov.grid_points.value_or(1024), ov.r_max.value_or(1e3), Grading::geometric, ov.grid_ratio.value_or(1.01)};
  if (ov.grading && *ov.grading == "uniform") gs.grading = Grading::uniform;
  ctx.grid = make_grid(gs);
  ctx.samples = samples;
  ctx.constants = constants_path();

  std::vector<CheckCase> cases;
  for (const auto& s : selected) {
    auto c = run_suite(s, ctx);
    for (const auto& k : c)
      out << (k.passed ? "PASS " : "FAIL ") << k.suite << "/" << k.name << ": " << k.message << '\n';
    cases.insert(cases.end(), c.begin(), c.end());
  }
  const fs::path report = junit ? fs::path(*junit) : fs::path(ov.output_dir.value_or("bubbleflow_out")) / "check_report.xml";
  if (report.has_parent_path()) fs::create_directories(report.parent_path());
  std::ofstream os(report);
  if (!os) throw ConfigError("cannot write " + report.string());
  write_junit(os, cases);
  std::vector<std::string> failed;
  for (const auto& c : cases)
    if (!c.passed) failed.push_back(c.suite + "/" + c.name);
  out << cases.size() - failed.size() << "/" << cases.size() << " properties passed; report " << report.string() << '\n';
  if (failed.empty()) return exit_ok;
  out << "failing:";
  for (const auto& f : failed) out << ' ' << f;
  out << '\n';
  return exit_check_failed;
}

/// One sweep axis: a dotted config path and its values.
struct SweepAxis {
  std::string path;
  std::vector<json> values;
};

struct SweepSpec {
  json base = json::object();
  std::vector<SweepAxis> axes;  ///< in key order; the last axis varies fastest
  std::string output_dir = "sweep_out";
};

inline constexpr const char* sweep_schema = "bubbleflow.sweep/1";

/// Values are either a list or {"from","to","step"} (inclusive, rounded to 12 significant digits).
inline SweepSpec parse_sweep(const json& j) {
  SweepSpec s;
  if (!j.is_object()) throw ConfigError("sweep: expected an object");
  if (j.value("schema", std::string(sweep_schema)) != sweep_schema) throw ConfigError("sweep.schema: unsupported");
  for (const auto& [k, v] : j.items())
    if (k != "schema" && k != "base" && k != "axes" && k != "output_dir") throw ConfigError("sweep." + k + ": unknown field");
  if (j.contains("base")) s.base = j.at("base");
  if (j.contains("output_dir")) {
    if (!j.at("output_dir").is_string()) throw ConfigError("sweep.output_dir: expected a string");
    s.output_dir = j.at("output_dir").get<std::string>();
  }
  if (!j.contains("axes") || !j.at("axes").is_object() || j.at("axes").empty())
    throw ConfigError("sweep.axes: at least one axis is required");
  for (const auto& [k, v] : j.at("axes").items()) {
    SweepAxis ax{k, {}};
    if (v.is_array()) {
      for (const auto& e : v) ax.values.push_back(e);
    } else if (v.is_object()) {
      try {
        const double from = v.at("from").get<double>(), to = v.at("to").get<double>(), step = v.at("step").get<double>();
        if (!(step > 0.0) || to < from) throw ConfigError("sweep.axes." + k + ": need step > 0 and to >= from");
        const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9)) + 1;
        for (std::size_t i = 0; i < n; ++i) {
          char buf[32];
          std::snprintf(buf, sizeof buf, "%.12g", from + static_cast<double>(i) * step);
          ax.values.push_back(std::stod(buf));
        }
      } catch (const json::exception&) {
        throw ConfigError("sweep.axes." + k + ": expected a list or {from, to, step}");
      }
    } else {
      throw ConfigError("sweep.axes." + k + ": expected a list or {from, to, step}");
    }
    if (ax.values.empty()) throw ConfigError("sweep.axes." + k + ": empty axis");
    s.axes.push_back(std::move(ax));
  }
  return s;
}

inline json::json_pointer axis_pointer(const std::string& dotted) {
  std::string p;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const auto dot = dotted.find('.', start);
    p += "/" + dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return json::json_pointer(p);
}

struct SweepCell {
  std::size_t index = 0;
  std::vector<json> values;
  RunConfig config;
  std::string dir;
  std::string outcome = "error";
  std::string termination;
  std::string error;
  double t_final = 0.0, t_plus = 0.0, fit_residual = 0.0, final_d = 0.0, enorm_ratio = 0.0;
  std::size_t final_n = 0;
};

inline std::string cell_value(const json& v) { return v.is_number() ? io::fmt(v.get<double>()) : v.is_string() ? v.get<std::string>() : v.dump(); }

inline int cmd_sweep(const std::string& spec_path, const Overrides& ov, unsigned jobs, std::ostream& out, std::ostream& err) {
  std::ifstream in(spec_path);
  if (!in) throw ConfigError("sweep spec " + spec_path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError(spec_path + ": " + detail::locate(ss.str(), e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON");
  }
  auto spec = parse_sweep(j);
  if (ov.output_dir) spec.output_dir = *ov.output_dir;

  // Expand the Cartesian product and validate every cell before running any.
  std::vector<SweepCell> cells;
  std::vector<std::size_t> idx(spec.axes.size(), 0);
  for (;;) {
    SweepCell c;
    c.index = cells.size();
    json cj = spec.base;
    for (std::size_t a = 0; a < spec.axes.size(); ++a) {
      c.values.push_back(spec.axes[a].values[idx[a]]);
      try {
        cj[axis_pointer(spec.axes[a].path)] = spec.axes[a].values[idx[a]];
      } catch (const json::exception& e) {
        throw ConfigError("sweep.axes." + spec.axes[a].path + ": " + e.what());
      }
    }
    RunConfig rc;
    apply_json(rc, cj);
    rc.grid.dimension = rc.dimension;
    validate(rc);
    c.config = rc;
    char name[32];
    std::snprintf(name, sizeof name, "cell_%04zu", c.index);
    c.dir = (fs::path("cells") / name).string();
    cells.push_back(std::move(c));
    std::size_t a = spec.axes.size();
    while (a > 0 && ++idx[a - 1] == spec.axes[a - 1].values.size()) idx[--a] = 0;
    if (a == 0) break;
  }

  const fs::path root = spec.output_dir;
  fs::create_directories(root);
  std::mutex log;
  bubbleflow::detail::parallel_for(cells.size(), std::max(1u, jobs), [&](std::size_t i) {
    auto& c = cells[i];
    try {
      const auto r = run_simulation(c.config, root / c.dir, 1);
      c.outcome = r.manifest.outcome;
      c.termination = to_string(r.manifest.termination);
      c.t_final = r.manifest.t_final;
      if (r.manifest.blowup) {
        c.t_plus = r.manifest.blowup->t_plus;
        c.fit_residual = r.manifest.blowup->fit_residual;
      }
      if (r.timeline && !r.timeline->rows.empty()) {
        const auto& first = r.timeline->rows.front();
        const auto& last = r.timeline->rows.back();
        c.final_d = last.d;
        c.final_n = last.n_fit;
        c.enorm_ratio = first.enorm > 0.0 ? last.enorm / first.enorm : 0.0;
      }
    } catch (const std::exception& e) {
      c.error = e.what();
      c.outcome = "error";
    }
    std::lock_guard<std::mutex> lock(log);
    out << c.dir << ": " << c.outcome << (c.error.empty() ? "" : " (" + c.error + ")") << '\n';
  });

  std::ofstream table(root / "phase_table.csv");
  table << "cell";
  for (const auto& a : spec.axes) table << ',' << a.path;
  table << ",outcome,termination,t_final,t_plus,fit_residual,final_d,final_N,enorm_ratio,config_hash\n";
  std::size_t failed = 0;
  json index = json::array();
  for (const auto& c : cells) {
    table << c.index;
    for (const auto& v : c.values) table << ',' << cell_value(v);
    table << ',' << c.outcome << ',' << c.termination << ',' << io::fmt(c.t_final) << ',' << io::fmt(c.t_plus) << ','
          << io::fmt(c.fit_residual) << ',' << io::fmt(c.final_d) << ',' << c.final_n << ',' << io::fmt(c.enorm_ratio)
          << ',' << config_hash(c.config) << '\n';
    if (!c.error.empty()) ++failed;
    index.push_back({{"cell", c.index}, {"dir", c.dir}, {"outcome", c.outcome}, {"config_hash", config_hash(c.config)}});
  }
  json axes = json::object();
  for (const auto& a : spec.axes) axes[a.path] = a.values;
  write_json(root / "sweep_manifest.json", {{"schema", "bubbleflow.sweep_manifest/1"},
                                           {"tool_version", tool_version},
                                           {"spec_hash", io::fnv1a(spec.base.dump() + axes.dump())},
                                           {"axes", axes},
                                           {"cells", index},
                                           {"phase_table", "phase_table.csv"}});
  out << cells.size() - failed << "/" << cells.size() << " cells completed; phase table " << (root / "phase_table.csv").string() << '\n';
  if (failed) {
    err << failed << " cell(s) failed\n";
    return exit_solver;
  }
  return exit_ok;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Numerical lab for the energy-critical nonlinear heat equation"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);
  unsigned jobs = 1;

  Overrides sim, spec, chk, swp;
  auto* s_sim = app.add_subcommand("simulate", "evolve initial data, analyze the timeline, write CSV/JSON/SVG");
  sim.add_run(s_sim);
  s_sim->add_option("--jobs,-j", jobs, "worker threads for the analyzer");

  auto* s_spec = app.add_subcommand("spectrum", "negative eigenvalue of the linearized operator; writes constants");
  s_spec->add_option("--dimension,-D", spec.dimension, "spatial dimension D >= 3");
  s_spec->add_option("--grid-points", spec.grid_points, "eigen-grid cells (coarse level)");
  s_spec->add_option("--r-max", spec.r_max, "eigen-grid outer radius");
  s_spec->add_option("--grid-ratio", spec.grid_ratio, "eigen-grid growth factor");
  s_spec->add_option("--output-dir,-o", spec.output_dir, "output directory when BUBBLEFLOW_CONSTANTS is unset");

  std::vector<std::string> suites;
  std::size_t samples = 100;
  std::optional<std::string> junit;
  auto* s_chk = app.add_subcommand("check", "run the inequality and lemma property suites");
  chk.add_grid(s_chk);
  s_chk->add_option("--suite", suites, "suite(s): trapping sobolev hardy coercivity expansion interaction modulation")
      ->delimiter(',');
  s_chk->add_option("--samples", samples, "random fields per property")->check(CLI::PositiveNumber);
  s_chk->add_option("--junit", junit, "JUnit XML report path");

  std::string sweep_file;
  auto* s_swp = app.add_subcommand("sweep", "run a parameter campaign from a JSON sweep spec");
  s_swp->add_option("spec", sweep_file, "sweep spec (JSON)")->required();
  s_swp->add_option("--jobs,-j", jobs, "concurrent cells");
  s_swp->add_option("--output-dir,-o", swp.output_dir, "output directory (overrides the spec)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }
  try {
    if (s_sim->parsed()) return cmd_simulate(sim, jobs, out);
    if (s_spec->parsed()) return cmd_spectrum(spec, out);
    if (s_chk->parsed()) return cmd_check(chk, suites, samples, junit, out);
    if (s_swp->parsed()) return cmd_sweep(sweep_file, swp, jobs, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericalError& e) {
    err << "solver error: " << e.what() << '\n';
    return exit_solver;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_solver;
  }
  return exit_config;
}

} // namespace bubbleflow::cli
