#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodal/brownian_sheet.hpp"
#include "nodal/config.hpp"
#include "nodal/errors.hpp"
#include "nodal/experiments.hpp"
#include "nodal/field_io.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/heatmap.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/nodal_measure.hpp"
#include "nodal/parallel.hpp"
#include "nodal/rng.hpp"
#include "nodal/stats.hpp"

namespace nodal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

const char* tool_version() { return "nodal 0.1.0"; }

namespace {

std::string iso_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// State shared by one invocation: resolved config, outputs, and the manifest.
struct Run {
  std::string command;
  Config config;
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  fs::path out = "out";
  std::vector<std::string> artifacts;
  std::string started;

  void add(const fs::path& p) { artifacts.push_back(p.string()); }

  std::ofstream open(const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    add(p);
    return f;
  }

  void manifest(int code, const std::string& error) const {
    json j;
    j["command"] = command;
    j["config"] = config.entries();
    j["seed"] = seed;
    j["seed_source"] = seed_from_entropy ? "entropy" : "flag";
    j["artifacts"] = artifacts;
    j["tool_version"] = tool_version();
    j["started"] = started;
    j["finished"] = iso_now();
    j["exit_code"] = code;
    j["error"] = error.empty() ? json(nullptr) : json(error);
    j["workers"] = worker_count();
    std::error_code ec;
    fs::create_directories(out, ec);
    std::ofstream f(out / "manifest.json");
    if (f) f << j.dump(2) << '\n';
  }
};

// A subcommand flag bound to a config key. Flags that were given on the
// command line form the top config layer.
struct Binding {
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
  const CLI::App* app = nullptr;
};

struct Bindings {
  std::vector<std::unique_ptr<Binding>> items;

  void bind(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    items.push_back(std::make_unique<Binding>());
    Binding& b = *items.back();
    b.key = key;
    b.app = app;
    b.option = app->add_option(flag, b.value, help + " [" + key + "]");
  }

  Config layer(const CLI::App* app) const {
    Config c;
    for (const auto& b : items) {
      if (b->app == app && b->option->count() > 0) c.set(b->key, b->value);
    }
    return c;
  }
};

void write_lattice_csv(std::ostream& out, const Lattice& lat, const std::string& value_name) {
  const int s = lat.side();
  if (lat.d == 1) {
    out << "t1," << value_name << '\n';
    for (int i = 0; i < s; ++i) out << num(static_cast<double>(i) / lat.m) << ',' << num(lat.at(i)) << '\n';
    return;
  }
  out << "t1,t2," << value_name << '\n';
  for (int j = 0; j < s; ++j) {
    for (int i = 0; i < s; ++i) {
      out << num(static_cast<double>(i) / lat.m) << ',' << num(static_cast<double>(j) / lat.m) << ','
          << num(lat.at(i, j)) << '\n';
    }
  }
}

void field_heatmap(Run& run, const FieldSample& f, const fs::path& path, int scale) {
  std::vector<double> rows;
  const int n = f.grid.n;
  rows.reserve(f.values.size());
  for (int j = n - 1; j >= 0; --j) {
    for (int i = 0; i < n; ++i) rows.push_back(f.at(i, j));
  }
  render_heatmap(rows, n, n, path, scale);
  run.add(path);
  run.add(path.string() + ".json");
}

void lattice_heatmap(Run& run, const Lattice& lat, const fs::path& path, int scale) {
  const auto rows = lattice_rows_top_down(lat);
  render_heatmap(rows, lat.side(), lat.side(), path, scale);
  run.add(path);
  run.add(path.string() + ".json");
}

ExperimentConfig experiment_from(const Run& run) {
  ExperimentConfig e = experiment_config_from(run.config);
  e.seed = run.seed;
  return e;
}

int finish_report(Run& run, const StatsReport& report) {
  for (const auto& p : write_report(report, run.out)) run.add(p);
  int failed = 0;
  for (const auto& q : report.quantities) {
    if (q.criterion == Criterion::info) continue;
    std::printf("%-4s %-48s estimate=%.6g se=%.3g%s\n", q.pass() ? "PASS" : "FAIL", q.name.c_str(), q.estimate, q.se,
                q.p_value ? (" p=" + num(*q.p_value)).c_str() : "");
    failed += q.pass() ? 0 : 1;
  }
  std::printf("%s: %s (%.1f s)\n", report.experiment.c_str(), failed ? "FAIL" : "PASS", report.wall_seconds);
  return failed ? acceptance_failure : ok;
}

int heatmaps_for(Run& run, const ExperimentConfig& e, int count) {
  if (e.d != 2) return ok;
  for (int rep = 0; rep < count; ++rep) {
    const XiField xi = xi_snapshot(e, e.R.front(), rep, e.m);
    lattice_heatmap(run, xi.xi, run.out / ("xi_heatmap_" + std::to_string(rep) + ".png"), 4);
  }
  return ok;
}

// Subcommand bodies.

int cmd_simulate_field(Run& run) {
  const Config& c = run.config;
  const int d = static_cast<int>(c.get_int("field.d", 2));
  const CovarianceModel model = make_model(c.get_string("field.model", "bargmann-fock"), d);
  const GridSpec grid = make_grid(d, c.get_double("field.R", 20.0), c.get_double("field.h", 0.05));
  const std::string method = c.get_string("field.method", "circulant");
  FieldSample f;
  if (model.has_deterministic_field()) {
    f = evaluate_field(model, grid);
  } else if (method == "circulant") {
    f = sample_field(plan_embedding(model, grid), run.seed);
  } else if (method == "spectral") {
    f = sample_field_spectral(model, grid, static_cast<int>(c.get_int("field.waves", 2000)), run.seed);
  } else {
    throw ConfigError("field.method must be circulant or spectral, got " + method);
  }
  write_field(f, run.out / "field.bin");
  run.add(run.out / "field.bin");
  if (d == 2) field_heatmap(run, f, run.out / "field.png", static_cast<int>(c.get_int("output.pixel_scale", 1)));
  std::printf("wrote %zu values (n = %d, h = %.6g)\n", f.values.size(), grid.n, grid.h);
  return ok;
}

int cmd_nodal_field(Run& run) {
  ExperimentConfig e = experiment_from(run);
  validate(e);
  const auto rep = run.config.get_int("field.rep", 0);
  const double R = e.R.front();
  const FieldSample f = replication_field(e, R, rep);
  const IncrementGrid inc = nodal_cells(f, f.grid.n - 1);
  const CovarianceModel model = make_model(e.model, e.d);
  const Normalization norm = normalization(model);
  const XiField xi = center_and_rescale(coarsen(inc, e.m), norm.rho1, norm.gamma2);
  {
    auto out = run.open(run.out / ("xi_" + std::to_string(rep) + ".csv"));
    write_lattice_csv(out, xi.xi, "xi");
  }
  if (e.d == 2) lattice_heatmap(run, xi.xi, run.out / ("xi_heatmap_" + std::to_string(rep) + ".png"), 4);
  json summary{{"R", R},
               {"rep", rep},
               {"nodal_measure", inc.total()},
               {"per_volume", inc.total() / std::pow(R, e.d)},
               {"rho1", norm.rho1},
               {"gamma2", norm.gamma2},
               {"degenerate_nodes", inc.degenerate_nodes}};
  run.open(run.out / "nodal_field.json") << summary.dump(2) << '\n';
  std::printf("nodal measure %.10g (%.6g per unit volume)\n", inc.total(), inc.total() / std::pow(R, e.d));
  return ok;
}

int cmd_gamma2(Run& run, bool crosscheck) {
  const Config& c = run.config;
  if (crosscheck) {
    // The field flags double as experiment settings here.
    for (const char* k : {"model", "d", "h"}) {
      const std::string from = std::string("field.") + k, to = std::string("experiment.") + k;
      if (c.has(from) && !c.has(to)) run.config.set(to, *c.raw(from));
    }
    const ExperimentConfig e = experiment_from(run);
    return finish_report(run, run_gamma2_crosscheck(e));
  }
  const int d = static_cast<int>(c.get_int("field.d", 2));
  const CovarianceModel model = make_model(c.get_string("field.model", "bargmann-fock"), d);
  const int points = static_cast<int>(c.get_int("kac.points", 40));
  const double r_min = c.get_double("kac.r_min", 1e-3), r_max = c.get_double("kac.r_max", 6.0);
  const KacDensityProfile profile = kac_profile(model, r_min, r_max, points);
  {
    auto out = run.open(run.out / "radial_profile.csv");
    out << "r,rho2,F2,err\n";
    for (const auto& e : profile.entries) {
      out << num(e.r) << ',' << num(e.rho2) << ',' << num(e.F2) << ',' << num(e.error) << '\n';
    }
  }
  const Gamma2Result g = gamma2(model);
  json summary{{"model", model.name()},
               {"d", d},
               {"rho1", profile.rho1},
               {"beta", profile.beta},
               {"gamma2", g.gamma2},
               {"integral_of_F2", g.integral_of_F2},
               {"rho1_term", g.rho1_term ? json(*g.rho1_term) : json(nullptr)},
               {"error", g.error},
               {"r_max", g.r_max}};
  run.open(run.out / "gamma2.json") << summary.dump(2) << '\n';
  std::printf("gamma2 = %.10g (error %.2g, r_max %.3g)\n", g.gamma2, g.error, g.r_max);
  return ok;
}

int cmd_experiment(Run& run, ExperimentKind kind) {
  const ExperimentConfig e = experiment_from(run);
  const StatsReport report = run_field_experiments(e, {kind}).front();
  const int code = finish_report(run, report);
  const int maps = static_cast<int>(run.config.get_int("output.heatmaps", 0));
  if (maps > 0 && !e.self_test) heatmaps_for(run, e, maps);
  return code;
}

int cmd_sheet_sample(Run& run) {
  const Config& c = run.config;
  const int n = static_cast<int>(c.get_int("sheet.n", 256)), d = static_cast<int>(c.get_int("sheet.d", 2));
  if (n < 1) throw ConfigError("sheet.n must be at least 1");
  const SheetSample s = sample_sheet(n, d, run.seed);
  {
    auto out = run.open(run.out / "sheet.csv");
    write_lattice_csv(out, s.field, "W");
  }
  if (d == 2) lattice_heatmap(run, s.field, run.out / "sheet.png", std::max(1, 512 / (n + 1)));
  const double corner = d == 1 ? s.field.at(n) : s.field.at(n, n);
  std::printf("W(1%s) = %.10g\n", d == 1 ? "" : ",1", corner);
  return ok;
}

std::pair<CurveParam, CurveParam> curve_from(const Config& c) {
  return {parse_curve_param(c.get_string("curve.a", "inf")), parse_curve_param(c.get_string("curve.b", "inf"))};
}

int cmd_yeh(Run& run) {
  const Config& c = run.config;
  const auto [a, b] = curve_from(c);
  const CurveSpec curve = make_curve(a, b);
  if (c.has("yeh.lambda")) {
    std::printf("%.17g\n", yeh_H(curve, c.get_double("yeh.lambda", 0.0)));
    return ok;
  }
  const auto grid = c.get_doubles("yeh.lambda_grid", parse_doubles("0:3:0.05", "lambda grid"));
  std::ostringstream csv;
  csv << "lambda,H\n";
  for (double l : grid) csv << num(l) << ',' << num(yeh_H(curve, l)) << '\n';
  std::fputs(csv.str().c_str(), stdout);
  if (c.has("output.dir")) run.open(run.out / "yeh.csv") << csv.str();
  return ok;
}

int cmd_sheet_sup(Run& run) {
  const Config& c = run.config;
  const auto [a, b] = curve_from(c);
  const CurveSpec curve = make_curve(a, b);
  const int n = static_cast<int>(c.get_int("sheet.n", 1024));
  const int samples = static_cast<int>(c.get_int("sheet.samples", 100000));
  const int per_segment = static_cast<int>(c.get_int("sheet.curve_samples", 64));
  if (n < 2 || samples < 20) throw ConfigError("sheet-sup needs n >= 2 and at least 20 samples");
  const auto grid = c.get_doubles("yeh.lambda_grid", parse_doubles("0:3:0.05", "lambda grid"));
  const bool boundary = a.infinite && b.infinite;
  std::vector<double> sups(samples);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < samples; ++i) {
    const std::uint64_t s = derive_seed(run.seed, i);
    sups[i] = boundary ? boundary_sup(sample_sheet_edges(n, s)) : sup_on_curve(sample_sheet(n, 2, s).field, curve, per_segment);
  }
  const auto emp = empirical_cdf(sups, grid);
  const KsResult ks = ks_statistic(sups, [&](double l) { return l < 0.0 ? 0.0 : yeh_H(curve, l); });
  std::ostringstream csv;
  csv << "lambda,empirical,theoretical\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv << num(grid[i]) << ',' << num(emp[i]) << ',' << num(yeh_H(curve, grid[i])) << '\n';
  }
  std::fputs(csv.str().c_str(), stdout);
  std::fprintf(stderr, "sup-distance %.5f (KS p = %.3g)\n", ks.D, ks.p_value);
  if (c.has("output.dir")) run.open(run.out / "sheet_sup.csv") << csv.str();
  return ok;
}

int cmd_repro(Run& run) {
  const Config& c = run.config;
  const std::string which = c.get_string("figures.which", "all");
  if (which != "fig1" && which != "fig2" && which != "fig3" && which != "all") {
    throw ConfigError("figures.which must be fig1, fig2, fig3 or all");
  }
  const bool all = which == "all";
  if (all || which == "fig1") {
    // Brownian sheet heatmap and surface data.
    const int n = static_cast<int>(c.get_int("sheet.n", 256));
    const SheetSample s = sample_sheet(n, 2, derive_seed(run.seed, 1));
    lattice_heatmap(run, s.field, run.out / "fig1_sheet_heatmap.png", std::max(1, 512 / (n + 1)));
    auto out = run.open(run.out / "fig1_sheet_surface.csv");
    write_lattice_csv(out, s.field, "W");
  }
  if (all || which == "fig2") {
    // One row per R: field, xi heatmap, xi surface data.
    ExperimentConfig e = experiment_from(run);
    e.d = 2;
    if (!c.has("experiment.R")) e.R = {20.0, 50.0, 80.0};
    if (!c.has("experiment.m")) e.m = 50;
    const CovarianceModel model = make_model(e.model, 2);
    const Normalization norm = normalization(model);
    for (double R : e.R) {
      const GridSpec g = make_grid(2, R, e.h);
      if ((g.n - 1) % e.m != 0) throw ConfigError("m must divide R/h for every R");
      const FieldSample f = replication_field(e, R, 0);
      const std::string tag = "fig2_R" + std::to_string(static_cast<long>(std::lround(R)));
      field_heatmap(run, f, run.out / (tag + "_field.png"), 1);
      const XiField xi = center_and_rescale(coarsen(nodal_cells(f, g.n - 1), e.m), norm.rho1, norm.gamma2);
      lattice_heatmap(run, xi.xi, run.out / (tag + "_xi_heatmap.png"), 8);
      auto out = run.open(run.out / (tag + "_xi_surface.csv"));
      write_lattice_csv(out, xi.xi, "xi");
    }
  }
  if (all || which == "fig3") {
    // The curve L(a,b) and its sup law.
    const CurveParam a = parse_curve_param(c.get_string("curve.a", "2"));
    const CurveParam b = parse_curve_param(c.get_string("curve.b", "3"));
    const CurveSpec curve = make_curve(a, b);
    {
      auto out = run.open(run.out / "fig3_curve.csv");
      out << "x,y\n";
      for (const auto& v : curve.vertices) out << num(v.x) << ',' << num(v.y) << '\n';
    }
    auto out = run.open(run.out / "fig3_yeh.csv");
    out << "lambda,H\n";
    for (int i = 0; i <= 120; ++i) out << num(0.025 * i) << ',' << num(yeh_H(curve, 0.025 * i)) << '\n';
  }
  std::printf("wrote %zu artifacts to %s\n", run.artifacts.size(), run.out.string().c_str());
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  apply_thread_cap();
  CLI::App app{"Nodal measures of Gaussian fields and their Brownian sheet limit", "nodal"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, seed_text, out_dir = "out";
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed_text, "base seed (drawn from entropy when absent)");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", sets, "extra key=value settings (repeatable)");

  Bindings bind;
  auto field_flags = [&](CLI::App* s) {
    bind.bind(s, "--model", "field.model", "covariance model");
    bind.bind(s, "--d,--dim", "field.d", "dimension");
    bind.bind(s, "--R", "field.R", "side length");
    bind.bind(s, "--h", "field.h", "grid spacing");
  };
  auto experiment_flags = [&](CLI::App* s) {
    bind.bind(s, "--model", "experiment.model", "covariance model");
    bind.bind(s, "--d,--dim", "experiment.d", "dimension");
    bind.bind(s, "--R", "experiment.R", "side lengths, comma separated");
    bind.bind(s, "--h", "experiment.h", "grid spacing");
    bind.bind(s, "--m", "experiment.m", "partition resolution");
    bind.bind(s, "--N", "experiment.N", "replications");
    bind.bind(s, "--self-test", "experiment.self_test", "use Brownian sheet samples");
    bind.bind(s, "--heatmaps", "output.heatmaps", "xi heatmaps for the first K replications");
  };
  auto curve_flags = [&](CLI::App* s) {
    bind.bind(s, "--a", "curve.a", "curve parameter a in (1, inf]");
    bind.bind(s, "--b", "curve.b", "curve parameter b in (1, inf]");
  };

  auto* simulate = app.add_subcommand("simulate-field", "sample one field and dump it");
  field_flags(simulate);
  bind.bind(simulate, "--method", "field.method", "circulant or spectral");
  bind.bind(simulate, "--waves", "field.waves", "plane waves for the spectral method");
  bind.bind(simulate, "--pixel-scale", "output.pixel_scale", "heatmap pixel block size");

  auto* nodal = app.add_subcommand("nodal-field", "nodal measure and xi of one replication");
  experiment_flags(nodal);
  bind.bind(nodal, "--rep", "field.rep", "replication index");

  auto* g2 = app.add_subcommand("gamma2", "Kac-Rice densities and gamma2");
  field_flags(g2);
  bind.bind(g2, "--points", "kac.points", "radial profile points");
  bind.bind(g2, "--r-min", "kac.r_min", "smallest radius of the profile");
  bind.bind(g2, "--r-max", "kac.r_max", "largest radius of the profile");
  bool crosscheck = false;
  g2->add_flag("--crosscheck", crosscheck, "compare with empirical Var(nu)/R^d (uses experiment.* keys)");
  bind.bind(g2, "--N", "experiment.N", "replications for the cross-check");
  bind.bind(g2, "--Rs", "experiment.R", "side lengths for the cross-check");

  auto* clt = app.add_subcommand("clt-test", "finite-dimensional CLT checks");
  experiment_flags(clt);
  auto* sup = app.add_subcommand("sup-test", "sup of xi over Yeh curves");
  experiment_flags(sup);
  bind.bind(sup, "--curves", "experiment.curves", "a/b pairs, comma separated");
  bind.bind(sup, "--lambda-grid", "experiment.lambda_grid", "lambda grid lo:hi:step");
  auto* moment = app.add_subcommand("moment-scan", "mixed moment scaling over adjacent rectangles");
  experiment_flags(moment);
  bind.bind(moment, "--sides", "experiment.scan_sides", "rectangle side lengths");

  auto* sheet = app.add_subcommand("sheet-sample", "one Brownian sheet on a lattice");
  bind.bind(sheet, "--n", "sheet.n", "cells per side");
  bind.bind(sheet, "--d", "sheet.d", "dimension");

  auto* yeh = app.add_subcommand("yeh", "H(a,b,lambda)");
  curve_flags(yeh);
  bind.bind(yeh, "--lambda", "yeh.lambda", "single lambda");
  bind.bind(yeh, "--lambda-grid", "yeh.lambda_grid", "lambda grid lo:hi:step");

  auto* sheet_sup = app.add_subcommand("sheet-sup", "empirical sup law over L(a,b) from sheet samples");
  curve_flags(sheet_sup);
  bind.bind(sheet_sup, "--n", "sheet.n", "cells per side");
  bind.bind(sheet_sup, "--samples", "sheet.samples", "number of sheets");
  bind.bind(sheet_sup, "--lambda-grid", "yeh.lambda_grid", "lambda grid lo:hi:step");

  auto* repro = app.add_subcommand("repro-figures", "data and heatmaps for the three figures");
  bind.bind(repro, "--which", "figures.which", "fig1, fig2, fig3 or all");
  bind.bind(repro, "--R", "experiment.R", "side lengths for fig2");
  bind.bind(repro, "--model", "experiment.model", "covariance model for fig2");
  curve_flags(repro);

  Run run;
  run.started = iso_now();
  std::vector<std::string> args(raw_args.rbegin(), raw_args.rend());
  if (!args.empty()) args.pop_back();
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return config_error;
  }

  CLI::App* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  run.out = out_dir;

  int code = ok;
  std::string error;
  try {
    if (!config_path.empty()) run.config = Config::load(config_path);
    Config cli_layer = bind.layer(sub);
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got " + s);
      cli_layer.set(s.substr(0, eq), s.substr(eq + 1));
    }
    run.config.overlay(cli_layer);
    if (app.get_option("--out")->count() > 0) run.config.set("output.dir", out_dir);
    if (!app.get_option("--out")->count() && run.config.has("output.dir")) run.out = run.config.get_string("output.dir", "out");
    if (!seed_text.empty()) {
      run.config.set("experiment.seed", seed_text);
    }
    if (run.config.has("experiment.seed")) {
      run.seed = run.config.get_uint("experiment.seed", 0);
    } else {
      run.seed = entropy_seed();
      run.seed_from_entropy = true;
      run.config.set("experiment.seed", std::to_string(run.seed));
    }
    fs::create_directories(run.out);

    if (sub == simulate) code = cmd_simulate_field(run);
    else if (sub == nodal) code = cmd_nodal_field(run);
    else if (sub == g2) code = cmd_gamma2(run, crosscheck);
    else if (sub == clt) code = cmd_experiment(run, ExperimentKind::clt);
    else if (sub == sup) code = cmd_experiment(run, ExperimentKind::sup);
    else if (sub == moment) code = cmd_experiment(run, ExperimentKind::moment);
    else if (sub == sheet) code = cmd_sheet_sample(run);
    else if (sub == yeh) code = cmd_yeh(run);
    else if (sub == sheet_sup) code = cmd_sheet_sup(run);
    else if (sub == repro) code = cmd_repro(run);
    if (code == acceptance_failure) error = "statistical acceptance failed";
  } catch (const ConfigError& e) {
    code = config_error;
    error = e.what();
  } catch (const NumericalError& e) {
    code = numerical_error;
    error = e.what();
  } catch (const std::exception& e) {
    code = numerical_error;
    error = e.what();
  }
  if (code == config_error) std::cerr << "config error: " << error << "\n" << sub->help();
  else if (code == numerical_error) std::cerr << "numerical failure: " << error << '\n';
  run.manifest(code, error);
  return code;
}

}  // namespace nodal::cli
