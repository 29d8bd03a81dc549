// Acceptance runner: one PASS/FAIL line per criterion, details indented below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nodal/brownian_sheet.hpp"
#include "nodal/covariance.hpp"
#include "nodal/experiments.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/heatmap.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/nodal_measure.hpp"
#include "nodal/report.hpp"
#include "nodal/rng.hpp"
#include "nodal/stats.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nodal;

namespace {

constexpr double pi = std::numbers::pi;

struct Check {
  std::string what;
  bool pass = false;
  std::string detail;
};

struct Outcome {
  int id = 0;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0.0;
  double budget = 0.0;  // seconds; 0 means no runtime bound

  bool pass() const {
    if (budget > 0.0 && seconds > budget) return false;
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
};

std::string num(double x, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << x;
  return s.str();
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Check from_quantity(const StatsReport& r, const std::string& name) {
  const Quantity* q = r.find(name);
  if (q == nullptr) return {name, false, "missing from report"};
  std::string d = "estimate " + num(q->estimate);
  if (q->se > 0.0) d += " se " + num(q->se, 3);
  if (q->reference) d += " reference " + num(*q->reference);
  if (q->p_value) d += " p " + num(*q->p_value, 3);
  d += " [" + to_string(q->criterion) + " " + num(q->tolerance, 3) + "]";
  if (!q->note.empty()) d += " " + q->note;
  return {name, q->pass(), d};
}

void save(const StatsReport& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_report(r, dir);
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// ---------------------------------------------------------------------------

Outcome covariance_fidelity(const fs::path&) {
  Outcome o{1, "covariance fidelity", {}, 0.0, 120.0};
  const CovarianceModel model = make_model("bargmann-fock", 2);
  const GridSpec grid = make_grid(2, 20.0, 0.05);
  const EmbeddingPlan plan = plan_embedding(model, grid);
  const int fields = 200, stride = 8;
  const std::vector<double> lags{0.0, 0.5, 1.0, 2.0};
  // Per-field spatial mean of f(x) f(x + lag e) over a sparse anchor set; the
  // fields are independent, so the SE comes from the spread of these means.
  std::vector<std::vector<double>> means(2 * lags.size());
  const std::uint64_t base = mix64(0xc0a11ULL);
  for (int pair = 0; pair < fields / 2; ++pair) {
    const auto [f, g] = sample_field_pair(plan, derive_seed(base, pair));
    for (const FieldSample* s : {&f, &g}) {
      for (std::size_t l = 0; l < lags.size(); ++l) {
        const int k = static_cast<int>(std::lround(lags[l] / grid.h));
        for (int axis = 0; axis < 2; ++axis) {
          double sum = 0.0;
          int count = 0;
          for (int j = 0; j + (axis == 1 ? k : 0) < grid.n; j += stride) {
            for (int i = 0; i + (axis == 0 ? k : 0) < grid.n; i += stride) {
              sum += s->at(i, j) * (axis == 0 ? s->at(i + k, j) : s->at(i, j + k));
              ++count;
            }
          }
          means[2 * l + axis].push_back(sum / count);
        }
      }
    }
  }
  for (std::size_t l = 0; l < lags.size(); ++l) {
    for (int axis = 0; axis < (lags[l] == 0.0 ? 1 : 2); ++axis) {
      const MeanEstimate m = mean_estimate(means[2 * l + axis]);
      const double ref = std::exp(-lags[l] * lags[l]);
      const double z = std::abs(m.mean - ref) / m.se;
      o.checks.push_back({lags[l] == 0.0 ? std::string("variance") : "lag " + num(lags[l]) + (axis == 0 ? " along x" : " along y"), z <= 3.0,
                          "corr " + num(m.mean) + " se " + num(m.se, 3) + " vs exp(-lag^2) " + num(ref) + " (" +
                              num(z, 3) + " se)"});
    }
  }
  return o;
}

Outcome rho1_oracles(const fs::path& out) {
  Outcome o{2, "one-point density oracles", {}, 0.0, 600.0};
  const CovarianceModel bf2 = make_model("bargmann-fock", 2), bf1 = make_model("bargmann-fock", 1);

  // Closed forms: E|N(0, 2 I_d)| / sqrt(2 pi).
  o.checks.push_back({"rho1 d=2 closed form", std::abs(rho1(bf2) - 1.0 / std::numbers::sqrt2) < 1e-12,
                      num(rho1(bf2), 15) + " vs 1/sqrt(2)"});
  o.checks.push_back({"rho1 d=1 closed form", std::abs(rho1(bf1) - std::numbers::sqrt2 / pi) < 1e-12,
                      num(rho1(bf1), 15) + " vs sqrt(2)/pi"});
  // Monte Carlo of the same expectation, drawn here with its own generator.
  std::mt19937_64 rng(20240611);
  std::normal_distribution<double> g(0.0, std::numbers::sqrt2);
  for (int d : {1, 2}) {
    const int draws = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) r2 += std::pow(g(rng), 2);
      const double v = std::sqrt(r2) / std::sqrt(2.0 * pi);
      sum += v;
      sq += v * v;
    }
    const double mean = sum / draws, se = std::sqrt((sq / draws - mean * mean) / draws);
    const double lib = rho1(d == 1 ? bf1 : bf2);
    o.checks.push_back({"rho1 d=" + std::to_string(d) + " Monte Carlo", std::abs(lib - mean) <= 4.0 * se,
                        num(lib) + " vs " + num(mean) + " se " + num(se, 3)});
  }

  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {50.0};
  c.h = 0.05;
  c.m = 100;
  c.N = 200;
  c.seed = 2001;
  c.kac_predictions = false;
  c.keep_samples = false;
  auto t0 = std::chrono::steady_clock::now();
  const StatsReport r2 = run_gamma2_crosscheck(c);
  save(r2, out / "c2_d2");
  Check q2 = from_quantity(r2, "intensity[R=50]");
  q2.detail += " (" + num(elapsed(t0), 3) + " s)";
  q2.pass = q2.pass && elapsed(t0) <= 300.0;
  o.checks.push_back(q2);

  c.d = 1;
  c.R = {200.0};
  c.m = 200;
  c.N = 1000;
  c.seed = 2002;
  t0 = std::chrono::steady_clock::now();
  const StatsReport r1 = run_gamma2_crosscheck(c);
  save(r1, out / "c2_d1");
  Check q1 = from_quantity(r1, "intensity[R=200]");
  q1.detail += " (" + num(elapsed(t0), 3) + " s)";
  q1.pass = q1.pass && elapsed(t0) <= 300.0;
  o.checks.push_back(q1);
  return o;
}

double length_of(const FieldFunction& f, double R, double h) {
  return nodal_length_cells(evaluate_field(f, make_grid(2, R, h)), 1).total();
}

Outcome geometry_oracles(const fs::path&) {
  Outcome o{3, "geometry oracles", {}, 0.0, 0.0};
  const double R = 3.0;
  // Vertical line x = c off the grid: length R.
  const double c = 1.2345678;
  const double vertical = length_of([c](std::span<const double> x) { return x[0] - c; }, R, 0.01);
  o.checks.push_back({"vertical line", std::abs(vertical - R) <= 1e-9, num(vertical, 15) + " vs " + num(R)});
  // Oblique line y = 0.37 x + 0.41 crosses x = 0 and x = R inside the box.
  const double slope = 0.37, icpt = 0.41;
  const double oblique =
      length_of([=](std::span<const double> x) { return x[1] - slope * x[0] - icpt; }, R, 0.01);
  const double exact = R * std::sqrt(1.0 + slope * slope);
  o.checks.push_back({"oblique line", std::abs(oblique - exact) <= 1e-9, num(oblique, 15) + " vs " + num(exact, 15)});

  // Circle of radius rho centred off-lattice.
  const double rho = 1.0;
  const double cx = 1.5 + 0.0031, cy = 1.5 - 0.0047;
  auto circle = [=](std::span<const double> x) {
    return std::hypot(x[0] - cx, x[1] - cy) - rho;
  };
  const double truth = 2.0 * pi * rho;
  const double h = 0.01 * rho;
  const double e1 = std::abs(length_of(circle, R, h) - truth);
  const double e2 = std::abs(length_of(circle, R, h / 2) - truth);
  o.checks.push_back({"circle at h = 0.01 rho", e1 <= 0.01 * truth, "relative error " + num(e1 / truth, 3)});
  const double ratio = e1 / e2;
  o.checks.push_back({"halving-h error ratio in [1.5, 3]", ratio >= 1.5 && ratio <= 3.0,
                      "err(h) / err(h/2) = " + num(ratio, 4) + " (errors " + num(e1, 3) + ", " + num(e2, 3) +
                          "); linear interpolation gives chord errors of order h^2, ratio 4"});
  return o;
}

Outcome gamma2_crosscheck(const fs::path& out) {
  Outcome o{4, "gamma2 cross-check", {}, 0.0, 1200.0};
  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {50.0};
  c.h = 0.05;
  c.m = 100;
  c.N = 6000;
  c.seed = 4001;
  c.keep_samples = false;
  const StatsReport r2 = run_gamma2_crosscheck(c);
  save(r2, out / "c4_d2");
  o.checks.push_back(from_quantity(r2, "var_per_volume[R=50]"));
  o.checks.push_back(from_quantity(r2, "variance_identity[R=50]"));

  c.d = 1;
  c.R = {200.0};
  c.m = 200;
  c.N = 10000;
  c.seed = 4002;
  const StatsReport r1 = run_gamma2_crosscheck(c);
  save(r1, out / "c4_d1");
  o.checks.push_back(from_quantity(r1, "var_per_volume[R=200]"));
  o.checks.push_back(from_quantity(r1, "variance_identity[R=200]"));
  const Gamma2Result g1 = gamma2(make_model("bargmann-fock", 1));
  o.checks.push_back({"d=1 gamma2 carries the rho1 term", g1.rho1_term.has_value(),
                      "integral of F2 " + num(g1.integral_of_F2) + " + rho1 " + num(g1.rho1_term.value_or(0.0)) +
                          " = " + num(g1.gamma2)});
  return o;
}

Outcome fdd_clt(const fs::path& out) {
  Outcome o{5, "finite-dimensional CLT", {}, 0.0, 0.0};
  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {10.0, 20.0, 50.0};
  c.h = 0.05;
  c.m = 100;
  c.N = 2000;
  c.seed = 5001;
  c.cov_pairs = default_cov_pairs(2);
  c.keep_samples = false;
  const StatsReport r = run_clt_experiment(c);
  save(r, out / "c5");
  o.checks.push_back(from_quantity(r, "xi_ks[1;1][R=50]"));
  for (const auto& q : r.quantities) {
    if (q.name.rfind("xi_cov", 0) == 0 && q.name.find("[R=50]") != std::string::npos) {
      o.checks.push_back(from_quantity(r, q.name));
    }
  }
  for (double R : c.R) {
    const std::string name = "xi_var[1;1][R=" + num(R) + "]";
    Check v = from_quantity(r, name);
    v.pass = true;  // informational; the trend below is the criterion
    v.what += " (info)";
    o.checks.push_back(v);
  }
  o.checks.push_back(from_quantity(r, "variance_gap_monotone"));
  return o;
}

Outcome yeh_law(const fs::path& out) {
  Outcome o{6, "sup law on the boundary", {}, 0.0, 0.0};
  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {50.0};
  c.h = 0.05;
  c.m = 100;
  c.N = 1000;
  c.seed = 6001;
  c.keep_samples = false;
  const StatsReport r = run_sup_experiment(c);
  save(r, out / "c6_field");
  o.checks.push_back(from_quantity(r, "sup_distance[a=inf;b=inf][R=50]"));

  ExperimentConfig s = c;
  s.self_test = true;
  s.selftest_N = 100000;
  s.sheet_n = 8192;
  const StatsReport t = run_sup_experiment(s);
  save(t, out / "c6_selftest");
  for (const auto& q : t.quantities) {
    if (q.name.rfind("sup_distance", 0) == 0) o.checks.push_back(from_quantity(t, q.name));
  }
  return o;
}

Outcome yeh_consistency(const fs::path&) {
  Outcome o{7, "sup formula consistency", {}, 0.0, 0.0};
  const auto big = CurveParam::of(1e6);
  double worst = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double l = 0.01 * i;
    // The boundary law written out with erfc, independent of the library.
    const double closed = 1.0 - 3.0 * std_normal_cdf(-l) + std::exp(4.0 * l * l) * std_normal_cdf(-3.0 * l);
    worst = std::max(worst, std::abs(yeh_H(big, big, l) - closed));
  }
  o.checks.push_back({"a = b = 1e6 vs boundary closed form", worst <= 1e-6, "max gap " + num(worst, 3)});

  std::vector<std::pair<CurveParam, CurveParam>> curves{
      {CurveParam::inf(), CurveParam::inf()}, {CurveParam::of(2), CurveParam::of(3)},
      {CurveParam::of(1.0001), CurveParam::of(1.0001)}, {CurveParam::inf(), CurveParam::of(1.5)},
      {CurveParam::of(7), CurveParam::inf()}, {big, big}};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    // 1 + 1/v covers (1, inf) with weight near both ends.
    curves.push_back({CurveParam::of(1.0 + 1.0 / (1e-3 + u(rng) * 10.0)), CurveParam::of(1.0 + 1.0 / (1e-3 + u(rng) * 10.0))});
  }
  int bad_cdf = 0, bad_tail = 0;
  double tail_max = 0.0;
  std::string first_bad;
  for (const auto& [a, b] : curves) {
    double prev = yeh_H(a, b, 0.0);
    bool ok = std::abs(prev) <= 1e-12;
    for (int i = 1; i <= 1000; ++i) {
      const double h = yeh_H(a, b, 0.01 * i);
      ok = ok && h >= prev - 1e-14 && h >= 0.0 && h <= 1.0;
      prev = h;
    }
    ok = ok && std::abs(yeh_H(a, b, 40.0) - 1.0) <= 1e-12;
    if (!ok) {
      ++bad_cdf;
      if (first_bad.empty()) first_bad = a.str() + "/" + b.str();
    }
    for (int i = 0; i <= 300; ++i) {
      const double l = 3.0 + 0.01 * i;
      const double t = l * std::exp(0.5 * l * l) * (1.0 - yeh_H(a, b, l));
      if (!std::isfinite(t) || t < 0.0) ++bad_tail;
      tail_max = std::max(tail_max, t);
    }
  }
  o.checks.push_back({"valid CDF on " + std::to_string(curves.size()) + " curves", bad_cdf == 0,
                      std::to_string(bad_cdf) + " failures" + (first_bad.empty() ? "" : ", first " + first_bad)});
  o.checks.push_back({"tail product bounded on [3, 6]", bad_tail == 0 && tail_max <= 10.0,
                      "max lambda e^{lambda^2/2} (1 - H) = " + num(tail_max, 4)});
  return o;
}

Outcome moment_scan(const fs::path& out) {
  Outcome o{8, "tightness moment scan", {}, 0.0, 1800.0};
  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {30.0};
  c.h = 30.0 / 640;
  c.m = 128;
  c.N = 2000;
  c.seed = 8001;
  c.keep_samples = false;
  const StatsReport r = run_moment_scan(c);
  save(r, out / "c8");
  Check slope = from_quantity(r, "slope[R=30]");
  const Quantity* q = r.find("slope[R=30]");
  if (q != nullptr && !(q->se > 0.0)) {
    slope.pass = false;
    slope.detail += " (no bootstrap SE)";
  }
  o.checks.push_back(slope);
  o.checks.push_back(from_quantity(r, "volume_decades[R=30]"));
  o.checks.push_back(from_quantity(r, "cauchy_schwarz_failures[R=30]"));
  bool flat = false;
  for (const auto& qq : r.quantities) {
    if (qq.name.find("w=0.03125") != std::string::npos && qq.name.find("s=1;") != std::string::npos) flat = true;
  }
  o.checks.push_back({"family includes flat rectangles", flat, "aspect ratio up to 32"});
  return o;
}

Outcome f2_properties(const fs::path&) {
  Outcome o{9, "cumulant density properties", {}, 0.0, 0.0};
  KacOptions mc;
  mc.method = ConditionalMethod::monte_carlo;
  KacOptions gh;
  gh.method = ConditionalMethod::gauss_hermite;
  for (int d : {1, 2}) {
    const CovarianceModel model = make_model("bargmann-fock", d);
    const std::string tag = " d=" + std::to_string(d);
    const Estimate far = F2(model, 6.0);
    o.checks.push_back({"|F2(6)| <= 2 tolerance" + tag, std::abs(far.value) <= 2.0 * far.error,
                        "F2 " + num(far.value, 3) + " error estimate " + num(far.error, 3)});

    const int beta = near_diagonal_exponent(d, 1);
    const KacDensityProfile p = kac_profile(model, 1e-3, 0.5, 24);
    std::vector<double> x, y, w;
    for (const auto& e : p.entries) {
      x.push_back(std::log(e.r));
      y.push_back(std::log(std::pow(e.r, beta) * std::abs(e.F2)));
      w.push_back(1.0);
    }
    const LinearFit fit = weighted_linear_fit(x, y, w);
    o.checks.push_back({"no trend of r^beta |F2| on [1e-3, 0.5]" + tag, std::abs(fit.slope) <= 0.3,
                        "beta " + std::to_string(beta) + " slope " + num(fit.slope, 4)});

    double worst_mc = 0.0, worst_gh = 0.0;
    for (double r : {0.01, 0.05, 0.2, 0.5, 1.0, 1.5, 2.5, 4.0}) {
      const Estimate a = F2(model, r), b = F2(model, r, mc), g = F2(model, r, gh);
      worst_mc = std::max(worst_mc, std::abs(a.value - b.value) / std::hypot(a.error, b.error));
      worst_gh = std::max(worst_gh, std::abs(a.value - g.value) / std::hypot(a.error, g.error));
    }
    o.checks.push_back({"Monte Carlo vs quadrature" + tag, worst_mc <= 3.0,
                        "largest gap " + num(worst_mc, 3) + " combined errors"});
    o.checks.push_back({"Gauss-Hermite vs quadrature" + tag, worst_gh <= 3.0,
                        "largest gap " + num(worst_gh, 3) + " combined errors"});
  }
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism(const fs::path& out) {
  Outcome o{10, "determinism", {}, 0.0, 0.0};
  ExperimentConfig c;
  c.model = "bargmann-fock";
  c.d = 2;
  c.R = {10.0};
  c.h = 10.0 / 128;
  c.m = 64;
  c.N = 200;
  c.seed = 10001;
  c.bootstrap = 100;
  c.scan_sides = {1.0, 0.5, 0.25, 0.125, 0.0625};
  c.cov_pairs = default_cov_pairs(2);
  const std::vector<ExperimentKind> kinds{ExperimentKind::clt, ExperimentKind::sup, ExperimentKind::gamma2,
                                          ExperimentKind::moment};
  std::vector<std::string> json_text[2], pngs[2];
  std::string fingerprints[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = out / ("c10_run" + std::to_string(run));
    fs::remove_all(dir);
    const auto reports = run_field_experiments(c, kinds);
    for (const auto& r : reports) {
      const fs::path sub = dir / r.experiment;
      save(r, sub);
      // Wall time is the only field allowed to differ.
      json j = json::parse(slurp(sub / "report.json"));
      j.erase("wall_seconds");
      json_text[run].push_back(j.dump());
      fingerprints[run] += numeric_fingerprint(r);
      json_text[run].push_back(slurp(sub / "samples.csv"));
    }
    const XiField xi = xi_snapshot(c, 10.0, 0, c.m);
    render_heatmap(lattice_rows_top_down(xi.xi), xi.m() + 1, xi.m() + 1, dir / "xi.png", 2);
    const FieldSample f = replication_field(c, 10.0, 0);
    std::vector<double> rows(f.values.size());
    for (int j = 0; j < f.grid.n; ++j) {
      for (int i = 0; i < f.grid.n; ++i) rows[static_cast<std::size_t>(f.grid.n - 1 - j) * f.grid.n + i] = f.at(i, j);
    }
    render_heatmap(rows, f.grid.n, f.grid.n, dir / "field.png");
    const SheetSample sheet = sample_sheet(128, 2, 10002);
    render_heatmap(lattice_rows_top_down(sheet.field), 129, 129, dir / "sheet.png");
    for (const char* name : {"xi.png", "field.png", "sheet.png", "xi.png.json"}) pngs[run].push_back(slurp(dir / name));
  }
  o.checks.push_back({"numeric fingerprints equal", fingerprints[0] == fingerprints[1],
                      std::to_string(fingerprints[0].size()) + " bytes"});
  o.checks.push_back({"report.json and samples.csv equal", json_text[0] == json_text[1],
                      std::to_string(json_text[0].size()) + " files compared"});
  bool png_ok = pngs[0] == pngs[1];
  for (const auto& p : pngs[0]) png_ok = png_ok && !p.empty();
  o.checks.push_back({"heatmaps byte-identical", png_ok, "xi, field and sheet heatmaps"});
  // Threads must not matter: the parallel sampler against its serial reference.
  const EmbeddingPlan plan = plan_embedding(make_model("bargmann-fock", 2), make_grid(2, 10.0, 0.05));
  const auto par = sample_field_pair(plan, 77), ser = sample_field_pair_serial(plan, 77);
  o.checks.push_back({"parallel sampler equals serial reference",
                      par.first.values == ser.first.values && par.second.values == ser.second.values, ""});
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  CLI::App app{"Acceptance criteria runner"};
  std::string out = "acceptance_out";
  std::vector<int> only, known;
  app.add_option("--out", out, "output directory");
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--known", known, "criteria whose failure is a documented deviation")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome(const fs::path&)>> all{
      covariance_fidelity, rho1_oracles,   geometry_oracles, gamma2_crosscheck, fdd_clt,
      yeh_law,             yeh_consistency, moment_scan,     f2_properties,     determinism};
  fs::create_directories(out);
  const std::set<int> wanted(only.begin(), only.end()), expected(known.begin(), known.end());
  json summary = json::array();
  bool unexpected = false;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i](out);
    } catch (const std::exception& e) {
      o.id = id;
      o.title = "criterion " + std::to_string(id);
      o.checks.push_back({"ran to completion", false, e.what()});
    }
    o.seconds = elapsed(t0);
    const bool pass = o.pass();
    std::printf("%s %d %s (%.1f s%s)\n", pass ? "PASS" : "FAIL", id, o.title.c_str(), o.seconds,
                o.budget > 0.0 ? (", budget " + num(o.budget) + " s").c_str() : "");
    json checks = json::array();
    for (const auto& c : o.checks) {
      std::printf("    %-4s %s: %s\n", c.pass ? "ok" : "FAIL", c.what.c_str(), c.detail.c_str());
      checks.push_back({{"check", c.what}, {"pass", c.pass}, {"detail", c.detail}});
    }
    if (!pass && expected.count(id)) std::printf("    known deviation, documented in README\n");
    if (!pass && !expected.count(id)) unexpected = true;
    summary.push_back({{"criterion", id}, {"title", o.title}, {"pass", pass}, {"seconds", o.seconds},
                       {"budget_seconds", o.budget}, {"known_deviation", expected.count(id) > 0},
                       {"checks", checks}});
  }
  std::ofstream(fs::path(out) / "acceptance_summary.json") << summary.dump(2) << '\n';
  return unexpected ? 4 : 0;
}
