#include "nodal/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <optional>
#include <random>

#include "nodal/errors.hpp"
#include "nodal/field_sampler.hpp"
#include "nodal/kac_rice.hpp"
#include "nodal/normal.hpp"
#include "nodal/rng.hpp"
#include "nodal/stats.hpp"

namespace nodal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kSelfTestSalt = 0x5e1f7e57ULL;
constexpr std::uint64_t kBootstrapSalt = 0xb0075742ULL;

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string point_name(const std::array<double, 2>& t, int d) {
  return d == 1 ? "[" + fmt(t[0]) + "]" : "[" + fmt(t[0]) + ";" + fmt(t[1]) + "]";
}

std::string curve_name(const CurveSpec& c) { return "a=" + c.a.str() + ";b=" + c.b.str(); }

std::string radius_tag(double R) { return "[R=" + fmt(R) + "]"; }

std::uint64_t radius_seed(std::uint64_t base, double R) {
  return derive_seed(base, static_cast<std::uint64_t>(std::llround(R * 1000.0)));
}

bool is_boundary(const CurveSpec& c) { return c.a.infinite && c.b.infinite; }

// A named test function on [0,1]^d with its squared L2 norm.
struct TestFunction {
  std::string name;
  double (*fn)(double, double);
  double norm2_1d;
  double norm2_2d;
};

const std::vector<TestFunction>& test_function_table() {
  static const std::vector<TestFunction> table{
      {"cos", [](double x, double y) { return std::cos(kPi * x) * std::cos(kPi * y); }, 0.5, 0.25},
      {"one", [](double, double) { return 1.0; }, 1.0, 1.0},
      {"ramp", [](double x, double y) { return x * y; }, 1.0 / 3.0, 1.0 / 9.0},
  };
  return table;
}

const TestFunction& find_test_function(const std::string& name) {
  for (const auto& f : test_function_table()) {
    if (f.name == name) return f;
  }
  throw ConfigError("unknown test function '" + name + "' (expected cos, one or ramp)");
}

int lattice_index(double t, int m, const std::string& what) {
  const double s = t * m;
  const double r = std::round(s);
  if (t < 0.0 || t > 1.0 || std::abs(r - s) > 1e-9) {
    throw ConfigError(what + " = " + fmt(t) + " is not on the 1/" + std::to_string(m) + " lattice");
  }
  return static_cast<int>(r);
}

struct MomentPair {
  std::string name;
  LatticeRect a;
  LatticeRect b;
  double volume = 0.0;  // Vol(A u B) in [0,1]^d units
  bool degenerate = false;
};

std::vector<MomentPair> moment_family(const ExperimentConfig& cfg) {
  std::vector<MomentPair> out;
  const int m = cfg.m;
  for (double s : cfg.scan_sides) {
    const std::vector<double> widths = cfg.d == 1 ? std::vector<double>{1.0} : cfg.scan_sides;
    for (double w : widths) {
      for (int split = 0; split < cfg.d; ++split) {
        MomentPair p;
        const int S = lattice_index(s, m, "scan side"), W = cfg.d == 1 ? 1 : lattice_index(w, m, "scan side");
        if (split == 0) {
          if (S % 2 != 0) throw ConfigError("scan side " + fmt(s) + " cannot be halved on the lattice");
          p.a = {{0, 0}, {S / 2, W}};
          p.b = {{S / 2, 0}, {S, W}};
        } else {
          if (W % 2 != 0) throw ConfigError("scan side " + fmt(w) + " cannot be halved on the lattice");
          p.a = {{0, 0}, {S, W / 2}};
          p.b = {{0, W / 2}, {S, W}};
        }
        p.volume = cfg.d == 1 ? s : s * w;
        p.degenerate = p.volume == 0.0;
        p.name = cfg.d == 1 ? "[s=" + fmt(s) + "]"
                            : "[s=" + fmt(s) + ";w=" + fmt(w) + ";split=" + (split == 0 ? "x" : "y") + "]";
        out.push_back(p);
      }
    }
  }
  return out;
}

// Which statistics each replication produces, and where they land in the row.
struct Extraction {
  const ExperimentConfig* cfg = nullptr;
  bool clt = false, sup = false, moment = false;
  std::vector<std::array<int, 2>> points;  // lattice indices at m
  std::vector<std::vector<double>> phis;   // cell-center samples at m
  std::vector<CurveSpec> curves;
  std::vector<MomentPair> pairs;
  std::vector<std::string> names;

  int total_col = 0, point_col = 0, phi_col = 0, sup_col = 0, pair_col = 0;

  int point_index(const std::array<double, 2>& t) const {
    const int m = cfg->m;
    const std::array<int, 2> idx{lattice_index(t[0], m, "t"), cfg->d == 1 ? 0 : lattice_index(t[1], m, "t")};
    const auto it = std::find(points.begin(), points.end(), idx);
    return static_cast<int>(it - points.begin());
  }

  void add_point(const std::array<double, 2>& t) {
    const std::array<int, 2> idx{lattice_index(t[0], cfg->m, "t"), cfg->d == 1 ? 0 : lattice_index(t[1], cfg->m, "t")};
    if (std::find(points.begin(), points.end(), idx) == points.end()) points.push_back(idx);
  }

  void build(const std::vector<ExperimentKind>& kinds) {
    for (auto k : kinds) {
      clt |= k == ExperimentKind::clt;
      sup |= k == ExperimentKind::sup;
      moment |= k == ExperimentKind::moment;
    }
    const int d = cfg->d, m = cfg->m;
    names = {"nu_total"};
    total_col = 0;
    if (clt) {
      for (const auto& t : cfg->t_points) add_point(t);
      for (const auto& [s, t] : cfg->cov_pairs) {
        add_point(s);
        add_point(t);
      }
      for (const auto& name : cfg->test_functions) {
        const auto& f = find_test_function(name);
        phis.push_back(sample_at_cell_centers(d, m, f.fn));
      }
    }
    point_col = static_cast<int>(names.size());
    for (const auto& p : points) {
      names.push_back("xi" + point_name({static_cast<double>(p[0]) / m, static_cast<double>(p[1]) / m}, d));
    }
    phi_col = static_cast<int>(names.size());
    for (std::size_t i = 0; i < phis.size(); ++i) names.push_back("phi[" + cfg->test_functions[i] + "]");
    sup_col = static_cast<int>(names.size());
    if (sup) {
      if (d == 1) {
        names.push_back("sup[0;1]");
      } else {
        for (const auto& [a, b] : cfg->curves) {
          curves.push_back(make_curve(a, b));
          names.push_back("sup[" + curve_name(curves.back()) + "]");
        }
      }
    }
    pair_col = static_cast<int>(names.size());
    if (moment) {
      pairs = moment_family(*cfg);
      for (const auto& p : pairs) {
        names.push_back("A" + p.name);
        names.push_back("B" + p.name);
      }
    }
  }

  std::size_t width() const { return names.size(); }

  // Statistics of the coarse centered lattice (xi values, pairings, moments).
  void from_coarse(const Lattice& xi, std::span<const double> centered, double* row) const {
    for (std::size_t i = 0; i < points.size(); ++i) {
      row[point_col + i] = xi.d == 1 ? xi.at(points[i][0]) : xi.at(points[i][0], points[i][1]);
    }
    for (std::size_t i = 0; i < phis.size(); ++i) {
      double s = 0.0;
      for (std::size_t c = 0; c < centered.size(); ++c) s += phis[i][c] * centered[c];
      row[phi_col + i] = s;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      row[pair_col + 2 * i] = rectangle_increment(xi, pairs[i].a);
      row[pair_col + 2 * i + 1] = rectangle_increment(xi, pairs[i].b);
    }
  }

  void from_field(const FieldSample& field, const Normalization& norm, double* row) const {
    const int fine_m = field.grid.n - 1;
    const IncrementGrid inc = field.grid.d == 1 ? zero_count_cells(field, fine_m) : nodal_length_cells(field, fine_m);
    row[total_col] = inc.total();
    if (clt || moment) {
      const IncrementGrid coarse = coarsen(inc, cfg->m);
      const std::vector<double> centered = centered_cells(coarse, norm.rho1, norm.gamma2);
      from_coarse(cumulative_cells(coarse.d, coarse.m, centered), centered, row);
    }
    if (sup) {
      const XiField fine = center_and_rescale(inc, norm.rho1, norm.gamma2);
      if (field.grid.d == 1) {
        row[sup_col] = sup_on_interval(fine.xi);
      } else {
        for (std::size_t c = 0; c < curves.size(); ++c) {
          row[sup_col + c] = sup_on_curve(fine.xi, curves[c], cfg->curve_samples);
        }
      }
    }
  }

  void from_sheet(std::uint64_t seed, double* row) const {
    const int d = cfg->d, m = cfg->m;
    row[total_col] = 0.0;
    if (clt || moment) {
      const SheetSample sheet = sample_sheet(m, d, derive_seed(seed, 0));
      std::vector<double> cells(d == 1 ? m : static_cast<std::size_t>(m) * m);
      if (d == 1) {
        for (int i = 0; i < m; ++i) cells[i] = sheet.field.at(i + 1) - sheet.field.at(i);
      } else {
        for (int j = 0; j < m; ++j) {
          for (int i = 0; i < m; ++i) {
            cells[static_cast<std::size_t>(j) * m + i] = rectangle_increment(sheet.field, LatticeRect{{i, j}, {i + 1, j + 1}});
          }
        }
      }
      from_coarse(sheet.field, cells, row);
    }
    if (sup) {
      if (d == 1) {
        row[sup_col] = sup_on_interval(sample_sheet(cfg->sheet_n, 1, derive_seed(seed, 1)).field);
        return;
      }
      std::optional<SheetSample> full;
      for (std::size_t c = 0; c < curves.size(); ++c) {
        if (is_boundary(curves[c])) {
          row[sup_col + c] = boundary_sup(sample_sheet_edges(cfg->sheet_n, derive_seed(seed, 2)));
        } else {
          if (!full) full = sample_sheet(cfg->sheet_full_n, 2, derive_seed(seed, 3));
          row[sup_col + c] = sup_on_curve(full->field, curves[c], cfg->curve_samples);
        }
      }
    }
  }
};

struct Ensemble {
  double R = 0.0;
  int N = 0;
  std::vector<double> rows;  // N x width
  std::vector<std::uint64_t> seeds;
  std::size_t width = 0;
  bool degenerate_field = false;
  std::size_t degenerate_nodes = 0;

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(N);
    for (int r = 0; r < N; ++r) out[r] = rows[r * width + c];
    return out;
  }
};

Ensemble run_field_ensemble(const ExperimentConfig& cfg, const CovarianceModel& model, const Normalization& norm,
                            double R, const Extraction& ex) {
  Ensemble e;
  e.R = R;
  e.N = cfg.N;
  e.width = ex.width();
  e.rows.assign(static_cast<std::size_t>(e.N) * e.width, 0.0);
  e.seeds.assign(e.N, 0);
  const GridSpec grid = make_grid(cfg.d, R, cfg.h);
  e.degenerate_field = model.has_deterministic_field();
  std::optional<EmbeddingPlan> plan;
  std::optional<FieldSample> fixed;
  if (e.degenerate_field) {
    fixed = evaluate_field(model, grid);
  } else {
    plan = plan_embedding(model, grid);
  }
  const std::uint64_t base = radius_seed(cfg.seed, R);
  const int pairs = (e.N + 1) / 2;
#pragma omp parallel for schedule(dynamic, 1)
  for (int p = 0; p < pairs; ++p) {
    const std::uint64_t seed = derive_seed(base, p);
    std::pair<FieldSample, FieldSample> fields =
        fixed ? std::make_pair(*fixed, *fixed) : sample_field_pair(*plan, seed);
    for (int q = 0; q < 2; ++q) {
      const int rep = 2 * p + q;
      if (rep >= e.N) break;
      e.seeds[rep] = seed;
      ex.from_field(q == 0 ? fields.first : fields.second, norm, e.rows.data() + rep * e.width);
    }
  }
  return e;
}

Ensemble run_sheet_ensemble(const ExperimentConfig& cfg, const Extraction& ex) {
  Ensemble e;
  e.R = std::numeric_limits<double>::infinity();
  e.N = cfg.selftest_N;
  e.width = ex.width();
  e.rows.assign(static_cast<std::size_t>(e.N) * e.width, 0.0);
  e.seeds.assign(e.N, 0);
  const std::uint64_t base = mix64(cfg.seed ^ kSelfTestSalt);
#pragma omp parallel for schedule(dynamic, 64)
  for (int rep = 0; rep < e.N; ++rep) {
    e.seeds[rep] = derive_seed(base, rep);
    ex.from_sheet(e.seeds[rep], e.rows.data() + static_cast<std::size_t>(rep) * e.width);
  }
  return e;
}

void append_samples(StatsReport& report, const Ensemble& e, const Extraction& ex, const std::vector<std::size_t>& cols,
                    const std::string& tag) {
  for (int r = 0; r < e.N; ++r) {
    for (std::size_t c : cols) {
      report.samples.push_back({r, e.seeds[r], ex.names[c] + tag, e.rows[r * e.width + c]});
    }
  }
}

Quantity make_quantity(std::string name, double estimate, double se, std::optional<double> reference,
                       std::string source, Criterion criterion, double tolerance, std::string note = {}) {
  Quantity q;
  q.name = std::move(name);
  q.estimate = estimate;
  q.se = se;
  q.reference = reference;
  q.reference_source = std::move(source);
  q.criterion = criterion;
  q.tolerance = tolerance;
  q.note = std::move(note);
  return q;
}

StatsReport new_report(const ExperimentConfig& cfg, ExperimentKind kind) {
  StatsReport r;
  r.experiment = to_string(kind) + (cfg.self_test ? "-selftest" : "");
  r.model = cfg.self_test ? "brownian-sheet" : cfg.model;
  r.d = cfg.d;
  r.base_seed = cfg.seed;
  r.replications = cfg.self_test ? cfg.selftest_N : cfg.N;
  r.settings["h"] = fmt(cfg.h);
  r.settings["m"] = std::to_string(cfg.m);
  std::string Rs;
  for (double R : cfg.R) Rs += (Rs.empty() ? "" : ",") + fmt(R);
  r.settings["R"] = Rs;
  r.settings["self_test"] = cfg.self_test ? "true" : "false";
  r.notes.push_back("finite-R tolerances are engineering choices; the limit theorems give no rates");
  return r;
}

double product(const std::array<double, 2>& t, int d) { return d == 1 ? t[0] : t[0] * t[1]; }

double min_product(const std::array<double, 2>& s, const std::array<double, 2>& t, int d) {
  double v = std::min(s[0], t[0]);
  if (d == 2) v *= std::min(s[1], t[1]);
  return v;
}

void clt_quantities(StatsReport& report, const ExperimentConfig& cfg, const Ensemble& e, const Extraction& ex,
                    const std::string& tag) {
  const int d = cfg.d;
  std::vector<std::size_t> cols;
  for (const auto& t : cfg.t_points) {
    const std::size_t col = ex.point_col + ex.point_index(t);
    cols.push_back(col);
    const auto x = e.column(col);
    const double var_ref = product(t, d);
    if (var_ref == 0.0) {
      const MeanEstimate v = variance_estimate(x);
      report.quantities.push_back(make_quantity("xi_var" + point_name(t, d) + tag, v.mean, v.se, 0.0,
                                                "empty box: xi vanishes identically", Criterion::abs_within, 0.0,
                                                "degenerate point with a zero coordinate"));
      continue;
    }
    const double sd = std::sqrt(var_ref);
    const KsResult ks = ks_statistic(x, [sd](double v) { return normal_cdf(v / sd); });
    Quantity q = make_quantity("xi_ks" + point_name(t, d) + tag, ks.D, 0.0, std::nullopt,
                               "N(0, prod t_j) limit of xi_R(t)", Criterion::p_at_least, cfg.tol.ks_p);
    q.statistic = ks.D;
    q.p_value = ks.p_value;
    report.quantities.push_back(q);
    const MeanEstimate v = variance_estimate(x);
    const bool unit = std::abs(var_ref - 1.0) < 1e-15;
    report.quantities.push_back(make_quantity("xi_var" + point_name(t, d) + tag, v.mean, v.se, var_ref,
                                              "Brownian sheet variance prod t_j",
                                              unit ? Criterion::abs_within : Criterion::info,
                                              unit ? cfg.tol.xi_var_band : 0.0));
  }
  for (const auto& [s, t] : cfg.cov_pairs) {
    const std::size_t cs = ex.point_col + ex.point_index(s), ct = ex.point_col + ex.point_index(t);
    cols.push_back(cs);
    cols.push_back(ct);
    const MeanEstimate c = covariance_estimate(e.column(cs), e.column(ct));
    report.quantities.push_back(make_quantity("xi_cov" + point_name(s, d) + point_name(t, d) + tag, c.mean, c.se,
                                              min_product(s, t, d), "Brownian sheet covariance prod min(s_j, t_j)",
                                              Criterion::se_within, cfg.tol.cov_se));
  }
  for (std::size_t i = 0; i < ex.phis.size(); ++i) {
    const auto& f = find_test_function(cfg.test_functions[i]);
    const std::size_t col = ex.phi_col + i;
    cols.push_back(col);
    const MeanEstimate v = variance_estimate(e.column(col));
    report.quantities.push_back(make_quantity("phi_var[" + f.name + "]" + tag, v.mean, v.se,
                                              d == 1 ? f.norm2_1d : f.norm2_2d, "squared L2 norm of phi",
                                              Criterion::rel_within, cfg.tol.phi_var_rel));
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  if (cfg.keep_samples) append_samples(report, e, ex, cols, tag);
}

void sup_quantities(StatsReport& report, const ExperimentConfig& cfg, const Ensemble& e, const Extraction& ex,
                    const std::string& tag) {
  std::vector<double> grid = cfg.lambda_grid;
  if (grid.empty()) {
    for (int i = 0; i <= 60; ++i) grid.push_back(0.05 * i);
  }
  const double tol = cfg.self_test ? cfg.tol.selftest_distance : cfg.tol.sup_distance;
  std::vector<std::size_t> cols;
  const std::size_t count = cfg.d == 1 ? 1 : ex.curves.size();
  for (std::size_t c = 0; c < count; ++c) {
    const std::size_t col = ex.sup_col + c;
    cols.push_back(col);
    const auto x = e.column(col);
    std::function<double(double)> H;
    std::string label, source;
    if (cfg.d == 1) {
      H = [](double l) { return l <= 0.0 ? 0.0 : 2.0 * normal_cdf(l) - 1.0; };
      label = "[0;1]";
      source = "sup of Brownian motion on [0,1] has the law of |G|";
    } else {
      const CurveSpec curve = ex.curves[c];
      H = [curve](double l) { return l < 0.0 ? 0.0 : yeh_H(curve, l); };
      label = "[" + curve_name(curve) + "]";
      source = is_boundary(curve) ? "H(inf,inf,.) = 1 - 3 Phi(-l) + e^{4 l^2} Phi(-3 l)" : "Yeh's H(a,b,.)";
    }
    const KsResult ks = ks_statistic(x, H);
    Quantity q = make_quantity("sup_distance" + label + tag, ks.D, 0.0, 0.0, source, Criterion::at_most, tol);
    q.statistic = ks.D;
    q.p_value = ks.p_value;
    report.quantities.push_back(q);
    const std::vector<double> emp = empirical_cdf(x, grid);
    CdfTable table;
    table.name = "sup" + label + tag;
    for (char& ch : table.name) {
      if (ch == ';' || ch == '=' || ch == '[' || ch == ']') ch = '_';
    }
    table.lambda = grid;
    table.empirical = emp;
    for (double l : grid) table.theoretical.push_back(H(l));
    report.cdfs.push_back(table);
    const std::vector<double> zero{0.0};
    report.quantities.push_back(make_quantity("cdf_at_0" + label + tag, empirical_cdf(x, zero)[0], 0.0, 0.0,
                                              "H(a,b,0) = 0", Criterion::info, 0.0,
                                              "finite-R and lattice effects allow a small positive mass"));
  }
  if (cfg.keep_samples) append_samples(report, e, ex, cols, tag);
}

struct MomentStats {
  std::vector<double> z;  // N x P values |X|^{3/2} |Y|^{3/2}
};

void moment_quantities(StatsReport& report, const ExperimentConfig& cfg, const Ensemble& e, const Extraction& ex,
                       const std::string& tag) {
  const std::size_t P = ex.pairs.size();
  const int N = e.N;
  std::vector<double> vol, est, se;
  std::vector<std::size_t> used;
  std::vector<double> z(static_cast<std::size_t>(N) * P);
  int cs_failures = 0;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < P; ++i) {
    const auto& pair = ex.pairs[i];
    if (pair.degenerate) {
      report.notes.push_back("pair " + pair.name + " has zero volume; both moments vanish and it is excluded");
      continue;
    }
    const auto a = e.column(ex.pair_col + 2 * i), b = e.column(ex.pair_col + 2 * i + 1);
    std::vector<double> mixed(N), abs_prod(N), sq_prod(N);
    for (int r = 0; r < N; ++r) {
      const double p = std::abs(a[r] * b[r]);
      mixed[r] = std::pow(p, 1.5);
      abs_prod[r] = p;
      sq_prod[r] = p * p;
      z[static_cast<std::size_t>(r) * P + i] = mixed[r];
    }
    const MeanEstimate m = mean_estimate(mixed), m1 = mean_estimate(abs_prod), m2 = mean_estimate(sq_prod);
    // Cauchy-Schwarz: E|XY|^{3/2} <= sqrt(E|XY|) sqrt(E|XY|^2).
    const double rhs = std::sqrt(m1.mean * m2.mean);
    double rhs_se = 0.0;
    if (m1.mean > 0.0 && m2.mean > 0.0) {
      rhs_se = 0.5 * std::sqrt(m2.mean / m1.mean) * m1.se + 0.5 * std::sqrt(m1.mean / m2.mean) * m2.se;
    }
    const double combined = std::sqrt(m.se * m.se + rhs_se * rhs_se);
    const double margin = combined > 0.0 ? (m.mean - rhs) / combined : (m.mean > rhs ? INFINITY : -INFINITY);
    worst_margin = std::max(worst_margin, margin);
    if (!(m.mean <= rhs + cfg.tol.cs_se * combined)) ++cs_failures;
    report.quantities.push_back(make_quantity("moment" + pair.name + tag, m.mean, m.se, std::nullopt,
                                              "E|nu~(A)|^{3/2}|nu~(B)|^{3/2}", Criterion::info, 0.0,
                                              "Vol(A u B) = " + fmt(pair.volume) +
                                                  "; Cauchy-Schwarz bound " + fmt(rhs)));
    if (m.mean > 0.0 && m.se > 0.0) {
      vol.push_back(pair.volume);
      est.push_back(m.mean);
      se.push_back(m.se);
      used.push_back(i);
    } else {
      report.notes.push_back("pair " + pair.name + " has a zero moment estimate and is left out of the fit");
    }
  }
  if (used.size() < 3) throw NumericalError("moment scan has fewer than three usable rectangle pairs");
  const double vmin = *std::min_element(vol.begin(), vol.end()), vmax = *std::max_element(vol.begin(), vol.end());
  if (std::log10(vmax / vmin) < 2.0) {
    throw ConfigError("moment scan volumes span only " + fmt(std::log10(vmax / vmin)) + " decades (need 2)");
  }
  std::vector<double> lx(used.size()), ly(used.size()), w(used.size());
  for (std::size_t k = 0; k < used.size(); ++k) {
    lx[k] = std::log(vol[k]);
    ly[k] = std::log(est[k]);
    w[k] = est[k] * est[k] / (se[k] * se[k]);
  }
  const LinearFit fit = weighted_linear_fit(lx, ly, w);

  // Bootstrap over replications with the weights held fixed.
  std::vector<double> slopes;
  Engine engine = make_engine(derive_seed(cfg.seed, kBootstrapSalt));
  std::uniform_int_distribution<int> pick(0, N - 1);
  std::vector<int> idx(N);
  for (int b = 0; b < cfg.bootstrap; ++b) {
    for (int& v : idx) v = pick(engine);
    std::vector<double> by(used.size());
    bool ok = true;
    for (std::size_t k = 0; k < used.size(); ++k) {
      double s = 0.0;
      for (int r : idx) s += z[static_cast<std::size_t>(r) * P + used[k]];
      if (!(s > 0.0)) {
        ok = false;
        break;
      }
      by[k] = std::log(s / N);
    }
    if (ok) slopes.push_back(weighted_linear_fit(lx, by, w).slope);
  }
  const MeanEstimate boot = mean_estimate(slopes);
  const double boot_sd = boot.se * std::sqrt(static_cast<double>(slopes.size()));

  const double alpha = moment_exponent_bound(cfg.d, 1);
  report.quantities.push_back(make_quantity("slope" + tag, fit.slope, boot_sd, 1.0 + alpha,
                                            "exponent 1 + alpha of the tightness bound (alpha below " + fmt(alpha) +
                                                ")",
                                            Criterion::at_least, cfg.tol.slope_min,
                                            "se is the bootstrap standard deviation over " +
                                                std::to_string(slopes.size()) + " resamples"));
  report.quantities.push_back(make_quantity("slope_wls_se" + tag, fit.slope_se, 0.0, std::nullopt,
                                            "weighted least squares", Criterion::info, 0.0));
  report.quantities.push_back(make_quantity("volume_decades" + tag, std::log10(vmax / vmin), 0.0, 2.0,
                                            "required span of Vol(A u B)", Criterion::at_least, 2.0));
  report.quantities.push_back(make_quantity("cauchy_schwarz_failures" + tag, cs_failures, 0.0, 0.0,
                                            "empirical Cauchy-Schwarz within " + fmt(cfg.tol.cs_se) + " SEs",
                                            Criterion::at_most, 0.0,
                                            "largest margin (mixed - bound) / combined SE = " + fmt(worst_margin)));
  if (cfg.keep_samples) {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < P; ++i) {
      cols.push_back(ex.pair_col + 2 * i);
      cols.push_back(ex.pair_col + 2 * i + 1);
    }
    append_samples(report, e, ex, cols, tag);
  }
}

struct BoxPrediction {
  double variance = 0.0;
};

std::mutex& prediction_mutex() {
  static std::mutex m;
  return m;
}

double predicted_box_variance(const CovarianceModel& model, double R) {
  static std::map<std::tuple<std::string, int, double>, double> cache;
  const auto key = std::make_tuple(model.name(), model.dim(), R);
  {
    std::lock_guard lock(prediction_mutex());
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double v = box_variance(model, R);
  std::lock_guard lock(prediction_mutex());
  cache[key] = v;
  return v;
}

void gamma2_quantities(StatsReport& report, const ExperimentConfig& cfg, const CovarianceModel& model,
                       const Normalization& norm, const Ensemble& e, bool largest, const std::string& tag) {
  const double vol = std::pow(e.R, cfg.d);
  const auto total = e.column(0);
  std::vector<double> per_volume(total.size());
  for (std::size_t i = 0; i < total.size(); ++i) per_volume[i] = total[i] / vol;
  const MeanEstimate mean = mean_estimate(per_volume);
  report.quantities.push_back(make_quantity("intensity" + tag, mean.mean, mean.se, norm.rho1,
                                            "one-point Kac density rho1", Criterion::rel_within, cfg.tol.rho1_rel));
  const MeanEstimate var = variance_estimate(total);
  if (e.degenerate_field) {
    report.quantities.push_back(make_quantity("var_per_volume" + tag, var.mean / vol, var.se / vol, 0.0,
                                              "deterministic field", Criterion::abs_within, 0.0,
                                              "degenerate: every replication is the same field"));
  } else {
    report.quantities.push_back(make_quantity(
        "var_per_volume" + tag, var.mean / vol, var.se / vol, norm.gamma2, "gamma2 by radial Kac-Rice quadrature",
        largest ? Criterion::rel_within : Criterion::info, largest ? cfg.tol.gamma2_gap : 0.0,
        "relative gap " + fmt(std::abs(var.mean / vol - norm.gamma2) / norm.gamma2)));
    if (cfg.kac_predictions) {
      const double pred = predicted_box_variance(model, e.R);
      report.quantities.push_back(make_quantity("variance_identity" + tag, var.mean, var.se, pred,
                                                "double integral of F2 over the box (+ rho1 Vol when k = d)",
                                                Criterion::se_within, cfg.tol.identity_se));
    }
  }
  if (cfg.keep_samples) {
    for (int r = 0; r < e.N; ++r) report.samples.push_back({r, e.seeds[r], "nu_total" + tag, total[r]});
  }
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::sup: return "sup";
    case ExperimentKind::gamma2: return "gamma2";
    case ExperimentKind::moment: return "moment-scan";
  }
  return "unknown";
}

std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> default_cov_pairs(int d) {
  if (d == 1) {
    return {{{0.5, 1.0}, {1.0, 1.0}}, {{0.25, 1.0}, {0.75, 1.0}}, {{0.5, 1.0}, {0.5, 1.0}},
            {{0.25, 1.0}, {1.0, 1.0}}, {{0.75, 1.0}, {0.5, 1.0}}};
  }
  return {{{0.5, 1.0}, {1.0, 0.5}},
          {{1.0, 1.0}, {1.0, 1.0}},
          {{0.5, 0.5}, {1.0, 1.0}},
          {{0.25, 1.0}, {1.0, 0.25}},
          {{0.5, 0.5}, {0.25, 0.75}}};
}

Normalization normalization(const CovarianceModel& model) {
  Normalization n;
  n.rho1 = rho1(model);
  n.gamma2 = gamma2(model).gamma2;
  return n;
}

ExperimentConfig experiment_config_from(const Config& c) {
  ExperimentConfig e;
  e.model = c.get_string("experiment.model", e.model);
  e.d = static_cast<int>(c.get_int("experiment.d", e.d));
  e.R = c.get_doubles("experiment.R", e.R);
  e.h = c.get_double("experiment.h", e.h);
  e.m = static_cast<int>(c.get_int("experiment.m", e.m));
  e.N = static_cast<int>(c.get_int("experiment.N", e.N));
  e.seed = c.get_uint("experiment.seed", e.seed);
  e.lambda_grid = c.get_doubles("experiment.lambda_grid", e.lambda_grid);
  if (c.has("experiment.curves")) {
    e.curves.clear();
    for (const auto& item : c.get_strings("experiment.curves", {})) {
      const auto parts = split(item, '/');
      if (parts.size() != 2) throw ConfigError("experiment.curves entries look like a/b, got " + item);
      e.curves.emplace_back(parse_curve_param(parts[0]), parse_curve_param(parts[1]));
    }
  }
  if (c.has("experiment.t_points")) {
    e.t_points.clear();
    for (const auto& item : c.get_strings("experiment.t_points", {})) {
      const auto v = split(item, ' ');
      e.t_points.push_back(
          {parse_double(v.at(0), "experiment.t_points"), v.size() > 1 ? parse_double(v[1], "experiment.t_points") : 1.0});
    }
  }
  e.cov_pairs = default_cov_pairs(e.d);
  if (c.has("experiment.cov_pairs")) {
    e.cov_pairs.clear();
    // s1 s2 / t1 t2 entries separated by commas; coordinates by spaces.
    for (const auto& item : c.get_strings("experiment.cov_pairs", {})) {
      const auto halves = split(item, '/');
      if (halves.size() != 2) throw ConfigError("experiment.cov_pairs entries look like 's1 s2/t1 t2', got " + item);
      auto read = [&](const std::string& h) {
        const auto v = split(h, ' ');
        std::array<double, 2> p{parse_double(v.at(0), "cov pair"), v.size() > 1 ? parse_double(v[1], "cov pair") : 1.0};
        return p;
      };
      e.cov_pairs.emplace_back(read(halves[0]), read(halves[1]));
    }
  }
  e.test_functions = c.get_strings("experiment.test_functions", e.test_functions);
  e.scan_sides = c.get_doubles("experiment.scan_sides", e.scan_sides);
  e.bootstrap = static_cast<int>(c.get_int("experiment.bootstrap", e.bootstrap));
  e.curve_samples = static_cast<int>(c.get_int("experiment.curve_samples", e.curve_samples));
  e.self_test = c.get_bool("experiment.self_test", e.self_test);
  e.selftest_N = static_cast<int>(c.get_int("experiment.selftest_N", e.selftest_N));
  e.sheet_n = static_cast<int>(c.get_int("experiment.sheet_n", e.sheet_n));
  e.sheet_full_n = static_cast<int>(c.get_int("experiment.sheet_full_n", e.sheet_full_n));
  e.kac_predictions = c.get_bool("experiment.kac_predictions", e.kac_predictions);
  e.keep_samples = c.get_bool("experiment.keep_samples", e.keep_samples);
  auto& t = e.tol;
  t.ks_p = c.get_double("tolerance.ks_p", t.ks_p);
  t.cov_se = c.get_double("tolerance.cov_se", t.cov_se);
  t.xi_var_band = c.get_double("tolerance.xi_var_band", t.xi_var_band);
  t.phi_var_rel = c.get_double("tolerance.phi_var_rel", t.phi_var_rel);
  t.sup_distance = c.get_double("tolerance.sup_distance", t.sup_distance);
  t.selftest_distance = c.get_double("tolerance.selftest_distance", t.selftest_distance);
  t.gamma2_gap = c.get_double("tolerance.gamma2_gap", t.gamma2_gap);
  t.identity_se = c.get_double("tolerance.identity_se", t.identity_se);
  t.rho1_rel = c.get_double("tolerance.rho1_rel", t.rho1_rel);
  t.slope_min = c.get_double("tolerance.slope_min", t.slope_min);
  t.cs_se = c.get_double("tolerance.cs_se", t.cs_se);
  return e;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.d != 1 && cfg.d != 2) throw ConfigError("experiment dimension must be 1 or 2");
  if (cfg.N < 100) throw ConfigError("experiments need N >= 100 replications, got " + std::to_string(cfg.N));
  if (cfg.R.empty()) throw ConfigError("experiment needs at least one R");
  if (!(cfg.h > 0.0)) throw ConfigError("grid spacing h must be positive");
  if (cfg.m < 1) throw ConfigError("partition resolution m must be positive");
  for (double R : cfg.R) {
    if (!(R >= 1.0)) throw ConfigError("R must be at least 1, got " + fmt(R));
    const GridSpec g = make_grid(cfg.d, R, cfg.h);
    if ((g.n - 1) % cfg.m != 0) {
      throw ConfigError("m = " + std::to_string(cfg.m) + " does not divide n - 1 = " + std::to_string(g.n - 1) +
                        " at R = " + fmt(R));
    }
  }
  if (cfg.self_test && cfg.selftest_N < 100) throw ConfigError("self-test needs at least 100 sheets");
  if (cfg.bootstrap < 0) throw ConfigError("bootstrap count must be nonnegative");
}

FieldSample replication_field(const ExperimentConfig& cfg, double R, std::int64_t rep) {
  const CovarianceModel model = make_model(cfg.model, cfg.d);
  const GridSpec grid = make_grid(cfg.d, R, cfg.h);
  if (model.has_deterministic_field()) return evaluate_field(model, grid);
  const EmbeddingPlan plan = plan_embedding(model, grid);
  const auto pair = sample_field_pair(plan, derive_seed(radius_seed(cfg.seed, R), rep / 2));
  return rep % 2 == 0 ? pair.first : pair.second;
}

XiField xi_snapshot(const ExperimentConfig& cfg, double R, std::int64_t rep, int m) {
  const CovarianceModel model = make_model(cfg.model, cfg.d);
  const Normalization norm = normalization(model);
  const FieldSample field = replication_field(cfg, R, rep);
  const IncrementGrid inc = coarsen(nodal_cells(field, field.grid.n - 1), m);
  return center_and_rescale(inc, norm.rho1, norm.gamma2);
}

std::vector<StatsReport> run_field_experiments(const ExperimentConfig& cfg, const std::vector<ExperimentKind>& kinds) {
  validate(cfg);
  for (auto k : kinds) {
    if (k == ExperimentKind::sup && cfg.d != 2 && !cfg.self_test) {
      throw ConfigError("the sup experiment is defined for d = 2");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<StatsReport> reports;
  for (auto k : kinds) reports.push_back(new_report(cfg, k));

  Extraction ex;
  ex.cfg = &cfg;
  ex.build(kinds);

  auto report_for = [&](ExperimentKind k) -> StatsReport& {
    return reports[std::find(kinds.begin(), kinds.end(), k) - kinds.begin()];
  };

  if (cfg.self_test) {
    const Ensemble e = run_sheet_ensemble(cfg, ex);
    for (auto k : kinds) {
      StatsReport& r = report_for(k);
      if (k == ExperimentKind::clt) clt_quantities(r, cfg, e, ex, "");
      if (k == ExperimentKind::sup) sup_quantities(r, cfg, e, ex, "");
      if (k == ExperimentKind::moment) moment_quantities(r, cfg, e, ex, "");
      if (k == ExperimentKind::gamma2) throw ConfigError("the gamma2 cross-check has no self-test mode");
      r.settings["sheet_n"] = std::to_string(cfg.sheet_n);
      r.settings["sheet_full_n"] = std::to_string(cfg.sheet_full_n);
    }
  } else {
    const CovarianceModel model = make_model(cfg.model, cfg.d);
    const Normalization norm = normalization(model);
    std::vector<double> Rs = cfg.R;
    std::sort(Rs.begin(), Rs.end());
    std::vector<double> gaps, gap_se, predicted_gaps;
    for (double R : Rs) {
      const Ensemble e = run_field_ensemble(cfg, model, norm, R, ex);
      const std::string tag = radius_tag(R);
      for (auto k : kinds) {
        StatsReport& r = report_for(k);
        if (k == ExperimentKind::clt) clt_quantities(r, cfg, e, ex, tag);
        if (k == ExperimentKind::sup) sup_quantities(r, cfg, e, ex, tag);
        if (k == ExperimentKind::moment) moment_quantities(r, cfg, e, ex, tag);
        if (k == ExperimentKind::gamma2) gamma2_quantities(r, cfg, model, norm, e, R == Rs.back(), tag);
      }
      if (std::find(kinds.begin(), kinds.end(), ExperimentKind::clt) != kinds.end()) {
        // Variance gap of xi_R(1,..,1) for the R-trend.
        const std::array<double, 2> one{1.0, 1.0};
        const auto x = e.column(ex.point_col + ex.point_index(one));
        const MeanEstimate v = variance_estimate(x);
        gaps.push_back(std::abs(v.mean - 1.0));
        gap_se.push_back(v.se);
        if (cfg.kac_predictions && !e.degenerate_field) {
          predicted_gaps.push_back(std::abs(predicted_box_variance(model, R) / (norm.gamma2 * std::pow(R, cfg.d)) - 1.0));
        }
      }
    }
    for (auto& r : reports) {
      r.settings["rho1"] = fmt(norm.rho1);
      r.settings["gamma2"] = fmt(norm.gamma2);
    }
    if (std::find(kinds.begin(), kinds.end(), ExperimentKind::clt) != kinds.end() && gaps.size() >= 2) {
      bool monotone = true;
      std::string trend;
      for (std::size_t i = 0; i < gaps.size(); ++i) {
        if (i > 0 && !(gaps[i] < gaps[i - 1])) monotone = false;
        trend += (i ? "; " : "") + std::string("R=") + fmt(Rs[i]) + ": gap " + fmt(gaps[i]) + " (se " + fmt(gap_se[i]) +
                 (predicted_gaps.size() == gaps.size() ? ", Kac-Rice finite-R gap " + fmt(predicted_gaps[i]) : "") +
                 ")";
      }
      report_for(ExperimentKind::clt)
          .quantities.push_back(make_quantity("variance_gap_monotone", monotone ? 1.0 : 0.0, 0.0, 1.0,
                                              "|Var xi_R(1,..,1) - 1| decreasing in R", Criterion::at_least, 1.0,
                                              trend));
    }
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto& r : reports) r.wall_seconds = wall;
  return reports;
}

StatsReport run_clt_experiment(const ExperimentConfig& config) {
  return run_field_experiments(config, {ExperimentKind::clt}).front();
}

StatsReport run_sup_experiment(const ExperimentConfig& config) {
  return run_field_experiments(config, {ExperimentKind::sup}).front();
}

StatsReport run_gamma2_crosscheck(const ExperimentConfig& config) {
  return run_field_experiments(config, {ExperimentKind::gamma2}).front();
}

StatsReport run_moment_scan(const ExperimentConfig& config) {
  return run_field_experiments(config, {ExperimentKind::moment}).front();
}

}  // namespace nodal
