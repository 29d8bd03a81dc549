#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nodal/brownian_sheet.hpp"
#include "nodal/config.hpp"
#include "nodal/covariance.hpp"
#include "nodal/nodal_measure.hpp"
#include "nodal/report.hpp"

namespace nodal {

// Pass/fail thresholds. Every experiment verdict reads these; none is fixed
// in code.
struct Tolerances {
  double ks_p = 0.01;           // KS p-value floor
  double cov_se = 3.0;          // covariance band, in standard errors
  double xi_var_band = 0.15;    // |Var xi(1,..,1) - 1|
  double phi_var_rel = 0.15;    // relative band for Var <nu~, phi>
  double sup_distance = 0.05;   // sup |F_emp - H| for xi_R
  double selftest_distance = 0.01;
  double gamma2_gap = 0.05;     // relative gap of Var(nu)/R^d to gamma2
  double identity_se = 3.0;     // Var(nu) vs finite-R Kac-Rice prediction
  double rho1_rel = 0.01;       // mean nu / R^d vs rho1
  double slope_min = 1.05;      // moment-scan regression slope floor
  double cs_se = 3.0;           // Cauchy-Schwarz slack, in combined SEs
};

struct ExperimentConfig {
  std::string model = "bargmann-fock";
  int d = 2;
  std::vector<double> R{50.0};
  double h = 0.05;
  int m = 100;  // xi lattice resolution per side
  int N = 1000;
  std::uint64_t seed = 0x6e6f64616cULL;
  std::vector<double> lambda_grid;  // empty: 0:3:0.05
  std::vector<std::pair<CurveParam, CurveParam>> curves{{CurveParam::inf(), CurveParam::inf()}};
  std::vector<std::array<double, 2>> t_points{{1.0, 1.0}};
  std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> cov_pairs;
  std::vector<std::string> test_functions{"cos"};
  std::vector<double> scan_sides{1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125};
  int bootstrap = 500;
  int curve_samples = 64;
  bool self_test = false;
  int selftest_N = 100000;
  int sheet_n = 8192;       // edge resolution for boundary self-tests
  int sheet_full_n = 256;   // full-lattice resolution for other curves
  bool kac_predictions = true;  // also report finite-R Kac-Rice variances
  bool keep_samples = true;
  Tolerances tol;
};

// Reads experiment.* keys; everything else keeps its default.
ExperimentConfig experiment_config_from(const Config& config);
// Throws ConfigError on N < 100, R < 1, m not dividing R/h, and similar.
void validate(const ExperimentConfig& config);

// Default covariance pairs for d = 2 (and their first coordinates for d = 1).
std::vector<std::pair<std::array<double, 2>, std::array<double, 2>>> default_cov_pairs(int d);

enum class ExperimentKind { clt, sup, gamma2, moment };
std::string to_string(ExperimentKind kind);

// Runs several experiments on one shared ensemble per R (fields are sampled
// once and every requested statistic is read off each replication).
std::vector<StatsReport> run_field_experiments(const ExperimentConfig& config,
                                               const std::vector<ExperimentKind>& kinds);

StatsReport run_clt_experiment(const ExperimentConfig& config);
StatsReport run_sup_experiment(const ExperimentConfig& config);
StatsReport run_gamma2_crosscheck(const ExperimentConfig& config);
StatsReport run_moment_scan(const ExperimentConfig& config);

// Centered, rescaled nodal field of one replication (as used by the
// experiments), for heatmaps and figures.
XiField xi_snapshot(const ExperimentConfig& config, double R, std::int64_t rep, int m);

// The field sample behind replication `rep` at side length R.
FieldSample replication_field(const ExperimentConfig& config, double R, std::int64_t rep);

// Analytic inputs used for centering: rho1 and gamma2 of the configured model.
struct Normalization {
  double rho1 = 0.0;
  double gamma2 = 0.0;
};
Normalization normalization(const CovarianceModel& model);

}  // namespace nodal
