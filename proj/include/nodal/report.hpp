#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nodal {

// How a quantity is judged. The verdict depends only on the stored numbers.
enum class Criterion {
  info,          // reported, never fails
  abs_within,    // |estimate - reference| <= tolerance
  rel_within,    // |estimate - reference| <= tolerance |reference|
  se_within,     // |estimate - reference| <= tolerance * se
  p_at_least,    // p_value >= tolerance
  at_most,       // estimate <= tolerance
  at_least,      // estimate >= tolerance
};

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

struct Quantity {
  std::string name;
  double estimate = 0.0;
  double se = 0.0;
  std::optional<double> statistic;
  std::optional<double> p_value;
  std::optional<double> reference;
  std::string reference_source;
  Criterion criterion = Criterion::info;
  double tolerance = 0.0;
  std::string note;

  bool pass() const;
  bool operator==(const Quantity&) const = default;
};

struct SampleRecord {
  std::int64_t rep = 0;
  std::uint64_t seed = 0;
  std::string stat;
  double value = 0.0;
  bool operator==(const SampleRecord&) const = default;
};

struct CdfTable {
  std::string name;
  std::vector<double> lambda;
  std::vector<double> empirical;
  std::vector<double> theoretical;
  bool operator==(const CdfTable&) const = default;
};

struct StatsReport {
  std::string experiment;
  std::string model;
  int d = 0;
  std::uint64_t base_seed = 0;
  std::int64_t replications = 0;
  double wall_seconds = 0.0;
  std::vector<Quantity> quantities;
  std::vector<CdfTable> cdfs;
  std::vector<SampleRecord> samples;
  std::map<std::string, std::string> settings;
  std::vector<std::string> notes;

  bool pass() const;
  const Quantity* find(const std::string& name) const;
  bool operator==(const StatsReport&) const = default;
};

// Writes report.json and samples.csv (plus cdf_<name>.csv per CDF table) into
// dir. Throws NumericalError before writing anything if a number is NaN.
std::vector<std::filesystem::path> write_report(const StatsReport& report, const std::filesystem::path& dir);
StatsReport read_report(const std::filesystem::path& dir);

// JSON text of the report with wall time removed; equal for bit-identical runs.
std::string numeric_fingerprint(const StatsReport& report);

}  // namespace nodal
