#include "nodal/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nodal/errors.hpp"

namespace nodal {

using nlohmann::json;

namespace {

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw NumericalError("refusing to serialize non-finite value in " + where);
}

void validate(const StatsReport& r) {
  require_finite(r.wall_seconds, "wall_seconds");
  for (const auto& q : r.quantities) {
    require_finite(q.estimate, q.name + ".estimate");
    require_finite(q.se, q.name + ".se");
    require_finite(q.tolerance, q.name + ".tolerance");
    if (q.statistic) require_finite(*q.statistic, q.name + ".statistic");
    if (q.p_value) require_finite(*q.p_value, q.name + ".p_value");
    if (q.reference) require_finite(*q.reference, q.name + ".reference");
  }
  for (const auto& c : r.cdfs) {
    for (double v : c.lambda) require_finite(v, "cdf " + c.name);
    for (double v : c.empirical) require_finite(v, "cdf " + c.name);
    for (double v : c.theoretical) require_finite(v, "cdf " + c.name);
  }
  for (const auto& s : r.samples) require_finite(s.value, "sample " + s.stat);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json to_json(const StatsReport& r, bool with_time) {
  json j;
  j["experiment"] = r.experiment;
  j["model"] = r.model;
  j["d"] = r.d;
  j["base_seed"] = r.base_seed;
  j["replications"] = r.replications;
  if (with_time) j["wall_seconds"] = r.wall_seconds;
  j["pass"] = r.pass();
  json qs = json::array();
  for (const auto& q : r.quantities) {
    qs.push_back({{"name", q.name},
                  {"estimate", q.estimate},
                  {"se", q.se},
                  {"statistic", optional_json(q.statistic)},
                  {"p_value", optional_json(q.p_value)},
                  {"reference", optional_json(q.reference)},
                  {"reference_source", q.reference_source},
                  {"criterion", to_string(q.criterion)},
                  {"tolerance", q.tolerance},
                  {"pass", q.pass()},
                  {"note", q.note}});
  }
  j["quantities"] = qs;
  json cs = json::array();
  for (const auto& c : r.cdfs) {
    cs.push_back({{"name", c.name}, {"lambda", c.lambda}, {"empirical", c.empirical}, {"theoretical", c.theoretical}});
  }
  j["cdfs"] = cs;
  j["settings"] = r.settings;
  j["notes"] = r.notes;
  j["sample_count"] = r.samples.size();
  return j;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::info: return "info";
    case Criterion::abs_within: return "abs_within";
    case Criterion::rel_within: return "rel_within";
    case Criterion::se_within: return "se_within";
    case Criterion::p_at_least: return "p_at_least";
    case Criterion::at_most: return "at_most";
    case Criterion::at_least: return "at_least";
  }
  return "info";
}

Criterion criterion_from_string(const std::string& s) {
  for (Criterion c : {Criterion::info, Criterion::abs_within, Criterion::rel_within, Criterion::se_within,
                      Criterion::p_at_least, Criterion::at_most, Criterion::at_least}) {
    if (to_string(c) == s) return c;
  }
  throw ConfigError("unknown criterion '" + s + "'");
}

bool Quantity::pass() const {
  const double ref = reference.value_or(0.0);
  switch (criterion) {
    case Criterion::info: return true;
    case Criterion::abs_within: return std::abs(estimate - ref) <= tolerance;
    case Criterion::rel_within: return std::abs(estimate - ref) <= tolerance * std::abs(ref);
    case Criterion::se_within: return std::abs(estimate - ref) <= tolerance * se;
    case Criterion::p_at_least: return p_value.value_or(0.0) >= tolerance;
    case Criterion::at_most: return estimate <= tolerance;
    case Criterion::at_least: return estimate >= tolerance;
  }
  return false;
}

bool StatsReport::pass() const {
  for (const auto& q : quantities) {
    if (!q.pass()) return false;
  }
  return true;
}

const Quantity* StatsReport::find(const std::string& name) const {
  for (const auto& q : quantities) {
    if (q.name == name) return &q;
  }
  return nullptr;
}

std::vector<std::filesystem::path> write_report(const StatsReport& report, const std::filesystem::path& dir) {
  validate(report);
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const auto json_path = dir / "report.json";
  {
    std::ofstream out(json_path);
    if (!out) throw std::runtime_error("cannot write " + json_path.string());
    out << to_json(report, true).dump(2) << '\n';
  }
  written.push_back(json_path);

  const auto csv_path = dir / "samples.csv";
  {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path.string());
    out << "rep,seed,stat_name,value\n";
    for (const auto& s : report.samples) {
      out << s.rep << ',' << s.seed << ',' << s.stat << ',' << format_double(s.value) << '\n';
    }
  }
  written.push_back(csv_path);

  for (const auto& c : report.cdfs) {
    const auto path = dir / ("cdf_" + c.name + ".csv");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "lambda,empirical,theoretical\n";
    for (std::size_t i = 0; i < c.lambda.size(); ++i) {
      out << format_double(c.lambda[i]) << ',' << format_double(c.empirical[i]) << ','
          << format_double(c.theoretical[i]) << '\n';
    }
    written.push_back(path);
  }
  return written;
}

StatsReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "report.json");
  if (!in) throw std::runtime_error("cannot read " + (dir / "report.json").string());
  const json j = json::parse(in);
  StatsReport r;
  r.experiment = j.at("experiment").get<std::string>();
  r.model = j.at("model").get<std::string>();
  r.d = j.at("d").get<int>();
  r.base_seed = j.at("base_seed").get<std::uint64_t>();
  r.replications = j.at("replications").get<std::int64_t>();
  r.wall_seconds = j.value("wall_seconds", 0.0);
  for (const auto& q : j.at("quantities")) {
    Quantity x;
    x.name = q.at("name").get<std::string>();
    x.estimate = q.at("estimate").get<double>();
    x.se = q.at("se").get<double>();
    x.statistic = optional_from(q.at("statistic"));
    x.p_value = optional_from(q.at("p_value"));
    x.reference = optional_from(q.at("reference"));
    x.reference_source = q.at("reference_source").get<std::string>();
    x.criterion = criterion_from_string(q.at("criterion").get<std::string>());
    x.tolerance = q.at("tolerance").get<double>();
    x.note = q.at("note").get<std::string>();
    r.quantities.push_back(std::move(x));
  }
  for (const auto& c : j.at("cdfs")) {
    CdfTable t;
    t.name = c.at("name").get<std::string>();
    t.lambda = c.at("lambda").get<std::vector<double>>();
    t.empirical = c.at("empirical").get<std::vector<double>>();
    t.theoretical = c.at("theoretical").get<std::vector<double>>();
    r.cdfs.push_back(std::move(t));
  }
  r.settings = j.at("settings").get<std::map<std::string, std::string>>();
  r.notes = j.at("notes").get<std::vector<std::string>>();

  std::ifstream csv(dir / "samples.csv");
  if (!csv) throw std::runtime_error("cannot read " + (dir / "samples.csv").string());
  std::string line;
  std::getline(csv, line);
  if (line != "rep,seed,stat_name,value") throw ConfigError("unexpected samples.csv header: " + line);
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string rep, seed, stat, value;
    std::getline(row, rep, ',');
    std::getline(row, seed, ',');
    std::getline(row, stat, ',');
    std::getline(row, value);
    r.samples.push_back({std::stoll(rep), std::stoull(seed), stat, std::strtod(value.c_str(), nullptr)});
  }
  return r;
}

std::string numeric_fingerprint(const StatsReport& report) {
  json j = to_json(report, false);
  json rows = json::array();
  for (const auto& s : report.samples) rows.push_back({s.rep, s.seed, s.stat, s.value});
  j["samples"] = rows;
  return j.dump();
}

}  // namespace nodal
