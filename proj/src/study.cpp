#include "hmdd/study.hpp"

#include "hmdd/plot.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace hmdd {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where)
{
  if (!j.is_object())
    throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename T>
T get_as(const json& j, const std::string& key)
{
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

std::string format17(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

double expected_rate(ErrorColumn c, int q, double tau)
{
  // lower end of the observed rate range; tau > 0 allows the reduced large-tau regime
  const bool penalized = tau > 0.0;
  switch (c) {
  case ErrorColumn::e_u:
  case ErrorColumn::e_mu: return q + 1.0;
  case ErrorColumn::e_q: return penalized ? q + 0.5 : q + 1.0;
  case ErrorColumn::e_div: return penalized ? q - 0.5 : q + 1.0;
  case ErrorColumn::j_qn: return penalized ? q : std::nan("");
  case ErrorColumn::j_u: return penalized ? q : q + 1.0;
  default: return std::nan("");
  }
}

std::string to_string(Geometry g)
{
  return g == Geometry::square ? "square" : "annulus";
}

StudyConfig StudyConfig::from_json_text(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  check_keys(j,
             {"geometry", "square", "orders", "taus", "tau_sweep", "levels", "solver", "quadrature",
              "rate_window", "output_dir"},
             "config");

  StudyConfig c;
  if (j.contains("geometry")) {
    const auto g = get_as<std::string>(j, "geometry");
    if (g == "square")
      c.geometry = Geometry::square;
    else if (g == "annulus")
      c.geometry = Geometry::annulus;
    else
      throw ConfigError("geometry must be 'square' or 'annulus', got '" + g + "'");
  }
  if (j.contains("square")) {
    const json& s = j["square"];
    check_keys(s, {"base_cells", "split_x", "split_y"}, "square");
    if (s.contains("base_cells"))
      c.square_base_cells = get_as<int>(s, "base_cells");
    if (s.contains("split_x"))
      c.square_split.x_lines = get_as<std::vector<double>>(s, "split_x");
    if (s.contains("split_y"))
      c.square_split.y_lines = get_as<std::vector<double>>(s, "split_y");
  }
  if (j.contains("orders"))
    c.orders = get_as<std::vector<int>>(j, "orders");
  if (j.contains("taus"))
    c.taus = get_as<std::vector<double>>(j, "taus");
  if (j.contains("tau_sweep")) {
    const json& s = j["tau_sweep"];
    check_keys(s, {"min", "max", "count"}, "tau_sweep");
    const double lo = get_as<double>(s, "min"), hi = get_as<double>(s, "max");
    const int n = get_as<int>(s, "count");
    if (!(lo > 0) || !(hi >= lo) || n < 1)
      throw ConfigError("tau_sweep needs 0 < min <= max and count >= 1");
    if (!j.contains("taus"))
      c.taus.clear();
    for (int i = 0; i < n; ++i) {
      const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      // base 10 so that decades come out exact
      c.taus.push_back(std::pow(10.0, std::log10(lo) + t * (std::log10(hi) - std::log10(lo))));
    }
  }
  if (j.contains("levels")) {
    const json& l = j["levels"];
    check_keys(l, {"min", "max"}, "levels");
    if (l.contains("min"))
      c.level_min = get_as<int>(l, "min");
    if (l.contains("max"))
      c.level_max = get_as<int>(l, "max");
  }
  if (j.contains("solver")) {
    const auto s = get_as<std::string>(j, "solver");
    if (s == "full")
      c.solver = SolverKind::full;
    else if (s == "condensed")
      c.solver = SolverKind::condensed;
    else
      throw ConfigError("solver must be 'full' or 'condensed', got '" + s + "'");
  }
  if (j.contains("quadrature")) {
    const json& q = j["quadrature"];
    check_keys(q, {"volume_points", "moment_points", "error_points"}, "quadrature");
    if (q.contains("volume_points"))
      c.volume_points = get_as<int>(q, "volume_points");
    if (q.contains("moment_points"))
      c.moment_points = get_as<int>(q, "moment_points");
    if (q.contains("error_points"))
      c.error_points = get_as<int>(q, "error_points");
  }
  if (j.contains("rate_window"))
    c.rate_window = get_as<int>(j, "rate_window");
  if (j.contains("output_dir"))
    c.output_dir = get_as<std::string>(j, "output_dir");
  c.validate();
  return c;
}

StudyConfig StudyConfig::from_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void StudyConfig::validate() const
{
  if (orders.empty())
    throw ConfigError("orders must not be empty");
  if (taus.empty())
    throw ConfigError("taus must not be empty");
  for (int q : orders)
    if (q < 0 || q > 8)
      throw ConfigError("polynomial order " + std::to_string(q) + " outside 0..8");
  for (double t : taus)
    if (!std::isfinite(t) || t < 0)
      throw ConfigError("tau must be finite and >= 0, got " + format17(t));
  if (level_min < 0 || level_max < level_min || level_max > 8)
    throw ConfigError("levels need 0 <= min <= max <= 8");
  if (square_base_cells < 1)
    throw ConfigError("square.base_cells must be positive");
  if (volume_points < 0 || moment_points < 0 || error_points < 0)
    throw ConfigError("quadrature overrides must be >= 0");
  if (output_dir.empty())
    throw ConfigError("output_dir must not be empty");
}

Mesh study_mesh(const StudyConfig& config, int level)
{
  if (config.geometry == Geometry::annulus)
    return build_annulus_mesh(level);
  Mesh m = build_square_mesh(config.square_base_cells << level, config.square_split);
  return Mesh(m.cells(), m.facets(), level);
}

ReferenceSolution study_reference(Geometry g)
{
  return g == Geometry::square ? manufactured_square_reference() : annulus_reference();
}

Discretization discretize_and_solve(const Mesh& mesh, int q, const ProblemData& data,
                                    const DiscretizationOptions& options)
{
  DofMap dofs(mesh, q);
  TraceProjector projector(mesh, dofs, options.moment_points > 0 ? options.moment_points : q + 3);
  BlockSystem system = assemble(mesh, dofs, projector, data, {options.volume_points});
  auto [solution, report] = options.solver == SolverKind::condensed ? solve_condensed(system, dofs)
                                                                    : solve_full(system, dofs);
  return {std::move(dofs), std::move(projector), std::move(system), std::move(solution), report};
}

RunRecord run_single(const StudyConfig& config, const Mesh& mesh, const ReferenceSolution& reference,
                     int q, double tau)
{
  RunRecord r;
  r.level = mesh.refinement_level();
  r.q = q;
  r.tau = tau;
  r.cells = mesh.num_cells();
  try {
    const ProblemData data{reference.kappa, reference.source, tau};
    const Discretization d =
        discretize_and_solve(mesh, q, data, {config.volume_points, config.moment_points, config.solver});
    r.unknowns = d.dofs.total();
    r.solve = d.solve;
    const int error_points = config.error_points > 0
                                 ? config.error_points
                                 : (config.volume_points > 0 ? config.volume_points : q + 3) + 4;
    r.errors = compute_errors(d.solution, reference, mesh, d.dofs, d.projector, error_points);
    r.errors.tau = tau;
    r.ok = true;
  } catch (const std::exception& e) {
    r.ok = false;
    r.message = e.what();
    r.errors.level = mesh.refinement_level();
    r.errors.q = q;
    r.errors.tau = tau;
    r.errors.h = mesh.mesh_width();
  }
  return r;
}

const std::vector<std::string>& csv_columns()
{
  static const std::vector<std::string> cols{
      "geometry", "level", "q",    "tau",    "h",      "cells",        "unknowns", "e_u",
      "e_q",      "e_div", "j_qn", "j_u",    "e_mu",   "e_mean",       "e_mean_exact",
      "q_norm",   "residual", "flagged", "status"};
  return cols;
}

void write_csv(std::ostream& os, Geometry geometry, const std::vector<RunRecord>& runs)
{
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& r : runs) {
    const ErrorReport& e = r.errors;
    os << to_string(geometry) << ',' << r.level << ',' << r.q << ',' << format17(r.tau) << ','
       << format17(e.h) << ',' << r.cells << ',' << r.unknowns;
    for (ErrorColumn c : all_error_columns)
      os << ',' << format17(r.ok ? e.value(c) : std::nan(""));
    os << ',' << format17(r.ok ? e.q_norm : std::nan("")) << ','
       << format17(r.ok ? r.solve.relative_residual : std::nan("")) << ',' << (r.flagged() ? 1 : 0)
       << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
}

std::string rate_summary(const StudyConfig& config, const std::vector<RunRecord>& runs)
{
  std::map<std::pair<int, double>, ConvergenceTable> groups;
  for (const auto& r : runs)
    if (r.ok)
      groups[{r.q, r.tau}].rows.push_back(r.errors);

  std::ostringstream os;
  os << "geometry " << to_string(config.geometry) << ", levels " << config.level_min << ".."
     << config.level_max << ", rate window " << config.rate_window << "\n";
  char line[200];
  for (auto& [key, table] : groups) {
    const auto [q, tau] = key;
    std::sort(table.rows.begin(), table.rows.end(),
              [](const ErrorReport& a, const ErrorReport& b) { return a.level < b.level; });
    const RateFit fit = fit_rates(table, config.rate_window);
    os << "\nq = " << q << ", tau = " << format17(tau) << " (" << table.rows.size() << " levels)\n";
    if (fit.excluded > 0)
      os << "  warning: " << fit.excluded << " nonpositive entries excluded from the fit\n";
    for (ErrorColumn c : all_error_columns) {
      const double expected = expected_rate(c, q, tau);
      const double s = fit.slope(c);
      const std::string name(column_name(c));
      double largest = 0;
      for (const auto& row : table.rows)
        largest = std::max(largest, row.value(c));
      if (largest < 1e-12) {
        std::snprintf(line, sizeof line, "  %-13s at roundoff (max %.1e)\n", name.c_str(), largest);
      } else if (std::isnan(expected)) {
        std::snprintf(line, sizeof line, "  %-13s slope %8.3f\n", name.c_str(), s);
      } else {
        const bool pass = !std::isnan(s) && s >= expected - 0.2;
        std::snprintf(line, sizeof line, "  %-13s slope %8.3f  expected %.1f (pass >= %.1f)  %s\n", name.c_str(), s,
                      expected, expected - 0.2, pass ? "PASS" : "FAIL");
      }
      os << line;
    }
    if (tau == 0.0) {
      double worst = 0;
      for (const auto& row : table.rows)
        worst = std::max(worst, row.q_norm > 0 ? row.j_qn / row.q_norm : row.j_qn);
      std::snprintf(line, sizeof line, "  max j_qn/|q_h| %.3e  %s\n", worst, worst <= 1e-10 ? "PASS" : "FAIL");
      os << line;
    }
  }
  int failed = 0;
  for (const auto& r : runs)
    if (!r.ok) {
      ++failed;
      os << "\nrun failed: level " << r.level << ", q " << r.q << ", tau " << format17(r.tau) << ": "
         << r.message << "\n";
    }
  os << "\n" << runs.size() - failed << " of " << runs.size() << " runs succeeded\n";
  return os.str();
}

StudyResult run_study(const StudyConfig& config, int workers, std::ostream* log)
{
  config.validate();
  namespace fs = std::filesystem;
  fs::create_directories(config.output_dir);

  std::vector<Mesh> meshes;
  for (int l = config.level_min; l <= config.level_max; ++l)
    meshes.push_back(study_mesh(config, l));
  const ReferenceSolution reference = study_reference(config.geometry);

  struct Task
  {
    int mesh, q;
    double tau;
  };
  std::vector<Task> tasks;
  for (int q : config.orders)
    for (double tau : config.taus)
      for (int m = 0; m < static_cast<int>(meshes.size()); ++m)
        tasks.push_back({m, q, tau});

  StudyResult result;
  result.runs.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      result.runs[i] = run_single(config, meshes[t.mesh], reference, t.q, t.tau);
      if (log) {
        const RunRecord& r = result.runs[i];
        std::lock_guard lock(log_mutex);
        *log << "level " << r.level << " q " << r.q << " tau " << format17(r.tau) << ": "
             << (r.ok ? "e_u " + format17(r.errors.e_u) : "FAILED " + r.message) << "\n";
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n; ++w)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();

  for (const auto& r : result.runs)
    result.all_ok = result.all_ok && r.ok;

  const fs::path dir(config.output_dir);
  const fs::path csv = dir / (to_string(config.geometry) + ".csv");
  {
    std::ofstream os(csv);
    write_csv(os, config.geometry, result.runs);
    if (!os)
      throw std::runtime_error("cannot write " + csv.string());
  }
  result.files.push_back(csv.string());
  for (auto& f : emit_plots(csv.string(), config.output_dir))
    result.files.push_back(f);

  result.summary = rate_summary(config, result.runs);
  const fs::path summary = dir / "summary.txt";
  std::ofstream(summary) << result.summary;
  result.files.push_back(summary.string());
  return result;
}

} // namespace hmdd
