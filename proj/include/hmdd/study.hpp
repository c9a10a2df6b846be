#pragma once

// Batch convergence studies over refinement level, polynomial order and tau.

#include "hmdd/analysis.hpp"
#include "hmdd/assembly.hpp"
#include "hmdd/solver.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hmdd {

enum class Geometry { square, annulus };
enum class SolverKind { full, condensed };

struct StudyConfig
{
  Geometry geometry = Geometry::annulus;
  /// Square only: cells per side at level 0 and patch split lines.
  int square_base_cells = 2;
  SquareSplit square_split{{0.5}, {}};

  std::vector<int> orders{1};
  std::vector<double> taus{10.0};
  int level_min = 0;
  int level_max = 2;
  SolverKind solver = SolverKind::full;

  /// 0 selects the defaults q+3 (volume), q+3 (trace moments), q+7 (errors).
  int volume_points = 0;
  int moment_points = 0;
  int error_points = 0;

  int rate_window = 3;
  std::string output_dir = "results";

  /// Throws ConfigError on unknown keys, empty sweeps, or negative / non-finite tau.
  static StudyConfig from_json_text(const std::string& text);
  static StudyConfig from_file(const std::string& path);
  void validate() const;
};

std::string to_string(Geometry g);

Mesh study_mesh(const StudyConfig& config, int level);
ReferenceSolution study_reference(Geometry g);

/// Everything produced by one discretize-assemble-solve pass.
struct Discretization
{
  DofMap dofs;
  TraceProjector projector;
  BlockSystem system;
  Solution solution;
  LinearSolveReport solve;
};

struct DiscretizationOptions
{
  int volume_points = 0;
  int moment_points = 0;
  SolverKind solver = SolverKind::full;
};

Discretization discretize_and_solve(const Mesh& mesh, int q, const ProblemData& data,
                                    const DiscretizationOptions& options = {});

struct RunRecord
{
  int level = 0;
  int q = 0;
  double tau = 0.0;
  int cells = 0;
  int unknowns = 0;
  ErrorReport errors;
  LinearSolveReport solve;
  bool ok = false;
  std::string message;

  bool flagged() const { return !ok || solve.relative_residual > 1e-10; }
};

/// One (level, q, tau) run on a prepared mesh.
RunRecord run_single(const StudyConfig& config, const Mesh& mesh, const ReferenceSolution& reference,
                     int q, double tau);

struct StudyResult
{
  std::vector<RunRecord> runs;
  std::vector<std::string> files;
  std::string summary;
  bool all_ok = true;
};

/// Runs the sweep on `workers` threads, then writes the CSV, plots and summary into
/// config.output_dir. Failed runs are recorded and the sweep continues.
StudyResult run_study(const StudyConfig& config, int workers = 1, std::ostream* log = nullptr);

/// Column order of the study CSV.
const std::vector<std::string>& csv_columns();
void write_csv(std::ostream& os, Geometry geometry, const std::vector<RunRecord>& runs);

/// Lower end of the expected convergence rate in h for an error column (NaN if none).
double expected_rate(ErrorColumn c, int q, double tau);

/// Fitted rates per (q, tau) against the expected-rate table, as text.
std::string rate_summary(const StudyConfig& config, const std::vector<RunRecord>& runs);

} // namespace hmdd
