#include "hmdd/plot.hpp"
#include "hmdd/study.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hmdd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name)
{
  const fs::path dir = fs::temp_directory_path() / ("hmdd_test_study_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::size_t count(const std::string& text, const std::string& needle)
{
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1))
    ++n;
  return n;
}

StudyConfig small_square(const fs::path& out)
{
  StudyConfig c;
  c.geometry = Geometry::square;
  c.orders = {0, 1};
  c.taus = {0.0, 10.0};
  c.level_min = 0;
  c.level_max = 2;
  c.output_dir = out.string();
  return c;
}

} // namespace

TEST_CASE("config defaults and parsing")
{
  const StudyConfig d = StudyConfig::from_json_text("{}");
  CHECK(d.geometry == Geometry::annulus);
  CHECK(d.orders == std::vector<int>{1});
  CHECK(d.taus == std::vector<double>{10.0});
  CHECK(d.level_min == 0);
  CHECK(d.level_max == 2);
  CHECK(d.solver == SolverKind::full);

  const StudyConfig c = StudyConfig::from_json_text(R"({
    "geometry": "square",
    "square": {"base_cells": 4, "split_x": [0.5], "split_y": [0.25]},
    "orders": [0, 2],
    "taus": [0, 1],
    "levels": {"min": 1, "max": 3},
    "solver": "condensed",
    "quadrature": {"volume_points": 6, "moment_points": 5, "error_points": 9},
    "rate_window": 2,
    "output_dir": "out"
  })");
  CHECK(c.geometry == Geometry::square);
  CHECK(c.square_base_cells == 4);
  CHECK(c.square_split.y_lines == std::vector<double>{0.25});
  CHECK(c.orders == std::vector<int>{0, 2});
  CHECK(c.level_min == 1);
  CHECK(c.level_max == 3);
  CHECK(c.solver == SolverKind::condensed);
  CHECK(c.volume_points == 6);
  CHECK(c.moment_points == 5);
  CHECK(c.error_points == 9);
  CHECK(c.rate_window == 2);
  CHECK(c.output_dir == "out");

  const StudyConfig s = StudyConfig::from_json_text(R"({"tau_sweep": {"min": 1e-4, "max": 1e4, "count": 9}})");
  REQUIRE(s.taus.size() == 9);
  for (int i = 0; i < 9; ++i)
    CHECK(s.taus[i] == doctest::Approx(std::pow(10.0, i - 4)).epsilon(1e-12));
}

TEST_CASE("config errors")
{
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"taus": []})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"orders": []})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"taus": [1, -2]})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"tau": [1]})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"square": {"cells": 3}})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"geometry": "torus"})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"levels": {"min": 3, "max": 1}})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text(R"({"orders": "one"})"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_json_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(StudyConfig::from_file("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("study meshes")
{
  StudyConfig c;
  CHECK(study_mesh(c, 0).num_cells() == 13);
  CHECK(study_mesh(c, 1).num_cells() == 52);
  c.geometry = Geometry::square;
  const Mesh m = study_mesh(c, 2);
  CHECK(m.num_cells() == 64);
  CHECK(m.num_patches() == 2);
  CHECK(m.refinement_level() == 2);
  CHECK(m.mesh_width() == doctest::Approx(0.125));
}

TEST_CASE("expected rates")
{
  CHECK(expected_rate(ErrorColumn::e_u, 1, 10.0) == 2.0);
  CHECK(expected_rate(ErrorColumn::e_mu, 0, 0.0) == 1.0);
  CHECK(expected_rate(ErrorColumn::e_q, 1, 0.0) == 2.0);
  CHECK(expected_rate(ErrorColumn::e_q, 1, 10.0) == 1.5);
  CHECK(expected_rate(ErrorColumn::e_div, 1, 10.0) == 0.5);
  CHECK(std::isnan(expected_rate(ErrorColumn::j_qn, 1, 0.0)));
  CHECK(std::isnan(expected_rate(ErrorColumn::e_mean, 1, 10.0)));
}

TEST_CASE("CSV output is deterministic and independent of the worker count")
{
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const StudyResult ra = run_study(small_square(a), 1);
  const StudyResult rb = run_study(small_square(b), 3);
  CHECK(ra.all_ok);
  CHECK(ra.runs.size() == 12);
  const std::string csv = slurp(a / "square.csv");
  CHECK(csv == slurp(b / "square.csv"));
  CHECK(slurp(a / "square_e_u_vs_h.svg") == slurp(b / "square_e_u_vs_h.svg"));

  std::istringstream in(csv);
  const CsvTable t = read_csv(in);
  CHECK(t.header == csv_columns());
  CHECK(t.rows.size() == 12);
  for (const auto& row : t.rows) {
    CHECK(row[t.column("geometry")] == "square");
    CHECK(row[t.column("status")] == "ok");
    CHECK(row[t.column("flagged")] == "0");
    CHECK(std::stod(row[t.column("residual")]) <= 1e-10);
  }
  CHECK(t.column("no_such_column") == -1);

  std::ostringstream again;
  write_csv(again, Geometry::square, ra.runs);
  CHECK(again.str() == csv);

  for (ErrorColumn c : all_error_columns)
    CHECK(fs::exists(a / ("square_" + std::string(column_name(c)) + "_vs_h.svg")));
  CHECK(fs::exists(a / "square_mu_vs_h.svg"));
  CHECK(fs::exists(a / "square_e_u_vs_tau.svg"));
  CHECK(fs::exists(a / "summary.txt"));
  CHECK(ra.summary.find("12 of 12 runs succeeded") != std::string::npos);
  CHECK(ra.summary.find("PASS") != std::string::npos);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("failed runs are recorded and the study continues")
{
  const fs::path dir = scratch("fail");
  StudyConfig c = small_square(dir);
  c.moment_points = 1; // below q + 2 for every order
  const StudyResult r = run_study(c, 2);
  CHECK_FALSE(r.all_ok);
  CHECK(r.runs.size() == 12);
  for (const auto& run : r.runs) {
    CHECK_FALSE(run.ok);
    CHECK(run.flagged());
    CHECK_FALSE(run.message.empty());
  }
  CHECK(fs::exists(dir / "square.csv"));
  CHECK(r.summary.find("0 of 12 runs succeeded") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("condensed solver in a study")
{
  const fs::path dir = scratch("condensed");
  StudyConfig c;
  c.orders = {1};
  c.taus = {10.0};
  c.level_max = 1;
  c.solver = SolverKind::condensed;
  c.output_dir = dir.string();
  const StudyResult r = run_study(c);
  CHECK(r.all_ok);
  const Mesh m = study_mesh(c, 1);
  const RunRecord full = run_single(StudyConfig{}, m, study_reference(Geometry::annulus), 1, 10.0);
  CHECK(r.runs.back().errors.e_u == doctest::Approx(full.errors.e_u).epsilon(1e-9));
  fs::remove_all(dir);
}

TEST_CASE("svg rendering")
{
  PlotSpec one{"single", "h", "error", {{"a", {0.5}, {0.1}}}, {}};
  const std::string svg1 = render_svg(one);
  CHECK(svg1.rfind("<svg", 0) == 0);
  CHECK(count(svg1, "<circle") == 1);
  CHECK(count(svg1, "<polygon fill=\"none\"") == 0);

  PlotSpec two{"square", "h", "error", {{"h^2", {1, 0.5, 0.25, 0.125}, {1, 0.25, 0.0625, 0.015625}}}, {1.5, 2.0}};
  const std::string svg2 = render_svg(two);
  CHECK(count(svg2, "<circle") == 4);
  CHECK(count(svg2, ">2.00</text>") == 1);
  CHECK(count(svg2, ">1.5</text>") == 1);
  CHECK(count(svg2, ">2.0</text>") == 1);
  CHECK(render_svg(two) == svg2);

  PlotSpec bad{"skip", "h", "error", {{"z", {1, 0.5, 0.25}, {0.0, -1.0, 0.5}}}, {}};
  CHECK(count(render_svg(bad), "<circle") == 1);

  PlotSpec esc{"a < b & c", "h", "e", {}, {}};
  CHECK(render_svg(esc).find("a &lt; b &amp; c") != std::string::npos);
}

TEST_CASE("plots from a csv file")
{
  const fs::path dir = scratch("plots");
  {
    std::ofstream out(dir / "square.csv");
    std::vector<RunRecord> runs;
    for (int level = 0; level < 3; ++level) {
      RunRecord r;
      r.level = level;
      r.q = 1;
      r.tau = 1.0;
      r.ok = true;
      r.errors.h = std::pow(0.5, level);
      r.errors.e_u = std::pow(r.errors.h, 2);
      r.errors.e_q = 0.5 * std::pow(r.errors.h, 1.5);
      runs.push_back(r);
    }
    write_csv(out, Geometry::square, runs);
  }
  const auto files = emit_plots((dir / "square.csv").string(), dir.string());
  CHECK(files.size() == all_error_columns.size() + 1);
  const std::string eu = slurp(dir / "square_e_u_vs_h.svg");
  CHECK(eu.find(">2.00</text>") != std::string::npos);
  CHECK(slurp(dir / "square_e_q_vs_h.svg").find(">1.50</text>") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "square_e_u_vs_tau.svg"));
  CHECK_THROWS(emit_plots((dir / "missing.csv").string(), dir.string()));
  fs::remove_all(dir);
}

#ifdef HMDD_CLI_PATH
TEST_CASE("command line exit codes")
{
  const fs::path dir = scratch("cli");
  const auto run = [&](const std::string& args) {
    const std::string cmd = std::string(HMDD_CLI_PATH) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string good = write("good.json", R"({"geometry": "square", "orders": [0], "taus": [1], "levels": {"min": 0, "max": 1}})");
  const std::string empty = write("empty.json", R"({"taus": []})");
  const std::string failing = write("fail.json", R"({"geometry": "square", "orders": [1], "levels": {"min": 0, "max": 0}, "quadrature": {"moment_points": 1}})");

  CHECK(run("run -c " + good + " -o " + (dir / "out").string()) == 0);
  CHECK(fs::exists(dir / "out" / "square.csv"));
  CHECK(run("run -c " + empty + " -o " + (dir / "out2").string()) == 2);
  CHECK(run("run -c " + (dir / "missing.json").string()) == 2);
  CHECK(run("run") == 2);
  CHECK(run("run -c " + failing + " -o " + (dir / "out3").string()) == 1);
  CHECK(run("plot " + (dir / "out" / "square.csv").string() + " -o " + (dir / "replot").string()) == 0);
  CHECK(slurp(dir / "replot" / "square_e_u_vs_h.svg") == slurp(dir / "out" / "square_e_u_vs_h.svg"));
  CHECK(run("mesh -g annulus -l 1 -o " + (dir / "annulus.mesh").string()) == 0);
  std::ifstream mesh_in(dir / "annulus.mesh");
  CHECK(read_mesh(mesh_in).num_cells() == 52);
  fs::remove_all(dir);
}
#endif
