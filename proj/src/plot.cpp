#include "hmdd/plot.hpp"

#include "hmdd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hmdd {

int CsvTable::column(const std::string& name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(std::istream& is)
{
  const auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      out.push_back(cell);
    return out;
  };
  CsvTable t;
  std::string line;
  if (std::getline(is, line))
    t.header = split(line);
  while (std::getline(is, line))
    if (!line.empty())
      t.rows.push_back(split(line));
  return t;
}

namespace {

constexpr double width = 640, height = 480;
constexpr double left = 80, right = 170, top = 40, bottom = 60;
const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(const char* f, double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '&': out += "&amp;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Axes
{
  double x0, x1, y0, y1; // decades

  double px(double x) const { return left + (std::log10(x) - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const
  {
    return height - bottom - (std::log10(y) - y0) / (y1 - y0) * (height - top - bottom);
  }
  double px_per_decade_x() const { return (width - left - right) / (x1 - x0); }
  double px_per_decade_y() const { return (height - top - bottom) / (y1 - y0); }
};

bool valid(double x, double y)
{
  return std::isfinite(x) && std::isfinite(y) && x > 0 && y > 0;
}

std::pair<double, double> decade_range(double lo, double hi)
{
  double a = std::floor(std::log10(lo)), b = std::ceil(std::log10(hi));
  if (b <= a)
    b = a + 1;
  return {a, b};
}

} // namespace

std::string render_svg(const PlotSpec& spec)
{
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (valid(s.x[i], s.y[i])) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
  if (!(xmin <= xmax)) {
    xmin = ymin = 0.1;
    xmax = ymax = 1.0;
  }
  // room below the data for slope triangles
  ymin /= 4;
  const auto [x0, x1] = decade_range(xmin, xmax);
  const auto [y0, y1] = decade_range(ymin, ymax);
  const Axes ax{x0, x1, y0, y1};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << fmt("%.2f", (left + width - right) / 2) << "\" y=\"24\" text-anchor=\"middle\" "
     << "font-size=\"14\">" << escape(spec.title) << "</text>\n";

  const double pl = left, pr = width - right, pt = top, pb = height - bottom;
  os << "<rect x=\"" << pl << "\" y=\"" << pt << "\" width=\"" << pr - pl << "\" height=\"" << pb - pt
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int d = static_cast<int>(x0); d <= static_cast<int>(x1); ++d) {
    const double x = ax.px(std::pow(10.0, d));
    os << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << pt << "\" x2=\"" << fmt("%.2f", x) << "\" y2=\""
       << pb << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << pb + 18 << "\" text-anchor=\"middle\">1e"
       << d << "</text>\n";
  }
  for (int d = static_cast<int>(y0); d <= static_cast<int>(y1); ++d) {
    const double y = ax.py(std::pow(10.0, d));
    os << "<line x1=\"" << pl << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\"" << pr << "\" y2=\""
       << fmt("%.2f", y) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << pl - 8 << "\" y=\"" << fmt("%.2f", y + 4) << "\" text-anchor=\"end\">1e" << d
       << "</text>\n";
  }
  os << "<text x=\"" << fmt("%.2f", (pl + pr) / 2) << "\" y=\"" << height - 16
     << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
  os << "<text x=\"20\" y=\"" << fmt("%.2f", (pt + pb) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << fmt("%.2f", (pt + pb) / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const PlotSeries& s = spec.series[k];
    const std::string color = palette[k % std::size(palette)];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
      if (valid(s.x[i], s.y[i]))
        pts.emplace_back(s.x[i], s.y[i]);
    std::sort(pts.begin(), pts.end());

    if (pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
         << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i)
        os << (i ? " " : "") << fmt("%.2f", ax.px(pts[i].first)) << ',' << fmt("%.2f", ax.py(pts[i].second));
      os << "\"/>\n";
    }
    for (const auto& [x, y] : pts)
      os << "<circle cx=\"" << fmt("%.2f", ax.px(x)) << "\" cy=\"" << fmt("%.2f", ax.py(y))
         << "\" r=\"3\" fill=\"" << (s.dashed ? "white" : color) << "\" stroke=\"" << color << "\"/>\n";

    if (s.fit_slope && pts.size() > 1) {
      std::vector<double> xs, ys;
      for (const auto& [x, y] : pts) {
        xs.push_back(x);
        ys.push_back(y);
      }
      const double slope = fit_slope(xs, ys);
      if (std::isfinite(slope)) {
        // triangle under the first segment of the series
        const double xa = pts[0].first, xb = pts[1].first;
        const double ya = pts[0].second * 0.5;
        const double yb = ya * std::pow(xb / xa, slope);
        const double ax_ = ax.px(xa), bx = ax.px(xb), ay = ax.py(ya), by = ax.py(yb);
        os << "<polygon fill=\"none\" stroke=\"" << color << "\" points=\"" << fmt("%.2f", ax_) << ','
           << fmt("%.2f", ay) << ' ' << fmt("%.2f", bx) << ',' << fmt("%.2f", ay) << ' ' << fmt("%.2f", bx)
           << ',' << fmt("%.2f", by) << "\"/>\n";
        os << "<text x=\"" << fmt("%.2f", bx + 4) << "\" y=\"" << fmt("%.2f", (ay + by) / 2 + 4)
           << "\" fill=\"" << color << "\">" << fmt("%.2f", slope) << "</text>\n";
      }
    }

    const double ly = pt + 16 + 18 * static_cast<double>(k);
    os << "<line x1=\"" << pr + 10 << "\" y1=\"" << fmt("%.2f", ly - 4) << "\" x2=\"" << pr + 34 << "\" y2=\""
       << fmt("%.2f", ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\""
       << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    os << "<text x=\"" << pr + 40 << "\" y=\"" << fmt("%.2f", ly) << "\">" << escape(s.label) << "</text>\n";
  }

  // reference triangles, stacked left to right along the bottom of the plot area
  double cx = pr - 20;
  for (auto it = spec.reference_slopes.rbegin(); it != spec.reference_slopes.rend(); ++it) {
    const double leg = 0.3 * ax.px_per_decade_x();
    const double rise = *it * 0.3 * ax.px_per_decade_y();
    const double bx = cx, axp = cx - leg, by = pb - 12;
    os << "<polygon fill=\"#f4f4f4\" stroke=\"gray\" points=\"" << fmt("%.2f", axp) << ',' << fmt("%.2f", by)
       << ' ' << fmt("%.2f", bx) << ',' << fmt("%.2f", by) << ' ' << fmt("%.2f", bx) << ','
       << fmt("%.2f", by - rise) << "\"/>\n";
    os << "<text x=\"" << fmt("%.2f", bx - leg / 2) << "\" y=\"" << fmt("%.2f", by - 4)
       << "\" text-anchor=\"middle\" fill=\"gray\" font-size=\"10\">" << fmt("%.1f", *it) << "</text>\n";
    cx -= leg + 14;
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::string> emit_plots(const std::string& csv_path, const std::string& out_dir)
{
  std::ifstream in(csv_path);
  if (!in)
    throw std::runtime_error("cannot open " + csv_path);
  const CsvTable t = read_csv(in);
  const int c_geom = t.column("geometry"), c_level = t.column("level"), c_q = t.column("q"),
            c_tau = t.column("tau"), c_h = t.column("h"), c_status = t.column("status");
  if (c_level < 0 || c_q < 0 || c_tau < 0 || c_h < 0)
    throw std::runtime_error(csv_path + " lacks level/q/tau/h columns");

  struct Row
  {
    int level, q;
    double tau, h;
    const std::vector<std::string>* cells;
  };
  std::vector<Row> rows;
  for (const auto& r : t.rows) {
    if (c_status >= 0 && c_status < static_cast<int>(r.size()) && r[c_status] != "ok")
      continue;
    rows.push_back({std::stoi(r[c_level]), std::stoi(r[c_q]), std::stod(r[c_tau]), std::stod(r[c_h]), &r});
  }
  const std::string geom = (c_geom >= 0 && !t.rows.empty()) ? t.rows[0][c_geom] : "study";
  const auto value = [&](const Row& r, const std::string& col) {
    const int c = t.column(col);
    return c >= 0 && c < static_cast<int>(r.cells->size()) ? std::stod((*r.cells)[c]) : std::nan("");
  };
  const auto label = [](int q, const char* name, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "q=%d, %s=%g", q, name, v);
    return std::string(buf);
  };

  std::set<int> orders;
  std::set<double> taus;
  for (const auto& r : rows) {
    orders.insert(r.q);
    taus.insert(r.tau);
  }
  std::vector<double> ref;
  for (int q : orders) {
    ref.push_back(q + 0.5);
    ref.push_back(q + 1.0);
  }
  std::sort(ref.begin(), ref.end());
  ref.erase(std::unique(ref.begin(), ref.end()), ref.end());

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  const auto write = [&](const std::string& name, const PlotSpec& spec) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream(p) << render_svg(spec);
    files.push_back(p.string());
  };

  // error against h, one series per (q, tau)
  std::map<std::pair<int, double>, std::vector<const Row*>> by_run;
  for (const auto& r : rows)
    by_run[{r.q, r.tau}].push_back(&r);
  for (ErrorColumn c : all_error_columns) {
    const std::string col(column_name(c));
    PlotSpec spec{geom + ": " + col + " vs h", "h", col, {}, ref};
    for (const auto& [key, list] : by_run) {
      PlotSeries s{label(key.first, "tau", key.second), {}, {}};
      for (const Row* r : list) {
        s.x.push_back(r->h);
        s.y.push_back(value(*r, col));
      }
      spec.series.push_back(std::move(s));
    }
    write(geom + "_" + col + "_vs_h.svg", spec);
  }
  {
    PlotSpec spec{geom + ": e_mu (solid), e_mean_exact (dashed) vs h", "h", "error", {}, ref};
    for (const auto& [key, list] : by_run)
      for (const char* col : {"e_mu", "e_mean_exact"}) {
        PlotSeries s{label(key.first, "tau", key.second) + " " + col, {}, {}};
        s.dashed = std::string(col) == "e_mean_exact";
        for (const Row* r : list) {
          s.x.push_back(r->h);
          s.y.push_back(value(*r, col));
        }
        spec.series.push_back(std::move(s));
      }
    write(geom + "_mu_vs_h.svg", spec);
  }

  // error against tau, one series per (q, level)
  if (taus.size() > 1) {
    std::map<std::pair<int, int>, std::vector<const Row*>> by_level;
    for (const auto& r : rows)
      by_level[{r.q, r.level}].push_back(&r);
    for (ErrorColumn c : all_error_columns) {
      const std::string col(column_name(c));
      PlotSpec spec{geom + ": " + col + " vs tau", "tau", col, {}, {}};
      for (const auto& [key, list] : by_level) {
        PlotSeries s{label(key.first, "level", key.second), {}, {}};
        s.fit_slope = false;
        for (const Row* r : list) {
          s.x.push_back(r->tau);
          s.y.push_back(value(*r, col));
        }
        spec.series.push_back(std::move(s));
      }
      write(geom + "_" + col + "_vs_tau.svg", spec);
    }
  }
  return files;
}

} // namespace hmdd
