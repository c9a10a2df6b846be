#include "hmdd/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hmdd {

namespace {

constexpr double pi = std::numbers::pi;

double sqrt_2p() { return std::sqrt(2.0 + std::sqrt(2.0)); }
double sqrt_2m() { return std::sqrt(2.0 - std::sqrt(2.0)); }

// y-weighted m = 1 mode:  (cubic r^2 + linear + inverse / r^2) * y  and its gradient
double mode_value(const std::array<double, 3>& c, double rho, double y)
{
  return (c[0] * rho + c[1] + c[2] / rho) * y;
}

Vec2 mode_gradient(const std::array<double, 3>& c, const Vec2& x, bool along_y)
{
  const double rho = x.squaredNorm();
  const double p = c[0] * rho + c[1] + c[2] / rho;
  const double dp = c[0] - c[2] / (rho * rho); // d/d rho
  const double w = along_y ? x.y() : x.x();
  Vec2 g = 2.0 * dp * w * x;
  (along_y ? g.y() : g.x()) += p;
  return g;
}

// m = 1 mode with source c r sin(phi): particular -c r^3 / (8 kappa), homogeneous r, 1/r.
// Unknowns (inner linear, outer linear, outer inverse).
std::array<std::array<double, 3>, 2> solve_m1(double c_in, double k_in, double c_out, double k_out)
{
  const double a_in = -c_in / (8 * k_in), a_out = -c_out / (8 * k_out);
  Eigen::Matrix3d M;
  Eigen::Vector3d b;
  // u(2) = 0
  M.row(0) << 0, 2, 0.5;
  b(0) = -a_out * 8;
  // continuity at r = 1
  M.row(1) << 1, -1, -1;
  b(1) = a_out - a_in;
  // flux continuity at r = 1
  M.row(2) << k_in, -k_out, k_out;
  b(2) = k_out * 3 * a_out - k_in * 3 * a_in;
  const Eigen::Vector3d s = M.fullPivLu().solve(b);
  return {{{a_in, s(0), 0.0}, {a_out, s(1), s(2)}}};
}

} // namespace

ReferenceSolution manufactured_square_reference()
{
  ReferenceSolution r;
  r.u = [](const Vec2& x) { return std::sin(pi * x.x()) * std::sin(pi * x.y()); };
  r.grad_u = [](const Vec2& x) {
    return Vec2(pi * std::cos(pi * x.x()) * std::sin(pi * x.y()),
                pi * std::sin(pi * x.x()) * std::cos(pi * x.y()));
  };
  r.kappa = [](const Vec2&) { return 1.0; };
  r.source = [](const Vec2& x) {
    return 2 * pi * pi * std::sin(pi * x.x()) * std::sin(pi * x.y());
  };
  return r;
}

double annulus_kappa(const Vec2& x)
{
  return x.norm() < 1.0 ? 16.0 : 1.0;
}

double annulus_source(const Vec2& x)
{
  // r sin(phi) = y, r cos(phi) = x
  const double scale = x.norm() < 1.0 ? 47.0 / 2.0 : 1.0;
  return scale * sqrt_2p() * x.y() - scale * sqrt_2m() * x.x() + 1.0;
}

AnnulusModes annulus_modes()
{
  AnnulusModes m;
  m.inner.kappa = 16.0;
  m.outer.kappa = 1.0;
  const double k_in = m.inner.kappa, k_out = m.outer.kappa;

  // m = 0: -kappa (u'' + u'/r) = 1; inner u = -r^2/(4 k_in) + b_in,
  // outer u = -r^2/(4 k_out) + a ln r + b_out.
  // flux at 1: k_in (-1/(2 k_in)) = k_out (-1/(2 k_out) + a)  =>  a = 0 for any kappa
  m.inner.log_coeff = 0.0;
  m.outer.log_coeff = 0.0;
  m.outer.const_coeff = 4.0 / (4.0 * k_out) - m.outer.log_coeff * std::log(2.0);
  m.inner.const_coeff = -1.0 / (4.0 * k_out) + m.outer.const_coeff + 1.0 / (4.0 * k_in);

  const double s_in = 47.0 / 2.0 * sqrt_2p(), s_out = sqrt_2p();
  const double c_in = -47.0 / 2.0 * sqrt_2m(), c_out = -sqrt_2m();
  const auto sin_modes = solve_m1(s_in, k_in, s_out, k_out);
  const auto cos_modes = solve_m1(c_in, k_in, c_out, k_out);
  m.inner.sin_mode = sin_modes[0];
  m.outer.sin_mode = sin_modes[1];
  m.inner.cos_mode = cos_modes[0];
  m.outer.cos_mode = cos_modes[1];
  return m;
}

ReferenceSolution annulus_reference()
{
  const AnnulusModes modes = annulus_modes();
  const auto region = [modes](const Vec2& x) -> AnnulusModes::Region {
    return x.norm() < 1.0 ? modes.inner : modes.outer;
  };
  ReferenceSolution r;
  r.u = [region](const Vec2& x) {
    const auto g = region(x);
    const double rho = x.squaredNorm();
    double u = -rho / (4 * g.kappa) + g.const_coeff;
    if (g.log_coeff != 0.0)
      u += 0.5 * g.log_coeff * std::log(rho);
    return u + mode_value(g.sin_mode, rho, x.y()) + mode_value(g.cos_mode, rho, x.x());
  };
  r.grad_u = [region](const Vec2& x) {
    const auto g = region(x);
    const double rho = x.squaredNorm();
    const double d0 = -1.0 / (4 * g.kappa) + (g.log_coeff != 0.0 ? 0.5 * g.log_coeff / rho : 0.0);
    return Vec2(2.0 * d0 * x + mode_gradient(g.sin_mode, x, true) + mode_gradient(g.cos_mode, x, false));
  };
  r.kappa = annulus_kappa;
  r.source = annulus_source;
  return r;
}

// ---------------------------------------------------------------------------

std::string_view column_name(ErrorColumn c)
{
  switch (c) {
  case ErrorColumn::e_u: return "e_u";
  case ErrorColumn::e_q: return "e_q";
  case ErrorColumn::e_div: return "e_div";
  case ErrorColumn::j_qn: return "j_qn";
  case ErrorColumn::j_u: return "j_u";
  case ErrorColumn::e_mu: return "e_mu";
  case ErrorColumn::e_mean: return "e_mean";
  case ErrorColumn::e_mean_exact: return "e_mean_exact";
  }
  return "?";
}

double ErrorReport::value(ErrorColumn c) const
{
  switch (c) {
  case ErrorColumn::e_u: return e_u;
  case ErrorColumn::e_q: return e_q;
  case ErrorColumn::e_div: return e_div;
  case ErrorColumn::j_qn: return j_qn;
  case ErrorColumn::j_u: return j_u;
  case ErrorColumn::e_mu: return e_mu;
  case ErrorColumn::e_mean: return e_mean;
  case ErrorColumn::e_mean_exact: return e_mean_exact;
  }
  return 0.0;
}

ErrorReport compute_errors(const Solution& solution, const ReferenceSolution& reference,
                           const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                           int points)
{
  const int q = dofs.order();
  const int np = points > 0 ? points : q + 7;
  const FieldEvaluator eval(mesh, dofs, solution);
  const auto square = tensor_rule(np);
  const auto line = gauss_rule(np);

  ErrorReport r;
  r.q = q;
  r.h = mesh.mesh_width();
  r.level = mesh.refinement_level();

  double eu = 0, eq = 0, ediv = 0, qn = 0;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& map = mesh.cells()[c].map;
    const Eigen::VectorXd uc = eval.local_scalar(c);
    const Eigen::VectorXd wc = eval.local_flux(c);
    for (std::size_t g = 0; g < square.size(); ++g) {
      const Vec2& xh = square.points[g];
      const MapEval m = map.eval(xh);
      const double w = square.weights[g] * m.detJ;
      const double uh = q_transform(map, eval.qbasis(), uc, xh);
      const FluxValue qh = piola_transform(map, eval.rt(), wc, xh);
      eu += w * std::pow(reference.u(m.x) - uh, 2);
      eq += w * (reference.flux(m.x) - qh.value).squaredNorm();
      ediv += w * std::pow(reference.div_flux(m.x) - qh.divergence, 2);
      qn += w * qh.value.squaredNorm();
    }
  }

  double jqn = 0, ju = 0, emu = 0, emean = 0, emean_exact = 0;
  for (int k = 0; k < projector.num_facets(); ++k) {
    const int f = projector.facet(k);
    const FacetMapping fm = mesh.facet_map(f);
    const Eigen::VectorXd pm = projector.project(Side::minus, k, solution.scalar);
    const Eigen::VectorXd pp = projector.project(Side::plus, k, solution.scalar);
    for (std::size_t g = 0; g < line.size(); ++g) {
      const double s = line.points[g](0);
      const double w = line.weights[g] * fm.arc_factor(s);
      const Eigen::VectorXd l = legendre_eval(q, s);
      const double um = l.dot(pm), up = l.dot(pp);
      const double mu_h = eval.mu(f, s);
      const double mu = reference.u(fm.point(s));
      jqn += w * std::pow(eval.normal_flux(f, true, s) - eval.normal_flux(f, false, s), 2);
      ju += w * std::pow(up - um, 2);
      emu += w * std::pow(mu - mu_h, 2);
      emean += w * std::pow(0.5 * (up + um) - mu_h, 2);
      emean_exact += w * std::pow(mu - 0.5 * (up + um), 2);
    }
  }
  r.e_u = std::sqrt(eu);
  r.e_q = std::sqrt(eq);
  r.e_div = std::sqrt(ediv);
  r.q_norm = std::sqrt(qn);
  r.j_qn = std::sqrt(jqn);
  r.j_u = std::sqrt(ju);
  r.e_mu = std::sqrt(emu);
  r.e_mean = std::sqrt(emean);
  r.e_mean_exact = std::sqrt(emean_exact);
  return r;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y, int* excluded)
{
  std::vector<double> lx, ly;
  int skipped = 0;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (!(y[i] > 0) || !(x[i] > 0) || !std::isfinite(y[i])) {
      ++skipped;
      continue;
    }
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  if (excluded)
    *excluded += skipped;
  const std::size_t n = lx.size();
  if (n < 2)
    return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

RateFit fit_rates(const ConvergenceTable& table, int window)
{
  const std::size_t n = table.rows.size();
  const std::size_t first = (window > 0 && static_cast<std::size_t>(window) < n) ? n - window : 0;
  RateFit fit;
  for (std::size_t c = 0; c < all_error_columns.size(); ++c) {
    std::vector<double> h, e;
    for (std::size_t i = first; i < n; ++i) {
      h.push_back(table.rows[i].h);
      e.push_back(table.rows[i].value(all_error_columns[c]));
    }
    fit.slopes[c] = fit_slope(h, e, &fit.excluded);
  }
  return fit;
}

Eigen::VectorXd l2_project(const Mesh& mesh, const DofMap& dofs, const ScalarField& u, int points)
{
  const QReferenceBasis<double> qb(dofs.order());
  const auto rule = tensor_rule(points > 0 ? points : dofs.order() + 7);
  Eigen::VectorXd coeffs(dofs.n_scalar());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& map = mesh.cells()[c].map;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(qb.size(), qb.size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(qb.size());
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const MapEval m = map.eval(rule.points[g]);
      const Eigen::VectorXd v = qb.values(rule.points[g]);
      // v_i = v_hat_i / det J, dx = det J dx_hat
      M += (rule.weights[g] / m.detJ) * v * v.transpose();
      b += rule.weights[g] * u(m.x) * v;
    }
    coeffs.segment(dofs.scalar_dof(c, 0), qb.size()) = M.llt().solve(b);
  }
  return coeffs;
}

double trace_projection_error(const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                              const Eigen::VectorXd& scalar, int points)
{
  const int q = dofs.order();
  const QReferenceBasis<double> qb(q);
  const auto line = gauss_rule(points > 0 ? points : q + 7);
  double err = 0;
  for (int k = 0; k < projector.num_facets(); ++k) {
    const int f = projector.facet(k);
    const Facet& F = mesh.facets()[f];
    const FacetMapping fm = mesh.facet_map(f);
    for (const Side side : {Side::minus, Side::plus}) {
      const FacetSide& fs = side == Side::plus ? F.plus : F.minus;
      const Eigen::VectorXd p = projector.project(side, k, scalar);
      const Eigen::VectorXd local = scalar.segment(dofs.scalar_dof(fs.cell, 0), qb.size());
      for (std::size_t g = 0; g < line.size(); ++g) {
        const double s = line.points[g](0);
        const Vec2 xh = reference_edge_point(fs.local_edge, fs.edge_parameter(s));
        const double tr = q_transform(mesh.cells()[fs.cell].map, qb, local, xh);
        err += line.weights[g] * fm.arc_factor(s) * std::pow(legendre_eval(q, s).dot(p) - tr, 2);
      }
    }
  }
  return std::sqrt(err);
}

} // namespace hmdd
