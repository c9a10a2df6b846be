#pragma once

// Reference solutions, error norms and convergence rates.

#include "hmdd/assembly.hpp"
#include "hmdd/mesh.hpp"
#include "hmdd/spaces.hpp"
#include "hmdd/trace_projection.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace hmdd {

using VectorField = std::function<Vec2(const Vec2&)>;

/// Exact solution of -div(kappa grad u) = f, u = 0 on the outer boundary.
struct ReferenceSolution
{
  ScalarField u;
  VectorField grad_u;
  ScalarField kappa;
  ScalarField source;

  Vec2 flux(const Vec2& x) const { return kappa(x) * grad_u(x); }
  double div_flux(const Vec2& x) const { return -source(x); }
};

/// u = sin(pi x) sin(pi y) on the unit square, kappa = 1.
ReferenceSolution manufactured_square_reference();

/// Radial and azimuthal coefficients of the annulus solution
///   u = u0(r) + us(r) sin(phi) + uc(r) cos(phi)
/// on each side of the unit circle, with
///   u0 = -r^2 / (4 kappa) + log_coeff ln r + const_coeff,
///   us = cubic r^3 + linear r + inverse / r   (and uc likewise).
struct AnnulusModes
{
  struct Region
  {
    double kappa;
    double const_coeff, log_coeff;
    std::array<double, 3> sin_mode; // cubic, linear, inverse
    std::array<double, 3> cos_mode;
  };
  Region inner, outer;
};

/// Coefficients from the interface conditions [u] = 0, [kappa du/dr] = 0 at r = 1,
/// regularity at r = 0 and u(2) = 0.
AnnulusModes annulus_modes();

/// Disk of radius 2, kappa = 16 inside the unit circle and 1 outside.
ReferenceSolution annulus_reference();

/// Right-hand side of the annulus benchmark.
double annulus_source(const Vec2& x);
double annulus_kappa(const Vec2& x);

enum class ErrorColumn { e_u, e_q, e_div, j_qn, j_u, e_mu, e_mean, e_mean_exact };

inline constexpr std::array<ErrorColumn, 8> all_error_columns{
    ErrorColumn::e_u,  ErrorColumn::e_q,  ErrorColumn::e_div,  ErrorColumn::j_qn,
    ErrorColumn::j_u,  ErrorColumn::e_mu, ErrorColumn::e_mean, ErrorColumn::e_mean_exact};

std::string_view column_name(ErrorColumn c);

struct ErrorReport
{
  int level = 0;
  int q = 0;
  double tau = 0.0;
  double h = 0.0;
  double e_u = 0;          ///< ||u - u_h||
  double e_q = 0;          ///< ||q - q_h||
  double e_div = 0;        ///< ||div(q - q_h)||
  double j_qn = 0;         ///< ||[q_h . n]||_Gamma
  double j_u = 0;          ///< ||[Pi tr u_h]||_Gamma
  double e_mu = 0;         ///< ||mu - mu_h||_Gamma
  double e_mean = 0;       ///< ||{Pi tr u_h} - mu_h||_Gamma
  double e_mean_exact = 0; ///< ||{u - Pi tr u_h}||_Gamma
  double q_norm = 0;       ///< ||q_h||

  double value(ErrorColumn c) const;
};

/// All norms by quadrature with the given points per direction (0 selects q + 7).
ErrorReport compute_errors(const Solution& solution, const ReferenceSolution& reference,
                           const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                           int points = 0);

/// Least-squares slope of log(y) against log(x); pairs with y <= 0 are skipped and
/// counted in *excluded. NaN when fewer than two pairs remain.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y, int* excluded = nullptr);

struct ConvergenceTable
{
  std::vector<ErrorReport> rows;
};

struct RateFit
{
  std::array<double, all_error_columns.size()> slopes{};
  int excluded = 0;

  double slope(ErrorColumn c) const { return slopes[static_cast<std::size_t>(c)]; }
};

/// Slopes against h over the last `window` rows (all rows when window <= 0).
RateFit fit_rates(const ConvergenceTable& table, int window = 3);

/// L2(Omega) projection onto Q^q(T_h); returns scalar coefficients.
Eigen::VectorXd l2_project(const Mesh& mesh, const DofMap& dofs, const ScalarField& u, int points = 0);

/// sqrt( sum_+- ||Pi tr^+- v_h - tr^+- v_h||^2_{L2(Gamma)} ).
double trace_projection_error(const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                              const Eigen::VectorXd& scalar, int points = 0);

} // namespace hmdd
