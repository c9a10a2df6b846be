#pragma once

// Projected one-sided traces of Q^q(T_h) functions onto M^q(F_Gamma,h).
//
// For a skeleton facet F and side +/-, the projected trace is the polynomial
// p in P^q with (p, nu)_{L2(0,1)} = (tr u o Phi_F, nu)_{L2(0,1)} for all nu in P^q.
// In the Legendre basis the Gram matrix is diag(1/(2k+1)), so
//   p_k = (2k+1) int_0^1 (v_hat / det J)(x_hat(s)) L_k(s) ds.

#include "hmdd/mesh.hpp"
#include "hmdd/spaces.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hmdd {

enum class Side { minus = 0, plus = 1 };

class TraceProjector
{
public:
  /// moment_points >= q + 2, since the trace integrand carries 1/det J.
  TraceProjector(const Mesh& mesh, const DofMap& dofs, int moment_points);

  int order() const { return q_; }
  int moment_points() const { return points_; }
  int num_facets() const { return static_cast<int>(facets_.size()); }

  /// (q+1) x (q+1)^2 map from the cell's scalar coefficients to Legendre coefficients.
  const Eigen::MatrixXd& matrix(int skeleton_index, Side side) const
  {
    return side == Side::plus ? plus_[skeleton_index] : minus_[skeleton_index];
  }
  /// Cell on the given side of a skeleton facet.
  int cell(int skeleton_index, Side side) const;
  /// Facet mass in the Legendre representation, int_0^1 L_i L_j |Phi_F'| ds.
  const Eigen::MatrixXd& facet_mass(int skeleton_index) const { return mass_[skeleton_index]; }
  int facet(int skeleton_index) const { return facets_[skeleton_index]; }

  /// Legendre coefficients of Pi tr^side u_h o Phi_F for global scalar coefficients u.
  Eigen::VectorXd project(Side side, int skeleton_index, const Eigen::VectorXd& u) const;

private:
  int q_;
  int points_;
  int scalar_per_cell_;
  std::vector<int> facets_;
  std::vector<int> cell_minus_, cell_plus_;
  std::vector<Eigen::MatrixXd> minus_, plus_, mass_;
};

inline TraceProjector build_trace_projector(const Mesh& mesh, const DofMap& dofs, int moment_points)
{
  return TraceProjector(mesh, dofs, moment_points);
}

} // namespace hmdd
