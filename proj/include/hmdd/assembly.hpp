#pragma once

// Sparse block system of the hybrid mixed domain decomposition method.
//
// Unknowns (q_h, u_h, mu_h), test functions (w_h, v_h, nu_h):
//   A_ij = int 1/kappa w_j . w_i          B_ij = int v_j div w_i
//   C_ij = int_Gamma mu_j [w_i . n]        D_ij = tau sum_+- int_Gamma Pi tr u_j Pi tr u_i
//   E_ij = tau sum_+- int_Gamma mu_j Pi tr u_i      G_ij = 2 tau int_Gamma mu_j mu_i
//   F_i  = int f v_i
// The second and third equations are multiplied by -1, which gives the symmetric form
//   [ A   B   C ] [q ]   [ 0 ]
//   [ B^T -D  E ] [u ] = [-F ]
//   [ C^T E^T -G] [mu]   [ 0 ]

#include "hmdd/mesh.hpp"
#include "hmdd/spaces.hpp"
#include "hmdd/trace_projection.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>

namespace hmdd {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarField = std::function<double(const Vec2&)>;

struct ProblemData
{
  ScalarField kappa;
  ScalarField source;
  double tau = 0.0;
};

struct AssemblyOptions
{
  /// Points per direction of the cell rule; 0 selects q + 3.
  int volume_points = 0;
};

struct BlockSystem
{
  SparseMatrix A, B, C, D, E, G;
  Eigen::VectorXd F;
  int n_flux = 0, n_scalar = 0, n_hybrid = 0;
  double tau = 0.0;

  int size() const { return n_flux + n_scalar + n_hybrid; }
  int scalar_offset() const { return n_flux; }
  int hybrid_offset() const { return n_flux + n_scalar; }

  /// Symmetrized saddle-point matrix.
  SparseMatrix matrix() const;
  /// (0, -F, 0).
  Eigen::VectorXd rhs() const;
};

BlockSystem assemble(const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                     const ProblemData& data, const AssemblyOptions& options = {});

/// F_i = int f v_i dx on the scalar block (unsymmetrized sign).
Eigen::VectorXd assemble_rhs(const Mesh& mesh, const DofMap& dofs, const ScalarField& f,
                             int volume_points = 0);

/// Coordinate format: one "row col value" line per stored entry, 0-based, row-major order.
void write_triplets(std::ostream& os, const SparseMatrix& m);

} // namespace hmdd
