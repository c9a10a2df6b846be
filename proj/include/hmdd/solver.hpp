#pragma once

// Direct solution of the saddle-point system and per-patch static condensation
// onto the hybrid unknowns.

#include "hmdd/assembly.hpp"
#include "hmdd/spaces.hpp"

#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmdd {

class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Factorization { sparse_lu, dense_lu };

struct SolverOptions
{
  Factorization factorization = Factorization::sparse_lu;
  /// Target for the relative residual; up to two refinement steps are taken to reach it.
  double residual_tolerance = 1e-10;
};

struct LinearSolveReport
{
  double relative_residual = 0.0;
  std::string factorization;
  int rows = 0;
  long long matrix_nonzeros = 0;
  long long factor_nonzeros = 0;
  int refinement_steps = 0;
};

/// Solves M x = b for the full symmetrized system. Throws SolverError on a singular
/// factorization.
std::pair<Solution, LinearSolveReport> solve_full(const BlockSystem& system, const DofMap& dofs,
                                                  const SolverOptions& options = {});

/// Solves an arbitrary right-hand side with the system matrix (used for identity checks).
std::pair<Eigen::VectorXd, LinearSolveReport> solve_matrix(const SparseMatrix& matrix,
                                                           const Eigen::VectorXd& rhs,
                                                           const SolverOptions& options = {});

/// Elimination of one patch: all flux and scalar unknowns of the patch.
struct PatchElimination
{
  int patch = -1;
  std::vector<int> unknowns;      ///< rows of the full system owned by the patch
  std::vector<int> hybrid_cols;   ///< hybrid unknowns coupled to the patch
  Eigen::MatrixXd coupling;       ///< K_p^{-1} R_p restricted to hybrid_cols
  Eigen::VectorXd local_solution; ///< K_p^{-1} b_p
};

/// Schur complement on mu:  S mu = g  with
///   S = -G - sum_p R_p^T K_p^{-1} R_p,   g = -sum_p R_p^T K_p^{-1} b_p,
/// and recovery x_p = K_p^{-1} b_p - K_p^{-1} R_p mu.
struct CondensedSystem
{
  Eigen::MatrixXd skeleton_matrix;
  Eigen::VectorXd skeleton_rhs;
  std::vector<PatchElimination> patches;
  int n_total = 0;
  int hybrid_offset = 0;

  int skeleton_size() const { return static_cast<int>(skeleton_rhs.size()); }
  /// Full coefficient vector from a hybrid solution.
  Eigen::VectorXd recover(const Eigen::VectorXd& mu) const;
};

/// Throws SolverError naming the patch if a patch block is singular.
CondensedSystem condense_skeleton(const BlockSystem& system, const DofMap& dofs);

std::pair<Solution, LinearSolveReport> solve_condensed(const BlockSystem& system, const DofMap& dofs);

} // namespace hmdd
