#include "hmdd/solver.hpp"

#include <Eigen/Dense>

#include <string>

namespace hmdd {

namespace {

double relative_residual(const SparseMatrix& m, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
  const double nb = b.norm();
  const double nr = (b - m * x).norm();
  return nb > 0 ? nr / nb : nr;
}

// Names the block of the first structurally empty row, if any.
std::string locate_zero_pivot(const SparseMatrix& m, const BlockSystem* sys)
{
  if (!sys)
    return "";
  Eigen::VectorXi count = Eigen::VectorXi::Zero(m.rows());
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.value() != 0.0)
        ++count(it.row());
  for (int i = 0; i < m.rows(); ++i)
    if (count(i) == 0) {
      const char* block = i < sys->scalar_offset() ? "flux"
                          : i < sys->hybrid_offset() ? "scalar"
                                                     : "hybrid";
      return std::string(" (empty row ") + std::to_string(i) + " in the " + block + " block)";
    }
  return " (numerically singular)";
}

std::pair<Eigen::VectorXd, LinearSolveReport> solve_impl(const SparseMatrix& m,
                                                         const Eigen::VectorXd& b,
                                                         const SolverOptions& options,
                                                         const BlockSystem* sys)
{
  LinearSolveReport report;
  report.rows = static_cast<int>(m.rows());
  report.matrix_nonzeros = m.nonZeros();
  Eigen::VectorXd x;

  if (options.factorization == Factorization::dense_lu) {
    if (m.rows() > 2000)
      throw SolverError("dense factorization is limited to 2000 unknowns");
    report.factorization = "dense_lu";
    const Eigen::MatrixXd dense(m);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    if (!lu.isInvertible())
      throw SolverError("singular system matrix" + locate_zero_pivot(m, sys));
    report.factor_nonzeros = static_cast<long long>(m.rows()) * m.cols();
    x = lu.solve(b);
    report.relative_residual = relative_residual(m, x, b);
    while (report.relative_residual > options.residual_tolerance && report.refinement_steps < 2) {
      x += lu.solve(b - m * x);
      ++report.refinement_steps;
      report.relative_residual = relative_residual(m, x, b);
    }
    return {x, report};
  }

  report.factorization = "sparse_lu";
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  SparseMatrix mc = m;
  mc.makeCompressed();
  lu.analyzePattern(mc);
  lu.factorize(mc);
  if (lu.info() != Eigen::Success)
    throw SolverError("sparse LU failed: " + lu.lastErrorMessage() + locate_zero_pivot(m, sys));
  report.factor_nonzeros = lu.nnzL() + lu.nnzU();
  x = lu.solve(b);
  report.relative_residual = relative_residual(m, x, b);
  while (report.relative_residual > options.residual_tolerance && report.refinement_steps < 2) {
    x += lu.solve(b - m * x);
    ++report.refinement_steps;
    report.relative_residual = relative_residual(m, x, b);
  }
  return {x, report};
}

} // namespace

std::pair<Eigen::VectorXd, LinearSolveReport> solve_matrix(const SparseMatrix& matrix,
                                                           const Eigen::VectorXd& rhs,
                                                           const SolverOptions& options)
{
  return solve_impl(matrix, rhs, options, nullptr);
}

std::pair<Solution, LinearSolveReport> solve_full(const BlockSystem& system, const DofMap& dofs,
                                                  const SolverOptions& options)
{
  auto [x, report] = solve_impl(system.matrix(), system.rhs(), options, &system);
  return {Solution::split(dofs, x), report};
}

// ---------------------------------------------------------------------------

CondensedSystem condense_skeleton(const BlockSystem& system, const DofMap& dofs)
{
  const SparseMatrix m = system.matrix();
  const Eigen::VectorXd b = system.rhs();
  const int n = system.size();
  const int ho = system.hybrid_offset();
  const int nh = system.n_hybrid;

  CondensedSystem cs;
  cs.n_total = n;
  cs.hybrid_offset = ho;
  cs.skeleton_matrix = Eigen::MatrixXd::Zero(nh, nh);
  cs.skeleton_rhs = b.tail(nh);
  for (int k = ho; k < n; ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      if (it.row() >= ho)
        cs.skeleton_matrix(it.row() - ho, k - ho) += it.value();

  std::vector<int> owner(n, -1);
  for (int i = 0; i < system.n_flux; ++i)
    owner[i] = dofs.flux_patch(i);
  for (int i = 0; i < system.n_scalar; ++i)
    owner[system.scalar_offset() + i] = dofs.scalar_patch(i);

  for (int p = 0; p < dofs.num_patches(); ++p) {
    PatchElimination pe;
    pe.patch = p;
    std::vector<int> local(n, -1);
    for (int i = 0; i < ho; ++i)
      if (owner[i] == p) {
        local[i] = static_cast<int>(pe.unknowns.size());
        pe.unknowns.push_back(i);
      }
    const int np = static_cast<int>(pe.unknowns.size());
    if (np == 0)
      continue;

    std::vector<Eigen::Triplet<double>> tk, tr;
    std::vector<int> hlocal(nh, -1);
    for (int col : pe.unknowns)
      for (SparseMatrix::InnerIterator it(m, col); it; ++it)
        if (local[it.row()] >= 0)
          tk.emplace_back(local[it.row()], local[col], it.value());
    for (int k = 0; k < nh; ++k)
      for (SparseMatrix::InnerIterator it(m, ho + k); it; ++it)
        if (local[it.row()] >= 0) {
          if (hlocal[k] < 0) {
            hlocal[k] = static_cast<int>(pe.hybrid_cols.size());
            pe.hybrid_cols.push_back(k);
          }
          tr.emplace_back(local[it.row()], hlocal[k], it.value());
        }
    SparseMatrix K(np, np), R(np, static_cast<int>(pe.hybrid_cols.size()));
    K.setFromTriplets(tk.begin(), tk.end());
    R.setFromTriplets(tr.begin(), tr.end());
    K.makeCompressed();

    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(K);
    lu.factorize(K);
    if (lu.info() != Eigen::Success)
      throw SolverError("patch " + std::to_string(p) + " block is singular: " + lu.lastErrorMessage());

    Eigen::VectorXd bp(np);
    for (int i = 0; i < np; ++i)
      bp(i) = b(pe.unknowns[i]);
    pe.local_solution = lu.solve(bp);
    pe.coupling = lu.solve(Eigen::MatrixXd(R));

    const Eigen::MatrixXd schur = Eigen::MatrixXd(R.transpose() * pe.coupling);
    const Eigen::VectorXd rhs = R.transpose() * pe.local_solution;
    const int nc = static_cast<int>(pe.hybrid_cols.size());
    for (int i = 0; i < nc; ++i) {
      cs.skeleton_rhs(pe.hybrid_cols[i]) -= rhs(i);
      for (int j = 0; j < nc; ++j)
        cs.skeleton_matrix(pe.hybrid_cols[i], pe.hybrid_cols[j]) -= schur(i, j);
    }
    cs.patches.push_back(std::move(pe));
  }
  return cs;
}

Eigen::VectorXd CondensedSystem::recover(const Eigen::VectorXd& mu) const
{
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n_total);
  x.tail(mu.size()) = mu;
  for (const auto& pe : patches) {
    Eigen::VectorXd mu_local(pe.hybrid_cols.size());
    for (std::size_t i = 0; i < pe.hybrid_cols.size(); ++i)
      mu_local(i) = mu(pe.hybrid_cols[i]);
    const Eigen::VectorXd xp = pe.local_solution - pe.coupling * mu_local;
    for (std::size_t i = 0; i < pe.unknowns.size(); ++i)
      x(pe.unknowns[i]) = xp(i);
  }
  return x;
}

std::pair<Solution, LinearSolveReport> solve_condensed(const BlockSystem& system, const DofMap& dofs)
{
  const CondensedSystem cs = condense_skeleton(system, dofs);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(cs.skeleton_size());
  if (cs.skeleton_size() > 0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(cs.skeleton_matrix);
    if (!lu.isInvertible())
      throw SolverError("condensed skeleton system is singular");
    mu = lu.solve(cs.skeleton_rhs);
  }
  const Eigen::VectorXd x = cs.recover(mu);
  const SparseMatrix m = system.matrix();
  LinearSolveReport report;
  report.factorization = "condensed";
  report.rows = cs.skeleton_size();
  report.matrix_nonzeros = m.nonZeros();
  report.relative_residual = relative_residual(m, x, system.rhs());
  return {Solution::split(dofs, x), report};
}

} // namespace hmdd
