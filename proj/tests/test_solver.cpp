#include "fixtures.hpp"
#include "hmdd/analysis.hpp"
#include "hmdd/solver.hpp"

#include <doctest.h>

#include <cmath>

using namespace hmdd;

namespace {

struct Problem
{
  Mesh mesh;
  DofMap dofs;
  TraceProjector projector;
  BlockSystem system;

  Problem(Mesh m, int q, const ProblemData& data)
      : mesh(std::move(m)), dofs(mesh, q), projector(mesh, dofs, q + 3),
        system(assemble(mesh, dofs, projector, data))
  {
  }
};

ProblemData annulus_data(double tau, ScalarField f = annulus_source)
{
  return {annulus_kappa, std::move(f), tau};
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  return (a - b).norm() / std::max(1.0, b.norm());
}

} // namespace

TEST_CASE("zero source gives the zero solution")
{
  const Problem p(build_annulus_mesh(1), 1, annulus_data(5.0, [](const Vec2&) { return 0.0; }));
  const auto [sol, report] = solve_full(p.system, p.dofs);
  CHECK(sol.stacked().norm() == 0.0);
  CHECK(report.relative_residual == 0.0);
  const auto [cs, creport] = solve_condensed(p.system, p.dofs);
  CHECK(cs.stacked().norm() == 0.0);
}

TEST_CASE("solution is linear in the source")
{
  const Problem p1(build_annulus_mesh(1), 2, annulus_data(3.0));
  const Problem p2(build_annulus_mesh(1), 2,
                   annulus_data(3.0, [](const Vec2& x) { return 2.0 * annulus_source(x); }));
  const Eigen::VectorXd x1 = solve_full(p1.system, p1.dofs).first.stacked();
  const Eigen::VectorXd x2 = solve_full(p2.system, p2.dofs).first.stacked();
  CHECK(rel_diff(x2, 2.0 * x1) < 1e-10);
}

TEST_CASE("residual of the manufactured square problem")
{
  const ReferenceSolution ref = manufactured_square_reference();
  const Problem p(build_square_mesh(16, {{0.5}, {}}), 1, {ref.kappa, ref.source, 1.0});
  const auto [sol, report] = solve_full(p.system, p.dofs);
  CHECK(report.relative_residual <= 1e-10);
  CHECK(report.rows == p.dofs.total());
  CHECK(report.factor_nonzeros > 0);
  const Eigen::VectorXd r = p.system.matrix() * sol.stacked() - p.system.rhs();
  CHECK(r.norm() / p.system.rhs().norm() <= 1e-10);
}

TEST_CASE("dense and sparse factorizations agree")
{
  const Problem p(build_annulus_mesh(0), 2, annulus_data(10.0));
  const auto sparse = solve_full(p.system, p.dofs).first.stacked();
  const auto dense = solve_full(p.system, p.dofs, {Factorization::dense_lu}).first.stacked();
  CHECK(rel_diff(dense, sparse) < 1e-11);
}

TEST_CASE("condensed and full solves agree")
{
  for (int q = 0; q <= 2; ++q)
    for (double tau : {0.0, 1.0, 400.0}) {
      const Problem p(build_annulus_mesh(1), q, annulus_data(tau));
      const auto full = solve_full(p.system, p.dofs).first.stacked();
      const auto [cs, report] = solve_condensed(p.system, p.dofs);
      INFO("q = " << q << ", tau = " << tau);
      CHECK(rel_diff(cs.stacked(), full) < 1e-9);
      CHECK(report.relative_residual <= 1e-10);
    }
}

TEST_CASE("skeleton system of the 1x2 mesh")
{
  const Problem p(fixtures::one_by_two(), 0, {[](const Vec2&) { return 1.0; }, [](const Vec2&) { return 1.0; }, 1.0});
  const CondensedSystem cs = condense_skeleton(p.system, p.dofs);
  CHECK(cs.skeleton_size() == 1);
  CHECK(cs.skeleton_size() == p.dofs.n_hybrid());
  CHECK(cs.patches.size() == 2);
  CHECK(std::abs(cs.skeleton_matrix(0, 0) - cs.skeleton_matrix.transpose()(0, 0)) == 0.0);
  const Eigen::VectorXd full = solve_full(p.system, p.dofs).first.stacked();
  const Eigen::VectorXd mu = cs.skeleton_matrix.partialPivLu().solve(cs.skeleton_rhs);
  CHECK(rel_diff(cs.recover(mu), full) < 1e-12);
}

TEST_CASE("Schur complement is symmetric and definite")
{
  const Problem p(build_annulus_mesh(1), 1, annulus_data(10.0));
  const CondensedSystem cs = condense_skeleton(p.system, p.dofs);
  const Eigen::MatrixXd& S = cs.skeleton_matrix;
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-10 * S.cwiseAbs().maxCoeff());
  // S = -G - R^T K^{-1} R is negative definite for the symmetrized sign convention
  CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (S + S.transpose())).eigenvalues().maxCoeff() < 0);
}

TEST_CASE("solving M x = M x* recovers x*")
{
  for (int q = 0; q <= 2; ++q) {
    const Problem p(build_annulus_mesh(1), q, annulus_data(q == 0 ? 0.0 : 7.0));
    const SparseMatrix M = p.system.matrix();
    const Eigen::VectorXd xs = fixtures::random_vector(M.rows(), 100 + q);
    const auto [x, report] = solve_matrix(M, M * xs);
    CHECK(rel_diff(x, xs) < 1e-10);
    CHECK(report.relative_residual <= 1e-10);
  }
}

TEST_CASE("singular systems are reported")
{
  SparseMatrix M(3, 3);
  M.insert(0, 0) = 1.0;
  M.insert(1, 1) = 1.0;
  M.makeCompressed();
  CHECK_THROWS_AS(solve_matrix(M, Eigen::VectorXd::Ones(3)), SolverError);
  CHECK_THROWS_AS(solve_matrix(M, Eigen::VectorXd::Ones(3), {Factorization::dense_lu}), SolverError);
}

TEST_CASE("reversing a facet parametrization leaves the physical solution unchanged")
{
  const Mesh base = build_annulus_mesh(1);
  const auto skeleton = base.skeleton_facets();
  REQUIRE(!skeleton.empty());
  const int f = skeleton.front();
  const Mesh flipped = base.with_reversed_facet(f);
  for (int q = 0; q <= 2; ++q) {
    const Problem a(base, q, annulus_data(10.0));
    const Problem b(flipped, q, annulus_data(10.0));
    const Solution sa = solve_full(a.system, a.dofs).first;
    const Solution sb = solve_full(b.system, b.dofs).first;
    const FieldEvaluator ea(a.mesh, a.dofs, sa), eb(b.mesh, b.dofs, sb);
    for (int c = 0; c < base.num_cells(); ++c)
      for (const Vec2& xh : {Vec2(0.2, 0.3), Vec2(0.7, 0.9), Vec2(0.5, 0.05)}) {
        CHECK(std::abs(ea.u(c, xh) - eb.u(c, xh)) < 1e-10);
        CHECK((ea.q(c, xh).value - eb.q(c, xh).value).norm() < 1e-9);
      }
    for (double s : {0.1, 0.5, 0.85}) {
      CHECK(std::abs(ea.mu(f, s) - eb.mu(f, 1.0 - s)) < 1e-10);
      CHECK((a.mesh.facet_map(f).point(s) - b.mesh.facet_map(f).point(1.0 - s)).norm() < 1e-13);
    }
  }
}
