#include "fixtures.hpp"
#include "properties.hpp"
#include "hmdd/spaces.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hmdd;

namespace {

constexpr double pi = std::numbers::pi;

using props::dof_matrix;
using props::legendre01;

} // namespace

TEST_CASE("RT dimensions")
{
  CHECK(RTReferenceBasis<double>(0).size() == 4);
  CHECK(RTReferenceBasis<double>(1).size() == 12);
  for (int q = 0; q <= 5; ++q)
    CHECK(RTReferenceBasis<double>(q).size() == 2 * (q + 1) * (q + 2));
  CHECK(QReferenceBasis<double>(3).size() == 16);
  CHECK(FacetReferenceBasis<double>(3).size() == 4);
}

TEST_CASE("RT unisolvence for q <= 4")
{
  for (int q = 0; q <= 4; ++q) {
    const RTReferenceBasis<double> rt(q);
    const Eigen::MatrixXd m = dof_matrix(rt);
    INFO("q = " << q);
    CHECK((m - Eigen::MatrixXd::Identity(rt.size(), rt.size())).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("RT lowest order: unit flux through one edge")
{
  const RTReferenceBasis<double> rt(0);
  const auto line = gauss_rule(3);
  for (int e = 0; e < 4; ++e)
    for (int i = 0; i < 4; ++i) {
      double flux = 0;
      for (std::size_t g = 0; g < line.size(); ++g)
        flux += line.weights[g] * rt.normal_traces(e, line.points[g](0))(i);
      CHECK(std::abs(flux - (i == e ? 1.0 : 0.0)) < 1e-14);
    }
  // divergence of each shape is constant
  for (int i = 0; i < 4; ++i)
    CHECK(std::abs(rt.divergence({0.1, 0.2})(i) - rt.divergence({0.8, 0.9})(i)) < 1e-13);
}

TEST_CASE("RT component degrees, divergence in Q^q, normal traces in P^q")
{
  for (int q = 0; q <= 3; ++q) {
    const RTReferenceBasis<double> rt(q);
    const int np = q + 5;
    const auto square = tensor_rule(np);
    const auto line = gauss_rule(np);
    // moments of w1 against L_a(x) L_b(y) vanish for b > q or a > q+1 (w2 transposed)
    for (int a = 0; a <= q + 2; ++a)
      for (int b = 0; b <= q + 2; ++b) {
        Eigen::VectorXd m1 = Eigen::VectorXd::Zero(rt.size()), m2 = m1, md = m1;
        for (std::size_t g = 0; g < square.size(); ++g) {
          const Vec2& xh = square.points[g];
          const double w = square.weights[g] * legendre01(a, xh.x()) * legendre01(b, xh.y());
          const auto v = rt.values(xh);
          m1 += w * v.col(0);
          m2 += w * v.col(1);
          md += w * rt.divergence(xh);
        }
        if (b > q || a > q + 1)
          CHECK(m1.cwiseAbs().maxCoeff() < 1e-12);
        if (a > q || b > q + 1)
          CHECK(m2.cwiseAbs().maxCoeff() < 1e-12);
        if (a > q || b > q)
          CHECK(md.cwiseAbs().maxCoeff() < 1e-11);
      }
    for (int e = 0; e < 4; ++e) {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(rt.size());
      for (std::size_t g = 0; g < line.size(); ++g)
        m += line.weights[g] * legendre01(q + 1, line.points[g](0)) * rt.normal_traces(e, line.points[g](0));
      CHECK(m.cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("discrete de Rham on curved cells")
{
  // physical div w = div w_hat / det J and Q^q shapes are v_hat / det J, so inclusion holds
  // iff the reference divergence is in Q^q; check the projection residual pointwise.
  const Mesh m = build_annulus_mesh(0);
  for (int q = 0; q <= 2; ++q) {
    const RTReferenceBasis<double> rt(q);
    const QReferenceBasis<double> qb(q);
    const auto rule = tensor_rule(q + 4);
    for (int c = 0; c < m.num_cells(); ++c) {
      const auto& map = m.cells()[c].map;
      for (int i = 0; i < rt.size(); ++i) {
        Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(rt.size());
        coeffs(i) = 1;
        // project physical divergence onto the transformed Q^q space, weighted L2(K)
        Eigen::MatrixXd M = Eigen::MatrixXd::Zero(qb.size(), qb.size());
        Eigen::VectorXd b = Eigen::VectorXd::Zero(qb.size());
        for (std::size_t g = 0; g < rule.size(); ++g) {
          const MapEval e = map.eval(rule.points[g]);
          const Eigen::VectorXd v = qb.values(rule.points[g]) / e.detJ;
          const double d = piola_transform(map, rt, coeffs, rule.points[g]).divergence;
          M += rule.weights[g] * e.detJ * v * v.transpose();
          b += rule.weights[g] * e.detJ * d * v;
        }
        const Eigen::VectorXd p = M.ldlt().solve(b);
        for (const Vec2 xh : {Vec2(0.13, 0.71), Vec2(0.9, 0.2)}) {
          const double d = piola_transform(map, rt, coeffs, xh).divergence;
          CHECK(std::abs(d - q_transform(map, qb, p, xh)) < 1e-12 * (1 + std::abs(d)));
        }
      }
    }
  }
}

TEST_CASE("Piola transform examples")
{
  const RTReferenceBasis<double> rt(1);
  const Eigen::VectorXd c = fixtures::random_vector(rt.size(), 3);
  const Vec2 xh(0.3, 0.8);
  const Vec2 w_hat = rt.values(xh).transpose() * c;
  const double div_hat = rt.divergence(xh).dot(c);

  const FluxValue id = piola_transform(CellMapping::affine({0, 0}, {1, 0}, {0, 1}), rt, c, xh);
  CHECK((id.value - w_hat).norm() < 1e-15);
  CHECK(std::abs(id.divergence - div_hat) < 1e-14);

  const FluxValue twice = piola_transform(CellMapping::affine({1, 1}, {2, 0}, {0, 2}), rt, c, xh);
  CHECK((twice.value - w_hat / 2).norm() < 1e-15);
  CHECK(std::abs(twice.divergence - div_hat / 4) < 1e-14);
}

TEST_CASE("Piola divergence matches finite differences on curved cells")
{
  const Mesh m = build_annulus_mesh(0);
  const RTReferenceBasis<double> rt(2);
  const Eigen::VectorXd c = fixtures::random_vector(rt.size(), 11);
  const double eps = 1e-6;
  for (int cell : {0, 1, 6, 12}) {
    const auto& map = m.cells()[cell].map;
    for (const Vec2 xh : {Vec2(0.4, 0.6), Vec2(0.2, 0.15)}) {
      Mat2 dw; // d w / d x_hat
      dw.col(0) = (piola_transform(map, rt, c, xh + Vec2(eps, 0)).value
                   - piola_transform(map, rt, c, xh - Vec2(eps, 0)).value) / (2 * eps);
      dw.col(1) = (piola_transform(map, rt, c, xh + Vec2(0, eps)).value
                   - piola_transform(map, rt, c, xh - Vec2(0, eps)).value) / (2 * eps);
      const double fd = (dw * map.jacobian(xh).inverse()).trace();
      CHECK(std::abs(fd - piola_transform(map, rt, c, xh).divergence) < 1e-6);
    }
  }
}

TEST_CASE("edge fluxes are mapping independent")
{
  const CellMapping sector = CellMapping::annular_sector({0.2, -0.1}, 1.0, 1.7, 0.3, 1.4);
  const RTReferenceBasis<double> rt(1);
  const Eigen::VectorXd c = fixtures::random_vector(rt.size(), 5);
  const auto line = gauss_rule(12);
  for (int e = 0; e < 4; ++e) {
    double physical = 0, reference = 0;
    for (std::size_t g = 0; g < line.size(); ++g) {
      const double t = line.points[g](0);
      const Vec2 xh = reference_edge_point(e, t);
      const Mat2 J = sector.jacobian(xh);
      const Vec2 tangent = J * reference_edge_tangent(e);
      Vec2 n = J.inverse().transpose() * reference_outward_normal(e);
      n.normalize();
      physical += line.weights[g] * piola_transform(sector, rt, c, xh).value.dot(n) * tangent.norm();
      reference += line.weights[g] * rt.normal_traces(e, t).dot(c);
    }
    CHECK(std::abs(physical - reference) < 1e-13);
  }
}

TEST_CASE("scalar transform")
{
  const QReferenceBasis<double> qb(2);
  const Eigen::VectorXd c = fixtures::random_vector(qb.size(), 8);
  const Vec2 xh(0.6, 0.25);
  const double v_hat = qb.values(xh).dot(c);
  CHECK(std::abs(q_transform(CellMapping::affine({0, 0}, {1, 0}, {0, 1}), qb, c, xh) - v_hat) < 1e-15);
  const CellMapping scaled = CellMapping::affine({0, 0}, {2, 0}, {0, 2});
  CHECK(std::abs(q_transform(scaled, qb, c, xh) - v_hat / 4) < 1e-15);

  // int_K v dx = int_Khat v_hat dx_hat on a curved cell
  const Mesh m = build_annulus_mesh(0);
  const auto rule = tensor_rule(10);
  for (int cell : {1, 5, 9}) {
    const auto& map = m.cells()[cell].map;
    double phys = 0, ref = 0;
    for (std::size_t g = 0; g < rule.size(); ++g) {
      phys += rule.weights[g] * map.eval(rule.points[g]).detJ * q_transform(map, qb, c, rule.points[g]);
      ref += rule.weights[g] * qb.values(rule.points[g]).dot(c);
    }
    CHECK(std::abs(phys - ref) < 1e-13);
  }
}

TEST_CASE("dof counts")
{
  const DofMap d12(fixtures::one_by_two(), 0);
  CHECK(d12.n_flux() == 8);
  CHECK(d12.n_scalar() == 2);
  CHECK(d12.n_hybrid() == 1);
  CHECK(d12.total() == 11);

  const DofMap d1(fixtures::unit_cell(), 0);
  CHECK(d1.n_flux() == 4);
  CHECK(d1.n_scalar() == 1);
  CHECK(d1.n_hybrid() == 0);

  for (int q = 0; q <= 3; ++q) {
    const Mesh m = build_annulus_mesh(1);
    const DofMap d(m, q);
    CHECK(d.n_scalar() == m.num_cells() * (q + 1) * (q + 1));
    CHECK(d.n_hybrid() == static_cast<int>(m.skeleton_facets().size()) * (q + 1));
    const int edges = static_cast<int>(m.facets().size()) + static_cast<int>(m.skeleton_facets().size());
    CHECK(d.n_flux() == m.num_cells() * 2 * q * (q + 1) + edges * (q + 1));
  }
}

TEST_CASE("normal continuity on interior patch facets")
{
  const std::vector<Mesh> meshes{build_square_mesh(4, {{0.5}, {}}), build_annulus_mesh(1),
                                 fixtures::mixed_pair(0)};
  const auto line = gauss_rule(8);
  for (const Mesh& m : meshes)
    for (int q = 0; q <= 2; ++q) {
      const DofMap dofs(m, q);
      const Solution sol{fixtures::random_vector(dofs.n_flux(), 17 + q),
                         Eigen::VectorXd::Zero(dofs.n_scalar()), Eigen::VectorXd::Zero(dofs.n_hybrid())};
      const FieldEvaluator eval(m, dofs, sol);
      for (int f = 0; f < static_cast<int>(m.facets().size()); ++f) {
        if (m.facets()[f].kind != FacetKind::interior_patch)
          continue;
        const FacetMapping fm = m.facet_map(f);
        double jump2 = 0;
        for (std::size_t g = 0; g < line.size(); ++g) {
          const double s = line.points[g](0);
          jump2 += line.weights[g] * fm.arc_factor(s)
                   * std::pow(eval.normal_flux(f, true, s) - eval.normal_flux(f, false, s), 2);
        }
        CHECK(jump2 < 1e-24);
      }
    }
}

TEST_CASE("skeleton flux jumps span the hybrid space")
{
  for (const Mesh& m : {fixtures::one_by_two(), fixtures::mixed_pair(), build_annulus_mesh(0)})
    for (int q = 0; q <= 2; ++q) {
      const DofMap dofs(m, q);
      const auto line = gauss_rule(q + 6);
      // Legendre moments of [w . n] on every skeleton facet, for each flux basis function
      Eigen::MatrixXd jumps = Eigen::MatrixXd::Zero(dofs.n_hybrid(), dofs.n_flux());
      for (int i = 0; i < dofs.n_flux(); ++i) {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(dofs.n_flux());
        c(i) = 1;
        const Solution sol{c, Eigen::VectorXd::Zero(dofs.n_scalar()), Eigen::VectorXd::Zero(dofs.n_hybrid())};
        const FieldEvaluator eval(m, dofs, sol);
        for (int f : m.skeleton_facets()) {
          const FacetMapping fm = m.facet_map(f);
          for (std::size_t g = 0; g < line.size(); ++g) {
            const double s = line.points[g](0);
            const double jump = eval.normal_flux(f, true, s) - eval.normal_flux(f, false, s);
            for (int k = 0; k <= q; ++k)
              jumps(dofs.hybrid_dof(dofs.skeleton_index(f), k), i) +=
                  line.weights[g] * fm.arc_factor(s) * jump * legendre01(k, s);
          }
        }
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(jumps);
      CHECK(lu.rank() == dofs.n_hybrid());
    }
}

TEST_CASE("point location and evaluation")
{
  const Mesh m = build_annulus_mesh(1);
  const DofMap dofs(m, 1);
  const Solution sol{fixtures::random_vector(dofs.n_flux(), 1), fixtures::random_vector(dofs.n_scalar(), 2),
                     fixtures::random_vector(dofs.n_hybrid(), 3)};
  const FieldEvaluator eval(m, dofs, sol);
  for (int c : {0, 7, 20, 51})
    for (const Vec2 xh : {Vec2(0.31, 0.42), Vec2(0.77, 0.12)}) {
      const Vec2 x = m.cells()[c].map.point(xh);
      const PointLocation loc = locate(m, x);
      CHECK(loc.cell == c);
      CHECK((loc.xh - xh).norm() < 1e-10);
      CHECK(std::abs(eval.u_at(x) - eval.u(c, xh)) < 1e-9);
    }
  CHECK_THROWS_AS(locate(m, Vec2(2.5, 0)), GeometryError);
  // Solution stacking round trip
  CHECK((Solution::split(dofs, sol.stacked()).stacked() - sol.stacked()).norm() == 0.0);
}

TEST_CASE("reversing a facet parametrization leaves physical fields unchanged")
{
  // edge moments against L_k(s) change sign for odd k under s -> 1 - s
  for (const Mesh& m : {fixtures::mixed_pair(0), build_annulus_mesh(0)})
    for (int f = 0; f < static_cast<int>(m.facets().size()); ++f) {
      if (m.facets()[f].kind != FacetKind::interior_patch)
        continue;
      const Mesh r = m.with_reversed_facet(f);
      const int q = 2;
      const DofMap a(m, q), b(r, q);
      REQUIRE(a.n_flux() == b.n_flux());
      const Eigen::VectorXd ca = fixtures::random_vector(a.n_flux(), 100 + f);
      Eigen::VectorXd cb = ca;
      const FacetSide& side = m.facets()[f].plus;
      const auto dofs = a.cell_flux_dofs(side.cell);
      for (int k = 1; k <= q; k += 2)
        cb(dofs[side.local_edge * (q + 1) + k]) *= -1;
      const Solution sa{ca, Eigen::VectorXd::Zero(a.n_scalar()), Eigen::VectorXd::Zero(0)};
      const Solution sb{cb, Eigen::VectorXd::Zero(b.n_scalar()), Eigen::VectorXd::Zero(0)};
      const FieldEvaluator ea(m, a, sa), eb(r, b, sb);
      for (int c = 0; c < m.num_cells(); ++c)
        for (const Vec2 xh : {Vec2(0.2, 0.7), Vec2(0.95, 0.5), Vec2(0.5, 0.02)}) {
          CHECK((ea.q(c, xh).value - eb.q(c, xh).value).norm() < 1e-12);
          CHECK(std::abs(ea.q(c, xh).divergence - eb.q(c, xh).divergence) < 1e-11);
        }
    }
  (void)pi;
}
