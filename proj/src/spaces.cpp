#include "hmdd/spaces.hpp"

#include <cmath>
#include <string>

namespace hmdd {

FluxValue piola_transform(const CellMapping& cell, const RTReferenceBasis<double>& basis,
                          const Eigen::VectorXd& coeffs, const Vec2& xh)
{
  const MapEval m = cell.eval(xh);
  const Vec2 w_hat = basis.values(xh).transpose() * coeffs;
  const double div_hat = basis.divergence(xh).dot(coeffs);
  return {m.J * w_hat / m.detJ, div_hat / m.detJ};
}

double q_transform(const CellMapping& cell, const QReferenceBasis<double>& basis,
                   const Eigen::VectorXd& coeffs, const Vec2& xh)
{
  const MapEval m = cell.eval(xh);
  return basis.values(xh).dot(coeffs) / m.detJ;
}

// ---------------------------------------------------------------------------

DofMap::DofMap(const Mesh& mesh, int q) : q_(q)
{
  if (q < 0)
    throw ConfigError("polynomial order must be nonnegative");
  const int nc = mesh.num_cells();
  const int per_cell = flux_per_cell();
  const int ne = q + 1;
  flux_dofs_.assign(static_cast<std::size_t>(nc) * per_cell, -1);
  flux_signs_.assign(flux_dofs_.size(), 0.0);

  int next = 0;
  for (int c = 0; c < nc; ++c)
    for (int i = 4 * ne; i < per_cell; ++i) {
      flux_dofs_[c * per_cell + i] = next++;
      flux_signs_[c * per_cell + i] = 1.0;
    }

  const auto assign = [&](const FacetSide& side, int base, double normal_sign) {
    for (int k = 0; k < ne; ++k) {
      const std::size_t idx = static_cast<std::size_t>(side.cell) * per_cell + side.local_edge * ne + k;
      if (flux_dofs_[idx] != -1)
        throw GeometryError("dof map: cell edge claimed by two facets");
      flux_dofs_[idx] = base + k;
      flux_signs_[idx] = normal_sign * ((side.reversed && k % 2 == 1) ? -1.0 : 1.0);
    }
  };

  const auto& facets = mesh.facets();
  skeleton_index_.assign(facets.size(), -1);
  int n_skel = 0;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    const Facet& F = facets[f];
    switch (F.kind) {
    case FacetKind::boundary:
      assign(F.plus, next, 1.0);
      next += ne;
      break;
    case FacetKind::interior_patch:
      assign(F.minus, next, 1.0);
      assign(F.plus, next, -1.0);
      next += ne;
      break;
    case FacetKind::skeleton:
      assign(F.minus, next, 1.0);
      assign(F.plus, next + ne, -1.0);
      next += 2 * ne;
      skeleton_index_[f] = n_skel++;
      break;
    }
  }
  for (int d : flux_dofs_)
    if (d < 0)
      throw GeometryError("dof map: cell edge without a facet");

  n_flux_ = next;
  n_scalar_ = nc * scalar_per_cell();
  n_hybrid_ = n_skel * ne;

  num_patches_ = mesh.num_patches();
  for (const auto& c : mesh.cells())
    cell_patch_.push_back(c.patch);
  flux_patch_.assign(n_flux_, -1);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < per_cell; ++i)
      flux_patch_[flux_dofs_[c * per_cell + i]] = mesh.cells()[c].patch;
}

Solution Solution::split(const DofMap& dofs, const Eigen::VectorXd& x)
{
  return {x.head(dofs.n_flux()), x.segment(dofs.scalar_offset(), dofs.n_scalar()),
          x.tail(dofs.n_hybrid())};
}

Eigen::VectorXd Solution::stacked() const
{
  Eigen::VectorXd x(flux.size() + scalar.size() + hybrid.size());
  x << flux, scalar, hybrid;
  return x;
}

// ---------------------------------------------------------------------------

FieldEvaluator::FieldEvaluator(const Mesh& mesh, const DofMap& dofs, const Solution& solution)
    : mesh_(mesh), dofs_(dofs), sol_(solution), rt_(dofs.order()), qb_(dofs.order())
{
}

Eigen::VectorXd FieldEvaluator::local_flux(int cell) const
{
  const auto idx = dofs_.cell_flux_dofs(cell);
  const auto sgn = dofs_.cell_flux_signs(cell);
  Eigen::VectorXd c(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    c(i) = sgn[i] * sol_.flux(idx[i]);
  return c;
}

Eigen::VectorXd FieldEvaluator::local_scalar(int cell) const
{
  return sol_.scalar.segment(dofs_.scalar_dof(cell, 0), dofs_.scalar_per_cell());
}

double FieldEvaluator::u(int cell, const Vec2& xh) const
{
  return q_transform(mesh_.cells()[cell].map, qb_, local_scalar(cell), xh);
}

FluxValue FieldEvaluator::q(int cell, const Vec2& xh) const
{
  return piola_transform(mesh_.cells()[cell].map, rt_, local_flux(cell), xh);
}

double FieldEvaluator::normal_flux(int facet, bool plus_side, double s) const
{
  const Facet& F = mesh_.facets()[facet];
  const FacetSide& side = plus_side ? F.plus : F.minus;
  const Vec2 xh = reference_edge_point(side.local_edge, side.edge_parameter(s));
  return q(side.cell, xh).value.dot(mesh_.facet_map(facet).normal(s));
}

double FieldEvaluator::mu(int facet, double s) const
{
  const int k = dofs_.skeleton_index(facet);
  if (k < 0)
    return 0.0;
  const Eigen::VectorXd l = legendre_eval(dofs_.order(), s);
  return l.dot(sol_.hybrid.segment(dofs_.hybrid_dof(k, 0), dofs_.order() + 1));
}

double FieldEvaluator::u_at(const Vec2& x) const
{
  const auto loc = locate(mesh_, x);
  return u(loc.cell, loc.xh);
}

FluxValue FieldEvaluator::q_at(const Vec2& x) const
{
  const auto loc = locate(mesh_, x);
  return q(loc.cell, loc.xh);
}

PointLocation locate(const Mesh& mesh, const Vec2& x)
{
  constexpr double tol = 1e-10;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& map = mesh.cells()[c].map;
    Vec2 xh(0.5, 0.5);
    for (int it = 0; it < 40; ++it) {
      // keep the iterate near the reference square so curved maps stay well defined
      xh = xh.cwiseMax(-0.5).cwiseMin(1.5);
      const Vec2 r = map.point(xh) - x;
      const Mat2 J = map.jacobian(xh);
      if (std::abs(J.determinant()) < 1e-300)
        break;
      const Vec2 dx = J.inverse() * r;
      xh -= dx;
      if (dx.norm() < 1e-15)
        break;
    }
    if ((map.point(xh) - x).norm() > 1e-10 * (1.0 + x.norm()))
      continue;
    if (xh.minCoeff() >= -tol && xh.maxCoeff() <= 1 + tol)
      return {c, xh.cwiseMax(0.0).cwiseMin(1.0)};
  }
  throw GeometryError("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y())
                      + ") is not inside the mesh");
}

} // namespace hmdd
