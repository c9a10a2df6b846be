#include "hmdd/trace_projection.hpp"

#include <string>

namespace hmdd {

TraceProjector::TraceProjector(const Mesh& mesh, const DofMap& dofs, int moment_points)
    : q_(dofs.order()), points_(moment_points), scalar_per_cell_(dofs.scalar_per_cell())
{
  if (moment_points < q_ + 2)
    throw ConfigError("trace projector needs at least q+2 moment points, got "
                      + std::to_string(moment_points));
  const auto rule = gauss_rule(moment_points);
  const QReferenceBasis<double> qb(q_);
  const int nl = q_ + 1;

  for (int f : mesh.skeleton_facets()) {
    const Facet& F = mesh.facets()[f];
    const FacetMapping fm = mesh.facet_map(f);
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::MatrixXd pm = Eigen::MatrixXd::Zero(nl, qb.size());
    Eigen::MatrixXd pp = Eigen::MatrixXd::Zero(nl, qb.size());
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const double s = rule.points[g](0), w = rule.weights[g];
      const double arc = fm.arc_factor(s);
      if (!(arc > 0))
        throw GeometryError("degenerate skeleton facet (zero arc factor)");
      const Eigen::VectorXd l = legendre_eval(q_, s);
      mass += w * arc * l * l.transpose();
      for (auto [side, target] : {std::pair{&F.minus, &pm}, std::pair{&F.plus, &pp}}) {
        const Vec2 xh = reference_edge_point(side->local_edge, side->edge_parameter(s));
        const MapEval m = mesh.cells()[side->cell].map.eval(xh);
        *target += (w / m.detJ) * l * qb.values(xh).transpose();
      }
    }
    for (int k = 0; k < nl; ++k) {
      pm.row(k) *= 2 * k + 1;
      pp.row(k) *= 2 * k + 1;
    }
    facets_.push_back(f);
    cell_minus_.push_back(F.minus.cell);
    cell_plus_.push_back(F.plus.cell);
    minus_.push_back(std::move(pm));
    plus_.push_back(std::move(pp));
    mass_.push_back(std::move(mass));
  }
}

int TraceProjector::cell(int skeleton_index, Side side) const
{
  return side == Side::plus ? cell_plus_[skeleton_index] : cell_minus_[skeleton_index];
}

Eigen::VectorXd TraceProjector::project(Side side, int skeleton_index, const Eigen::VectorXd& u) const
{
  const int c = cell(skeleton_index, side);
  return matrix(skeleton_index, side) * u.segment(c * scalar_per_cell_, scalar_per_cell_);
}

} // namespace hmdd
