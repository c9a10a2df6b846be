#include "hmdd/assembly.hpp"

#include <iomanip>
#include <ostream>
#include <string>

namespace hmdd {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_block(Triplets& out, const SparseMatrix& m, int row0, int col0, double scale, bool transpose)
{
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      const int r = transpose ? static_cast<int>(it.col()) : static_cast<int>(it.row());
      const int c = transpose ? static_cast<int>(it.row()) : static_cast<int>(it.col());
      out.emplace_back(row0 + r, col0 + c, scale * it.value());
    }
}

SparseMatrix from_triplets(int rows, int cols, const Triplets& t)
{
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

int default_points(const DofMap& dofs, int requested)
{
  return requested > 0 ? requested : dofs.order() + 3;
}

} // namespace

SparseMatrix BlockSystem::matrix() const
{
  Triplets t;
  t.reserve(A.nonZeros() + 2 * (B.nonZeros() + C.nonZeros() + E.nonZeros()) + D.nonZeros()
            + G.nonZeros());
  const int so = scalar_offset(), ho = hybrid_offset();
  add_block(t, A, 0, 0, 1.0, false);
  add_block(t, B, 0, so, 1.0, false);
  add_block(t, B, so, 0, 1.0, true);
  add_block(t, C, 0, ho, 1.0, false);
  add_block(t, C, ho, 0, 1.0, true);
  add_block(t, D, so, so, -1.0, false);
  add_block(t, E, so, ho, 1.0, false);
  add_block(t, E, ho, so, 1.0, true);
  add_block(t, G, ho, ho, -1.0, false);
  return from_triplets(size(), size(), t);
}

Eigen::VectorXd BlockSystem::rhs() const
{
  Eigen::VectorXd b = Eigen::VectorXd::Zero(size());
  b.segment(scalar_offset(), n_scalar) = -F;
  return b;
}

BlockSystem assemble(const Mesh& mesh, const DofMap& dofs, const TraceProjector& projector,
                     const ProblemData& data, const AssemblyOptions& options)
{
  if (!(data.tau >= 0))
    throw ConfigError("stabilization parameter tau must be nonnegative");
  if (projector.order() != dofs.order())
    throw ConfigError("trace projector and dof map use different orders");

  const int q = dofs.order();
  const RTReferenceBasis<double> rt(q);
  const QReferenceBasis<double> qb(q);
  const auto rule = tensor_rule(default_points(dofs, options.volume_points));
  const int nw = rt.size(), nv = qb.size();

  BlockSystem sys;
  sys.n_flux = dofs.n_flux();
  sys.n_scalar = dofs.n_scalar();
  sys.n_hybrid = dofs.n_hybrid();
  sys.tau = data.tau;
  sys.F = assemble_rhs(mesh, dofs, data.source, options.volume_points);

  Triplets ta, tb;
  ta.reserve(static_cast<std::size_t>(mesh.num_cells()) * nw * nw);
  tb.reserve(static_cast<std::size_t>(mesh.num_cells()) * nw * nv);
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& map = mesh.cells()[c].map;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nw, nw);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nw, nv);
    for (std::size_t g = 0; g < rule.size(); ++g) {
      const Vec2& xh = rule.points[g];
      const MapEval m = map.eval(xh);
      const double kappa = data.kappa(m.x);
      if (!(kappa > 0))
        throw ConfigError("coefficient kappa must be positive at every quadrature point");
      const Eigen::MatrixXd jw = m.J * rt.values(xh).transpose(); // 2 x nw
      a.noalias() += (rule.weights[g] / (kappa * m.detJ)) * jw.transpose() * jw;
      b.noalias() += (rule.weights[g] / m.detJ) * rt.divergence(xh) * qb.values(xh).transpose();
    }
    a = 0.5 * (a + a.transpose()).eval();
    const auto idx = dofs.cell_flux_dofs(c);
    const auto sgn = dofs.cell_flux_signs(c);
    for (int i = 0; i < nw; ++i) {
      for (int j = 0; j < nw; ++j)
        ta.emplace_back(idx[i], idx[j], sgn[i] * sgn[j] * a(i, j));
      for (int j = 0; j < nv; ++j)
        tb.emplace_back(idx[i], dofs.scalar_dof(c, j), sgn[i] * b(i, j));
    }
  }
  sys.A = from_triplets(sys.n_flux, sys.n_flux, ta);
  sys.B = from_triplets(sys.n_flux, sys.n_scalar, tb);

  // skeleton terms
  const int nl = q + 1;
  const auto line = gauss_rule(q + 1);
  Triplets tc, td, te, tg;
  const double tau = data.tau;
  for (int k = 0; k < projector.num_facets(); ++k) {
    const int f = projector.facet(k);
    const Facet& F = mesh.facets()[f];
    const Eigen::MatrixXd& M = projector.facet_mass(k);

    // C: int_0^1 L_j (s) [w_i . n] |Phi_F'| ds, with (w . n_F)|Phi_F'| = (n_out . n_F) w_hat . n_hat
    for (const bool plus : {false, true}) {
      const FacetSide& side = plus ? F.plus : F.minus;
      const double jump_sign = plus ? 1.0 : -1.0;
      const double normal_sign = plus ? -1.0 : 1.0;
      const auto idx = dofs.cell_flux_dofs(side.cell);
      const auto sgn = dofs.cell_flux_signs(side.cell);
      Eigen::MatrixXd cl = Eigen::MatrixXd::Zero(nl, nl);
      for (std::size_t g = 0; g < line.size(); ++g) {
        const double s = line.points[g](0);
        const Eigen::VectorXd traces = rt.normal_traces(side.local_edge, side.edge_parameter(s));
        cl += line.weights[g] * traces.segment(rt.edge_dof(side.local_edge, 0), nl)
              * legendre_eval(q, s).transpose();
      }
      for (int i = 0; i < nl; ++i) {
        const int li = rt.edge_dof(side.local_edge, i);
        for (int j = 0; j < nl; ++j)
          if (cl(i, j) != 0.0)
            tc.emplace_back(idx[li], dofs.hybrid_dof(k, j), jump_sign * normal_sign * sgn[li] * cl(i, j));
      }
    }

    if (tau == 0.0)
      continue;
    for (const Side side : {Side::minus, Side::plus}) {
      const Eigen::MatrixXd& P = projector.matrix(k, side);
      const int c = projector.cell(k, side);
      Eigen::MatrixXd d = tau * P.transpose() * M * P;
      d = 0.5 * (d + d.transpose()).eval();
      const Eigen::MatrixXd e = tau * P.transpose() * M;
      for (int i = 0; i < nv; ++i) {
        for (int j = 0; j < nv; ++j)
          td.emplace_back(dofs.scalar_dof(c, i), dofs.scalar_dof(c, j), d(i, j));
        for (int j = 0; j < nl; ++j)
          te.emplace_back(dofs.scalar_dof(c, i), dofs.hybrid_dof(k, j), e(i, j));
      }
    }
    for (int i = 0; i < nl; ++i)
      for (int j = 0; j < nl; ++j)
        tg.emplace_back(dofs.hybrid_dof(k, i), dofs.hybrid_dof(k, j), 2.0 * tau * M(i, j));
  }
  sys.C = from_triplets(sys.n_flux, sys.n_hybrid, tc);
  sys.D = from_triplets(sys.n_scalar, sys.n_scalar, td);
  sys.E = from_triplets(sys.n_scalar, sys.n_hybrid, te);
  sys.G = from_triplets(sys.n_hybrid, sys.n_hybrid, tg);
  return sys;
}

Eigen::VectorXd assemble_rhs(const Mesh& mesh, const DofMap& dofs, const ScalarField& f,
                             int volume_points)
{
  const QReferenceBasis<double> qb(dofs.order());
  const auto rule = tensor_rule(default_points(dofs, volume_points));
  Eigen::VectorXd F = Eigen::VectorXd::Zero(dofs.n_scalar());
  for (int c = 0; c < mesh.num_cells(); ++c) {
    const auto& map = mesh.cells()[c].map;
    Eigen::VectorXd local = Eigen::VectorXd::Zero(qb.size());
    // v = v_hat / det J and dx = det J dx_hat
    for (std::size_t g = 0; g < rule.size(); ++g)
      local += rule.weights[g] * f(map.point(rule.points[g])) * qb.values(rule.points[g]);
    F.segment(dofs.scalar_dof(c, 0), qb.size()) = local;
  }
  return F;
}

void write_triplets(std::ostream& os, const SparseMatrix& m)
{
  const Eigen::SparseMatrix<double, Eigen::RowMajor> r = m;
  const auto old = os.precision(17);
  for (int i = 0; i < r.outerSize(); ++i)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r, i); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old);
}

} // namespace hmdd
