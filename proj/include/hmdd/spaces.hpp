#pragma once

// Reference bases for RT^q, Q^q and P^q (facets), the physical transforms, and the
// global numbering of W^q(T_h) x Q^q(T_h) x M^q(F_Gamma,h).

#include "hmdd/mesh.hpp"
#include "hmdd/quadrature.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace hmdd {

/// Raviart-Thomas space on [0,1]^2: first component of degree q+1 in x1 and q in x2,
/// second component of degree q in x1 and q+1 in x2.
///
/// Shapes are dual to the functionals
///   edge e, k = 0..q :  int_0^1 (w . n_e)(edge_e(t)) L_k(t) dt   (index e*(q+1)+k, n_e outward)
///   interior        :  int w1 L_i(x1) L_j(x2), i < q, j <= q, then
///                      int w2 L_i(x1) L_j(x2), i <= q, j < q.
template <typename Scalar = double>
class RTReferenceBasis
{
public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Point = Eigen::Matrix<Scalar, 2, 1>;
  using Values = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

  explicit RTReferenceBasis(int q) : q_(q), n_(2 * (q + 1) * (q + 2))
  {
    // dof functionals applied to the tensor Legendre primal basis
    const int np = q_ + 2;
    const auto line = gauss_rule<Scalar>(np);
    const auto square = tensor_rule<Scalar>(np);
    Matrix dofs = Matrix::Zero(n_, n_);
    for (int e = 0; e < 4; ++e)
      for (std::size_t g = 0; g < line.size(); ++g) {
        const Scalar t = line.points[g](0);
        const Point xh = reference_point(e, t);
        const Vector lk = legendre_eval<Scalar>(q_, t);
        const Values p = primal_values(xh);
        const Vector pn = p * outward_normal(e);
        for (int k = 0; k <= q_; ++k)
          dofs.row(e * (q_ + 1) + k) += line.weights[g] * lk(k) * pn.transpose();
      }
    for (std::size_t g = 0; g < square.size(); ++g) {
      const Point& xh = square.points[g];
      const Vector lx = legendre_eval<Scalar>(q_, xh.x());
      const Vector ly = legendre_eval<Scalar>(q_, xh.y());
      const Values p = primal_values(xh);
      int row = 4 * (q_ + 1);
      for (int j = 0; j <= q_; ++j)
        for (int i = 0; i < q_; ++i)
          dofs.row(row++) += square.weights[g] * lx(i) * ly(j) * p.col(0).transpose();
      for (int j = 0; j < q_; ++j)
        for (int i = 0; i <= q_; ++i)
          dofs.row(row++) += square.weights[g] * lx(i) * ly(j) * p.col(1).transpose();
    }
    coeffs_ = dofs.fullPivLu().inverse();
  }

  int order() const { return q_; }
  int size() const { return n_; }
  int edge_dofs() const { return q_ + 1; }
  int interior_dofs() const { return 2 * q_ * (q_ + 1); }
  int edge_dof(int edge, int k) const { return edge * (q_ + 1) + k; }

  /// Row i holds shape i at xh.
  Values values(const Point& xh) const { return coeffs_.transpose() * primal_values(xh); }

  Vector divergence(const Point& xh) const { return coeffs_.transpose() * primal_divergence(xh); }

  /// Outward normal traces of all shapes at parameter t of a reference edge.
  Vector normal_traces(int edge, Scalar t) const
  {
    return values(reference_point(edge, t)) * outward_normal(edge);
  }

  /// Expansion of the shapes in the primal basis (column b = shape b).
  const Matrix& coefficients() const { return coeffs_; }

  static Point reference_point(int edge, Scalar t)
  {
    switch (edge) {
    case 0: return {t, 0};
    case 1: return {1, t};
    case 2: return {t, 1};
    default: return {0, t};
    }
  }

  static Point outward_normal(int edge)
  {
    switch (edge) {
    case 0: return {0, -1};
    case 1: return {1, 0};
    case 2: return {0, 1};
    default: return {-1, 0};
    }
  }

private:
  Values primal_values(const Point& xh) const
  {
    const Vector lx = legendre_eval<Scalar>(q_ + 1, xh.x());
    const Vector ly = legendre_eval<Scalar>(q_ + 1, xh.y());
    Values p = Values::Zero(n_, 2);
    int idx = 0;
    for (int j = 0; j <= q_; ++j)
      for (int i = 0; i <= q_ + 1; ++i)
        p(idx++, 0) = lx(i) * ly(j);
    for (int j = 0; j <= q_ + 1; ++j)
      for (int i = 0; i <= q_; ++i)
        p(idx++, 1) = lx(i) * ly(j);
    return p;
  }

  Vector primal_divergence(const Point& xh) const
  {
    const Vector lx = legendre_eval<Scalar>(q_ + 1, xh.x());
    const Vector ly = legendre_eval<Scalar>(q_ + 1, xh.y());
    const Vector dx = legendre_derivative<Scalar>(q_ + 1, xh.x());
    const Vector dy = legendre_derivative<Scalar>(q_ + 1, xh.y());
    Vector d(n_);
    int idx = 0;
    for (int j = 0; j <= q_; ++j)
      for (int i = 0; i <= q_ + 1; ++i)
        d(idx++) = dx(i) * ly(j);
    for (int j = 0; j <= q_ + 1; ++j)
      for (int i = 0; i <= q_; ++i)
        d(idx++) = lx(i) * dy(j);
    return d;
  }

  int q_;
  int n_;
  Matrix coeffs_;
};

/// Tensor Legendre basis of Q^q; shape a + (q+1) b is L_a(x1) L_b(x2).
template <typename Scalar = double>
class QReferenceBasis
{
public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Point = Eigen::Matrix<Scalar, 2, 1>;

  explicit QReferenceBasis(int q) : q_(q) {}

  int order() const { return q_; }
  int size() const { return (q_ + 1) * (q_ + 1); }

  Vector values(const Point& xh) const
  {
    const Vector lx = legendre_eval<Scalar>(q_, xh.x());
    const Vector ly = legendre_eval<Scalar>(q_, xh.y());
    Vector v(size());
    for (int b = 0; b <= q_; ++b)
      for (int a = 0; a <= q_; ++a)
        v(a + (q_ + 1) * b) = lx(a) * ly(b);
    return v;
  }

private:
  int q_;
};

/// Legendre basis of P^q on [0,1]; facet functions are stored through their
/// reference polynomial mu o Phi_F.
template <typename Scalar = double>
class FacetReferenceBasis
{
public:
  explicit FacetReferenceBasis(int q) : q_(q) {}
  int order() const { return q_; }
  int size() const { return q_ + 1; }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values(Scalar t) const { return legendre_eval<Scalar>(q_, t); }

private:
  int q_;
};

struct FluxValue
{
  Vec2 value;
  double divergence;
};

/// Contravariant Piola transform of a reference RT field with local coefficients.
FluxValue piola_transform(const CellMapping& cell, const RTReferenceBasis<double>& basis,
                          const Eigen::VectorXd& coeffs, const Vec2& xh);

/// v(x) = v_hat(xh) / det J(xh).
double q_transform(const CellMapping& cell, const QReferenceBasis<double>& basis,
                   const Eigen::VectorXd& coeffs, const Vec2& xh);

/// Global numbering.
///
/// Flux dofs: interior moments of every cell (cells in id order), then edge moments
/// per facet in facet order. Interior-patch and boundary facets carry q+1 dofs; skeleton
/// facets carry q+1 for the minus side followed by q+1 for the plus side. A global edge dof
/// k on facet F is the moment int_0^1 (w . n_F) |Phi_F'| L_k(s) ds, so that the local shape
/// on a cell enters with the sign (n_out . n_F) (-1)^k for reversed edges.
/// Scalar dofs: (q+1)^2 per cell. Hybrid dofs: q+1 per skeleton facet.
class DofMap
{
public:
  DofMap(const Mesh& mesh, int q);

  int order() const { return q_; }
  int n_flux() const { return n_flux_; }
  int n_scalar() const { return n_scalar_; }
  int n_hybrid() const { return n_hybrid_; }
  int total() const { return n_flux_ + n_scalar_ + n_hybrid_; }
  int scalar_offset() const { return n_flux_; }
  int hybrid_offset() const { return n_flux_ + n_scalar_; }

  int flux_per_cell() const { return 2 * (q_ + 1) * (q_ + 2); }
  int scalar_per_cell() const { return (q_ + 1) * (q_ + 1); }

  std::span<const int> cell_flux_dofs(int cell) const
  {
    return {flux_dofs_.data() + cell * flux_per_cell(), static_cast<std::size_t>(flux_per_cell())};
  }
  std::span<const double> cell_flux_signs(int cell) const
  {
    return {flux_signs_.data() + cell * flux_per_cell(), static_cast<std::size_t>(flux_per_cell())};
  }
  int scalar_dof(int cell, int local) const { return cell * scalar_per_cell() + local; }
  /// Index within the hybrid block of coefficient k on the given skeleton facet.
  int hybrid_dof(int skeleton_index, int k) const { return skeleton_index * (q_ + 1) + k; }
  /// Position of a facet in Mesh::skeleton_facets(), or -1.
  int skeleton_index(int facet) const { return skeleton_index_[facet]; }
  /// Patch owning a flux dof.
  int flux_patch(int dof) const { return flux_patch_[dof]; }
  /// Patch owning a scalar dof.
  int scalar_patch(int dof) const { return cell_patch_[dof / scalar_per_cell()]; }
  int num_patches() const { return num_patches_; }

private:
  int q_;
  int n_flux_ = 0, n_scalar_ = 0, n_hybrid_ = 0;
  std::vector<int> flux_dofs_;
  std::vector<double> flux_signs_;
  std::vector<int> skeleton_index_;
  std::vector<int> flux_patch_;
  std::vector<int> cell_patch_;
  int num_patches_ = 0;
};

/// Coefficient vectors for (q_h, u_h, mu_h).
struct Solution
{
  Eigen::VectorXd flux;
  Eigen::VectorXd scalar;
  Eigen::VectorXd hybrid;

  static Solution split(const DofMap& dofs, const Eigen::VectorXd& x);
  Eigen::VectorXd stacked() const;
};

/// Evaluates a discrete solution on cells, facets, or at world points.
class FieldEvaluator
{
public:
  FieldEvaluator(const Mesh& mesh, const DofMap& dofs, const Solution& solution);

  double u(int cell, const Vec2& xh) const;
  FluxValue q(int cell, const Vec2& xh) const;
  /// Physical q_h . n_F on a facet side (cell of that side), facet parameter s.
  double normal_flux(int facet, bool plus_side, double s) const;
  /// mu_h(Phi_F(s)) on a skeleton facet.
  double mu(int facet, double s) const;

  /// World-point evaluation; throws GeometryError if x lies outside the mesh.
  double u_at(const Vec2& x) const;
  FluxValue q_at(const Vec2& x) const;

  Eigen::VectorXd local_flux(int cell) const;
  Eigen::VectorXd local_scalar(int cell) const;

  const RTReferenceBasis<double>& rt() const { return rt_; }
  const QReferenceBasis<double>& qbasis() const { return qb_; }

private:
  const Mesh& mesh_;
  const DofMap& dofs_;
  const Solution& sol_;
  RTReferenceBasis<double> rt_;
  QReferenceBasis<double> qb_;
};

/// Cell containing x and the reference coordinates of x, by Newton inversion.
struct PointLocation
{
  int cell = -1;
  Vec2 xh = Vec2::Zero();
};
PointLocation locate(const Mesh& mesh, const Vec2& x);

} // namespace hmdd
