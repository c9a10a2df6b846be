#include "hmdd/mesh.hpp"

#include "hmdd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

namespace hmdd {

// ---------------------------------------------------------------------------
// Curve

Curve Curve::line(const Vec2& a, const Vec2& b)
{
  Curve c;
  c.kind = Kind::line;
  c.a = a;
  c.b = b;
  return c;
}

Curve Curve::arc(const Vec2& center, double radius, double theta0, double theta1)
{
  Curve c;
  c.kind = Kind::arc;
  c.center = center;
  c.radius = radius;
  c.theta0 = theta0;
  c.theta1 = theta1;
  return c;
}

Vec2 Curve::point(double t) const
{
  if (kind == Kind::line)
    return a + t * (b - a);
  const double th = theta0 + t * (theta1 - theta0);
  return center + radius * Vec2(std::cos(th), std::sin(th));
}

Vec2 Curve::derivative(double t) const
{
  if (kind == Kind::line)
    return b - a;
  const double dth = theta1 - theta0;
  const double th = theta0 + t * dth;
  return radius * dth * Vec2(-std::sin(th), std::cos(th));
}

namespace {

void write_curve(std::ostream& os, const Curve& c)
{
  if (c.kind == Curve::Kind::line)
    os << " line " << c.a.x() << ' ' << c.a.y() << ' ' << c.b.x() << ' ' << c.b.y();
  else
    os << " arc " << c.center.x() << ' ' << c.center.y() << ' ' << c.radius << ' ' << c.theta0
       << ' ' << c.theta1;
}

Curve read_curve(std::istream& is)
{
  std::string tag;
  is >> tag;
  if (tag == "line") {
    Vec2 a, b;
    is >> a.x() >> a.y() >> b.x() >> b.y();
    return Curve::line(a, b);
  }
  if (tag == "arc") {
    Vec2 c;
    double r, t0, t1;
    is >> c.x() >> c.y() >> r >> t0 >> t1;
    return Curve::arc(c, r, t0, t1);
  }
  throw ConfigError("mesh file: unknown curve kind '" + tag + "'");
}

} // namespace

// ---------------------------------------------------------------------------
// CellMapping

CellMapping CellMapping::affine(const Vec2& origin, const Vec2& e1, const Vec2& e2)
{
  CellMapping m;
  m.kind_ = MappingKind::affine;
  m.vertices_ = {origin, e1, e2, Vec2::Zero()};
  return m;
}

CellMapping CellMapping::bilinear(const std::array<Vec2, 4>& vertices)
{
  CellMapping m;
  m.kind_ = MappingKind::bilinear;
  m.vertices_ = vertices;
  return m;
}

CellMapping CellMapping::annular_sector(const Vec2& center, double r_in, double r_out,
                                        double theta0, double theta1)
{
  if (!(r_in > 0) || !(r_out > r_in) || !(theta1 > theta0))
    throw GeometryError("annular sector: need 0 < r_in < r_out and theta0 < theta1");
  CellMapping m;
  m.kind_ = MappingKind::annular_sector;
  m.vertices_[0] = center;
  m.r_in_ = r_in;
  m.r_out_ = r_out;
  m.theta0_ = theta0;
  m.theta1_ = theta1;
  return m;
}

CellMapping CellMapping::transfinite(const std::array<Curve, 4>& sides, const Vec2& lo,
                                     const Vec2& hi)
{
  // corners must be shared by adjacent sides
  const auto close = [](const Vec2& p, const Vec2& q) {
    return (p - q).norm() <= 1e-12 * (1.0 + p.norm());
  };
  if (!close(sides[0].point(0), sides[3].point(0)) || !close(sides[0].point(1), sides[1].point(0))
      || !close(sides[2].point(1), sides[1].point(1)) || !close(sides[2].point(0), sides[3].point(1)))
    throw GeometryError("transfinite map: side curves do not meet at the corners");
  CellMapping m;
  m.kind_ = MappingKind::transfinite;
  m.sides_ = sides;
  m.lo_ = lo;
  m.hi_ = hi;
  return m;
}

Vec2 CellMapping::point(const Vec2& xh) const
{
  switch (kind_) {
  case MappingKind::affine:
    return vertices_[0] + xh.x() * vertices_[1] + xh.y() * vertices_[2];
  case MappingKind::bilinear: {
    const double x = xh.x(), y = xh.y();
    return (1 - x) * (1 - y) * vertices_[0] + x * (1 - y) * vertices_[1] + x * y * vertices_[2]
           + (1 - x) * y * vertices_[3];
  }
  case MappingKind::annular_sector: {
    const double r = r_in_ + xh.x() * (r_out_ - r_in_);
    const double th = theta0_ + xh.y() * (theta1_ - theta0_);
    return vertices_[0] + r * Vec2(std::cos(th), std::sin(th));
  }
  case MappingKind::transfinite: {
    const Vec2 y = lo_ + (hi_ - lo_).cwiseProduct(xh);
    const double xi = y.x(), eta = y.y();
    const Vec2 p00 = sides_[0].point(0), p10 = sides_[0].point(1);
    const Vec2 p01 = sides_[2].point(0), p11 = sides_[2].point(1);
    return (1 - eta) * sides_[0].point(xi) + eta * sides_[2].point(xi)
           + (1 - xi) * sides_[3].point(eta) + xi * sides_[1].point(eta)
           - ((1 - xi) * (1 - eta) * p00 + xi * (1 - eta) * p10 + xi * eta * p11
              + (1 - xi) * eta * p01);
  }
  }
  return Vec2::Zero();
}

Mat2 CellMapping::jacobian(const Vec2& xh) const
{
  Mat2 J;
  switch (kind_) {
  case MappingKind::affine:
    J.col(0) = vertices_[1];
    J.col(1) = vertices_[2];
    break;
  case MappingKind::bilinear: {
    const double x = xh.x(), y = xh.y();
    J.col(0) = (1 - y) * (vertices_[1] - vertices_[0]) + y * (vertices_[2] - vertices_[3]);
    J.col(1) = (1 - x) * (vertices_[3] - vertices_[0]) + x * (vertices_[2] - vertices_[1]);
    break;
  }
  case MappingKind::annular_sector: {
    const double dr = r_out_ - r_in_, dth = theta1_ - theta0_;
    const double r = r_in_ + xh.x() * dr;
    const double th = theta0_ + xh.y() * dth;
    J.col(0) = dr * Vec2(std::cos(th), std::sin(th));
    J.col(1) = r * dth * Vec2(-std::sin(th), std::cos(th));
    break;
  }
  case MappingKind::transfinite: {
    const Vec2 scale = hi_ - lo_;
    const Vec2 y = lo_ + scale.cwiseProduct(xh);
    const double xi = y.x(), eta = y.y();
    const Vec2 p00 = sides_[0].point(0), p10 = sides_[0].point(1);
    const Vec2 p01 = sides_[2].point(0), p11 = sides_[2].point(1);
    const Vec2 dxi = (1 - eta) * sides_[0].derivative(xi) + eta * sides_[2].derivative(xi)
                     - sides_[3].point(eta) + sides_[1].point(eta)
                     - (-(1 - eta) * p00 + (1 - eta) * p10 + eta * p11 - eta * p01);
    const Vec2 deta = -sides_[0].point(xi) + sides_[2].point(xi)
                      + (1 - xi) * sides_[3].derivative(eta) + xi * sides_[1].derivative(eta)
                      - (-(1 - xi) * p00 - xi * p10 + xi * p11 + (1 - xi) * p01);
    J.col(0) = scale.x() * dxi;
    J.col(1) = scale.y() * deta;
    break;
  }
  }
  return J;
}

MapEval CellMapping::eval(const Vec2& xh) const
{
  MapEval e{point(xh), jacobian(xh), 0.0};
  e.detJ = e.J.determinant();
  if (!(e.detJ > 0))
    throw GeometryError("cell mapping has nonpositive Jacobian determinant");
  return e;
}

CellMapping CellMapping::child(int ix, int iy) const
{
  const Vec2 lo(0.5 * ix, 0.5 * iy);
  switch (kind_) {
  case MappingKind::affine:
    return affine(point(lo), 0.5 * vertices_[1], 0.5 * vertices_[2]);
  case MappingKind::bilinear:
    return bilinear({point(lo), point(lo + Vec2(0.5, 0)), point(lo + Vec2(0.5, 0.5)),
                     point(lo + Vec2(0, 0.5))});
  case MappingKind::annular_sector: {
    const double dr = 0.5 * (r_out_ - r_in_), dth = 0.5 * (theta1_ - theta0_);
    const double r0 = r_in_ + ix * dr, t0 = theta0_ + iy * dth;
    return annular_sector(vertices_[0], r0, ix == 1 ? r_out_ : r0 + dr, t0,
                          iy == 1 ? theta1_ : t0 + dth);
  }
  case MappingKind::transfinite: {
    const Vec2 half = 0.5 * (hi_ - lo_);
    const Vec2 clo = lo_ + half.cwiseProduct(Vec2(ix, iy));
    return transfinite(sides_, clo, clo + half);
  }
  }
  return *this;
}

void CellMapping::write(std::ostream& os) const
{
  os << to_string(kind_);
  switch (kind_) {
  case MappingKind::affine:
    for (int i = 0; i < 3; ++i)
      os << ' ' << vertices_[i].x() << ' ' << vertices_[i].y();
    break;
  case MappingKind::bilinear:
    for (const auto& v : vertices_)
      os << ' ' << v.x() << ' ' << v.y();
    break;
  case MappingKind::annular_sector:
    os << ' ' << vertices_[0].x() << ' ' << vertices_[0].y() << ' ' << r_in_ << ' ' << r_out_
       << ' ' << theta0_ << ' ' << theta1_;
    break;
  case MappingKind::transfinite:
    os << ' ' << lo_.x() << ' ' << lo_.y() << ' ' << hi_.x() << ' ' << hi_.y();
    for (const auto& c : sides_)
      write_curve(os, c);
    break;
  }
}

CellMapping CellMapping::read(std::istream& is)
{
  std::string tag;
  is >> tag;
  if (tag == "affine") {
    Vec2 o, e1, e2;
    is >> o.x() >> o.y() >> e1.x() >> e1.y() >> e2.x() >> e2.y();
    return affine(o, e1, e2);
  }
  if (tag == "bilinear") {
    std::array<Vec2, 4> v;
    for (auto& p : v)
      is >> p.x() >> p.y();
    return bilinear(v);
  }
  if (tag == "annular_sector") {
    Vec2 c;
    double ri, ro, t0, t1;
    is >> c.x() >> c.y() >> ri >> ro >> t0 >> t1;
    return annular_sector(c, ri, ro, t0, t1);
  }
  if (tag == "transfinite") {
    Vec2 lo, hi;
    is >> lo.x() >> lo.y() >> hi.x() >> hi.y();
    std::array<Curve, 4> sides;
    for (auto& c : sides)
      c = read_curve(is);
    return transfinite(sides, lo, hi);
  }
  throw ConfigError("mesh file: unknown mapping kind '" + tag + "'");
}

// ---------------------------------------------------------------------------
// reference edges

Vec2 reference_edge_point(int edge, double t)
{
  switch (edge) {
  case 0: return {t, 0.0};
  case 1: return {1.0, t};
  case 2: return {t, 1.0};
  default: return {0.0, t};
  }
}

Vec2 reference_edge_tangent(int edge)
{
  return (edge % 2 == 0) ? Vec2(1, 0) : Vec2(0, 1);
}

Vec2 reference_outward_normal(int edge)
{
  switch (edge) {
  case 0: return {0, -1};
  case 1: return {1, 0};
  case 2: return {0, 1};
  default: return {-1, 0};
  }
}

// ---------------------------------------------------------------------------
// FacetMapping

FacetMapping::FacetMapping(const CellMapping& cell, FacetSide side, double normal_sign)
    : cell_(cell), side_(side), normal_sign_(normal_sign)
{
}

Vec2 FacetMapping::point(double s) const
{
  return cell_.point(reference_edge_point(side_.local_edge, side_.edge_parameter(s)));
}

Vec2 FacetMapping::derivative(double s) const
{
  const Vec2 xh = reference_edge_point(side_.local_edge, side_.edge_parameter(s));
  const Vec2 d = cell_.jacobian(xh) * reference_edge_tangent(side_.local_edge);
  return side_.reversed ? Vec2(-d) : d;
}

Vec2 FacetMapping::normal(double s) const
{
  const Vec2 xh = reference_edge_point(side_.local_edge, side_.edge_parameter(s));
  const Mat2 J = cell_.jacobian(xh);
  const Vec2 n = J.inverse().transpose() * reference_outward_normal(side_.local_edge);
  return normal_sign_ * n.normalized();
}

// ---------------------------------------------------------------------------
// Mesh

namespace {

struct EdgeRecord
{
  int cell, edge;
  Vec2 p0, p1, mid;
};

} // namespace

Mesh::Mesh(std::vector<Cell> cells, int refinement_level)
    : cells_(std::move(cells)), level_(refinement_level)
{
  const int nc = num_cells();
  std::vector<EdgeRecord> edges;
  edges.reserve(4 * nc);
  double scale = 0;
  for (int c = 0; c < nc; ++c)
    for (int e = 0; e < 4; ++e) {
      const auto& m = cells_[c].map;
      EdgeRecord r{c, e, m.point(reference_edge_point(e, 0)), m.point(reference_edge_point(e, 1)),
                   m.point(reference_edge_point(e, 0.5))};
      scale = std::max({scale, r.p0.cwiseAbs().maxCoeff(), r.p1.cwiseAbs().maxCoeff()});
      edges.push_back(r);
    }
  const double tol = 1e-9 * std::max(scale, 1.0);

  std::vector<int> order(edges.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return edges[a].mid.x() < edges[b].mid.x(); });

  std::vector<int> partner(edges.size(), -1);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& ek = edges[order[k]];
    for (std::size_t l = k + 1; l < order.size(); ++l) {
      const auto& el = edges[order[l]];
      if (el.mid.x() - ek.mid.x() > tol)
        break;
      if ((el.mid - ek.mid).norm() > tol)
        continue;
      const bool same = (el.p0 - ek.p0).norm() <= tol && (el.p1 - ek.p1).norm() <= tol;
      const bool flip = (el.p0 - ek.p1).norm() <= tol && (el.p1 - ek.p0).norm() <= tol;
      if (!same && !flip)
        continue;
      if (partner[order[k]] != -1 || partner[order[l]] != -1)
        throw GeometryError("mesh is not conforming: edge shared by more than two cells");
      partner[order[k]] = order[l];
      partner[order[l]] = order[k];
    }
  }

  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& ei = edges[i];
    Facet f;
    if (partner[i] == -1) {
      f.kind = FacetKind::boundary;
      f.plus = FacetSide{ei.cell, ei.edge, false};
      facets_.push_back(f);
      continue;
    }
    if (partner[i] < static_cast<int>(i))
      continue;
    const auto& ej = edges[partner[i]];
    const int pi = cells_[ei.cell].patch, pj = cells_[ej.cell].patch;
    f.kind = (pi == pj) ? FacetKind::interior_patch : FacetKind::skeleton;
    // minus: lower patch on the skeleton, lower cell id inside a patch
    const bool i_is_minus = (pi != pj) ? (pi < pj) : (ei.cell < ej.cell);
    const EdgeRecord& em = i_is_minus ? ei : ej;
    const EdgeRecord& ep = i_is_minus ? ej : ei;
    f.plus = FacetSide{ep.cell, ep.edge, false};
    f.minus = FacetSide{em.cell, em.edge, (em.p0 - ep.p0).norm() > tol};
    facets_.push_back(f);
  }
  finalize();
}

Mesh::Mesh(std::vector<Cell> cells, std::vector<Facet> facets, int refinement_level)
    : cells_(std::move(cells)), facets_(std::move(facets)), level_(refinement_level)
{
  const int nc = num_cells();
  std::vector<int> seen(4 * nc, 0);
  for (const auto& f : facets_) {
    const auto check_side = [&](const FacetSide& s) {
      if (s.cell < 0 || s.cell >= nc || s.local_edge < 0 || s.local_edge > 3)
        throw GeometryError("facet references an invalid cell or edge");
      ++seen[4 * s.cell + s.local_edge];
    };
    check_side(f.plus);
    if (f.kind == FacetKind::boundary) {
      if (f.minus.cell != -1)
        throw GeometryError("boundary facet with two cells");
      continue;
    }
    check_side(f.minus);
    const int pp = cells_[f.plus.cell].patch, pm = cells_[f.minus.cell].patch;
    if ((f.kind == FacetKind::skeleton) != (pp != pm))
      throw GeometryError("facet kind inconsistent with the patch ids of its cells");
    // both sides must parametrize the same curve
    for (double s : {0.0, 0.25, 0.5, 1.0}) {
      const Vec2 xp = cells_[f.plus.cell].map.point(
          reference_edge_point(f.plus.local_edge, f.plus.edge_parameter(s)));
      const Vec2 xm = cells_[f.minus.cell].map.point(
          reference_edge_point(f.minus.local_edge, f.minus.edge_parameter(s)));
      if ((xp - xm).norm() > 1e-9 * (1.0 + xp.norm()))
        throw GeometryError("facet orientation data inconsistent with cell geometry");
    }
  }
  for (int v : seen)
    if (v != 1)
      throw GeometryError("every cell edge must belong to exactly one facet");
  finalize();
}

void Mesh::finalize()
{
  skeleton_.clear();
  num_patches_ = 0;
  for (const auto& c : cells_)
    num_patches_ = std::max(num_patches_, c.patch + 1);
  for (int f = 0; f < static_cast<int>(facets_.size()); ++f)
    if (facets_[f].kind == FacetKind::skeleton)
      skeleton_.push_back(f);

  const auto rule = gauss_rule(8);
  h_ = 0;
  for (const auto& c : cells_)
    for (int e = 0; e < 4; ++e) {
      double len = 0;
      for (std::size_t g = 0; g < rule.size(); ++g) {
        const Vec2 xh = reference_edge_point(e, rule.points[g](0));
        len += rule.weights[g] * (c.map.jacobian(xh) * reference_edge_tangent(e)).norm();
      }
      h_ = std::max(h_, len);
    }
}

FacetMapping Mesh::facet_map(int facet) const
{
  const Facet& f = facets_.at(facet);
  return FacetMapping(cells_[f.plus.cell].map, f.plus, f.kind == FacetKind::boundary ? 1.0 : -1.0);
}

Mesh Mesh::with_reversed_facet(int facet) const
{
  std::vector<Facet> facets = facets_;
  Facet& f = facets.at(facet);
  f.plus.reversed = !f.plus.reversed;
  if (f.minus.cell >= 0)
    f.minus.reversed = !f.minus.reversed;
  return Mesh(cells_, std::move(facets), level_);
}

// ---------------------------------------------------------------------------
// generators

Mesh build_square_mesh(int n_per_side, const SquareSplit& split)
{
  if (n_per_side < 1)
    throw ConfigError("square mesh: n_per_side must be positive");
  const auto check = [&](const std::vector<double>& lines) {
    for (double x : lines) {
      const double k = x * n_per_side;
      if (!(x > 0 && x < 1) || std::abs(k - std::round(k)) > 1e-12)
        throw ConfigError("square mesh: split line " + std::to_string(x)
                          + " is not aligned with the mesh lines");
    }
  };
  check(split.x_lines);
  check(split.y_lines);

  const double h = 1.0 / n_per_side;
  const int nx_boxes = static_cast<int>(split.x_lines.size()) + 1;
  std::vector<Cell> cells;
  cells.reserve(n_per_side * n_per_side);
  for (int j = 0; j < n_per_side; ++j)
    for (int i = 0; i < n_per_side; ++i) {
      const Vec2 center((i + 0.5) * h, (j + 0.5) * h);
      const auto count_below = [](const std::vector<double>& lines, double v) {
        return static_cast<int>(std::count_if(lines.begin(), lines.end(), [&](double l) { return l < v; }));
      };
      const int patch = count_below(split.x_lines, center.x())
                        + nx_boxes * count_below(split.y_lines, center.y());
      cells.push_back(Cell{CellMapping::affine(Vec2(i * h, j * h), Vec2(h, 0), Vec2(0, h)), patch});
    }
  return Mesh(std::move(cells), 0);
}

Mesh build_annulus_mesh(int level)
{
  if (level < 0)
    throw ConfigError("annulus mesh: level must be nonnegative");
  constexpr double pi = std::numbers::pi;
  constexpr double s = 0.4; // half width of the central square
  std::vector<Cell> cells;
  cells.push_back(Cell{CellMapping::affine(Vec2(-s, -s), Vec2(2 * s, 0), Vec2(0, 2 * s)), 0});

  const auto rot = [](double a, const Vec2& p) {
    return Vec2(std::cos(a) * p.x() - std::sin(a) * p.y(), std::sin(a) * p.x() + std::cos(a) * p.y());
  };
  // curved cells between the square and the unit circle; x1 radial, x2 counterclockwise
  for (int k = 0; k < 4; ++k) {
    const double a = k * pi / 2;
    const Vec2 p00 = rot(a, Vec2(s, -s)), p01 = rot(a, Vec2(s, s));
    const double t0 = a - pi / 4, t1 = a + pi / 4;
    const Curve arc = Curve::arc(Vec2::Zero(), 1.0, t0, t1);
    const Vec2 p10 = arc.point(0), p11 = arc.point(1);
    cells.push_back(Cell{CellMapping::transfinite({Curve::line(p00, p10), arc,
                                                   Curve::line(p01, p11), Curve::line(p00, p01)}),
                         0});
  }
  for (int k = 0; k < 4; ++k) {
    const double t0 = k * pi / 2 - pi / 4, t1 = k * pi / 2 + pi / 4;
    cells.push_back(Cell{CellMapping::annular_sector(Vec2::Zero(), 1.0, 1.5, t0, t1), 1});
    cells.push_back(Cell{CellMapping::annular_sector(Vec2::Zero(), 1.5, 2.0, t0, t1), 1});
  }
  Mesh mesh(std::move(cells), 0);
  for (int l = 0; l < level; ++l)
    mesh = refine(mesh);
  return mesh;
}

Mesh refine(const Mesh& mesh)
{
  std::vector<Cell> cells;
  cells.reserve(4 * mesh.cells().size());
  for (const auto& c : mesh.cells())
    for (int iy = 0; iy < 2; ++iy)
      for (int ix = 0; ix < 2; ++ix)
        cells.push_back(Cell{c.map.child(ix, iy), c.patch});
  return Mesh(std::move(cells), mesh.refinement_level() + 1);
}

double mesh_area(const Mesh& mesh, int points)
{
  const auto rule = tensor_rule(points);
  double area = 0;
  for (const auto& c : mesh.cells())
    for (std::size_t g = 0; g < rule.size(); ++g)
      area += rule.weights[g] * c.map.eval(rule.points[g]).detJ;
  return area;
}

// ---------------------------------------------------------------------------
// text format

std::string to_string(MappingKind kind)
{
  switch (kind) {
  case MappingKind::affine: return "affine";
  case MappingKind::bilinear: return "bilinear";
  case MappingKind::annular_sector: return "annular_sector";
  case MappingKind::transfinite: return "transfinite";
  }
  return "?";
}

std::string to_string(FacetKind kind)
{
  switch (kind) {
  case FacetKind::interior_patch: return "interior_patch";
  case FacetKind::skeleton: return "skeleton";
  case FacetKind::boundary: return "boundary";
  }
  return "?";
}

void write_mesh(std::ostream& os, const Mesh& mesh)
{
  const auto old_precision = os.precision(17);
  os << "hmdd-mesh 1\n";
  os << "level " << mesh.refinement_level() << '\n';
  os << "cells " << mesh.num_cells() << '\n';
  for (const auto& c : mesh.cells()) {
    os << c.patch << ' ';
    c.map.write(os);
    os << '\n';
  }
  os << "facets " << mesh.facets().size() << '\n';
  for (const auto& f : mesh.facets())
    os << to_string(f.kind) << ' ' << f.plus.cell << ' ' << f.plus.local_edge << ' '
       << f.plus.reversed << ' ' << f.minus.cell << ' ' << f.minus.local_edge << ' '
       << f.minus.reversed << '\n';
  os << "end\n";
  os.precision(old_precision);
}

Mesh read_mesh(std::istream& is)
{
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "hmdd-mesh" || version != 1)
    throw ConfigError("mesh file: bad header");
  int level = 0;
  std::size_t n = 0;
  is >> tag >> level;
  if (tag != "level")
    throw ConfigError("mesh file: expected 'level'");
  is >> tag >> n;
  if (tag != "cells")
    throw ConfigError("mesh file: expected 'cells'");
  std::vector<Cell> cells(n);
  for (auto& c : cells) {
    is >> c.patch;
    c.map = CellMapping::read(is);
  }
  is >> tag >> n;
  if (tag != "facets")
    throw ConfigError("mesh file: expected 'facets'");
  std::vector<Facet> facets(n);
  for (auto& f : facets) {
    is >> tag >> f.plus.cell >> f.plus.local_edge >> f.plus.reversed >> f.minus.cell
        >> f.minus.local_edge >> f.minus.reversed;
    if (tag == "interior_patch")
      f.kind = FacetKind::interior_patch;
    else if (tag == "skeleton")
      f.kind = FacetKind::skeleton;
    else if (tag == "boundary")
      f.kind = FacetKind::boundary;
    else
      throw ConfigError("mesh file: unknown facet kind '" + tag + "'");
  }
  is >> tag;
  if (!is || tag != "end")
    throw ConfigError("mesh file: truncated");
  return Mesh(std::move(cells), std::move(facets), level);
}

} // namespace hmdd
