#pragma once

// Curved quadrilateral meshes partitioned into patches.
//
// Reference cell is [0,1]^2. Local edges are numbered
//   0: (t,0)   1: (1,t)   2: (t,1)   3: (0,t)
// with the edge parameter t increasing along the reference coordinate axis.
// Facet sides: on skeleton facets the minus cell belongs to the lower patch id,
// on interior facets to the lower cell id. The facet normal n is the outward
// normal of the minus cell, i.e. it points from - to +. Boundary facets only
// have a plus cell and n is the outward normal of the domain.

#include <Eigen/Dense>

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmdd {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class GeometryError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Straight segment or circular arc with linear parametrization on [0,1].
struct Curve
{
  enum class Kind { line, arc };

  Kind kind = Kind::line;
  Vec2 a = Vec2::Zero(), b = Vec2::Zero(); // line endpoints
  Vec2 center = Vec2::Zero();              // arc data
  double radius = 0, theta0 = 0, theta1 = 0;

  static Curve line(const Vec2& a, const Vec2& b);
  static Curve arc(const Vec2& center, double radius, double theta0, double theta1);

  Vec2 point(double t) const;
  Vec2 derivative(double t) const;
};

enum class MappingKind { affine, bilinear, annular_sector, transfinite };

struct MapEval
{
  Vec2 x;
  Mat2 J;
  double detJ;
};

/// Analytic map Phi_K from [0,1]^2 onto a (possibly curved) quadrilateral.
class CellMapping
{
public:
  CellMapping() = default;

  static CellMapping affine(const Vec2& origin, const Vec2& e1, const Vec2& e2);
  /// Vertices in the order Phi(0,0), Phi(1,0), Phi(1,1), Phi(0,1).
  static CellMapping bilinear(const std::array<Vec2, 4>& vertices);
  /// (r, theta) = (r_in + x1 (r_out - r_in), theta0 + x2 (theta1 - theta0)).
  static CellMapping annular_sector(const Vec2& center, double r_in, double r_out,
                                    double theta0, double theta1);
  /// Gordon-Hall blend of the sides bottom, right, top, left (parametrized along
  /// the reference axes), restricted to the reference box [lo, hi].
  static CellMapping transfinite(const std::array<Curve, 4>& sides,
                                 const Vec2& lo = Vec2(0, 0), const Vec2& hi = Vec2(1, 1));

  MappingKind kind() const { return kind_; }

  Vec2 point(const Vec2& xh) const;
  Mat2 jacobian(const Vec2& xh) const;
  /// Throws GeometryError if det J <= 0.
  MapEval eval(const Vec2& xh) const;

  /// Restriction to the quadrant (ix, iy) of the reference square, ix, iy in {0,1}.
  CellMapping child(int ix, int iy) const;

  void write(std::ostream& os) const;
  static CellMapping read(std::istream& is);

  // Parameters of the individual kinds; only the ones matching kind() are meaningful.
  const std::array<Vec2, 4>& vertices() const { return vertices_; }
  double r_in() const { return r_in_; }
  double r_out() const { return r_out_; }
  double theta0() const { return theta0_; }
  double theta1() const { return theta1_; }

private:
  MappingKind kind_ = MappingKind::affine;
  // affine: vertices_[0] origin, [1] e1, [2] e2; bilinear: corners; annular: [0] center
  std::array<Vec2, 4> vertices_{Vec2::Zero(), Vec2::UnitX(), Vec2::UnitY(), Vec2::Zero()};
  double r_in_ = 0, r_out_ = 0, theta0_ = 0, theta1_ = 0;
  std::array<Curve, 4> sides_{};
  Vec2 lo_ = Vec2(0, 0), hi_ = Vec2(1, 1);
};

// Reference-edge helpers.
Vec2 reference_edge_point(int edge, double t);
Vec2 reference_edge_tangent(int edge);
Vec2 reference_outward_normal(int edge);

enum class FacetKind { interior_patch, skeleton, boundary };

struct FacetSide
{
  int cell = -1;
  int local_edge = 0;
  /// Edge parameter is 1 - s for facet parameter s.
  bool reversed = false;

  double edge_parameter(double s) const { return reversed ? 1.0 - s : s; }
};

class Mesh;

/// Phi_F : [0,1] -> F, induced by one adjacent cell.
class FacetMapping
{
public:
  FacetMapping(const CellMapping& cell, FacetSide side, double normal_sign);

  Vec2 point(double s) const;
  Vec2 derivative(double s) const;
  double arc_factor(double s) const { return derivative(s).norm(); }
  Vec2 normal(double s) const;

private:
  CellMapping cell_;
  FacetSide side_;
  double normal_sign_;
};

struct Facet
{
  FacetKind kind = FacetKind::boundary;
  FacetSide plus;
  FacetSide minus; // minus.cell == -1 on boundary facets
};

struct Cell
{
  CellMapping map;
  int patch = 0;
};

/// Conforming quadrilateral mesh. Immutable after construction.
class Mesh
{
public:
  /// Builds the facet topology by matching cell edges geometrically.
  explicit Mesh(std::vector<Cell> cells, int refinement_level = 0);
  /// Uses the supplied facets (validated against the cell geometry).
  Mesh(std::vector<Cell> cells, std::vector<Facet> facets, int refinement_level);

  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Facet>& facets() const { return facets_; }
  const std::vector<int>& skeleton_facets() const { return skeleton_; }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_patches() const { return num_patches_; }
  int refinement_level() const { return level_; }
  /// Largest edge length (arc length for curved edges).
  double mesh_width() const { return h_; }

  FacetMapping facet_map(int facet) const;

  /// Same mesh with the parametrization of one facet reversed (both sides flip).
  Mesh with_reversed_facet(int facet) const;

private:
  void finalize();

  std::vector<Cell> cells_;
  std::vector<Facet> facets_;
  std::vector<int> skeleton_;
  int num_patches_ = 0;
  int level_ = 0;
  double h_ = 0;
};

/// Axis-aligned split lines of the unit square; patches are the resulting boxes.
struct SquareSplit
{
  std::vector<double> x_lines;
  std::vector<double> y_lines;
};

Mesh build_square_mesh(int n_per_side, const SquareSplit& split = {});

/// Disk of radius 2 with the unit circle as skeleton. Base pattern: central square,
/// four transfinite cells reaching the unit circle (patch 0), and 4 x 2 annular
/// sectors between radii 1, 1.5 and 2 (patch 1). Level k is k uniform refinements.
Mesh build_annulus_mesh(int level);

Mesh refine(const Mesh& mesh);

/// Sum of cell areas by quadrature of det J.
double mesh_area(const Mesh& mesh, int points = 8);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

std::string to_string(MappingKind kind);
std::string to_string(FacetKind kind);

} // namespace hmdd
