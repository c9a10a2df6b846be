#pragma once

#include "hmdd/mesh.hpp"

#include <numbers>
#include <random>

namespace fixtures {

using hmdd::Cell;
using hmdd::CellMapping;
using hmdd::Mesh;
using hmdd::Vec2;

// [0, 0.5] x [0, 1] and [0.5, 1] x [0, 1] in different patches.
inline Mesh one_by_two()
{
  return Mesh({{CellMapping::affine({0, 0}, {0.5, 0}, {0, 1}), 0},
               {CellMapping::affine({0.5, 0}, {0.5, 0}, {0, 1}), 1}});
}

inline Mesh unit_cell()
{
  return Mesh({{CellMapping::affine({0, 0}, {1, 0}, {0, 1}), 0}});
}

// Two annular sectors of the quarter annulus, split at r = 1.
inline Mesh two_sectors(double r0 = 0.5, double r1 = 1.0, double r2 = 1.5)
{
  const double pi = std::numbers::pi;
  return Mesh({{CellMapping::annular_sector({0, 0}, r0, r1, 0, pi / 2), 0},
               {CellMapping::annular_sector({0, 0}, r1, r2, 0, pi / 2), 1}});
}

// A bilinear cell next to a transfinite cell in another patch, sharing an edge with
// opposite local orientations.
inline Mesh mixed_pair(int right_patch = 1)
{
  using hmdd::Curve;
  const CellMapping left = CellMapping::bilinear({Vec2(0, 0), Vec2(1, 0.1), Vec2(1.05, 1), Vec2(0.1, 0.9)});
  // The right cell starts at the top of the shared edge, so that edge is reversed.
  const std::array<Curve, 4> sides{Curve::line({1.05, 1}, {1, 0.1}), Curve::line({1, 0.1}, {2.1, 0}),
                                   Curve::line({2, 1.1}, {2.1, 0}), Curve::line({1.05, 1}, {2, 1.1})};
  const CellMapping right = CellMapping::transfinite(sides);
  return Mesh({{left, 0}, {right, right_patch}});
}

inline Eigen::VectorXd random_vector(int n, unsigned seed)
{
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v(i) = dist(gen);
  return v;
}

} // namespace fixtures
