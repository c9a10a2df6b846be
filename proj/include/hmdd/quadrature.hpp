#pragma once

// Gauss-Legendre rules and shifted Legendre polynomials on [0,1].

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hmdd {

/// Gauss rule on [0,1] (Dim == 1) or on the reference square [0,1]^2 (Dim == 2).
template <typename Scalar, int Dim>
struct QuadratureRule
{
  using Point = Eigen::Matrix<Scalar, Dim, 1>;

  std::vector<Point> points;
  std::vector<Scalar> weights;

  std::size_t size() const { return weights.size(); }
};

template <typename Scalar = double>
using IntervalRule = QuadratureRule<Scalar, 1>;
template <typename Scalar = double>
using SquareRule = QuadratureRule<Scalar, 2>;

namespace detail {

// P_n(x) and P_n'(x) on [-1,1]
template <typename Scalar>
void legendre_pn(int n, Scalar x, Scalar& p, Scalar& dp)
{
  Scalar p0 = 1, p1 = x;
  if (n == 0) {
    p = 1;
    dp = 0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const Scalar p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (x * p1 - p0) / (x * x - 1);
}

} // namespace detail

/// n-point Gauss-Legendre rule mapped to [0,1]; exact for polynomials of degree <= 2n-1.
/// Nodes come from Newton iteration on the roots of P_n.
template <typename Scalar = double>
IntervalRule<Scalar> gauss_rule(int n)
{
  if (n < 1)
    throw std::invalid_argument("gauss_rule: need at least one point");
  IntervalRule<Scalar> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (i + Scalar(0.75)) / (n + Scalar(0.5)));
    Scalar p, dp;
    for (int it = 0; it < 100; ++it) {
      detail::legendre_pn(n, x, p, dp);
      const Scalar dx = p / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-15))
        break;
    }
    detail::legendre_pn(n, x, p, dp);
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    // x is the i-th largest root; store ascending on [0,1]
    rule.points[n - 1 - i](0) = (1 + x) / 2;
    rule.points[i](0) = (1 - x) / 2;
    rule.weights[n - 1 - i] = w / 2;
    rule.weights[i] = w / 2;
  }
  if (n % 2 == 1)
    rule.points[n / 2](0) = Scalar(0.5);
  return rule;
}

/// Tensor product of gauss_rule(n) with itself; index = i + n*j with i along x.
template <typename Scalar = double>
SquareRule<Scalar> tensor_rule(int n)
{
  const auto line = gauss_rule<Scalar>(n);
  SquareRule<Scalar> rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.emplace_back(line.points[i](0), line.points[j](0));
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  return rule;
}

/// Values of the shifted Legendre polynomials L_0..L_q at t in [0,1].
/// L_k(1) = 1 and int_0^1 L_i L_j = delta_ij / (2i+1).
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> legendre_eval(int q, Scalar t)
{
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(q + 1);
  const Scalar x = 2 * t - 1;
  v(0) = 1;
  if (q >= 1)
    v(1) = x;
  for (int k = 2; k <= q; ++k)
    v(k) = ((2 * k - 1) * x * v(k - 1) - (k - 1) * v(k - 2)) / k;
  return v;
}

/// Derivatives d/dt of L_0..L_q at t.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> legendre_derivative(int q, Scalar t)
{
  // (2k+1) P_k = P_{k+1}' - P_{k-1}'  on [-1,1]; the shift contributes a factor 2.
  const auto v = legendre_eval<Scalar>(q, t);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d(q + 1);
  d(0) = 0;
  if (q >= 1)
    d(1) = 2;
  for (int k = 1; k < q; ++k)
    d(k + 1) = d(k - 1) + 2 * (2 * k + 1) * v(k);
  return d;
}

} // namespace hmdd
