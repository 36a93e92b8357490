#pragma once

// Reference computations that avoid the library's symbolic pipeline:
// finite differences, closed forms and normal-equation projections.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Map = std::function<Vec(const Vec&)>;

/// Central-difference Jacobian of f at x.
inline Mat jacobian(const Map& f, const Vec& x, double h = 1e-5) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec e = Vec::Zero(x.size());
    e(i) = h;
    J.col(i) = (f(x + e) - f(x - e)) / (2 * h);
  }
  return J;
}

/// Christoffel symbols supplied as a plain function of x, layout [k][i][j].
using Symbols = std::function<std::vector<double>(const Vec&)>;

inline Vec contract(const std::vector<double>& g, const Vec& u, const Vec& v) {
  const int n = static_cast<int>(u.size());
  Vec w = Vec::Zero(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w(k) += g[(k * n + i) * n + j] * u(i) * v(j);
  return w;
}

/// (nabla_X Y)(x) from finite differences of Y and the given symbols.
inline Vec covariant_derivative(const Symbols& gamma, const Map& X, const Map& Y, const Vec& x) {
  return jacobian(Y, x) * X(x) + contract(gamma(x), X(x), Y(x));
}

inline Vec lie_bracket(const Map& X, const Map& Y, const Vec& x) {
  return jacobian(Y, x) * X(x) - jacobian(X, x) * Y(x);
}

/// Levi-Civita symbols of a metric given numerically, by differencing g.
inline std::vector<double> levi_civita(const std::function<Mat(const Vec&)>& g, const Vec& x, double h = 1e-5) {
  const int n = static_cast<int>(x.size());
  std::vector<Mat> dg(n);
  for (int l = 0; l < n; ++l) {
    Vec e = Vec::Zero(n);
    e(l) = h;
    dg[l] = (g(x + e) - g(x - e)) / (2 * h);
  }
  const Mat ginv = g(x).inverse();
  std::vector<double> out(n * n * n, 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l)
          out[(k * n + i) * n + j] += 0.5 * ginv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
  return out;
}

/// Symbols Gamma^k_ij = lambda * eps_ijk on R^3.
inline std::vector<double> epsilon_symbols(double lambda = 1.0) {
  std::vector<double> g(27, 0.0);
  auto eps = [](int i, int j, int k) { return (j - i) * (k - i) * (k - j) / 2; };
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g[(k * 3 + i) * 3 + j] = lambda * eps(i, j, k);
  return g;
}

/// Unit-speed geodesic of the half-plane metric dx^2+dy^2 over y^2 from
/// (0,1) with velocity (1,0): the unit circle, (tanh s, sech s).
inline std::pair<Vec, Vec> half_plane_unit_geodesic(double s) {
  const double th = std::tanh(s), sh = 1.0 / std::cosh(s);
  return {Vec{{th, sh}}, Vec{{sh * sh, -sh * th}}};
}

/// exp(A) by a long Taylor series with scaling and squaring.
inline Mat expm(const Mat& A) {
  int squarings = 0;
  double norm = A.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) norm /= 2, ++squarings;
  const Mat B = A / std::pow(2.0, squarings);
  Mat term = Mat::Identity(A.rows(), A.cols()), sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * B / k;
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Norm of the part of w orthogonal to the columns of A (full column rank),
/// through the normal equations.
inline double orthogonal_residual(const Mat& A, const Vec& w) {
  const Vec coef = (A.transpose() * A).ldlt().solve(A.transpose() * w);
  return (w - A * coef).norm();
}

}  // namespace oracle
