#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace rcgd {

// Central-difference step: cbrt(eps) * (1 + |x_i|) balances truncation
// against rounding for second-order stencils.
inline double fd_step(double xi) {
  static const double h0 =
      std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * (1.0 + std::abs(xi));
}

inline Eigen::VectorXd fd_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  Eigen::VectorXd z = x;
  for (int i = 0; i < d; ++i) {
    const double h = fd_step(x[i]);
    z[i] = x[i] + h;
    const double fp = f(z);
    z[i] = x[i] - h;
    const double fm = f(z);
    z[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// Jacobian of a vector map by central differences, one column per coordinate.
inline Eigen::MatrixXd fd_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& F,
    const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  const Eigen::VectorXd F0 = F(x);
  Eigen::MatrixXd J(F0.size(), d);
  Eigen::VectorXd z = x;
  for (int j = 0; j < d; ++j) {
    const double h = fd_step(x[j]);
    z[j] = x[j] + h;
    const Eigen::VectorXd Fp = F(z);
    z[j] = x[j] - h;
    const Eigen::VectorXd Fm = F(z);
    z[j] = x[j];
    J.col(j) = (Fp - Fm) / (2.0 * h);
  }
  return J;
}

inline Eigen::MatrixXd fd_hessian(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x) {
  const int d = static_cast<int>(x.size());
  Eigen::MatrixXd H(d, d);
  Eigen::VectorXd z = x;
  const double fx = f(x);
  for (int i = 0; i < d; ++i) {
    const double hi = fd_step(x[i]);
    z[i] = x[i] + hi;
    const double fp = f(z);
    z[i] = x[i] - hi;
    const double fm = f(z);
    z[i] = x[i];
    H(i, i) = (fp - 2.0 * fx + fm) / (hi * hi);
    for (int j = i + 1; j < d; ++j) {
      const double hj = fd_step(x[j]);
      z[i] = x[i] + hi;
      z[j] = x[j] + hj;
      const double fpp = f(z);
      z[j] = x[j] - hj;
      const double fpm = f(z);
      z[i] = x[i] - hi;
      const double fmm = f(z);
      z[j] = x[j] + hj;
      const double fmp = f(z);
      z[i] = x[i];
      z[j] = x[j];
      H(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * hi * hj);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

}  // namespace rcgd
