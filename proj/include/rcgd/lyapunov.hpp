#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rcgd/dynamics.hpp"
#include "rcgd/stream.hpp"

namespace rcgd {

// Linear system x_{t+1} = A(t) x_t with A(t) = I - alpha e_i e_i' H for
// i = stream.at(t).  Every factor is invertible because its determinant is
// 1 - alpha H_ii, which the constructor requires to stay away from zero.
class LinearizedSystem {
 public:
  LinearizedSystem(Eigen::MatrixXd H, double alpha, CoordinateStream stream);

  int dim() const { return static_cast<int>(H_.rows()); }
  const Eigen::MatrixXd& H() const { return H_; }
  double alpha() const { return alpha_; }
  const CoordinateStream& stream() const { return stream_; }
  double max_abs_diagonal() const { return max_abs_diag_; }

 private:
  Eigen::MatrixXd H_;
  double alpha_;
  CoordinateStream stream_;
  double max_abs_diag_;
};

// The factor at time t and its closed-form rank-one inverse
// (I - a e_i e_i' H)^{-1} = I + (a / (1 - a H_ii)) e_i e_i' H.
Eigen::MatrixXd factor(const LinearizedSystem& sys, long long t);
Eigen::MatrixXd inverse_factor(const LinearizedSystem& sys, long long t);

// Product Phi(t): factors t-1 ... 0 for t > 0, identity at 0, inverse
// factors t ... -1 for t < 0 (only sensible for small |t|).
Eigen::MatrixXd transition(const LinearizedSystem& sys, long long t);

struct LyapunovSpectrum {
  // Distinct exponents after merging, descending, with multiplicities that
  // sum to the dimension.
  std::vector<double> exponents;
  std::vector<int> multiplicities;
  std::vector<double> std_errors;
  int dim_unstable = 0;
  int dim_center_stable = 0;
  // Per-column estimates before merging, descending.
  std::vector<double> raw_exponents;
  std::vector<double> raw_std_errors;

  double top() const { return raw_exponents.front(); }
  double top_std_error() const { return raw_std_errors.front(); }
};

// QR-reorthogonalized product estimator: push an orthonormal frame through
// the factors, re-factor every reorth_interval steps, and average the log
// moduli of the R diagonal.  Standard errors come from batch means over 10
// segments; exponents closer than 5 combined standard errors are merged to
// recover multiplicities.
LyapunovSpectrum lyapunov_spectrum(const LinearizedSystem& sys,
                                   long long horizon,
                                   int reorth_interval = 10);

enum class SignDecision { positive, nonpositive, inconclusive };

const char* to_string(SignDecision d);

// Sign of the top exponent at the requested confidence.  Requires
// alpha < 1 / max_i |H_ii|.
SignDecision top_exponent_positive(const LinearizedSystem& sys,
                                   long long horizon,
                                   double confidence_sigmas = 3.0,
                                   int reorth_interval = 10);

// Least-squares slope of log ||x_t - target|| over the final tail_fraction
// of a trajectory, skipping values at the rounding floor.  Negative slope
// means exponential convergence.
double empirical_exponent(const Trajectory& traj, const Eigen::VectorXd& target,
                          double tail_fraction);

}  // namespace rcgd
