#include "rcgd/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rcgd {

namespace {
constexpr double kFactorTol = 1e-12;
}

LinearizedSystem::LinearizedSystem(Eigen::MatrixXd H, double alpha,
                                   CoordinateStream stream)
    : H_(std::move(H)), alpha_(alpha), stream_(stream) {
  if (H_.rows() < 1 || H_.rows() != H_.cols())
    throw std::invalid_argument("LinearizedSystem: H must be square");
  if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(1.0, H_.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("LinearizedSystem: H must be symmetric");
  if (stream.dim() != H_.rows())
    throw std::invalid_argument("LinearizedSystem: stream dim mismatch");
  if (!(alpha > 0.0))
    throw std::invalid_argument("LinearizedSystem: alpha must be positive");
  max_abs_diag_ = H_.diagonal().cwiseAbs().maxCoeff();
  for (int i = 0; i < H_.rows(); ++i)
    if (std::abs(1.0 - alpha_ * H_(i, i)) < kFactorTol)
      throw std::invalid_argument(
          "LinearizedSystem: factor singular, alpha too large");
}

Eigen::MatrixXd factor(const LinearizedSystem& sys, long long t) {
  const int i = sys.stream().at(t);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
  A.row(i) -= sys.alpha() * sys.H().row(i);
  return A;
}

Eigen::MatrixXd inverse_factor(const LinearizedSystem& sys, long long t) {
  const int i = sys.stream().at(t);
  const double denom = 1.0 - sys.alpha() * sys.H()(i, i);
  if (std::abs(denom) < kFactorTol)
    throw std::invalid_argument("inverse_factor: singular factor");
  Eigen::MatrixXd B = Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
  B.row(i) += (sys.alpha() / denom) * sys.H().row(i);
  return B;
}

Eigen::MatrixXd transition(const LinearizedSystem& sys, long long t) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(sys.dim(), sys.dim());
  if (t > 0)
    for (long long s = 0; s < t; ++s) P = factor(sys, s) * P;
  else
    for (long long s = -1; s >= t; --s) P = inverse_factor(sys, s) * P;
  return P;
}

namespace {

// In-place frame update Q <- A(t) Q; rank-one structure keeps it O(d^2).
inline void apply_factor(const LinearizedSystem& sys, long long t,
                         Eigen::MatrixXd& Q) {
  const int i = sys.stream().at(t);
  Q.row(i).noalias() -= sys.alpha() * (sys.H().row(i) * Q);
}

struct MergedGroup {
  double exponent;
  double std_error;
  int multiplicity;
};

}  // namespace

LyapunovSpectrum lyapunov_spectrum(const LinearizedSystem& sys,
                                   long long horizon, int reorth_interval) {
  const int d = sys.dim();
  if (horizon < 1000LL * d)
    throw std::invalid_argument("lyapunov_spectrum: horizon must be >= 1000*d");
  if (reorth_interval < 1 || reorth_interval > 100)
    throw std::invalid_argument(
        "lyapunov_spectrum: reorth_interval must be in [1, 100]");

  constexpr int kBatches = 10;
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd batch_sums = Eigen::MatrixXd::Zero(kBatches, d);
  std::vector<long long> batch_len(kBatches, 0);
  const long long batch_size = (horizon + kBatches - 1) / kBatches;

  long long since_reorth = 0;
  long long block_start = 0;
  for (long long t = 0; t < horizon; ++t) {
    apply_factor(sys, t, Q);
    ++since_reorth;
    if (since_reorth == reorth_interval || t == horizon - 1) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
      Eigen::MatrixXd R =
          qr.matrixQR().triangularView<Eigen::Upper>();
      const int batch =
          std::min<long long>(block_start / batch_size, kBatches - 1);
      for (int j = 0; j < d; ++j) {
        const double rjj = std::abs(R(j, j));
        if (rjj < 1e-290)
          throw std::runtime_error(
              "lyapunov_spectrum: R diagonal underflow, reduce "
              "reorth_interval");
        const double lg = std::log(rjj);
        total[j] += lg;
        batch_sums(batch, j) += lg;
      }
      batch_len[batch] += since_reorth;
      Q = qr.householderQ();
      since_reorth = 0;
      block_start = t + 1;
    }
  }

  LyapunovSpectrum spec;
  std::vector<double> lambda(d), se(d);
  for (int j = 0; j < d; ++j) {
    lambda[j] = total[j] / static_cast<double>(horizon);
    double mean = 0.0;
    int used = 0;
    std::vector<double> means;
    for (int b = 0; b < kBatches; ++b) {
      if (batch_len[b] == 0) continue;
      means.push_back(batch_sums(b, j) / static_cast<double>(batch_len[b]));
      mean += means.back();
      ++used;
    }
    mean /= used;
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var = used > 1 ? var / (used - 1) : 0.0;
    se[j] = std::sqrt(var / used);
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lambda[a] > lambda[b]; });
  for (int j : order) {
    spec.raw_exponents.push_back(lambda[j]);
    spec.raw_std_errors.push_back(se[j]);
  }

  // Merge neighbors whose gap is within 5 combined standard errors.
  std::vector<MergedGroup> groups;
  for (int j = 0; j < d; ++j) {
    const double lam = spec.raw_exponents[j];
    const double err = spec.raw_std_errors[j];
    if (!groups.empty()) {
      MergedGroup& g = groups.back();
      const double tol =
          5.0 * std::sqrt(g.std_error * g.std_error + err * err) + 1e-15;
      if (g.exponent - lam < tol) {
        const int m = g.multiplicity;
        g.exponent = (g.exponent * m + lam) / (m + 1);
        g.std_error = std::sqrt(g.std_error * g.std_error * m * m +
                                err * err) /
                      (m + 1);
        g.multiplicity = m + 1;
        continue;
      }
    }
    groups.push_back({lam, err, 1});
  }
  for (const MergedGroup& g : groups) {
    spec.exponents.push_back(g.exponent);
    spec.multiplicities.push_back(g.multiplicity);
    spec.std_errors.push_back(g.std_error);
    if (g.exponent > 0.0) spec.dim_unstable += g.multiplicity;
  }
  spec.dim_center_stable = d - spec.dim_unstable;
  return spec;
}

const char* to_string(SignDecision decision) {
  switch (decision) {
    case SignDecision::positive:
      return "positive";
    case SignDecision::nonpositive:
      return "nonpositive";
    case SignDecision::inconclusive:
      return "inconclusive";
  }
  return "unknown";
}

SignDecision top_exponent_positive(const LinearizedSystem& sys,
                                   long long horizon,
                                   double confidence_sigmas,
                                   int reorth_interval) {
  if (!(sys.alpha() * sys.max_abs_diagonal() < 1.0))
    throw std::invalid_argument(
        "top_exponent_positive: requires alpha < 1 / max_i |H_ii|");
  const LyapunovSpectrum spec =
      lyapunov_spectrum(sys, horizon, reorth_interval);
  const double lam = spec.top();
  const double margin = confidence_sigmas * spec.top_std_error();
  if (lam - margin > 0.0) return SignDecision::positive;
  if (lam + margin < 0.0) return SignDecision::nonpositive;
  return SignDecision::inconclusive;
}

double empirical_exponent(const Trajectory& traj,
                          const Eigen::VectorXd& target,
                          double tail_fraction) {
  if (!(tail_fraction > 0.0) || !(tail_fraction < 1.0))
    throw std::invalid_argument(
        "empirical_exponent: tail_fraction must be in (0, 1)");
  const long long n = traj.rows();
  const long long start =
      n - std::max<long long>(2, static_cast<long long>(
                                     std::floor(tail_fraction * n)));
  const double floor_dist =
      1e2 * std::numeric_limits<double>::epsilon() * (1.0 + target.norm());

  // Accumulate the least-squares slope of log distance against t.
  double sum_t = 0, sum_y = 0, sum_tt = 0, sum_ty = 0;
  long long m = 0;
  for (long long t = std::max<long long>(start, 0); t < n; ++t) {
    const double dist =
        (traj.points[static_cast<std::size_t>(t)] - target).norm();
    if (dist <= floor_dist) continue;
    const double y = std::log(dist);
    const double tt = static_cast<double>(t);
    sum_t += tt;
    sum_y += y;
    sum_tt += tt * tt;
    sum_ty += tt * y;
    ++m;
  }
  if (m < 10)
    throw std::runtime_error("empirical_exponent: fewer than 10 usable points");
  const double denom = m * sum_tt - sum_t * sum_t;
  if (std::abs(denom) < 1e-30)
    throw std::runtime_error("empirical_exponent: degenerate time axis");
  return (m * sum_ty - sum_t * sum_y) / denom;
}

}  // namespace rcgd
