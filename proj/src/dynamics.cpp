#include "rcgd/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rcgd/errors.hpp"

namespace rcgd {

StepSize::StepSize(double alpha, double hessian_bound)
    : alpha_(alpha), bound_(hessian_bound) {
  if (!(hessian_bound > 0.0))
    throw std::invalid_argument("StepSize: Hessian bound must be positive");
  if (!(alpha > 0.0) || !(alpha * hessian_bound < 1.0))
    throw std::invalid_argument(
        "StepSize: alpha must satisfy 0 < alpha * M < 1");
}

const char* to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iters:
      return "max_iters";
    case StopReason::converged:
      return "converged";
    case StopReason::region_exit:
      return "region_exit";
  }
  return "unknown";
}

bool indicator(const Eigen::VectorXd& grad, int i) {
  const double n = grad.norm();
  return std::abs(grad[i]) >=
         n / std::sqrt(static_cast<double>(grad.size()));
}

int threshold_index(const Eigen::VectorXd& grad) {
  const double thr = grad.norm() / std::sqrt(static_cast<double>(grad.size()));
  for (int i = 0; i < grad.size(); ++i)
    if (std::abs(grad[i]) >= thr) return i;
  return static_cast<int>(grad.size()) - 1;  // unreachable for finite grad
}

Eigen::VectorXd step(const Objective& obj, const StepSize& alpha,
                     const Eigen::VectorXd& x, int i) {
  if (i < 0 || i >= obj.dim())
    throw std::invalid_argument("step: coordinate index out of range");
  const double g = obj.partial(x, i);
  if (!std::isfinite(g))
    throw std::runtime_error("step: non-finite gradient component");
  Eigen::VectorXd y = x;
  y[i] -= alpha.value() * g;
  return y;
}

Eigen::VectorXd inverse_step(const Objective& obj, const StepSize& alpha,
                             const Eigen::VectorXd& y, int i) {
  if (i < 0 || i >= obj.dim())
    throw std::invalid_argument("inverse_step: coordinate index out of range");
  const double a = alpha.value();
  Eigen::VectorXd x = y;
  auto g = [&](double s) {
    x[i] = s;
    return s - a * obj.partial(x, i) - y[i];
  };

  // g is strictly increasing with slope >= 1 - alpha*M > 0, so one sign
  // change brackets the unique root.  Expand geometrically until found.
  double half =
      a * alpha.bound() * (1.0 + std::abs(y[i]) + y.norm()) + 1e-12;
  double lo = y[i] - half, hi = y[i] + half;
  double glo = g(lo), ghi = g(hi);
  int expand = 0;
  while (glo > 0.0 || ghi < 0.0) {
    if (++expand > 120)
      throw std::runtime_error(
          "inverse_step: root bracket failure (alpha*M >= 1 or inconsistent "
          "objective)");
    half *= 2.0;
    lo = y[i] - half;
    hi = y[i] + half;
    glo = g(lo);
    ghi = g(hi);
  }
  if (glo == 0.0) return (x[i] = lo, x);
  if (ghi == 0.0) return (x[i] = hi, x);

  // Newton with bisection safeguard.
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double gs = g(s);
    if (gs > 0.0)
      hi = s;
    else if (gs < 0.0)
      lo = s;
    else
      break;
    const double slope = 1.0 - a * obj.second_partial(x, i);
    double next = (slope > 1e-8) ? s - gs / slope : 0.5 * (lo + hi);
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-16 * (1.0 + std::abs(s)) ||
        hi - lo <= 1e-16 * (1.0 + std::abs(s)))
      break;
    s = next;
  }
  x[i] = s;
  return x;
}

Eigen::VectorXd evaluate(const Objective& obj, const StepSize& alpha,
                         const CoordinateStream& stream, Eigen::VectorXd x,
                         long long t) {
  const double region = obj.region_radius();
  auto guard = [&](const Eigen::VectorXd& p) {
    if (p.norm() > region)
      throw RegionExit("evaluate: iterate left the working region");
  };
  guard(x);
  if (t > 0) {
    for (long long s = 0; s < t; ++s) {
      x = step(obj, alpha, x, stream.at(s));
      guard(x);
    }
  } else {
    for (long long s = -1; s >= t; --s) {
      x = inverse_step(obj, alpha, x, stream.at(s));
      guard(x);
    }
  }
  return x;
}

Trajectory run(const Objective& obj, const StepSize& alpha,
               const CoordinateStream& stream, const Eigen::VectorXd& x0,
               long long max_iters, const StopRule& stop) {
  if (max_iters < 1)
    throw std::invalid_argument("run: max_iters must be >= 1");
  const int d = obj.dim();
  const long long patience =
      stop.patience > 0 ? stop.patience : 10LL * d;
  const double region =
      stop.region_radius > 0.0 ? stop.region_radius : obj.region_radius();
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

  Trajectory traj;
  traj.points.reserve(static_cast<std::size_t>(std::min(max_iters + 1,
                                                        1LL << 22)));
  Eigen::VectorXd x = x0;
  long long quiet = 0;
  traj.reason = StopReason::max_iters;
  for (long long t = 0; t <= max_iters; ++t) {
    const Eigen::VectorXd g = obj.gradient(x);
    const double gn = g.norm();
    if (!std::isfinite(gn))
      throw std::runtime_error("run: non-finite gradient");
    traj.points.push_back(x);
    traj.f_values.push_back(obj.value(x));
    traj.grad_norms.push_back(gn);
    if (x.norm() > region) {
      traj.reason = StopReason::region_exit;
      break;
    }
    if (t == max_iters) break;

    const int i = stream.at(t);
    traj.coords.push_back(i);
    traj.indicators.push_back(
        static_cast<std::uint8_t>(std::abs(g[i]) >= gn * inv_sqrt_d));
    const double displacement = std::abs(alpha.value() * g[i]);
    x[i] -= alpha.value() * g[i];

    if (gn <= stop.tol_grad && displacement <= stop.tol_x)
      ++quiet;
    else
      quiet = 0;
    if (quiet >= patience) {
      traj.points.push_back(x);
      traj.f_values.push_back(obj.value(x));
      traj.grad_norms.push_back(obj.gradient(x).norm());
      traj.reason = StopReason::converged;
      break;
    }
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int d =
      traj.points.empty() ? 0 : static_cast<int>(traj.points.front().size());
  out << "t,i,f,grad_norm";
  for (int j = 1; j <= d; ++j) out << ",x_" << j;
  out << ",I_t,S_t\n";
  char buf[32];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (long long t = 0; t < traj.rows(); ++t) {
    out << t << ',';
    if (t < traj.steps())
      out << traj.coords[static_cast<std::size_t>(t)] + 1;
    else
      out << '-';
    out << ',' << num(traj.f_values[static_cast<std::size_t>(t)]) << ','
        << num(traj.grad_norms[static_cast<std::size_t>(t)]);
    const Eigen::VectorXd& x = traj.points[static_cast<std::size_t>(t)];
    for (int j = 0; j < d; ++j) out << ',' << num(x[j]);
    if (t < traj.steps())
      out << ',' << int(traj.indicators[static_cast<std::size_t>(t)]);
    else
      out << ",-";
    if (static_cast<std::size_t>(t) < traj.s_flags.size())
      out << ',' << int(traj.s_flags[static_cast<std::size_t>(t)]);
    else
      out << ",-";
    out << '\n';
  }
}

}  // namespace rcgd
