#include "rcgd/selfcheck.hpp"

#include <cmath>
#include <functional>
#include <iomanip>

#include "rcgd/dynamics.hpp"
#include "rcgd/experiments.hpp"
#include "rcgd/geometry.hpp"
#include "rcgd/lyapunov.hpp"
#include "rcgd/numdiff.hpp"
#include "rcgd/objective.hpp"
#include "rcgd/rng.hpp"

namespace rcgd {

namespace {

Eigen::MatrixXd diag2(double a, double b) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 2);
  H(0, 0) = a;
  H(1, 1) = b;
  return H;
}

std::vector<std::shared_ptr<const Objective>> corpus() {
  ObjectiveParams quad;
  quad.hessian = diag2(1.0, -1.0);
  return {make_objective("quadratic", quad),
          make_objective("separable-quartic"),
          make_objective("coupled-saddle"),
          make_objective("rosenbrock-like")};
}

}  // namespace

int run_invariant_suite(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, const std::function<bool()>& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      out << "FAIL " << name << " (exception: " << e.what() << ")\n";
      ++failures;
      return;
    }
    out << (ok ? "PASS " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };

  const auto objs = corpus();

  check("finite-difference gradient consistency", [&]() {
    for (const auto& obj : objs) {
      Rng rng = Rng::substream(1001, 0);
      auto f = [&](const Eigen::VectorXd& q) { return obj->value(q); };
      for (int s = 0; s < 100; ++s) {
        const Eigen::VectorXd x = rng.in_ball(obj->dim(), 1.5);
        const Eigen::VectorXd g = obj->gradient(x);
        if ((fd_gradient(f, x) - g).norm() > 1e-5 * (1.0 + g.norm()))
          return false;
      }
    }
    return true;
  });

  check("quadratic form identity", [&]() {
    Rng rng = Rng::substream(1002, 0);
    const auto& quad = objs[0];
    for (int s = 0; s < 100; ++s) {
      const Eigen::VectorXd x = rng.in_ball(2, 10.0);
      const double direct = 0.5 * x.dot(quad->hessian(x) * x);
      if (std::abs(quad->value(x) - direct) > 1e-12 * (1.0 + std::abs(direct)))
        return false;
    }
    return true;
  });

  check("registered strict saddles have a negative eigenvalue", [&]() {
    for (const auto& obj : objs)
      for (const CriticalPoint& cp : obj->critical_points())
        if (cp.kind == CriticalKind::strict_saddle &&
            cp.hessian_eigenvalues.minCoeff() >= 0.0)
          return false;
    return true;
  });

  check("critical points are step equilibria", [&]() {
    for (const auto& obj : objs) {
      const StepSize alpha(0.5 / obj->hessian_bound(), obj->hessian_bound());
      for (const CriticalPoint& cp : obj->critical_points())
        for (int i = 0; i < obj->dim(); ++i)
          if ((step(*obj, alpha, cp.location, i) - cp.location).norm() != 0.0)
            return false;
    }
    return true;
  });

  check("per-step descent inequality", [&]() {
    for (const auto& obj : objs) {
      const double a = 0.5 / obj->hessian_bound();
      const StepSize alpha(a, obj->hessian_bound());
      Trajectory traj = run(*obj, alpha, CoordinateStream(77, obj->dim()),
                            0.5 * Eigen::VectorXd::Ones(obj->dim()), 2000);
      const DecayReport rep = decay_check(*obj, traj, nullptr, 0.0, a);
      if (rep.descent_violations != 0) return false;
    }
    return true;
  });

  check("inverse step round trip", [&]() {
    for (const auto& obj : objs) {
      const StepSize alpha(0.5 / obj->hessian_bound(), obj->hessian_bound());
      Rng rng = Rng::substream(1003, 0);
      for (int s = 0; s < 100; ++s) {
        const Eigen::VectorXd x = rng.in_ball(obj->dim(), 1.0);
        const int i = rng.below(obj->dim());
        const Eigen::VectorXd back =
            inverse_step(*obj, alpha, step(*obj, alpha, x, i), i);
        if ((back - x).cwiseAbs().maxCoeff() > 1e-10) return false;
      }
    }
    return true;
  });

  check("cocycle composition", [&]() {
    const auto obj = objs[1];  // separable-quartic
    const StepSize alpha(0.5 / obj->hessian_bound(), obj->hessian_bound());
    Rng rng = Rng::substream(1004, 0);
    for (int rep = 0; rep < 20; ++rep) {
      const CoordinateStream stream(rng.next(), obj->dim());
      const Eigen::VectorXd x0 = rng.in_ball(obj->dim(), 0.5);
      const long long s = static_cast<long long>(rng.below(41)) - 20;
      const long long t = static_cast<long long>(rng.below(41)) - 20;
      const Eigen::VectorXd lhs = evaluate(*obj, alpha, stream, x0, t + s);
      const Eigen::VectorXd rhs = evaluate(
          *obj, alpha, stream.shifted(s),
          evaluate(*obj, alpha, stream, x0, s), t);
      if ((lhs - rhs).norm() > 1e-8) return false;
    }
    return true;
  });

  check("stream marginals uniform and shift consistent", [&]() {
    const int d = 4;
    const CoordinateStream stream(2024, d);
    const long long N = 400000;
    std::vector<long long> counts(d, 0);
    for (long long t = 0; t < N; ++t) ++counts[stream.at(t)];
    const double p = 1.0 / d;
    const double sigma = std::sqrt(p * (1.0 - p) / N);
    for (int i = 0; i < d; ++i)
      if (std::abs(double(counts[i]) / N - p) > 3.0 * sigma) return false;
    const CoordinateStream sh = stream.shifted(-1234);
    for (long long t = -50; t <= 50; ++t)
      if (sh.at(t) != stream.at(t - 1234)) return false;
    return true;
  });

  check("diagonal spectrum oracle", [&]() {
    const LinearizedSystem sys(diag2(1.0, -1.0), 0.1,
                               CoordinateStream(5, 2));
    const LyapunovSpectrum spec = lyapunov_spectrum(sys, 200000, 10);
    return std::abs(spec.raw_exponents[0] - 0.5 * std::log(1.1)) < 0.01 &&
           std::abs(spec.raw_exponents[1] - 0.5 * std::log(0.9)) < 0.01 &&
           spec.dim_unstable == 1;
  });

  check("spectrum determinant-sum identity", [&]() {
    Eigen::MatrixXd H(3, 3);
    H << 1.0, 0.3, -0.2, 0.3, -0.8, 0.1, -0.2, 0.1, 0.4;
    const double a = 0.5 / H.diagonal().cwiseAbs().maxCoeff();
    const long long T = 300000;
    const LinearizedSystem sys(H, a, CoordinateStream(9, 3));
    const LyapunovSpectrum spec = lyapunov_spectrum(sys, T, 10);
    double sum = 0.0;
    for (std::size_t g = 0; g < spec.exponents.size(); ++g)
      sum += spec.exponents[g] * spec.multiplicities[g];
    double expect = 0.0, var = 0.0;
    for (int i = 0; i < 3; ++i)
      expect += std::log(std::abs(1.0 - a * H(i, i))) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const double dev = std::log(std::abs(1.0 - a * H(i, i))) - expect;
      var += dev * dev / 3.0;
    }
    return std::abs(sum - expect) <= 3.0 * std::sqrt(var / T) + 1e-9;
  });

  check("growth radius inequality is strict", [&]() {
    const double alpha = 0.1, sigma = 0.5, M = 1.0;
    const int d = 2;
    const double rho = solve_rho(alpha, sigma, d, M);
    const double lhs = rho * M + 0.5 * M * rho * rho;
    const double rhs =
        alpha * sigma * sigma / (2.0 * d) * (1.0 - rho) * (1.0 - rho);
    return rho > 0.0 && rho < 1.0 && lhs < rhs;
  });

  check("growth constants: definite form and scaling", [&]() {
    const auto pd = growth_constants(diag2(1.0, 1.0), 0.1, 1000);
    if (std::abs(pd.first - 0.5) > 1e-12) return false;
    const auto p1 = growth_constants(diag2(1.0, -1.0), 0.1, 20000);
    const auto p3 = growth_constants(3.0 * diag2(1.0, -1.0), 0.1, 20000);
    return std::abs(p3.first - 3.0 * p1.first) < 1e-3;
  });

  check("excluded set needs nonnegative f", [&]() {
    ObjectiveParams quad;
    quad.hessian = diag2(1.0, -1.0);
    const auto obj = make_objective("quadratic", quad);
    const SaddleGeometry geom =
        build_saddle_geometry(*obj, obj->critical_points()[0], 0.1);
    Rng rng = Rng::substream(1005, 0);
    for (int s = 0; s < 500; ++s) {
      Eigen::VectorXd x = rng.in_ball(2, 0.9);
      if (obj->value(x) < 0.0 && in_s(*obj, geom, x)) return false;
    }
    return true;
  });

  check("gradient-share indicator arithmetic", [&]() {
    Eigen::VectorXd g(2);
    g << 3.0, 4.0;
    return !indicator(g, 0) && indicator(g, 1);
  });

  check("residual vanishes on quadratics", [&]() {
    ObjectiveParams quad;
    quad.hessian = diag2(1.0, -1.0);
    const auto obj = make_objective("quadratic", quad);
    const ResidualReport rep = residual_check(
        *obj, Eigen::VectorXd::Zero(2), 0.1, 1e-9, 50, 0.5);
    return rep.max_residual_norm == 0.0 && rep.norm_violations == 0;
  });

  out << (failures == 0 ? "all checks passed" : "some checks FAILED")
      << std::endl;
  return failures;
}

}  // namespace rcgd
