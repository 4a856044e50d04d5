#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rcgd/dynamics.hpp"
#include "rcgd/lyapunov.hpp"
#include "rcgd/objective.hpp"
#include "rcgd/rng.hpp"

using namespace rcgd;

namespace {

Eigen::MatrixXd diag(std::initializer_list<double> entries) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(
      static_cast<int>(entries.size()), static_cast<int>(entries.size()));
  int i = 0;
  for (double v : entries) H(i, i) = v, ++i;
  return H;
}

Eigen::MatrixXd random_symmetric(Rng& rng, int d) {
  Eigen::MatrixXd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = rng.normal();
  return 0.5 * (A + A.transpose().eval());
}

}  // namespace

TEST_CASE("factor structure and the rank-one inverse") {
  const LinearizedSystem sys(diag({1.0, -1.0}), 0.1, CoordinateStream(1, 2));
  for (long long t = 0; t < 50; ++t) {
    const int i = sys.stream().at(t);
    const Eigen::MatrixXd A = factor(sys, t);
    if (i == 0) {
      CHECK(A(0, 0) == doctest::Approx(0.9));
      CHECK(A(1, 1) == 1.0);
    } else {
      CHECK(A(0, 0) == 1.0);
      CHECK(A(1, 1) == doctest::Approx(1.1));
    }
    const Eigen::MatrixXd AinvA = inverse_factor(sys, t) * A;
    CHECK((AinvA - Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <=
          1e-15);
  }
}

TEST_CASE("off-diagonal factor touches one row") {
  Eigen::MatrixXd H(2, 2);
  H << 0.0, 1.0, 1.0, 0.0;
  LinearizedSystem sys(H, 0.1, CoordinateStream(0, 2));
  long long t = 0;
  while (sys.stream().at(t) != 0) ++t;
  const Eigen::MatrixXd A = factor(sys, t);
  CHECK(A(0, 0) == 1.0);
  CHECK(A(0, 1) == doctest::Approx(-0.1));
  CHECK(A(1, 0) == 0.0);
  CHECK(A(1, 1) == 1.0);
}

TEST_CASE("random factor inverses multiply to the identity") {
  Rng rng = Rng::substream(55, 0);
  for (int rep = 0; rep < 100; ++rep) {
    Eigen::MatrixXd H = random_symmetric(rng, 3);
    const double a = 0.5 / spectral_norm(H);
    const LinearizedSystem sys(H, a, CoordinateStream(rng.next(), 3));
    const long long t = rng.below(100);
    const Eigen::MatrixXd P = factor(sys, t) * inverse_factor(sys, t);
    CHECK((P - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <=
          1e-12);
  }
}

TEST_CASE("transition satisfies the matrix cocycle for signed times") {
  Rng rng = Rng::substream(56, 0);
  Eigen::MatrixXd H = random_symmetric(rng, 3);
  const double a = 0.4 / spectral_norm(H);
  const CoordinateStream stream(777, 3);
  const LinearizedSystem sys(H, a, stream);
  for (int rep = 0; rep < 20; ++rep) {
    const long long s = static_cast<long long>(rng.below(21)) - 10;
    const long long t = static_cast<long long>(rng.below(21)) - 10;
    const LinearizedSystem shifted(H, a, stream.shifted(s));
    const Eigen::MatrixXd lhs = transition(sys, t + s);
    const Eigen::MatrixXd rhs = transition(shifted, t) * transition(sys, s);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("diagonal spectrum closed form") {
  // Coordinate j is hit with frequency 1/d and diagonal factors commute, so
  // the exponents are (1/d) log|1 - alpha h_j|.
  const LinearizedSystem sys(diag({1.0, -1.0}), 0.1, CoordinateStream(123, 2));
  const LyapunovSpectrum spec = lyapunov_spectrum(sys, 400000, 10);
  CHECK(spec.raw_exponents[0] ==
        doctest::Approx(0.5 * std::log(1.1)).epsilon(0.05));
  CHECK(spec.raw_exponents[1] ==
        doctest::Approx(0.5 * std::log(0.9)).epsilon(0.05));
  REQUIRE(spec.exponents.size() == 2);
  CHECK(spec.multiplicities[0] == 1);
  CHECK(spec.multiplicities[1] == 1);
  CHECK(spec.dim_unstable == 1);
  CHECK(spec.dim_center_stable == 1);
}

TEST_CASE("one-dimensional spectrum is exact at any horizon") {
  const LinearizedSystem sys(diag({-2.0}), 0.1, CoordinateStream(5, 1));
  const LyapunovSpectrum spec = lyapunov_spectrum(sys, 2000, 10);
  CHECK(spec.raw_exponents[0] ==
        doctest::Approx(std::log(1.2)).epsilon(1e-12));
  CHECK(spec.dim_unstable == 1);
}

TEST_CASE("contracting diagonal spectrum is negative") {
  const LinearizedSystem sys(diag({2.0, 3.0}), 0.1, CoordinateStream(9, 2));
  const LyapunovSpectrum spec = lyapunov_spectrum(sys, 300000, 10);
  CHECK(spec.raw_exponents[0] ==
        doctest::Approx(0.5 * std::log(0.8)).epsilon(0.05));
  CHECK(spec.raw_exponents[1] ==
        doctest::Approx(0.5 * std::log(0.7)).epsilon(0.05));
  CHECK(spec.dim_unstable == 0);
  CHECK(spec.dim_center_stable == 2);
}

TEST_CASE("equal exponents merge into one group") {
  const LinearizedSystem sys(diag({2.0, 2.0}), 0.1, CoordinateStream(31, 2));
  const LyapunovSpectrum spec = lyapunov_spectrum(sys, 300000, 10);
  REQUIRE(spec.exponents.size() == 1);
  CHECK(spec.multiplicities[0] == 2);
  CHECK(spec.exponents[0] ==
        doctest::Approx(0.5 * std::log(0.8)).epsilon(0.02));
}

TEST_CASE("spectrum sum matches the expected log determinant") {
  Rng rng = Rng::substream(57, 0);
  Eigen::MatrixXd H = random_symmetric(rng, 3);
  const double a = 0.5 / H.diagonal().cwiseAbs().maxCoeff();
  const long long T = 400000;
  const LinearizedSystem sys(H, a, CoordinateStream(rng.next(), 3));
  const LyapunovSpectrum spec = lyapunov_spectrum(sys, T, 10);
  double sum = 0.0;
  for (std::size_t g = 0; g < spec.exponents.size(); ++g)
    sum += spec.exponents[g] * spec.multiplicities[g];
  // Each factor has determinant 1 - a H_ii with i uniform.
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < 3; ++i)
    mean += std::log(std::abs(1.0 - a * H(i, i))) / 3.0;
  for (int i = 0; i < 3; ++i) {
    const double dev = std::log(std::abs(1.0 - a * H(i, i))) - mean;
    var += dev * dev / 3.0;
  }
  CHECK(std::abs(sum - mean) <= 3.0 * std::sqrt(var / T) + 1e-12);
}

TEST_CASE("spectrum is shift and seed invariant within noise") {
  const Eigen::MatrixXd H = diag({1.0, -1.0});
  const CoordinateStream base(2718, 2);
  const LyapunovSpectrum a =
      lyapunov_spectrum(LinearizedSystem(H, 0.1, base), 300000, 10);
  const LyapunovSpectrum b = lyapunov_spectrum(
      LinearizedSystem(H, 0.1, base.shifted(1000)), 300000, 10);
  const LyapunovSpectrum c = lyapunov_spectrum(
      LinearizedSystem(H, 0.1, CoordinateStream(314159, 2)), 300000, 10);
  for (int j = 0; j < 2; ++j) {
    const double tol_ab =
        3.0 * std::hypot(a.raw_std_errors[j], b.raw_std_errors[j]);
    CHECK(std::abs(a.raw_exponents[j] - b.raw_exponents[j]) <= tol_ab);
    const double tol_ac =
        3.0 * std::hypot(a.raw_std_errors[j], c.raw_std_errors[j]);
    CHECK(std::abs(a.raw_exponents[j] - c.raw_exponents[j]) <= tol_ac);
  }
}

TEST_CASE("top exponent sign decisions") {
  CHECK(top_exponent_positive(
            LinearizedSystem(diag({1.0, -1.0}), 0.1, CoordinateStream(1, 2)),
            200000) == SignDecision::positive);
  CHECK(top_exponent_positive(
            LinearizedSystem(diag({2.0, 3.0}), 0.1, CoordinateStream(2, 2)),
            200000) == SignDecision::nonpositive);
  // Indefinite with zero diagonal: the non-commuting shear pair.
  Eigen::MatrixXd R(2, 2);
  R << 0.0, 1.0, 1.0, 0.0;
  CHECK(top_exponent_positive(
            LinearizedSystem(R, 0.1, CoordinateStream(3, 2)), 400000) ==
        SignDecision::positive);
}

TEST_CASE("top exponent precondition") {
  // alpha = 0.6 >= 1 / max |H_ii| = 0.5 while every factor stays invertible.
  const LinearizedSystem sys(diag({2.0, -2.0}), 0.6, CoordinateStream(4, 2));
  CHECK_THROWS_AS(top_exponent_positive(sys, 10000),
                  std::invalid_argument);
}

TEST_CASE("unstable dimension is positive whenever H has a negative eigenvalue") {
  Rng rng = Rng::substream(58, 0);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd H = random_symmetric(rng, 3);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= 0.0) H -= 2.0 * Eigen::MatrixXd::Identity(3, 3);
    const double a = 0.5 / H.diagonal().cwiseAbs().maxCoeff();
    const LinearizedSystem sys(H, a, CoordinateStream(rng.next(), 3));
    const LyapunovSpectrum spec = lyapunov_spectrum(sys, 300000, 10);
    CHECK(spec.dim_center_stable <= 2);
  }
}

TEST_CASE("nonlinear quadratic run equals the linear product") {
  ObjectiveParams params;
  params.hessian = diag({1.0, -1.0});
  const auto obj = make_objective("quadratic", params);
  const StepSize alpha(0.1, 1.0);
  const CoordinateStream stream(101, 2);
  const LinearizedSystem sys(*params.hessian, 0.1, stream);
  Eigen::Vector2d x0(0.7, -0.2);
  for (long long t : {1LL, 5LL, 20LL, 60LL}) {
    const Eigen::VectorXd nonlinear = evaluate(*obj, alpha, stream, x0, t);
    const Eigen::VectorXd linear = transition(sys, t) * x0;
    CHECK((nonlinear - linear).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("empirical exponent of a deterministic geometric decay") {
  ObjectiveParams params;
  params.hessian = diag({2.0});
  const auto obj = make_objective("quadratic", params);
  const StepSize alpha(0.1, 2.0);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const Trajectory traj = run(*obj, alpha, CoordinateStream(1, 1), x0, 200);
  const double slope = empirical_exponent(traj, Eigen::VectorXd::Zero(1), 0.5);
  CHECK(slope == doctest::Approx(std::log(0.8)).epsilon(1e-3));
}

TEST_CASE("empirical exponent rejects constant trajectories") {
  ObjectiveParams params;
  params.hessian = diag({2.0, 3.0});
  const auto obj = make_objective("quadratic", params);
  const StepSize alpha(0.1, 3.0);
  const Trajectory traj = run(*obj, alpha, CoordinateStream(1, 2),
                              Eigen::Vector2d(0.0, 0.0), 1000);
  CHECK_THROWS_AS(empirical_exponent(traj, Eigen::VectorXd::Zero(2), 0.5),
                  std::runtime_error);
}

TEST_CASE("spectrum preconditions") {
  const LinearizedSystem sys(diag({1.0, -1.0}), 0.1, CoordinateStream(1, 2));
  CHECK_THROWS_AS(lyapunov_spectrum(sys, 100, 10), std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_spectrum(sys, 100000, 0), std::invalid_argument);
  CHECK_THROWS_AS(lyapunov_spectrum(sys, 100000, 1000), std::invalid_argument);
  // Singular factor: alpha * H_ii = 1.
  CHECK_THROWS_AS(LinearizedSystem(diag({1.0, -1.0}), 1.0,
                                   CoordinateStream(1, 2)),
                  std::invalid_argument);
}
