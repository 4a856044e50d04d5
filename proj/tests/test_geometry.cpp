#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rcgd/geometry.hpp"
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

std::shared_ptr<const Objective> quadratic(std::initializer_list<double> d) {
  ObjectiveParams params;
  params.hessian = diag(d);
  return make_objective("quadratic", params);
}

// Brute-force oracle for the two-ray cone of diag(l1, l2), l1 > 0 > l2:
// min over the rays of ||x - z|| / ||z||, minimized in closed form over the
// scaling of z.
double two_ray_ratio(double l1, double l2, const Eigen::Vector2d& x) {
  const double a = std::sqrt(-l2 / (l1 - l2));
  const double b = std::sqrt(l1 / (l1 - l2));
  double best = 1.0;
  for (double sa : {-1.0, 1.0})
    for (double sb : {-1.0, 1.0}) {
      const Eigen::Vector2d u(sa * a, sb * b);
      const double cosv = x.dot(u) / x.norm();
      if (cosv <= 0.0) continue;
      best = std::min(best, std::sqrt(std::max(
                                0.0, 1.0 - cosv * cosv / 1.0)) );
    }
  return best;
}

const std::uint64_t kSeed = 20240501;

}  // namespace

TEST_CASE("cone angle matches the two-ray oracle in dimension 2") {
  const Eigen::MatrixXd H = diag({1.0, -1.0});
  QuadraticCone cone(H);
  REQUIRE(cone.indefinite());
  Rng rng = Rng::substream(kSeed, 1);
  for (int s = 0; s < 300; ++s) {
    const Eigen::Vector2d x = rng.unit_sphere(2);
    // Eigenvalues of diag(1, -1) in the eigenbasis are (-1, 1) with
    // basis columns (e2, e1); the oracle works in original coordinates.
    const double expect = two_ray_ratio(1.0, -1.0, x);
    CHECK(cone.sin_angle(x) == doctest::Approx(expect).epsilon(1e-9));
  }
  // Anisotropic version.
  const Eigen::MatrixXd H2 = diag({3.0, -0.5});
  QuadraticCone cone2(H2);
  for (int s = 0; s < 300; ++s) {
    const Eigen::Vector2d x = rng.unit_sphere(2);
    const double expect = two_ray_ratio(3.0, -0.5, x);
    CHECK(cone2.sin_angle(x) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("cone angle in dimension 3 against dense parametrization") {
  // H = diag(2, 1, -1): cone 2u1^2 + u2^2 = u3^2.
  const Eigen::MatrixXd H = diag({2.0, 1.0, -1.0});
  QuadraticCone cone(H);
  Rng rng = Rng::substream(kSeed, 2);
  for (int s = 0; s < 20; ++s) {
    const Eigen::Vector3d x = rng.unit_sphere(3);
    double best_cos = 0.0;
    const int grid = 20000;
    for (int k = 0; k < grid; ++k) {
      const double phi = 6.283185307179586 * k / grid;
      Eigen::Vector3d u(std::cos(phi), std::sin(phi), 0.0);
      const double s3 = std::sqrt(2.0 * u[0] * u[0] + u[1] * u[1]);
      for (double sign : {-1.0, 1.0}) {
        u[2] = sign * s3;
        const Eigen::Vector3d un = u / u.norm();
        best_cos = std::max(best_cos, std::abs(x.dot(un)));
      }
    }
    const double oracle = std::sqrt(std::max(0.0, 1.0 - best_cos * best_cos));
    CHECK(cone.sin_angle(x) <= oracle + 1e-6);   // never misses a closer ray
    CHECK(cone.sin_angle(x) >= oracle - 1e-4);   // grid-limited oracle
  }
}

TEST_CASE("cone points and the apex") {
  const Eigen::MatrixXd H = diag({1.0, -1.0});
  QuadraticCone cone(H);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(cone.sin_angle(Eigen::Vector2d(inv_sqrt2, inv_sqrt2)) == 0.0);
  CHECK(cone.sin_angle(Eigen::Vector2d(1.0, 0.0)) ==
        doctest::Approx(inv_sqrt2).epsilon(1e-12));
  Rng rng = Rng::substream(kSeed, 3);
  for (int s = 0; s < 100; ++s) {
    const Eigen::VectorXd dir = cone.sample_direction(rng);
    CHECK(std::abs(dir.norm() - 1.0) <= 1e-12);
    CHECK(std::abs(dir.dot(H * dir)) <= 1e-12);
  }
}

TEST_CASE("relative zero-set membership for quadratics") {
  const auto obj = quadratic({1.0, -1.0});
  const Eigen::Vector2d saddle(0.0, 0.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  // A point on the zero cone is its own witness.
  CHECK(in_u2(*obj, saddle, 0.37 * Eigen::Vector2d(inv_sqrt2, inv_sqrt2),
              0.05));
  // (1, 0) sits 45 degrees from the cone.
  CHECK_FALSE(in_u2(*obj, saddle, Eigen::Vector2d(1.0, 0.0), 0.1));
  CHECK(in_u2(*obj, saddle, Eigen::Vector2d(1.0, 0.0), 0.8));
  // The apex is excluded: every ball around a nonzero z misses it.
  CHECK_FALSE(in_u2(*obj, saddle, saddle, 0.5));
}

TEST_CASE("probing membership on the quartic agrees with the quadratic model") {
  const auto obj = make_objective("separable-quartic");
  // Mixed saddle at (0, 1): shifted f looks like (-y1^2 + 2 y2^2)/2 + h.o.t.
  Eigen::Vector2d saddle(0.0, 1.0);
  const Eigen::MatrixXd H = obj->hessian(saddle);
  QuadraticCone cone(H);
  REQUIRE(cone.indefinite());
  Rng rng = Rng::substream(kSeed, 4);
  const double rho = 0.2;
  int checked = 0;
  for (int s = 0; s < 400; ++s) {
    const Eigen::VectorXd y = rng.in_ball(2, 0.02);
    const double sin_model = cone.sin_angle(y);
    if (std::abs(sin_model - rho) < 0.05) continue;  // skip the boundary band
    const bool member = in_u2(*obj, saddle, saddle + y, rho, 48);
    CHECK(member == (sin_model < rho));
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("sigma certification on quadratics is global") {
  const auto obj = quadratic({1.0, -1.0});
  const auto [sigma, radius] =
      estimate_sigma(*obj, Eigen::Vector2d(0.0, 0.0), 1.0, 500, kSeed);
  CHECK(sigma == doctest::Approx(0.5));
  CHECK(radius == doctest::Approx(1.0));  // ||grad|| = ||x|| passes at once
}

TEST_CASE("sigma certification shrinks on the quartic") {
  const auto obj = make_objective("separable-quartic");
  const auto [sigma, radius] =
      estimate_sigma(*obj, Eigen::Vector2d(0.0, 0.0), 1.0, 2000, kSeed);
  CHECK(sigma == doctest::Approx(0.5));
  CHECK(radius <= 1.0);
  CHECK(radius >= 0.1);
  // The certificate must hold on a fresh sample.
  Rng rng = Rng::substream(kSeed, 5);
  for (int s = 0; s < 2000; ++s) {
    const Eigen::VectorXd y = rng.in_ball(2, radius);
    if (y.norm() < 1e-12) continue;
    CHECK(obj->gradient(y).norm() >= sigma * y.norm() - 1e-12);
  }
}

TEST_CASE("sigma rejects degenerate Hessians") {
  const auto obj = make_objective("separable-quartic");
  // Non-critical point with a degenerate-looking direction is fine, but a
  // degenerate Hessian at the expansion point must throw.
  Eigen::Vector2d degenerate(1.0 / std::sqrt(3.0), 1.0);
  CHECK_THROWS_AS(estimate_sigma(*obj, degenerate, 0.5, 100, kSeed),
                  std::invalid_argument);
}

TEST_CASE("rho solves the strict inequality") {
  struct Case {
    double alpha, sigma, m;
    int d;
  };
  for (const Case& c : {Case{0.1, 0.5, 1.0, 2}, Case{0.019, 0.5, 26.0, 2},
                        Case{0.3, 1.0, 2.0, 4}}) {
    const double rho = solve_rho(c.alpha, c.sigma, c.d, c.m);
    CHECK(rho > 0.0);
    CHECK(rho < 1.0);
    const double lhs = rho * c.m + 0.5 * c.m * rho * rho;
    const double rhs = c.alpha * c.sigma * c.sigma / (2.0 * c.d) *
                       (1.0 - rho) * (1.0 - rho);
    CHECK(lhs < rhs);
  }

  // Independent bisection oracle for the base case.
  {
    const double alpha = 0.1, sigma = 0.5, m = 1.0;
    const int d = 2;
    auto g = [&](double r) {
      return r * m + 0.5 * m * r * r -
             alpha * sigma * sigma / (2.0 * d) * (1.0 - r) * (1.0 - r);
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    CHECK(solve_rho(alpha, sigma, d, m) ==
          doctest::Approx(0.5 * lo).epsilon(1e-10));
  }

  // Vanishing right-hand side forces rho to zero.
  CHECK(solve_rho(0.1, 1e-6, 2, 1.0) < 1e-8);
  CHECK_THROWS_AS(solve_rho(0.5, 0.5, 2, 3.0), std::invalid_argument);
}

TEST_CASE("growth constants against a dense angular oracle") {
  const Eigen::MatrixXd H = diag({1.0, -1.0});
  const double rho_h = 0.1;
  const auto [p_plus, p_minus] = growth_constants(H, rho_h, 100000, kSeed);

  // Oracle: min over theta of cos(2 theta)/2 subject to f >= 0 and the
  // angular margin to the 45-degree rays being at least asin(rho_h).
  double oracle = std::numeric_limits<double>::infinity();
  QuadraticCone cone(H);
  const int grid = 2000000;
  for (int k = 0; k < grid; ++k) {
    const double th = 6.283185307179586 * k / grid;
    const Eigen::Vector2d u(std::cos(th), std::sin(th));
    const double f = 0.5 * std::cos(2.0 * th);
    if (f < 0.0) continue;
    if (cone.sin_angle(u) < rho_h) continue;
    oracle = std::min(oracle, f);
  }
  CHECK(p_plus == doctest::Approx(oracle).epsilon(1e-4));
  CHECK(p_minus == doctest::Approx(-oracle).epsilon(1e-4));
  // Closed form of the boundary value.
  CHECK(p_plus ==
        doctest::Approx(rho_h * std::sqrt(1.0 - rho_h * rho_h)).epsilon(1e-4));
}

TEST_CASE("growth constants of definite forms and scaling") {
  const auto pd = growth_constants(diag({1.0, 1.0}), 0.1, 1000);
  CHECK(pd.first == doctest::Approx(0.5));
  CHECK(pd.second == doctest::Approx(-0.5));
  const auto nd = growth_constants(diag({-2.0, -3.0}), 0.1, 1000);
  CHECK(nd.first == doctest::Approx(1.0));
  CHECK(nd.second == doctest::Approx(-1.0));

  const auto p1 = growth_constants(diag({1.0, -1.0}), 0.1, 30000, kSeed);
  const auto p2 = growth_constants(2.0 * diag({1.0, -1.0}), 0.1, 30000, kSeed);
  CHECK(p2.first == doctest::Approx(2.0 * p1.first).epsilon(1e-3));
}

TEST_CASE("growth constants reject an absorbing exclusion radius") {
  CHECK_THROWS_AS(growth_constants(diag({1.0, -1.0}), 0.9999, 5000),
                  std::runtime_error);
}

TEST_CASE("saddle geometry assembles the certified constants") {
  const auto obj = quadratic({1.0, -1.0});
  const SaddleGeometry geom =
      build_saddle_geometry(*obj, obj->critical_points()[0], 0.1);
  CHECK(geom.sigma == doctest::Approx(0.5));
  CHECK(geom.u1_radius == doctest::Approx(1.0));
  CHECK(geom.rho > 0.0);
  CHECK(geom.rho_h > 0.0);
  CHECK(geom.rho_h < geom.rho / 4.0);
  CHECK(geom.p == doctest::Approx(0.5 * std::min(geom.p_plus, -geom.p_minus)));
  const double lhs = geom.rho * geom.bound_m +
                     0.5 * geom.bound_m * geom.rho * geom.rho;
  const double rhs = geom.alpha * geom.sigma * geom.sigma /
                     (2.0 * geom.dim) * (1.0 - geom.rho) * (1.0 - geom.rho);
  CHECK(lhs < rhs);

  // Building geometry at a minimum is rejected.
  const auto min_obj = quadratic({2.0, 3.0});
  CHECK_THROWS_AS(
      build_saddle_geometry(*min_obj, min_obj->critical_points()[0], 0.1),
      std::invalid_argument);
}

TEST_CASE("excluded-set membership") {
  const auto obj = quadratic({1.0, -1.0});
  const SaddleGeometry geom =
      build_saddle_geometry(*obj, obj->critical_points()[0], 0.1);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);

  // On the positive side, on the cone, inside the ball.
  const Eigen::Vector2d on_cone =
      0.01 * (1.0 + 0.5 * geom.rho) * Eigen::Vector2d(inv_sqrt2, inv_sqrt2);
  CHECK(in_s(*obj, geom, on_cone));
  // Negative side is excluded exactly.
  Rng rng = Rng::substream(kSeed, 6);
  for (int s = 0; s < 500; ++s) {
    const Eigen::Vector2d x = rng.in_ball(2, 0.9);
    if (obj->value(x) < 0.0) CHECK_FALSE(in_s(*obj, geom, x));
  }
  // Outside the certified ball is excluded.
  CHECK_FALSE(in_s(*obj, geom,
                   1.01 * geom.u1_radius * Eigen::Vector2d(inv_sqrt2,
                                                           inv_sqrt2)));
}

TEST_CASE("quadratic growth holds off the excluded set") {
  const auto obj = quadratic({1.0, -1.0});
  const SaddleGeometry geom =
      build_saddle_geometry(*obj, obj->critical_points()[0], 0.1);
  Rng rng = Rng::substream(kSeed, 7);
  long long violations = 0, tested = 0;
  while (tested < 10000) {
    const Eigen::VectorXd x = rng.in_ball(2, geom.u1_radius);
    if (obj->value(x) < 0.0) continue;
    if (in_s(*obj, geom, x)) continue;
    ++tested;
    if (obj->value(x) < geom.p * x.squaredNorm()) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("quadratic-model inclusion for the exact quadratic") {
  const auto obj = quadratic({1.0, -1.0});
  const SaddleGeometry geom =
      build_saddle_geometry(*obj, obj->critical_points()[0], 0.1);
  const InclusionReport rep = check_u2h_inclusion(
      *obj, geom.saddle, geom.rho, geom.rho_h, 60, 0.5, 6, 32, kSeed);
  CHECK_FALSE(rep.vacuous);
  for (int f : rep.failures) CHECK(f == 0);  // same cone, smaller balls
  CHECK(rep.inclusion_radius == doctest::Approx(0.5));
}

TEST_CASE("quadratic-model inclusion near a quartic mixed saddle") {
  const auto obj = make_objective("separable-quartic");
  // Saddle (0, 1) with Hessian diag(-1, 2).
  const Eigen::Vector2d saddle(0.0, 1.0);
  const double rho = 0.02, rho_h = 0.002;
  const InclusionReport rep =
      check_u2h_inclusion(*obj, saddle, rho, rho_h, 40, 0.2, 6, 48, kSeed);
  CHECK_FALSE(rep.vacuous);
  CHECK(rep.inclusion_radius > 0.0);
}

TEST_CASE("inclusion test enforces its radius precondition") {
  const auto obj = quadratic({1.0, -1.0});
  CHECK_THROWS_AS(check_u2h_inclusion(*obj, Eigen::Vector2d(0.0, 0.0), 0.1,
                                      0.05, 10),
                  std::invalid_argument);
}

TEST_CASE("inclusion is vacuous when the model cone is trivial") {
  // The quartic origin saddle has Hessian diag(-1, -1): no positive
  // eigenvalue, so the model zero set is only the apex.
  const auto obj = make_objective("separable-quartic");
  const InclusionReport rep = check_u2h_inclusion(
      *obj, Eigen::Vector2d(0.0, 0.0), 0.1, 0.01, 10, 0.5, 4, 16, kSeed);
  CHECK(rep.vacuous);
  CHECK(rep.inclusion_radius == doctest::Approx(0.5));
}
