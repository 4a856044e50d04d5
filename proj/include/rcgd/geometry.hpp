#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rcgd/objective.hpp"

namespace rcgd {

// Zero cone {u : u'Hu = 0} of an indefinite quadratic form.  Membership in
// the relative neighborhood  union of B(z, r ||z||) over cone points z
// reduces to the sine of the angle between a point and the cone, which is
// computed exactly from the stationarity conditions.
class QuadraticCone {
 public:
  explicit QuadraticCone(const Eigen::MatrixXd& H);

  bool indefinite() const { return has_pos_ && has_neg_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  // sin of the angle between y and the nearest cone ray; equals
  // inf_z ||y - z|| / ||z|| over nonzero cone points.  Requires indefinite().
  double sin_angle(const Eigen::VectorXd& y) const;

  // Random unit vector on the cone (original coordinates).
  Eigen::VectorXd sample_direction(class Rng& rng) const;

 private:
  Eigen::MatrixXd basis_;       // eigenvectors, columns
  Eigen::VectorXd eigenvalues_; // ascending
  bool has_pos_ = false;
  bool has_neg_ = false;
};

// Local constants certified around one strict saddle.  The objective is
// shifted so the saddle sits at the origin with value zero.
struct SaddleGeometry {
  Eigen::VectorXd saddle;
  double f_at_saddle = 0.0;
  Eigen::MatrixXd hessian;
  double alpha = 0.0;
  double bound_m = 0.0;  // Hessian norm bound used in the decay factor
  int dim = 0;

  double sigma = 0.0;      // gradient lower bound ||grad f|| >= sigma ||x||
  double u1_radius = 0.0;  // certified radius for the bound above
  double rho = 0.0;        // relative radius of the zero-set neighborhood
  double rho_h = 0.0;      // quadratic-model radius, in (0, rho/4)
  double p_plus = 0.0;
  double p_minus = 0.0;
  double p = 0.0;  // growth constant: f >= p ||x||^2 off the excluded set

  double decay_factor() const {
    return 1.0 - alpha * sigma * sigma / (bound_m * dim);
  }
};

struct GeometryOptions {
  double initial_radius = 1.0;
  int sigma_samples = 2000;
  int oracle_grid = 100000;
  double rho_h_fraction = 0.5;  // rho_h = fraction * rho / 4
  int u2_probes = 32;
  std::uint64_t seed = 0xC0FFEEULL;
};

// sigma = min |eig| / 2 and the largest radius r <= radius (halving) at
// which sampling certifies ||grad f(x)|| >= sigma ||x - saddle|| on the
// ball.  Throws on degenerate Hessians or radius underflow.
std::pair<double, double> estimate_sigma(const Objective& obj,
                                         const Eigen::VectorXd& saddle,
                                         double radius, int samples,
                                         std::uint64_t seed = 0xC0FFEEULL);

// Half of the unique root in (0, 1) of
//   rho M + M rho^2 / 2 = (alpha sigma^2 / 2d) (1 - rho)^2,
// so the strict inequality holds with margin.
double solve_rho(double alpha, double sigma, int d, double bound_m);

// Whether x lies within the relative-rho neighborhood of the zero level set
// of f - f(saddle).  Exact for quadratic objectives; otherwise a one-sided
// test that finds zeros by root-finding along probe directions (may
// under-report membership).
bool in_u2(const Objective& obj, const Eigen::VectorXd& saddle,
           const Eigen::VectorXd& x, double rho, int probes = 32,
           std::uint64_t seed = 0x5EEDULL);

// Membership in the excluded set: inside the certified ball, inside the
// zero-set neighborhood, and on the nonnegative side of f.
bool in_s(const Objective& obj, const SaddleGeometry& geom,
          const Eigen::VectorXd& x);

// Quadratic growth constants of x'Hx/2 off the relative-rho_h neighborhood
// of its zero cone, by dense sphere search with local refinement:
//   f^H >= p_plus ||x||^2 on the nonnegative side, f^H <= p_minus ||x||^2
// on the nonpositive side.  Definite H yields (+/-) min |eig| / 2.
std::pair<double, double> growth_constants(const Eigen::MatrixXd& H,
                                           double rho_h, int grid,
                                           std::uint64_t seed = 0x9E37ULL);

struct InclusionReport {
  std::vector<double> radii;
  std::vector<int> failures;    // per radius
  int samples_per_radius = 0;
  double inclusion_radius = 0.0;  // largest tested radius with zero failures
  bool vacuous = false;           // quadratic model has an empty zero cone
};

// Samples the quadratic-model neighborhood at decreasing radii and reports
// the largest radius at which every sample also lies in the exact
// neighborhood of f's zero set.  Requires rho_h < rho / 4.
InclusionReport check_u2h_inclusion(const Objective& obj,
                                    const Eigen::VectorXd& saddle, double rho,
                                    double rho_h, int samples,
                                    double initial_radius = 0.5,
                                    int radius_levels = 8, int probes = 32,
                                    std::uint64_t seed = 0xBEEFULL);

SaddleGeometry build_saddle_geometry(const Objective& obj,
                                     const CriticalPoint& saddle, double alpha,
                                     const GeometryOptions& opts = {});

}  // namespace rcgd
