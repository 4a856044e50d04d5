#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rcgd/dynamics.hpp"
#include "rcgd/geometry.hpp"
#include "rcgd/objective.hpp"

namespace rcgd {

enum class LimitClass { to_min, to_strict_saddle, diverged, undecided };

const char* to_string(LimitClass cls);

struct Classification {
  LimitClass cls = LimitClass::undecided;
  int limit_index = -1;  // registry index when matched
};

// Final-iterate classification against the registered critical points.
Classification classify_limit(const Trajectory& traj, const Objective& obj,
                              double tol, double tol_grad);

struct IndicatorStats {
  double freq_indicator = 0.0;  // mean of I_t over defined steps
  double freq_argmax = 0.0;     // fraction of steps hitting the threshold index
  long long counted = 0;
};

// Requires at least 100 recorded steps; steps with a zero gradient are
// skipped (the indicator is undefined there).
IndicatorStats indicator_stats(const Objective& obj, const Trajectory& traj);

struct DecayReport {
  long long steps = 0;
  long long descent_violations = 0;  // f(x_{t+1}) <= f(x_t) - a/2 (d_i f)^2
  long long decay_steps = 0;         // steps eligible for the factor bound
  long long decay_violations = 0;    // f(x_{t+1}) <= (1 - a s^2/(Md)) f(x_t)
};

// Re-verifies the per-step descent inequality along a recorded trajectory,
// and (with a geometry) the per-visit decay factor on indicator steps inside
// the certified ball on the nonnegative side of f.
DecayReport decay_check(const Objective& obj, const Trajectory& traj,
                        const SaddleGeometry* geom, double bound_m,
                        double alpha);

// Number of recorded points inside the excluded set; also annotates
// traj.s_flags (one flag per row).
long long s_visit_count(const Objective& obj, const SaddleGeometry& geom,
                        Trajectory& traj);

struct ResidualReport {
  long long samples = 0;
  long long norm_violations = 0;  // ||F|| <= (a L / 2) ||x||^2
  long long jac_violations = 0;   // ||DF|| <= a L ||x|| * 1.1
  double max_residual_norm = 0.0;
  double max_fd_error = 0.0;  // FD Jacobian vs analytic
};

// Checks the linearization residual F = a e_i e_i'(H x - grad f(x)) of one
// step against the bounds implied by a Hessian Lipschitz constant L.
ResidualReport residual_check(const Objective& obj,
                              const Eigen::VectorXd& saddle, double alpha,
                              double lipschitz, int samples, double radius,
                              std::uint64_t seed = 424242);

struct TrialConfig {
  double alpha = 0.1;
  Eigen::VectorXd x0_center;  // defaults to the origin
  double x0_radius = 1.0;
  std::string x0_dist = "uniform_ball";  // or "gaussian"
  std::uint64_t seed_base = 0;
  int trials = 100;
  long long max_iters = 100000;
  StopRule stop;
  double class_tol = 1e-6;
  double class_tol_grad = 1e-6;
  double tail_fraction = 0.5;
  int threads = 1;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t stream_seed = 0;
  LimitClass cls = LimitClass::undecided;
  int limit_index = -1;
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double freq_indicator = std::numeric_limits<double>::quiet_NaN();
  double freq_argmax = std::numeric_limits<double>::quiet_NaN();
  long long s_visits = -1;  // -1 when no geometry attached
  long long iters = 0;
  StopReason reason = StopReason::max_iters;
};

struct EscapeReport {
  long long to_min = 0;
  long long to_strict_saddle = 0;
  long long diverged = 0;
  long long undecided = 0;
  std::vector<TrialRecord> records;

  long long trials() const { return static_cast<long long>(records.size()); }
  double pooled_exponent(LimitClass cls) const;  // mean over matching trials
};

// Runs independent (x0, stream) trials and aggregates classification,
// per-trial empirical rates, indicator frequencies, and (optionally) visits
// to the excluded set of a saddle geometry.  Bit-reproducible for a fixed
// seed_base regardless of the thread count.
EscapeReport escape_experiment(const TrialConfig& cfg, const Objective& obj,
                               const SaddleGeometry* geom = nullptr);

void write_trials_csv(std::ostream& out, const EscapeReport& report);

}  // namespace rcgd
