#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include <Eigen/Dense>

#include "rcgd/objective.hpp"
#include "rcgd/stream.hpp"

namespace rcgd {

// Step size alpha with 0 < alpha * bound < 1 enforced at construction.
class StepSize {
 public:
  StepSize(double alpha, double hessian_bound);
  static StepSize for_objective(double alpha, const Objective& obj) {
    return StepSize(alpha, obj.hessian_bound());
  }
  double value() const { return alpha_; }
  double bound() const { return bound_; }

 private:
  double alpha_;
  double bound_;
};

struct StopRule {
  double tol_grad = 1e-9;
  double tol_x = 1e-12;
  long long patience = -1;      // -1: 10 * dim
  double region_radius = -1.0;  // -1: objective's region
};

enum class StopReason { max_iters, converged, region_exit };

const char* to_string(StopReason reason);

// Recorded orbit.  Row t holds x_t, f(x_t), ||grad f(x_t)||; per-step data
// (coords, indicators) has one entry fewer than the number of rows.
struct Trajectory {
  std::vector<Eigen::VectorXd> points;
  std::vector<double> f_values;
  std::vector<double> grad_norms;
  std::vector<int> coords;                // i_t, 0-based
  std::vector<std::uint8_t> indicators;   // |g_{i_t}| >= ||g|| / sqrt(d)
  std::vector<std::int8_t> s_flags;       // filled only when a geometry is attached
  StopReason reason = StopReason::max_iters;

  long long steps() const { return static_cast<long long>(coords.size()); }
  long long rows() const { return static_cast<long long>(points.size()); }
  const Eigen::VectorXd& final_point() const { return points.back(); }
};

// 1 iff coordinate i carries at least the 1/sqrt(d) share of the gradient.
bool indicator(const Eigen::VectorXd& grad, int i);

// Lowest index whose gradient entry passes the 1/sqrt(d) threshold; the
// uniformly sampled coordinate hits it with probability exactly 1/d.
int threshold_index(const Eigen::VectorXd& grad);

// One coordinate update x_i <- x_i - alpha * d_i f(x).
Eigen::VectorXd step(const Objective& obj, const StepSize& alpha,
                     const Eigen::VectorXd& x, int i);

// Exact inverse of step in coordinate i, by safeguarded 1-D root finding;
// well-posed because alpha * M < 1 makes the scalar map strictly increasing.
Eigen::VectorXd inverse_step(const Objective& obj, const StepSize& alpha,
                             const Eigen::VectorXd& y, int i);

// Composes t steps of the system for signed t: forward steps consume stream
// indices 0..t-1, the identity at t = 0, inverse steps consume -1..t.
// Throws RegionExit if an intermediate point leaves the working region.
Eigen::VectorXd evaluate(const Objective& obj, const StepSize& alpha,
                         const CoordinateStream& stream, Eigen::VectorXd x,
                         long long t);

Trajectory run(const Objective& obj, const StepSize& alpha,
               const CoordinateStream& stream, const Eigen::VectorXd& x0,
               long long max_iters, const StopRule& stop = {});

// CSV schema: t,i,f,grad_norm,x_1,...,x_d,I_t,S_t with 1-based i and '-' for
// entries that do not exist on a row.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace rcgd
