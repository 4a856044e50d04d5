#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rcgd {

enum class CriticalKind { strict_saddle, local_min, degenerate };

const char* to_string(CriticalKind kind);

struct CriticalPoint {
  Eigen::VectorXd location;
  Eigen::VectorXd hessian_eigenvalues;  // ascending
  CriticalKind kind = CriticalKind::degenerate;
};

// A twice differentiable objective with analytic derivatives, a bound M on
// the Hessian norm over a stated working region, and a registry of known
// critical points.  Instances are immutable after construction and all
// evaluation methods are pure, so they may be shared across threads.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;

  virtual double partial(const Eigen::VectorXd& x, int i) const {
    return gradient(x)[i];
  }
  virtual double second_partial(const Eigen::VectorXd& x, int i) const {
    return hessian(x)(i, i);
  }

  // Bound on ||hessian(x)||_2 valid for ||x|| <= region_radius().
  virtual double hessian_bound() const = 0;
  virtual double region_radius() const = 0;

  // Lipschitz constant of the Hessian near registered critical points, when
  // an analytic value is available.
  virtual std::optional<double> local_hessian_lipschitz() const {
    return std::nullopt;
  }

  // Non-null when f(x) = x'Hx/2 exactly; enables exact zero-set geometry.
  virtual const Eigen::MatrixXd* quadratic_form() const { return nullptr; }

  const std::vector<CriticalPoint>& critical_points() const {
    return registry_;
  }
  const std::string& name() const { return name_; }

 protected:
  explicit Objective(std::string name) : name_(std::move(name)) {}
  // Classifies by the eigenvalues of the exact Hessian at the location.
  void register_critical_point(const Eigen::VectorXd& location);

  std::vector<CriticalPoint> registry_;

 private:
  std::string name_;
};

// f(x) = x'Hx/2 for symmetric H.
class QuadraticObjective : public Objective {
 public:
  QuadraticObjective(Eigen::MatrixXd H, double region_radius = 1e3);

  int dim() const override { return static_cast<int>(H_.rows()); }
  double value(const Eigen::VectorXd& x) const override {
    return 0.5 * x.dot(H_ * x);
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return H_ * x;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override { return H_; }
  double partial(const Eigen::VectorXd& x, int i) const override {
    return H_.row(i).dot(x);
  }
  double second_partial(const Eigen::VectorXd&, int i) const override {
    return H_(i, i);
  }
  double hessian_bound() const override { return bound_; }
  double region_radius() const override { return region_; }
  std::optional<double> local_hessian_lipschitz() const override {
    return 0.0;
  }
  const Eigen::MatrixXd* quadratic_form() const override { return &H_; }

 private:
  Eigen::MatrixXd H_;
  double bound_;
  double region_;
};

struct ObjectiveParams {
  std::map<std::string, double> scalars;
  std::optional<Eigen::MatrixXd> hessian;  // H for "quadratic"

  double get(const std::string& key, double fallback) const {
    auto it = scalars.find(key);
    return it == scalars.end() ? fallback : it->second;
  }
};

// Builds a corpus member: "quadratic" (requires H), "separable-quartic",
// "coupled-saddle", or "rosenbrock-like".  Throws ConfigError on unknown
// names or ill-formed parameters.
std::shared_ptr<const Objective> make_objective(
    const std::string& name, const ObjectiveParams& params = {});

struct PointValidation {
  std::size_t index = 0;
  double min_abs_eigenvalue = 0.0;
  bool nondegenerate = false;
  double hessian_lipschitz = 0.0;  // sampled estimate near the point
};

struct ValidationReport {
  double max_hessian_norm = 0.0;
  double bound = 0.0;
  bool hessian_bound_ok = true;
  std::vector<PointValidation> points;
  bool nondegeneracy_ok = true;
  double max_lipschitz = 0.0;
};

// Spot-checks the Hessian bound over samples in a ball of the given radius,
// the non-degeneracy of each registered critical point, and estimates the
// local Hessian Lipschitz constant by pairwise sampling.  Violations are
// reported, never thrown.
ValidationReport validate_assumptions(const Objective& obj,
                                      double region_radius, int samples,
                                      std::uint64_t seed = 12345,
                                      double point_radius = 0.1);

double spectral_norm(const Eigen::MatrixXd& symmetric);

}  // namespace rcgd
