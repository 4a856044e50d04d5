#include "rcgd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rcgd/errors.hpp"
#include "rcgd/rng.hpp"

namespace rcgd {

namespace {

// Relative threshold below which a Hessian eigenvalue counts as zero.
constexpr double kDegenerateTol = 1e-9;

CriticalKind classify(const Eigen::VectorXd& eigenvalues) {
  const double scale = std::max(1.0, eigenvalues.cwiseAbs().maxCoeff());
  const double tol = kDegenerateTol * scale;
  double min_eig = eigenvalues.minCoeff();
  double min_abs = eigenvalues.cwiseAbs().minCoeff();
  if (min_abs <= tol) return CriticalKind::degenerate;
  return min_eig < 0.0 ? CriticalKind::strict_saddle : CriticalKind::local_min;
}

int int_param(const ObjectiveParams& params, const std::string& key,
              int fallback) {
  const double v = params.get(key, static_cast<double>(fallback));
  const int n = static_cast<int>(std::llround(v));
  if (std::abs(v - n) > 1e-9)
    throw ConfigError("parameter '" + key + "' must be an integer");
  return n;
}

}  // namespace

const char* to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::strict_saddle:
      return "strict_saddle";
    case CriticalKind::local_min:
      return "local_min";
    case CriticalKind::degenerate:
      return "degenerate";
  }
  return "unknown";
}

double spectral_norm(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

void Objective::register_critical_point(const Eigen::VectorXd& location) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(location),
                                                    Eigen::EigenvaluesOnly);
  CriticalPoint cp;
  cp.location = location;
  cp.hessian_eigenvalues = es.eigenvalues();
  cp.kind = classify(cp.hessian_eigenvalues);
  registry_.push_back(std::move(cp));
}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd H, double region_radius)
    : Objective("quadratic"), H_(std::move(H)), region_(region_radius) {
  if (H_.rows() < 1 || H_.rows() != H_.cols())
    throw ConfigError("quadratic: H must be square and non-empty");
  if ((H_ - H_.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, H_.cwiseAbs().maxCoeff()))
    throw ConfigError("quadratic: H must be symmetric");
  H_ = 0.5 * (H_ + H_.transpose().eval());
  bound_ = spectral_norm(H_);
  if (bound_ <= 0.0) throw ConfigError("quadratic: H must be nonzero");
  register_critical_point(Eigen::VectorXd::Zero(H_.rows()));
}

namespace {

// f(x) = sum_j (x_j^4/4 - x_j^2/2).  Critical points have every coordinate
// in {-1, 0, 1}; the Hessian there is diag(3 x_j^2 - 1) with entries -1 or 2.
class SeparableQuartic : public Objective {
 public:
  SeparableQuartic(int d, double region_radius)
      : Objective("separable-quartic"), d_(d), region_(region_radius) {
    if (d < 1) throw ConfigError("separable-quartic: d must be >= 1");
    if (region_radius <= 0.0)
      throw ConfigError("separable-quartic: region_radius must be > 0");
    bound_ = 3.0 * region_radius * region_radius - 1.0;
    enumerate_critical_points();
  }

  int dim() const override { return d_; }
  double value(const Eigen::VectorXd& x) const override {
    double s = 0.0;
    for (int j = 0; j < d_; ++j) {
      const double q = x[j] * x[j];
      s += 0.25 * q * q - 0.5 * q;
    }
    return s;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    Eigen::VectorXd g(d_);
    for (int j = 0; j < d_; ++j) g[j] = x[j] * x[j] * x[j] - x[j];
    return g;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d_, d_);
    for (int j = 0; j < d_; ++j) H(j, j) = 3.0 * x[j] * x[j] - 1.0;
    return H;
  }
  double partial(const Eigen::VectorXd& x, int i) const override {
    return x[i] * x[i] * x[i] - x[i];
  }
  double second_partial(const Eigen::VectorXd& x, int i) const override {
    return 3.0 * x[i] * x[i] - 1.0;
  }
  double hessian_bound() const override { return bound_; }
  double region_radius() const override { return region_; }
  std::optional<double> local_hessian_lipschitz() const override {
    // ||hess(x) - hess(y)|| = 3 max_j |x_j^2 - y_j^2| <= 6 R ||x - y||.
    return 6.0 * region_;
  }

 private:
  void enumerate_critical_points() {
    if (d_ > 10) {
      register_critical_point(Eigen::VectorXd::Zero(d_));
      return;  // 3^d blows up; the origin is enough for large d
    }
    const double levels[3] = {-1.0, 0.0, 1.0};
    long long total = 1;
    for (int j = 0; j < d_; ++j) total *= 3;
    for (long long code = 0; code < total; ++code) {
      Eigen::VectorXd loc(d_);
      long long c = code;
      for (int j = 0; j < d_; ++j) {
        loc[j] = levels[c % 3];
        c /= 3;
      }
      register_critical_point(loc);
    }
  }

  int d_;
  double region_;
  double bound_;
};

// f(x) = x'Dx/2 + beta ||x||^4 / 4 with D = diag(1, ..., 1, -1).  The
// quartic term couples all coordinates.  Critical points: the origin
// (eigenvalues of D) and +/- e_d / sqrt(beta) (Hessian 2I there).
class CoupledSaddle : public Objective {
 public:
  CoupledSaddle(int d, double beta, double region_radius)
      : Objective("coupled-saddle"),
        d_(d),
        beta_(beta),
        region_(region_radius) {
    if (d < 2) throw ConfigError("coupled-saddle: d must be >= 2");
    if (beta <= 0.0) throw ConfigError("coupled-saddle: beta must be > 0");
    if (region_radius <= 0.0)
      throw ConfigError("coupled-saddle: region_radius must be > 0");
    diag_ = Eigen::VectorXd::Ones(d);
    diag_[d - 1] = -1.0;
    bound_ = 1.0 + 3.0 * beta_ * region_ * region_;
    register_critical_point(Eigen::VectorXd::Zero(d_));
    Eigen::VectorXd m = Eigen::VectorXd::Zero(d_);
    m[d_ - 1] = 1.0 / std::sqrt(beta_);
    register_critical_point(m);
    register_critical_point(-m);
  }

  int dim() const override { return d_; }
  double value(const Eigen::VectorXd& x) const override {
    const double n2 = x.squaredNorm();
    return 0.5 * diag_.cwiseProduct(x).dot(x) + 0.25 * beta_ * n2 * n2;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    return diag_.cwiseProduct(x) + beta_ * x.squaredNorm() * x;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    Eigen::MatrixXd H = diag_.asDiagonal();
    H += beta_ * x.squaredNorm() * Eigen::MatrixXd::Identity(d_, d_);
    H += 2.0 * beta_ * x * x.transpose();
    return H;
  }
  double partial(const Eigen::VectorXd& x, int i) const override {
    return diag_[i] * x[i] + beta_ * x.squaredNorm() * x[i];
  }
  double second_partial(const Eigen::VectorXd& x, int i) const override {
    return diag_[i] + beta_ * (x.squaredNorm() + 2.0 * x[i] * x[i]);
  }
  double hessian_bound() const override { return bound_; }
  double region_radius() const override { return region_; }
  std::optional<double> local_hessian_lipschitz() const override {
    return 6.0 * beta_ * region_;
  }

 private:
  int d_;
  double beta_;
  double region_;
  double bound_;
  Eigen::VectorXd diag_;
};

// f(x, y) = (a - x)^2 + b (y - x^2)^2: one non-degenerate minimum at
// (a, a^2), curved valley, no saddle.  Hessian grows with |x|, so M is a
// region bound.
class RosenbrockLike : public Objective {
 public:
  RosenbrockLike(double a, double b, double region_radius)
      : Objective("rosenbrock-like"), a_(a), b_(b), region_(region_radius) {
    if (b <= 0.0) throw ConfigError("rosenbrock-like: b must be > 0");
    if (region_radius <= 0.0)
      throw ConfigError("rosenbrock-like: region_radius must be > 0");
    const double R = region_;
    // Gershgorin over the region: row 1 and row 2 of the Hessian.
    bound_ = std::max(2.0 + 4.0 * b_ * R + 12.0 * b_ * R * R + 4.0 * b_ * R,
                      4.0 * b_ * R + 2.0 * b_);
    Eigen::VectorXd m(2);
    m << a_, a_ * a_;
    register_critical_point(m);
  }

  int dim() const override { return 2; }
  double value(const Eigen::VectorXd& x) const override {
    const double u = a_ - x[0];
    const double v = x[1] - x[0] * x[0];
    return u * u + b_ * v * v;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    const double v = x[1] - x[0] * x[0];
    Eigen::VectorXd g(2);
    g[0] = -2.0 * (a_ - x[0]) - 4.0 * b_ * x[0] * v;
    g[1] = 2.0 * b_ * v;
    return g;
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    const double v = x[1] - x[0] * x[0];
    Eigen::MatrixXd H(2, 2);
    H(0, 0) = 2.0 - 4.0 * b_ * v + 8.0 * b_ * x[0] * x[0];
    H(0, 1) = -4.0 * b_ * x[0];
    H(1, 0) = H(0, 1);
    H(1, 1) = 2.0 * b_;
    return H;
  }
  double hessian_bound() const override { return bound_; }
  double region_radius() const override { return region_; }

 private:
  double a_;
  double b_;
  double region_;
  double bound_;
};

}  // namespace

std::shared_ptr<const Objective> make_objective(const std::string& name,
                                                const ObjectiveParams& params) {
  if (name == "quadratic") {
    if (!params.hessian)
      throw ConfigError("quadratic: matrix H is required");
    return std::make_shared<QuadraticObjective>(
        *params.hessian, params.get("region_radius", 1e3));
  }
  if (name == "separable-quartic") {
    return std::make_shared<SeparableQuartic>(int_param(params, "d", 2),
                                              params.get("region_radius", 3.0));
  }
  if (name == "coupled-saddle") {
    return std::make_shared<CoupledSaddle>(int_param(params, "d", 2),
                                           params.get("beta", 1.0),
                                           params.get("region_radius", 2.0));
  }
  if (name == "rosenbrock-like") {
    return std::make_shared<RosenbrockLike>(params.get("a", 1.0),
                                            params.get("b", 2.0),
                                            params.get("region_radius", 4.0));
  }
  throw ConfigError("unknown objective '" + name + "'");
}

ValidationReport validate_assumptions(const Objective& obj,
                                      double region_radius, int samples,
                                      std::uint64_t seed, double point_radius) {
  if (samples < 1)
    throw std::invalid_argument("validate_assumptions: samples must be >= 1");
  ValidationReport report;
  report.bound = obj.hessian_bound();
  const int d = obj.dim();

  Rng rng = Rng::substream(seed, 0);
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd x = rng.in_ball(d, region_radius);
    report.max_hessian_norm =
        std::max(report.max_hessian_norm, spectral_norm(obj.hessian(x)));
  }
  report.hessian_bound_ok =
      report.max_hessian_norm <= report.bound * (1.0 + 1e-12);

  const int pair_samples = std::max(16, samples / 4);
  for (std::size_t k = 0; k < obj.critical_points().size(); ++k) {
    const CriticalPoint& cp = obj.critical_points()[k];
    PointValidation pv;
    pv.index = k;
    pv.min_abs_eigenvalue = cp.hessian_eigenvalues.cwiseAbs().minCoeff();
    const double scale =
        std::max(1.0, cp.hessian_eigenvalues.cwiseAbs().maxCoeff());
    pv.nondegenerate = pv.min_abs_eigenvalue > 1e-9 * scale;

    Rng prng = Rng::substream(seed, 1 + k);
    double lip = 0.0;
    for (int s = 0; s < pair_samples; ++s) {
      const Eigen::VectorXd x = cp.location + prng.in_ball(d, point_radius);
      const Eigen::VectorXd y = cp.location + prng.in_ball(d, point_radius);
      const double dist = (x - y).norm();
      if (dist < 1e-12) continue;
      lip = std::max(lip,
                     spectral_norm(obj.hessian(x) - obj.hessian(y)) / dist);
    }
    pv.hessian_lipschitz = lip;
    report.max_lipschitz = std::max(report.max_lipschitz, lip);
    report.nondegeneracy_ok = report.nondegeneracy_ok && pv.nondegenerate;
    report.points.push_back(pv);
  }
  return report;
}

}  // namespace rcgd
