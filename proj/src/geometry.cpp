#include "rcgd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "rcgd/dynamics.hpp"
#include "rcgd/rng.hpp"

namespace rcgd {

namespace {

double quad_form(const Eigen::VectorXd& lam, const Eigen::VectorXd& z) {
  double s = 0.0;
  for (int j = 0; j < z.size(); ++j) s += lam[j] * z[j] * z[j];
  return s;
}

}  // namespace

QuadraticCone::QuadraticCone(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  basis_ = es.eigenvectors();
  eigenvalues_ = es.eigenvalues();
  const double scale = eigenvalues_.cwiseAbs().maxCoeff();
  has_pos_ = eigenvalues_.maxCoeff() > 1e-12 * scale;
  has_neg_ = eigenvalues_.minCoeff() < -1e-12 * scale;
}

// Maximizes <z, u>^2 over unit u with u'diag(lam)u = 0.  Stationary points
// satisfy u_j proportional to z_j / (lam_j + c); admissible c are roots of
//   h(c) = sum_j lam_j z_j^2 / (lam_j + c)^2 = 0,
// plus degenerate candidates c = -lam_p for eigenvalues whose z-components
// vanish (the cone direction then borrows mass from that eigenspace).
double QuadraticCone::sin_angle(const Eigen::VectorXd& y) const {
  if (!indefinite())
    throw std::logic_error("QuadraticCone::sin_angle: form is definite");
  const Eigen::VectorXd& lam = eigenvalues_;
  const int d = static_cast<int>(lam.size());
  const Eigen::VectorXd z = basis_.transpose() * y;
  const double n = z.norm();
  if (n < 1e-300) return 1.0;

  const double lam_scale = lam.cwiseAbs().maxCoeff();
  if (std::abs(quad_form(lam, z)) <= 32.0 * std::numeric_limits<double>::epsilon() *
                                        lam_scale * n * n)
    return 0.0;  // already on the cone

  if (d == 2) {
    // Two rays: u = (+-a, +-b) with lam1 a^2 + lam2 b^2 = 0.
    const double l1 = lam[0], l2 = lam[1];  // l1 < 0 < l2
    const double a = std::sqrt(l2 / (l2 - l1));
    const double b = std::sqrt(-l1 / (l2 - l1));
    const double c = (a * std::abs(z[0]) + b * std::abs(z[1])) / n;
    return std::sqrt(std::max(0.0, 1.0 - c * c));
  }

  double best_cos2 = 0.0;
  auto consider = [&](const Eigen::VectorXd& w, double extra_mass2) {
    const double wn2 = w.squaredNorm() + extra_mass2;
    if (wn2 < 1e-300) return;
    const double dot = z.dot(w);
    best_cos2 = std::max(best_cos2, dot * dot / (n * n * wn2));
  };
  auto h = [&](double c) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dj = lam[j] + c;
      s += lam[j] * z[j] * z[j] / (dj * dj);
    }
    return s;
  };
  auto candidate_at = [&](double c) {
    Eigen::VectorXd w(d);
    for (int j = 0; j < d; ++j) {
      const double dj = lam[j] + c;
      w[j] = std::abs(dj) < 1e-300 ? 0.0 : z[j] / dj;
    }
    consider(w, 0.0);
  };
  auto bisect = [&](double a, double b, double ha, double hb) {
    for (int it = 0; it < 160 && b - a > 0.0; ++it) {
      const double m = 0.5 * (a + b);
      const double hm = h(m);
      if (hm == 0.0) {
        candidate_at(m);
        return;
      }
      if ((hm > 0.0) == (ha > 0.0)) {
        a = m;
        ha = hm;
      } else {
        b = m;
        hb = hm;
      }
    }
    (void)hb;
    candidate_at(0.5 * (a + b));
  };
  auto scan = [&](double a, double b, int points) {
    double prev_c = a, prev_h = h(a);
    if (prev_h == 0.0) candidate_at(a);
    for (int m = 1; m < points; ++m) {
      const double c = a + (b - a) * m / (points - 1);
      const double hc = h(c);
      if (hc == 0.0)
        candidate_at(c);
      else if ((hc > 0.0) != (prev_h > 0.0) && prev_h != 0.0)
        bisect(prev_c, c, prev_h, hc);
      prev_c = c;
      prev_h = hc;
    }
  };

  // Poles contributed by nonzero z-components.
  std::vector<double> poles;
  const double z_tol = 1e-13 * n;
  for (int j = 0; j < d; ++j)
    if (std::abs(z[j]) > z_tol) poles.push_back(-lam[j]);
  std::sort(poles.begin(), poles.end());
  poles.erase(std::unique(poles.begin(), poles.end(),
                          [&](double a, double b) {
                            return std::abs(a - b) <= 1e-12 * (1.0 + lam_scale);
                          }),
              poles.end());

  const double margin = 1e-9 * (1.0 + lam_scale);
  for (std::size_t k = 0; k + 1 < poles.size(); ++k)
    scan(poles[k] + margin, poles[k + 1] - margin, 600);
  if (!poles.empty()) {
    // Outer intervals on a geometric grid.
    double delta = margin;
    double prev_c = poles.front() - delta, prev_h = h(prev_c);
    for (int m = 0; m < 80; ++m) {
      delta *= 1.7;
      const double c = poles.front() - delta;
      const double hc = h(c);
      if (hc != 0.0 && prev_h != 0.0 && (hc > 0.0) != (prev_h > 0.0))
        bisect(c, prev_c, hc, prev_h);
      prev_c = c;
      prev_h = hc;
    }
    delta = margin;
    prev_c = poles.back() + delta;
    prev_h = h(prev_c);
    for (int m = 0; m < 80; ++m) {
      delta *= 1.7;
      const double c = poles.back() + delta;
      const double hc = h(c);
      if (hc != 0.0 && prev_h != 0.0 && (hc > 0.0) != (prev_h > 0.0))
        bisect(prev_c, c, prev_h, hc);
      prev_c = c;
      prev_h = hc;
    }
  }

  // Eigenvalues with no z mass admit cone directions that borrow length
  // from their eigenspace.
  for (int p = 0; p < d; ++p) {
    if (p > 0 && std::abs(lam[p] - lam[p - 1]) <= 1e-12 * (1.0 + lam_scale))
      continue;  // same group
    double mass = 0.0;
    for (int j = 0; j < d; ++j)
      if (std::abs(lam[j] - lam[p]) <= 1e-12 * (1.0 + lam_scale))
        mass += z[j] * z[j];
    if (mass > z_tol * z_tol) continue;
    if (std::abs(lam[p]) < 1e-300) continue;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
    for (int j = 0; j < d; ++j) {
      const double dj = lam[j] - lam[p];
      if (std::abs(dj) > 1e-12 * (1.0 + lam_scale)) w[j] = z[j] / dj;
    }
    const double q = quad_form(lam, w);
    const double m2 = -q / lam[p];
    if (m2 >= 0.0) consider(w, m2);
  }

  best_cos2 = std::min(best_cos2, 1.0);
  return std::sqrt(std::max(0.0, 1.0 - best_cos2));
}

Eigen::VectorXd QuadraticCone::sample_direction(Rng& rng) const {
  if (!indefinite())
    throw std::logic_error("QuadraticCone::sample_direction: form is definite");
  const int d = static_cast<int>(eigenvalues_.size());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  double q_pos = 0.0, q_neg = 0.0;
  Eigen::VectorXd pos = Eigen::VectorXd::Zero(d), neg = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    const double g = rng.normal();
    if (eigenvalues_[j] > 0.0) {
      pos[j] = g;
      q_pos += eigenvalues_[j] * g * g;
    } else if (eigenvalues_[j] < 0.0) {
      neg[j] = g;
      q_neg += -eigenvalues_[j] * g * g;
    }
  }
  if (q_pos < 1e-14 || q_neg < 1e-14) return sample_direction(rng);
  u = std::sqrt(q_neg) * pos + std::sqrt(q_pos) * neg;
  u /= u.norm();
  return basis_ * u;
}

std::pair<double, double> estimate_sigma(const Objective& obj,
                                         const Eigen::VectorXd& saddle,
                                         double radius, int samples,
                                         std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("estimate_sigma: samples must be >= 1");
  const int d = obj.dim();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(obj.hessian(saddle),
                                                    Eigen::EigenvaluesOnly);
  const double max_abs = es.eigenvalues().cwiseAbs().maxCoeff();
  const double min_abs = es.eigenvalues().cwiseAbs().minCoeff();
  if (min_abs <= 1e-9 * std::max(1.0, max_abs))
    throw std::invalid_argument("estimate_sigma: degenerate Hessian");
  const double sigma = 0.5 * min_abs;

  double r = radius;
  for (int shrink = 0; shrink < 64; ++shrink) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(shrink));
    bool ok = true;
    for (int s = 0; s < samples; ++s) {
      const Eigen::VectorXd y = rng.in_ball(d, r);
      const double ny = y.norm();
      if (ny < 1e-14 * r) continue;
      if (obj.gradient(saddle + y).norm() < sigma * ny) {
        ok = false;
        break;
      }
    }
    if (ok) return {sigma, r};
    r *= 0.5;
  }
  throw std::runtime_error("estimate_sigma: radius underflow");
}

double solve_rho(double alpha, double sigma, int d, double bound_m) {
  if (!(alpha > 0.0) || !(sigma > 0.0) || d < 1 || !(bound_m > 0.0))
    throw std::invalid_argument("solve_rho: parameters must be positive");
  if (!(alpha * bound_m < 1.0))
    throw std::invalid_argument("solve_rho: requires alpha * M < 1");
  const double rhs_coef = alpha * sigma * sigma / (2.0 * d);
  auto g = [&](double r) {
    return r * bound_m + 0.5 * bound_m * r * r -
           rhs_coef * (1.0 - r) * (1.0 - r);
  };
  double lo = 0.0, hi = 1.0;  // g(0) < 0 < g(1), g increasing
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.25 * (lo + hi);  // half of the root
}

namespace {

std::uint64_t point_hash(std::uint64_t seed, const Eigen::VectorXd& x) {
  std::uint64_t h = seed;
  for (int j = 0; j < x.size(); ++j) {
    std::uint64_t bits;
    const double v = x[j];
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    h = avalanche(h ^ bits);
  }
  return h;
}

bool in_u2_probing(const Objective& obj, const Eigen::VectorXd& saddle,
                   const Eigen::VectorXd& x, double rho, int probes,
                   std::uint64_t seed) {
  const int d = obj.dim();
  const double f_saddle = obj.value(saddle);
  auto fshift = [&](const Eigen::VectorXd& q) {
    return obj.value(q) - f_saddle;
  };
  const Eigen::VectorXd y = x - saddle;
  const double ny = y.norm();
  const double fx = fshift(x);
  if (std::abs(fx) <= 8.0 * std::numeric_limits<double>::epsilon() *
                          (std::abs(obj.value(x)) + std::abs(f_saddle)))
    return true;  // x is its own zero-set witness

  const double r = std::min(rho, 1.0 - 1e-9);
  const double tmax = r * ny / (1.0 - r) * 1.000001;
  Rng rng(point_hash(seed, x));
  constexpr int kGrid = 96;
  for (int p = 0; p <= probes; ++p) {
    const Eigen::VectorXd v = p == 0 ? (-y / ny).eval() : rng.unit_sphere(d);
    double prev_t = -tmax, prev_f = fshift(x + prev_t * v);
    for (int m = 1; m < kGrid; ++m) {
      const double t = -tmax + 2.0 * tmax * m / (kGrid - 1);
      const double ft = fshift(x + t * v);
      double root = std::numeric_limits<double>::quiet_NaN();
      if (ft == 0.0) {
        root = t;
      } else if (prev_f == 0.0) {
        root = prev_t;
      } else if ((ft > 0.0) != (prev_f > 0.0)) {
        double a = prev_t, b = t, fa = prev_f;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (a + b);
          const double fm = fshift(x + mid * v);
          if (fm == 0.0) {
            a = b = mid;
            break;
          }
          if ((fm > 0.0) == (fa > 0.0)) {
            a = mid;
            fa = fm;
          } else {
            b = mid;
          }
        }
        root = 0.5 * (a + b);
      }
      if (std::isfinite(root)) {
        const Eigen::VectorXd z = x + root * v;
        if (std::abs(root) < rho * (z - saddle).norm()) return true;
      }
      prev_t = t;
      prev_f = ft;
    }
  }
  return false;
}

}  // namespace

bool in_u2(const Objective& obj, const Eigen::VectorXd& saddle,
           const Eigen::VectorXd& x, double rho, int probes,
           std::uint64_t seed) {
  if (!(rho > 0.0)) return false;
  const Eigen::VectorXd y = x - saddle;
  if (y.norm() < 1e-300) return false;  // balls around z != 0 exclude the apex
  if (const Eigen::MatrixXd* H = obj.quadratic_form()) {
    QuadraticCone cone(*H);
    if (!cone.indefinite()) return false;  // zero set is just the origin
    return cone.sin_angle(y) < rho;
  }
  return in_u2_probing(obj, saddle, x, rho, probes, seed);
}

bool in_s(const Objective& obj, const SaddleGeometry& geom,
          const Eigen::VectorXd& x) {
  if (obj.value(x) - geom.f_at_saddle < 0.0) return false;
  if ((x - geom.saddle).norm() >= geom.u1_radius) return false;
  return in_u2(obj, geom.saddle, x, geom.rho);
}

namespace {

double min_growth_on_feasible_sphere(const Eigen::MatrixXd& H, double rho_h,
                                     int grid, std::uint64_t seed) {
  const int d = static_cast<int>(H.rows());
  QuadraticCone cone(H);
  auto fH = [&](const Eigen::VectorXd& u) { return 0.5 * u.dot(H * u); };
  auto feasible = [&](const Eigen::VectorXd& u) {
    return fH(u) >= 0.0 && cone.sin_angle(u) >= rho_h;
  };

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_u;
  auto offer = [&](const Eigen::VectorXd& u) {
    if (!feasible(u)) return;
    const double v = fH(u);
    if (v < best) {
      best = v;
      best_u = u;
      found = true;
    }
  };

  if (d == 2) {
    for (int k = 0; k < grid; ++k) {
      const double th = 6.283185307179586 * k / grid;
      Eigen::VectorXd u(2);
      u << std::cos(th), std::sin(th);
      offer(u);
    }
  } else if (d == 3) {
    // Fibonacci sphere.
    const double ga = 2.39996322972865332;
    for (int k = 0; k < grid; ++k) {
      const double zc = 1.0 - 2.0 * (k + 0.5) / grid;
      const double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      const double th = ga * k;
      Eigen::VectorXd u(3);
      u << rr * std::cos(th), rr * std::sin(th), zc;
      offer(u);
    }
  } else {
    Rng rng = Rng::substream(seed, 101);
    for (int k = 0; k < grid; ++k) offer(rng.unit_sphere(d));
  }
  if (!found)
    throw std::runtime_error(
        "growth_constants: no feasible sphere point; rho_h too large");

  // Local refinement around the minimizer.
  Rng rng = Rng::substream(seed, 202);
  double rad = 0.3;
  for (int round = 0; round < 14; ++round) {
    for (int k = 0; k < 1500; ++k) {
      Eigen::VectorXd u = best_u + rad * rng.normal_vector(d);
      const double n = u.norm();
      if (n < 1e-12) continue;
      offer(u / n);
    }
    rad *= 0.5;
  }
  return best;
}

}  // namespace

std::pair<double, double> growth_constants(const Eigen::MatrixXd& H,
                                           double rho_h, int grid,
                                           std::uint64_t seed) {
  if (!(rho_h > 0.0) || !(rho_h < 1.0))
    throw std::invalid_argument("growth_constants: rho_h must be in (0, 1)");
  if (grid < 8) throw std::invalid_argument("growth_constants: grid too small");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  const bool has_pos = ev.maxCoeff() > 1e-12 * scale;
  const bool has_neg = ev.minCoeff() < -1e-12 * scale;
  if (!has_pos || !has_neg) {
    const double half_min = 0.5 * ev.cwiseAbs().minCoeff();
    return {half_min, -half_min};
  }
  const double p_plus = min_growth_on_feasible_sphere(H, rho_h, grid, seed);
  const double p_minus =
      -min_growth_on_feasible_sphere(-H, rho_h, grid, seed + 1);
  return {p_plus, p_minus};
}

InclusionReport check_u2h_inclusion(const Objective& obj,
                                    const Eigen::VectorXd& saddle, double rho,
                                    double rho_h, int samples,
                                    double initial_radius, int radius_levels,
                                    int probes, std::uint64_t seed) {
  if (!(rho_h < rho / 4.0))
    throw std::invalid_argument("check_u2h_inclusion: requires rho_h < rho/4");
  if (samples < 1 || radius_levels < 1)
    throw std::invalid_argument("check_u2h_inclusion: bad sample counts");

  InclusionReport report;
  report.samples_per_radius = samples;
  const Eigen::MatrixXd H = obj.hessian(saddle);
  QuadraticCone cone(H);
  if (!cone.indefinite()) {
    // The quadratic model's zero set is trivial, nothing to include.
    report.vacuous = true;
    report.inclusion_radius = initial_radius;
    for (int m = 0; m < radius_levels; ++m) {
      report.radii.push_back(initial_radius * std::pow(0.5, m));
      report.failures.push_back(0);
    }
    return report;
  }

  const int d = obj.dim();
  double r = initial_radius;
  for (int m = 0; m < radius_levels; ++m, r *= 0.5) {
    Rng rng = Rng::substream(seed, static_cast<std::uint64_t>(m));
    int failures = 0;
    for (int s = 0; s < samples; ++s) {
      const Eigen::VectorXd dir = cone.sample_direction(rng);
      const double len = r * rng.uniform(0.6, 1.0);
      const Eigen::VectorXd z = len * dir;
      const Eigen::VectorXd delta = rng.in_ball(d, 0.999 * rho_h * len);
      const Eigen::VectorXd x = saddle + z + delta;
      if (!in_u2(obj, saddle, x, rho, probes, seed ^ 0xABCDULL)) ++failures;
    }
    report.radii.push_back(r);
    report.failures.push_back(failures);
  }
  report.inclusion_radius = 0.0;
  for (std::size_t m = 0; m < report.radii.size(); ++m) {
    if (report.failures[m] == 0) {
      report.inclusion_radius = report.radii[m];
      break;  // radii are decreasing; report the largest clean one
    }
  }
  return report;
}

SaddleGeometry build_saddle_geometry(const Objective& obj,
                                     const CriticalPoint& saddle, double alpha,
                                     const GeometryOptions& opts) {
  if (saddle.kind != CriticalKind::strict_saddle)
    throw std::invalid_argument(
        "build_saddle_geometry: critical point is not a strict saddle");
  const StepSize step(alpha, obj.hessian_bound());

  SaddleGeometry geom;
  geom.saddle = saddle.location;
  geom.f_at_saddle = obj.value(saddle.location);
  geom.hessian = obj.hessian(saddle.location);
  geom.alpha = step.value();
  geom.bound_m = obj.hessian_bound();
  geom.dim = obj.dim();

  const auto sig = estimate_sigma(obj, geom.saddle, opts.initial_radius,
                                  opts.sigma_samples, opts.seed);
  geom.sigma = sig.first;
  geom.u1_radius = sig.second;
  geom.rho = solve_rho(geom.alpha, geom.sigma, geom.dim, geom.bound_m);
  geom.rho_h = opts.rho_h_fraction * geom.rho / 4.0;
  const auto growth =
      growth_constants(geom.hessian, geom.rho_h, opts.oracle_grid, opts.seed);
  geom.p_plus = growth.first;
  geom.p_minus = growth.second;
  geom.p = 0.5 * std::min(geom.p_plus, -geom.p_minus);
  return geom;
}

}  // namespace rcgd
