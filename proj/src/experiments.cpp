#include "rcgd/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <thread>

#include "rcgd/lyapunov.hpp"
#include "rcgd/numdiff.hpp"
#include "rcgd/rng.hpp"

namespace rcgd {

const char* to_string(LimitClass cls) {
  switch (cls) {
    case LimitClass::to_min:
      return "to_min";
    case LimitClass::to_strict_saddle:
      return "to_strict_saddle";
    case LimitClass::diverged:
      return "diverged";
    case LimitClass::undecided:
      return "undecided";
  }
  return "unknown";
}

Classification classify_limit(const Trajectory& traj, const Objective& obj,
                              double tol, double tol_grad) {
  Classification out;
  if (traj.reason == StopReason::region_exit) {
    out.cls = LimitClass::diverged;
    return out;
  }
  if (traj.grad_norms.back() > tol_grad) return out;
  const Eigen::VectorXd& x = traj.final_point();
  double best = std::numeric_limits<double>::infinity();
  int best_idx = -1;
  const auto& registry = obj.critical_points();
  for (std::size_t k = 0; k < registry.size(); ++k) {
    const double dist = (x - registry[k].location).norm();
    if (dist < best) {
      best = dist;
      best_idx = static_cast<int>(k);
    }
  }
  if (best_idx < 0 || best > tol) return out;
  out.limit_index = best_idx;
  switch (registry[static_cast<std::size_t>(best_idx)].kind) {
    case CriticalKind::local_min:
      out.cls = LimitClass::to_min;
      break;
    case CriticalKind::strict_saddle:
      out.cls = LimitClass::to_strict_saddle;
      break;
    case CriticalKind::degenerate:
      out.cls = LimitClass::undecided;
      out.limit_index = -1;
      break;
  }
  return out;
}

IndicatorStats indicator_stats(const Objective& obj, const Trajectory& traj) {
  if (traj.steps() < 100)
    throw std::invalid_argument("indicator_stats: need at least 100 steps");
  IndicatorStats stats;
  long long hits_i = 0, hits_j = 0;
  for (long long t = 0; t < traj.steps(); ++t) {
    const Eigen::VectorXd g =
        obj.gradient(traj.points[static_cast<std::size_t>(t)]);
    if (g.norm() == 0.0) continue;  // indicator undefined at critical points
    const int i = traj.coords[static_cast<std::size_t>(t)];
    if (indicator(g, i)) ++hits_i;
    if (threshold_index(g) == i) ++hits_j;
    ++stats.counted;
  }
  if (stats.counted > 0) {
    stats.freq_indicator = static_cast<double>(hits_i) / stats.counted;
    stats.freq_argmax = static_cast<double>(hits_j) / stats.counted;
  }
  return stats;
}

DecayReport decay_check(const Objective& obj, const Trajectory& traj,
                        const SaddleGeometry* geom, double bound_m,
                        double alpha) {
  DecayReport report;
  const double factor =
      geom ? 1.0 - alpha * geom->sigma * geom->sigma / (bound_m * geom->dim)
           : 1.0;
  for (long long t = 0; t < traj.steps(); ++t) {
    const std::size_t st = static_cast<std::size_t>(t);
    const Eigen::VectorXd& x = traj.points[st];
    const double f0 = traj.f_values[st];
    const double f1 = traj.f_values[st + 1];
    const double gi = obj.partial(x, traj.coords[st]);
    const double slack = 1e-12 * (1.0 + std::abs(f0));
    ++report.steps;
    if (f1 > f0 - 0.5 * alpha * gi * gi + slack) ++report.descent_violations;

    if (!geom) continue;
    if (!traj.indicators[st]) continue;
    const double fs0 = f0 - geom->f_at_saddle;
    if (fs0 < 0.0) continue;
    if ((x - geom->saddle).norm() >= geom->u1_radius) continue;
    ++report.decay_steps;
    const double fs1 = f1 - geom->f_at_saddle;
    if (fs1 > factor * fs0 + slack) ++report.decay_violations;
  }
  return report;
}

long long s_visit_count(const Objective& obj, const SaddleGeometry& geom,
                        Trajectory& traj) {
  traj.s_flags.assign(static_cast<std::size_t>(traj.rows()), 0);
  long long visits = 0;
  for (long long t = 0; t < traj.rows(); ++t) {
    if (in_s(obj, geom, traj.points[static_cast<std::size_t>(t)])) {
      traj.s_flags[static_cast<std::size_t>(t)] = 1;
      ++visits;
    }
  }
  return visits;
}

ResidualReport residual_check(const Objective& obj,
                              const Eigen::VectorXd& saddle, double alpha,
                              double lipschitz, int samples, double radius,
                              std::uint64_t seed) {
  if (samples < 1)
    throw std::invalid_argument("residual_check: samples must be >= 1");
  const int d = obj.dim();
  const Eigen::MatrixXd H = obj.hessian(saddle);
  ResidualReport report;
  Rng rng = Rng::substream(seed, 7);
  for (int s = 0; s < samples; ++s) {
    const Eigen::VectorXd y = rng.in_ball(d, radius);
    const Eigen::VectorXd x = saddle + y;
    const Eigen::VectorXd grad = obj.gradient(x);
    const Eigen::VectorXd Hy = H * y;
    const Eigen::MatrixXd hess = obj.hessian(x);
    for (int i = 0; i < d; ++i) {
      ++report.samples;
      const double Fi = alpha * (Hy[i] - grad[i]);
      report.max_residual_norm =
          std::max(report.max_residual_norm, std::abs(Fi));
      if (std::abs(Fi) >
          0.5 * alpha * lipschitz * y.squaredNorm() + 1e-14)
        ++report.norm_violations;

      const Eigen::VectorXd row = alpha * (H.row(i) - hess.row(i));
      const double jac_norm = row.norm();  // rank-one: e_i row'
      if (jac_norm > alpha * lipschitz * y.norm() * 1.1 + 1e-14)
        ++report.jac_violations;

      auto F = [&](const Eigen::VectorXd& q) {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
        out[i] = alpha * ((H * q)[i] - obj.gradient(saddle + q)[i]);
        return out;
      };
      const Eigen::MatrixXd J_fd = fd_jacobian(F, y);
      Eigen::MatrixXd J_an = Eigen::MatrixXd::Zero(d, d);
      J_an.row(i) = row;
      const double err = (J_fd - J_an).cwiseAbs().maxCoeff();
      report.max_fd_error = std::max(report.max_fd_error, err);
    }
  }
  return report;
}

double EscapeReport::pooled_exponent(LimitClass cls) const {
  double sum = 0.0;
  long long n = 0;
  for (const TrialRecord& r : records) {
    if (r.cls != cls || !std::isfinite(r.exponent)) continue;
    sum += r.exponent;
    ++n;
  }
  return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

EscapeReport escape_experiment(const TrialConfig& cfg, const Objective& obj,
                               const SaddleGeometry* geom) {
  if (cfg.trials < 1)
    throw std::invalid_argument("escape_experiment: trials must be >= 1");
  const StepSize alpha = StepSize::for_objective(cfg.alpha, obj);
  const int d = obj.dim();
  const Eigen::VectorXd center = cfg.x0_center.size() == d
                                     ? cfg.x0_center
                                     : Eigen::VectorXd::Zero(d);

  EscapeReport report;
  report.records.resize(static_cast<std::size_t>(cfg.trials));

  auto run_trial = [&](int j) {
    TrialRecord rec;
    rec.trial = j;
    const std::uint64_t jj = static_cast<std::uint64_t>(j);
    rec.stream_seed = avalanche(cfg.seed_base + kGolden * (2 * jj + 1));
    Rng x0_rng = Rng::substream(cfg.seed_base, 2 * jj);
    Eigen::VectorXd x0 =
        cfg.x0_dist == "gaussian"
            ? (center + cfg.x0_radius * x0_rng.normal_vector(d)).eval()
            : (center + x0_rng.in_ball(d, cfg.x0_radius)).eval();

    Trajectory traj = run(obj, alpha, CoordinateStream(rec.stream_seed, d),
                          x0, cfg.max_iters, cfg.stop);
    rec.iters = traj.steps();
    rec.reason = traj.reason;
    const Classification cls =
        classify_limit(traj, obj, cfg.class_tol, cfg.class_tol_grad);
    rec.cls = cls.cls;
    rec.limit_index = cls.limit_index;

    if ((rec.cls == LimitClass::to_min ||
         rec.cls == LimitClass::to_strict_saddle) &&
        rec.limit_index >= 0) {
      try {
        rec.exponent = empirical_exponent(
            traj,
            obj.critical_points()[static_cast<std::size_t>(rec.limit_index)]
                .location,
            cfg.tail_fraction);
      } catch (const std::exception&) {
        // constant tails have no usable points; leave NaN
      }
    }
    if (traj.steps() >= 100) {
      const IndicatorStats stats = indicator_stats(obj, traj);
      rec.freq_indicator = stats.freq_indicator;
      rec.freq_argmax = stats.freq_argmax;
    }
    if (geom) rec.s_visits = s_visit_count(obj, *geom, traj);
    report.records[static_cast<std::size_t>(j)] = rec;
  };

  const int threads = std::max(1, cfg.threads);
  if (threads == 1) {
    for (int j = 0; j < cfg.trials; ++j) run_trial(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&]() {
        for (int j = next.fetch_add(1); j < cfg.trials;
             j = next.fetch_add(1))
          run_trial(j);
      });
    }
    for (std::thread& th : pool) th.join();
  }

  for (const TrialRecord& r : report.records) {
    switch (r.cls) {
      case LimitClass::to_min:
        ++report.to_min;
        break;
      case LimitClass::to_strict_saddle:
        ++report.to_strict_saddle;
        break;
      case LimitClass::diverged:
        ++report.diverged;
        break;
      case LimitClass::undecided:
        ++report.undecided;
        break;
    }
  }
  return report;
}

void write_trials_csv(std::ostream& out, const EscapeReport& report) {
  out << "trial,seed,class,limit_id,exponent,freq_I,s_visits,iters\n";
  char buf[32];
  auto num = [&](double v) -> std::string {
    if (!std::isfinite(v)) return "-";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  };
  for (const TrialRecord& r : report.records) {
    out << r.trial << ',' << r.stream_seed << ',' << to_string(r.cls) << ',';
    if (r.limit_index >= 0)
      out << r.limit_index;
    else
      out << '-';
    out << ',' << num(r.exponent) << ',' << num(r.freq_indicator) << ',';
    if (r.s_visits >= 0)
      out << r.s_visits;
    else
      out << '-';
    out << ',' << r.iters << '\n';
  }
}

}  // namespace rcgd
