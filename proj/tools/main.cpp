#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rcgd/dynamics.hpp"
#include "rcgd/errors.hpp"
#include "rcgd/experiments.hpp"
#include "rcgd/geometry.hpp"
#include "rcgd/lyapunov.hpp"
#include "rcgd/objective.hpp"
#include "rcgd/selfcheck.hpp"

namespace {

using Json = nlohmann::ordered_json;
constexpr const char* kVersion = "rcgd 0.1.0";

// "1,-1" is a diagonal; "@path" is a whitespace-separated file holding the
// dimension followed by the row-major lower triangle of a symmetric matrix.
Eigen::MatrixXd parse_matrix(const std::string& text) {
  if (text.empty()) throw rcgd::ConfigError("empty matrix specification");
  if (text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw rcgd::ConfigError("cannot open matrix file " + text.substr(1));
    int d = 0;
    if (!(in >> d) || d < 1)
      throw rcgd::ConfigError("matrix file must start with the dimension");
    Eigen::MatrixXd H(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j <= i; ++j) {
        double v;
        if (!(in >> v))
          throw rcgd::ConfigError("matrix file: not enough entries");
        H(i, j) = v;
        H(j, i) = v;
      }
    return H;
  }
  std::vector<double> diag;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      diag.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw rcgd::ConfigError("bad matrix entry '" + tok + "'");
    }
  }
  if (diag.empty()) throw rcgd::ConfigError("empty matrix specification");
  Eigen::MatrixXd H =
      Eigen::MatrixXd::Zero(static_cast<int>(diag.size()),
                            static_cast<int>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i)
    H(static_cast<int>(i), static_cast<int>(i)) = diag[i];
  return H;
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      vals.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw rcgd::ConfigError("bad vector entry '" + tok + "'");
    }
  }
  if (vals.empty()) throw rcgd::ConfigError("empty vector specification");
  Eigen::VectorXd v(static_cast<int>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i)
    v[static_cast<int>(i)] = vals[i];
  return v;
}

// Shared objective flags.
struct ObjectiveFlags {
  std::string name = "quadratic";
  std::string matrix;
  int d = -1;
  double beta = -1.0;
  double a = std::numeric_limits<double>::quiet_NaN();
  double b = -1.0;
  double region = -1.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--objective", name,
                    "corpus member: quadratic, separable-quartic, "
                    "coupled-saddle, rosenbrock-like");
    cmd->add_option("--H", matrix,
                    "quadratic H: comma diagonal or @file lower triangle");
    cmd->add_option("--d", d, "dimension for separable-quartic/coupled-saddle");
    cmd->add_option("--beta", beta, "coupled-saddle quartic weight");
    cmd->add_option("--a", a, "rosenbrock-like parameter a");
    cmd->add_option("--b", b, "rosenbrock-like parameter b");
    cmd->add_option("--region", region, "working-region radius override");
  }

  std::shared_ptr<const rcgd::Objective> build() const {
    rcgd::ObjectiveParams params;
    if (!matrix.empty()) params.hessian = parse_matrix(matrix);
    if (d > 0) params.scalars["d"] = d;
    if (beta > 0.0) params.scalars["beta"] = beta;
    if (std::isfinite(a)) params.scalars["a"] = a;
    if (b > 0.0) params.scalars["b"] = b;
    if (region > 0.0) params.scalars["region_radius"] = region;
    return rcgd::make_objective(name, params);
  }

  Json describe() const {
    Json j;
    j["objective"] = name;
    if (!matrix.empty()) j["H"] = matrix;
    if (d > 0) j["d"] = d;
    if (beta > 0.0) j["beta"] = beta;
    if (std::isfinite(a)) j["a"] = a;
    if (b > 0.0) j["b"] = b;
    if (region > 0.0) j["region"] = region;
    return j;
  }
};

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << body;
}

void write_manifest(const std::string& out_dir, const std::string& subcommand,
                    const Json& config, const std::vector<std::string>& outputs,
                    double wall_seconds) {
  Json m;
  m["tool_version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config"] = config;
  m["outputs"] = outputs;
  m["wall_clock_seconds"] = wall_seconds;
  write_file(join_path(out_dir, subcommand + "_manifest.json"),
             m.dump(2) + "\n");
}

// Static two-panel SVG: objective value and log distance to the limit.
void write_plot_svg(const std::string& path, const rcgd::Trajectory& traj,
                    const Eigen::VectorXd& target) {
  const int W = 720, H = 240, pad = 48;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W
      << "' height='" << 2 * H << "'>\n";
  auto panel = [&](int top, const std::vector<double>& ys, const char* label) {
    double lo = 1e300, hi = -1e300;
    for (double y : ys) {
      lo = std::min(lo, y);
      hi = std::max(hi, y);
    }
    if (!(hi > lo)) {
      hi = lo + 1.0;
      lo -= 1.0;
    }
    svg << "<rect x='" << pad << "' y='" << top + 16 << "' width='"
        << W - 2 * pad << "' height='" << H - 48
        << "' fill='none' stroke='black'/>\n<polyline fill='none' "
           "stroke='steelblue' stroke-width='1' points='";
    for (std::size_t t = 0; t < ys.size(); ++t) {
      const double px =
          pad + (W - 2.0 * pad) * (ys.size() > 1 ? double(t) / (ys.size() - 1)
                                                 : 0.5);
      const double py = top + 16 + (H - 48) * (1.0 - (ys[t] - lo) / (hi - lo));
      svg << px << ',' << py << ' ';
    }
    svg << "'/>\n<text x='" << pad << "' y='" << top + 12
        << "' font-size='12'>" << label << "  [" << lo << ", " << hi
        << "]</text>\n";
  };
  std::vector<double> fs(traj.f_values.begin(), traj.f_values.end());
  std::vector<double> logd;
  for (const auto& x : traj.points) {
    const double dist = (x - target).norm();
    logd.push_back(dist > 0.0 ? std::log(dist) : -745.0);
  }
  panel(0, fs, "f(x_t)");
  panel(H, logd, "log ||x_t - x*||");
  svg << "</svg>\n";
  write_file(path, svg.str());
}

// Flat key = value file, '#' comments.  Flags given on the command line win.
std::map<std::string, std::string> load_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rcgd::ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw rcgd::ConfigError(path + ":" + std::to_string(lineno) +
                              ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty()) throw rcgd::ConfigError(path + ": empty key");
    kv[key] = val;
  }
  return kv;
}

double to_double(const std::string& key, const std::string& val) {
  try {
    return std::stod(val);
  } catch (const std::exception&) {
    throw rcgd::ConfigError("config key '" + key + "': bad number '" + val +
                            "'");
  }
}

long long to_ll(const std::string& key, const std::string& val) {
  try {
    return std::stoll(val);
  } catch (const std::exception&) {
    throw rcgd::ConfigError("config key '" + key + "': bad integer '" + val +
                            "'");
  }
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"randomized coordinate gradient descent laboratory"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // ---- run ----------------------------------------------------------------
  auto* run_cmd = app.add_subcommand("run", "record one trajectory");
  ObjectiveFlags run_obj;
  run_obj.attach(run_cmd);
  double run_alpha = 0.1;
  std::string run_x0 = "1,1";
  std::uint64_t run_seed = 0;
  long long run_iters = 100000;
  std::string run_out = ".";
  double run_tol_grad = 1e-9, run_tol_x = 1e-12;
  long long run_patience = -1;
  bool run_plot = false, run_geometry = false;
  run_cmd->add_option("--alpha", run_alpha, "step size");
  run_cmd->add_option("--x0", run_x0, "initial point, comma separated");
  run_cmd->add_option("--seed", run_seed, "coordinate stream seed");
  run_cmd->add_option("--iters", run_iters, "maximum iterations");
  run_cmd->add_option("--out", run_out, "output directory");
  run_cmd->add_option("--tol-grad", run_tol_grad, "gradient stop tolerance");
  run_cmd->add_option("--tol-x", run_tol_x, "displacement stop tolerance");
  run_cmd->add_option("--patience", run_patience, "quiet steps before stop");
  run_cmd->add_flag("--plot", run_plot, "write plot.svg");
  run_cmd->add_flag("--geometry", run_geometry,
                    "annotate excluded-set visits at the first strict saddle");

  // ---- lyapunov -----------------------------------------------------------
  auto* lyap_cmd =
      app.add_subcommand("lyapunov", "estimate the Lyapunov spectrum");
  std::string lyap_matrix = "1,-1";
  double lyap_alpha = 0.1;
  long long lyap_horizon = 1000000;
  int lyap_reorth = 10;
  std::uint64_t lyap_seed = 0;
  std::string lyap_out = ".";
  lyap_cmd->add_option("--H", lyap_matrix, "symmetric matrix spec");
  lyap_cmd->add_option("--alpha", lyap_alpha, "step size");
  lyap_cmd->add_option("--horizon", lyap_horizon, "product length");
  lyap_cmd->add_option("--reorth", lyap_reorth, "QR interval");
  lyap_cmd->add_option("--seed", lyap_seed, "coordinate stream seed");
  lyap_cmd->add_option("--out", lyap_out, "output directory");

  // ---- geometry -----------------------------------------------------------
  auto* geom_cmd =
      app.add_subcommand("geometry", "certify local saddle constants");
  ObjectiveFlags geom_obj;
  geom_obj.attach(geom_cmd);
  double geom_alpha = 0.1;
  int geom_saddle_index = -1;
  double geom_radius = 1.0;
  int geom_samples = 2000, geom_grid = 100000, geom_probes = 32;
  int geom_incl_samples = 40;
  std::uint64_t geom_seed = 0xC0FFEE;
  std::string geom_out = ".";
  geom_cmd->add_option("--alpha", geom_alpha, "step size");
  geom_cmd->add_option("--saddle-index", geom_saddle_index,
                       "registry index (default: first strict saddle)");
  geom_cmd->add_option("--radius", geom_radius, "initial certification radius");
  geom_cmd->add_option("--samples", geom_samples, "certification samples");
  geom_cmd->add_option("--grid", geom_grid, "sphere grid for growth constants");
  geom_cmd->add_option("--probes", geom_probes, "zero-set probe directions");
  geom_cmd->add_option("--inclusion-samples", geom_incl_samples,
                       "samples per radius for the inclusion test");
  geom_cmd->add_option("--seed", geom_seed, "sampling seed");
  geom_cmd->add_option("--out", geom_out, "output directory");

  // ---- escape -------------------------------------------------------------
  auto* esc_cmd =
      app.add_subcommand("escape", "Monte-Carlo limit classification");
  ObjectiveFlags esc_obj;
  esc_obj.attach(esc_cmd);
  std::string esc_config;
  double esc_alpha = 0.1;
  int esc_trials = 100;
  long long esc_max_iters = 100000;
  std::string esc_center;
  double esc_radius = 1.0;
  std::string esc_dist = "uniform_ball";
  std::uint64_t esc_seed = 0;
  int esc_threads = 1;
  bool esc_geometry = false;
  double esc_class_tol = 1e-6, esc_class_tol_grad = 1e-6;
  double esc_tail = 0.5;
  std::string esc_out = ".";
  esc_cmd->add_option("--config", esc_config, "flat key = value config file");
  esc_cmd->add_option("--alpha", esc_alpha, "step size");
  esc_cmd->add_option("--trials", esc_trials, "number of trials");
  esc_cmd->add_option("--max-iters", esc_max_iters, "iteration cap per trial");
  esc_cmd->add_option("--x0-center", esc_center, "sampling ball center");
  esc_cmd->add_option("--x0-radius", esc_radius, "sampling ball radius");
  esc_cmd->add_option("--x0-dist", esc_dist, "uniform_ball or gaussian");
  esc_cmd->add_option("--seed", esc_seed, "seed base");
  esc_cmd->add_option("--threads", esc_threads, "worker cap");
  esc_cmd->add_flag("--geometry", esc_geometry,
                    "count excluded-set visits at the first strict saddle");
  esc_cmd->add_option("--class-tol", esc_class_tol, "limit match tolerance");
  esc_cmd->add_option("--class-tol-grad", esc_class_tol_grad,
                      "gradient tolerance for classification");
  esc_cmd->add_option("--tail-fraction", esc_tail, "rate-fit tail fraction");
  esc_cmd->add_option("--out", esc_out, "output directory");

  // ---- check --------------------------------------------------------------
  auto* check_cmd = app.add_subcommand("check", "run the invariant suite");
  std::string check_out = ".";
  std::uint64_t check_seed = 0;
  check_cmd->add_option("--out", check_out, "accepted for uniformity");
  check_cmd->add_option("--seed", check_seed, "accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Timer timer;

    if (*run_cmd) {
      const auto obj = run_obj.build();
      const Eigen::VectorXd x0 = parse_vector(run_x0);
      if (x0.size() != obj->dim())
        throw rcgd::ConfigError("--x0 dimension mismatch");
      const rcgd::StepSize alpha =
          rcgd::StepSize::for_objective(run_alpha, *obj);
      rcgd::StopRule stop;
      stop.tol_grad = run_tol_grad;
      stop.tol_x = run_tol_x;
      stop.patience = run_patience;
      rcgd::Trajectory traj =
          rcgd::run(*obj, alpha, rcgd::CoordinateStream(run_seed, obj->dim()),
                    x0, run_iters, stop);

      if (run_geometry) {
        for (const rcgd::CriticalPoint& cp : obj->critical_points()) {
          if (cp.kind != rcgd::CriticalKind::strict_saddle) continue;
          const rcgd::SaddleGeometry geom =
              rcgd::build_saddle_geometry(*obj, cp, run_alpha);
          rcgd::s_visit_count(*obj, geom, traj);
          break;
        }
      }

      std::ostringstream csv;
      rcgd::write_trajectory_csv(csv, traj);
      std::vector<std::string> outputs = {"trajectory.csv"};
      write_file(join_path(run_out, "trajectory.csv"), csv.str());
      if (run_plot) {
        const rcgd::Classification cls =
            rcgd::classify_limit(traj, *obj, 1e-6, 1e-6);
        const Eigen::VectorXd target =
            cls.limit_index >= 0
                ? obj->critical_points()[static_cast<std::size_t>(
                                             cls.limit_index)]
                      .location
                : traj.final_point();
        write_plot_svg(join_path(run_out, "plot.svg"), traj, target);
        outputs.push_back("plot.svg");
      }
      Json cfg = run_obj.describe();
      cfg["alpha"] = run_alpha;
      cfg["x0"] = run_x0;
      cfg["seed"] = run_seed;
      cfg["iters"] = run_iters;
      cfg["tol_grad"] = run_tol_grad;
      cfg["tol_x"] = run_tol_x;
      cfg["patience"] = run_patience;
      cfg["geometry"] = run_geometry;
      write_manifest(run_out, "run", cfg, outputs, timer.seconds());
      std::cout << "rows=" << traj.rows() << " reason="
                << rcgd::to_string(traj.reason)
                << " f_final=" << traj.f_values.back() << "\n";
      return 0;
    }

    if (*lyap_cmd) {
      const Eigen::MatrixXd H = parse_matrix(lyap_matrix);
      const rcgd::LinearizedSystem sys(
          H, lyap_alpha,
          rcgd::CoordinateStream(lyap_seed, static_cast<int>(H.rows())));
      const rcgd::LyapunovSpectrum spec =
          rcgd::lyapunov_spectrum(sys, lyap_horizon, lyap_reorth);
      Json j;
      j["exponents"] = spec.exponents;
      j["multiplicities"] = spec.multiplicities;
      j["dim_unstable"] = spec.dim_unstable;
      j["dim_center_stable"] = spec.dim_center_stable;
      j["std_errors"] = spec.std_errors;
      j["horizon"] = lyap_horizon;
      j["seed"] = lyap_seed;
      const std::string body = j.dump(2) + "\n";
      write_file(join_path(lyap_out, "lyapunov.json"), body);
      Json cfg;
      cfg["H"] = lyap_matrix;
      cfg["alpha"] = lyap_alpha;
      cfg["horizon"] = lyap_horizon;
      cfg["reorth"] = lyap_reorth;
      cfg["seed"] = lyap_seed;
      write_manifest(lyap_out, "lyapunov", cfg, {"lyapunov.json"},
                     timer.seconds());
      std::cout << body;
      return 0;
    }

    if (*geom_cmd) {
      const auto obj = geom_obj.build();
      int index = geom_saddle_index;
      if (index < 0) {
        for (std::size_t k = 0; k < obj->critical_points().size(); ++k)
          if (obj->critical_points()[k].kind ==
              rcgd::CriticalKind::strict_saddle) {
            index = static_cast<int>(k);
            break;
          }
      }
      if (index < 0 ||
          index >= static_cast<int>(obj->critical_points().size()))
        throw rcgd::ConfigError("no strict saddle in the registry");
      rcgd::GeometryOptions opts;
      opts.initial_radius = geom_radius;
      opts.sigma_samples = geom_samples;
      opts.oracle_grid = geom_grid;
      opts.u2_probes = geom_probes;
      opts.seed = geom_seed;
      const rcgd::SaddleGeometry geom = rcgd::build_saddle_geometry(
          *obj, obj->critical_points()[static_cast<std::size_t>(index)],
          geom_alpha, opts);
      const rcgd::InclusionReport incl = rcgd::check_u2h_inclusion(
          *obj, geom.saddle, geom.rho, geom.rho_h, geom_incl_samples,
          0.5 * geom.u1_radius, 8, geom_probes, geom_seed);
      Json j;
      j["sigma"] = geom.sigma;
      j["u1_radius"] = geom.u1_radius;
      j["rho"] = geom.rho;
      j["rho_H"] = geom.rho_h;
      j["p_plus"] = geom.p_plus;
      j["p_minus"] = geom.p_minus;
      j["p"] = geom.p;
      j["inclusion_radius"] = incl.inclusion_radius;
      const std::string body = j.dump(2) + "\n";
      write_file(join_path(geom_out, "geometry.json"), body);
      Json cfg = geom_obj.describe();
      cfg["alpha"] = geom_alpha;
      cfg["saddle_index"] = index;
      cfg["radius"] = geom_radius;
      cfg["samples"] = geom_samples;
      cfg["grid"] = geom_grid;
      cfg["probes"] = geom_probes;
      cfg["inclusion_samples"] = geom_incl_samples;
      cfg["seed"] = geom_seed;
      write_manifest(geom_out, "geometry", cfg, {"geometry.json"},
                     timer.seconds());
      std::cout << body;
      return 0;
    }

    if (*esc_cmd) {
      if (!esc_config.empty()) {
        const auto kv = load_kv(esc_config);
        static const std::set<std::string> known = {
            "objective", "H", "d", "beta", "a", "b", "region", "alpha",
            "trials", "max_iters", "x0_center", "x0_radius", "x0_dist",
            "seed", "threads", "geometry", "class_tol", "class_tol_grad",
            "tail_fraction", "out"};
        auto want = [&](const char* flag) {
          return esc_cmd->count(flag) == 0;  // command line wins
        };
        for (const auto& [key, val] : kv) {
          if (!known.count(key))
            throw rcgd::ConfigError("unknown config key '" + key + "'");
          if (key == "objective" && want("--objective")) esc_obj.name = val;
          else if (key == "H" && want("--H")) esc_obj.matrix = val;
          else if (key == "d" && want("--d")) esc_obj.d = static_cast<int>(to_ll(key, val));
          else if (key == "beta" && want("--beta")) esc_obj.beta = to_double(key, val);
          else if (key == "a" && want("--a")) esc_obj.a = to_double(key, val);
          else if (key == "b" && want("--b")) esc_obj.b = to_double(key, val);
          else if (key == "region" && want("--region")) esc_obj.region = to_double(key, val);
          else if (key == "alpha" && want("--alpha")) esc_alpha = to_double(key, val);
          else if (key == "trials" && want("--trials")) esc_trials = static_cast<int>(to_ll(key, val));
          else if (key == "max_iters" && want("--max-iters")) esc_max_iters = to_ll(key, val);
          else if (key == "x0_center" && want("--x0-center")) esc_center = val;
          else if (key == "x0_radius" && want("--x0-radius")) esc_radius = to_double(key, val);
          else if (key == "x0_dist" && want("--x0-dist")) esc_dist = val;
          else if (key == "seed" && want("--seed")) esc_seed = static_cast<std::uint64_t>(to_ll(key, val));
          else if (key == "threads" && want("--threads")) esc_threads = static_cast<int>(to_ll(key, val));
          else if (key == "geometry" && want("--geometry")) esc_geometry = to_ll(key, val) != 0;
          else if (key == "class_tol" && want("--class-tol")) esc_class_tol = to_double(key, val);
          else if (key == "class_tol_grad" && want("--class-tol-grad")) esc_class_tol_grad = to_double(key, val);
          else if (key == "tail_fraction" && want("--tail-fraction")) esc_tail = to_double(key, val);
          else if (key == "out" && want("--out")) esc_out = val;
        }
      }
      const auto obj = esc_obj.build();
      rcgd::TrialConfig cfg;
      cfg.alpha = esc_alpha;
      cfg.trials = esc_trials;
      cfg.max_iters = esc_max_iters;
      if (!esc_center.empty()) cfg.x0_center = parse_vector(esc_center);
      cfg.x0_radius = esc_radius;
      cfg.x0_dist = esc_dist;
      cfg.seed_base = esc_seed;
      cfg.threads = esc_threads;
      cfg.class_tol = esc_class_tol;
      cfg.class_tol_grad = esc_class_tol_grad;
      cfg.tail_fraction = esc_tail;

      std::unique_ptr<rcgd::SaddleGeometry> geom;
      if (esc_geometry) {
        for (const rcgd::CriticalPoint& cp : obj->critical_points()) {
          if (cp.kind != rcgd::CriticalKind::strict_saddle) continue;
          geom = std::make_unique<rcgd::SaddleGeometry>(
              rcgd::build_saddle_geometry(*obj, cp, esc_alpha));
          break;
        }
        if (!geom)
          throw rcgd::ConfigError("--geometry: no strict saddle registered");
      }
      const rcgd::EscapeReport report =
          rcgd::escape_experiment(cfg, *obj, geom.get());

      std::ostringstream csv;
      rcgd::write_trials_csv(csv, report);
      write_file(join_path(esc_out, "trials.csv"), csv.str());
      Json summary;
      summary["trials"] = report.trials();
      summary["to_min"] = report.to_min;
      summary["to_strict_saddle"] = report.to_strict_saddle;
      summary["diverged"] = report.diverged;
      summary["undecided"] = report.undecided;
      const double pooled = report.pooled_exponent(rcgd::LimitClass::to_min);
      if (std::isfinite(pooled)) summary["pooled_exponent_to_min"] = pooled;
      write_file(join_path(esc_out, "summary.json"), summary.dump(2) + "\n");

      Json mcfg = esc_obj.describe();
      mcfg["alpha"] = esc_alpha;
      mcfg["trials"] = esc_trials;
      mcfg["max_iters"] = esc_max_iters;
      mcfg["x0_center"] = esc_center.empty() ? "0" : esc_center;
      mcfg["x0_radius"] = esc_radius;
      mcfg["x0_dist"] = esc_dist;
      mcfg["seed"] = esc_seed;
      mcfg["threads"] = esc_threads;
      mcfg["geometry"] = esc_geometry;
      mcfg["class_tol"] = esc_class_tol;
      mcfg["class_tol_grad"] = esc_class_tol_grad;
      mcfg["tail_fraction"] = esc_tail;
      write_manifest(esc_out, "escape", mcfg, {"trials.csv", "summary.json"},
                     timer.seconds());
      std::cout << summary.dump(2) << "\n";
      return 0;
    }

    if (*check_cmd) {
      const int failures = rcgd::run_invariant_suite(std::cout);
      return failures == 0 ? 0 : 1;
    }
  } catch (const rcgd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "precondition violated: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
