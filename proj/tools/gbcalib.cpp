// Command-line front end: penalized robust fits, tempered-posterior
// sampling, draw calibration, and the simulation sweep, over CSV
// datasets. Exit codes: 0 ok, 2 usage/validation, 3 numerical failure.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gbcalib/calibration.hpp"
#include "gbcalib/dataset_io.hpp"
#include "gbcalib/experiment.hpp"

namespace {

using namespace gbcalib;

std::string join_g17(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += g17(v[i]);
  }
  return out;
}

std::string join_g17(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += g17(v[i]);
  }
  return out;
}

// Vector-valued options arrive as flat double lists; scalars broadcast.
Vector materialize_vector(const std::vector<double>& given, int p,
                          double fill, const char* name) {
  if (given.empty()) return Vector::Constant(p, fill);
  if (given.size() == 1) return Vector::Constant(p, given[0]);
  if (static_cast<int>(given.size()) == p) {
    Vector v(p);
    for (int i = 0; i < p; ++i) v[i] = given[i];
    return v;
  }
  throw InvalidConfig(std::string(name) + " needs 1 or p values");
}

SymMatrix materialize_q(const std::vector<double>& given, int p) {
  if (given.empty()) return SymMatrix::identity(p);
  if (given.size() == 1) {
    if (!(given[0] > 0.0)) throw InvalidConfig("q scale must be > 0");
    return SymMatrix(Matrix(given[0] * Matrix::Identity(p, p)));
  }
  if (static_cast<int>(given.size()) == p * p) return SymMatrix(p, given);
  throw InvalidConfig("q needs 1 or p*p values");
}

// Raw option values shared by the subcommands; resolved into a
// SimConfig once the dimension p is known.
struct Options {
  SimConfig cfg;  // scalar fields bound directly
  std::vector<double> beta_true, mu, q, eta_grid;
  int eta_points = 0;
  double eta_min = 0.01;
  double eta_max = 100.0;
  // sampler / io
  double eta = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string metrics_out = "metrics.csv";
  std::string audit_out = "audit.csv";
  std::string pt_out;
  std::vector<double> pseudo_true_override;
  int threads = 0;
  bool dry_run = false;
  std::string config_path;
};

void resolve_model(Options& o, int p) {
  o.cfg.p = p;
  o.cfg.beta_true = materialize_vector(o.beta_true, p, 2.0, "beta-true");
  o.cfg.mu = materialize_vector(o.mu, p, 0.0, "mu");
  o.cfg.q = materialize_q(o.q, p);
  if (!o.eta_grid.empty())
    o.cfg.eta_grid = o.eta_grid;
  else if (o.eta_points > 0)
    o.cfg.eta_grid = log_spaced(o.eta_min, o.eta_max, o.eta_points);
}

int resolve_threads(const Options& o) {
  if (o.threads > 0) return o.threads;
  if (const char* env = std::getenv("GBCALIB_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
      throw InvalidConfig("GBCALIB_THREADS is not a positive integer");
    }
  }
  return 0;  // hardware default
}

// Options shared by every subcommand that touches the model.
void add_model_options(CLI::App* sub, Options& o) {
  // Defaults files are applied by hand after the parse (see main):
  // CLI11 only processes set_config() on the root app, and this tool
  // keys all of its options on the subcommands.
  sub->add_option("--config", o.config_path,
                  "read option defaults from a key = value file "
                  "(explicit flags win)");
  sub->allow_config_extras(CLI::config_extras_mode::error);
  sub->add_option("--tau2", o.cfg.tau2, "random-intercept variance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--sigma2", o.cfg.sigma2, "residual variance")
      ->check(CLI::PositiveNumber);
  sub->add_option("--c", o.cfg.c, "Huber constant")
      ->check(CLI::PositiveNumber);
  sub->add_option("--lambda", o.cfg.lambda, "penalty weight per observation")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--mu", o.mu, "ridge center (1 or p values)");
  sub->add_option("--q", o.q, "penalty matrix (scalar or p*p row-major)");
  sub->add_option("--level", o.cfg.level, "interval level in (0,1)");
}

void add_generator_options(CLI::App* sub, Options& o) {
  sub->add_option("--g", o.cfg.g, "number of groups")
      ->check(CLI::PositiveNumber);
  sub->add_option("--n-i", o.cfg.n_i, "observations per group")
      ->check(CLI::PositiveNumber);
  sub->add_option("--p", o.cfg.p, "covariate dimension")
      ->check(CLI::PositiveNumber);
  sub->add_option("--beta-true", o.beta_true,
                  "generating coefficients (1 or p values)");
  sub->add_option("--contam-prob", o.cfg.contam_prob,
                  "per-observation contamination probability");
  sub->add_option("--contam-sd", o.cfg.contam_sd, "contamination sd")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--master-seed", o.cfg.master_seed, "master seed");
  sub->add_option("--oracle-g", o.cfg.oracle_g,
                  "groups per pseudo-true oracle replication")
      ->check(CLI::PositiveNumber);
  sub->add_option("--oracle-reps", o.cfg.oracle_reps,
                  "pseudo-true oracle replications")
      ->check(CLI::PositiveNumber);
}

int cmd_fit(const std::string& data_path, Options& o) {
  const GroupedDataset ds = load_dataset_csv(data_path);
  resolve_model(o, ds.p);
  const WhitenedDataset wd = whiten(ds, o.cfg.working_cov());
  const RidgeSpec ridge = o.cfg.ridge();
  const FitResult fit = fit_penalized(wd, o.cfg.huber(), ridge, ds.n);
  if (!fit.converged)
    throw NoConvergence("penalized fit did not converge");
  const TargetSandwich ts =
      target_sandwich(wd, o.cfg.huber(), ridge, fit.beta_hat);

  std::cout << "n = " << ds.n << "\n"
            << "groups = " << ds.groups.size() << "\n"
            << "p = " << ds.p << "\n"
            << "beta_hat = " << join_g17(fit.beta_hat) << "\n"
            << "newton_iterations = " << fit.iterations_used << "\n"
            << "grad_norm = " << g17(fit.grad_norm) << "\n";
  for (int i = 0; i < ds.p; ++i)
    std::cout << "v_target_row_" << (i + 1) << " = "
              << join_g17(Vector(ts.v_target_hat.dense().row(i).transpose())) << "\n";
  std::cout << "wald_level = " << g17(o.cfg.level) << "\n";
  for (int i = 0; i < ds.p; ++i) {
    const WaldInterval w =
        wald_interval(fit.beta_hat, ts.v_target_hat, ds.n, i, o.cfg.level);
    std::cout << "wald_interval_" << (i + 1) << " = " << g17(w.lo()) << ','
              << g17(w.hi()) << "\n";
  }
  return 0;
}

int cmd_sample(const std::string& data_path, Options& o) {
  const GroupedDataset ds = load_dataset_csv(data_path);
  resolve_model(o, ds.p);
  const WhitenedDataset wd = whiten(ds, o.cfg.working_cov());
  const SamplerConfig cfg{o.eta, o.cfg.iterations, o.cfg.burn_in, o.seed,
                          std::nullopt};
  const DrawMatrix draws =
      run_chain(wd, o.cfg.huber(), o.cfg.ridge(), cfg, ds.n);
  const std::string out = o.out.empty() ? "draws.csv" : o.out;
  write_draws_csv(out, draws.draws, "beta_");
  std::cout << "draws = " << draws.draws.rows() << "\n"
            << "eta = " << g17(o.eta) << "\n"
            << "seed = " << o.seed << "\n"
            << "out = " << out << "\n";
  return 0;
}

int cmd_calibrate(const std::string& data_path, const std::string& draws_path,
                  Options& o) {
  const GroupedDataset ds = load_dataset_csv(data_path);
  resolve_model(o, ds.p);
  const Matrix raw = load_draws_csv(draws_path);
  if (raw.cols() != ds.p)
    throw DimensionMismatch("draws and dataset have different dimensions");
  const DrawMatrix draws{raw, 0.0, 0};

  const WhitenedDataset wd = whiten(ds, o.cfg.working_cov());
  const RidgeSpec ridge = o.cfg.ridge();
  const FitResult fit = fit_penalized(wd, o.cfg.huber(), ridge, ds.n);
  if (!fit.converged)
    throw NoConvergence("penalized fit (calibration center) did not converge");
  const SandwichEstimates est =
      sandwich_at(wd, o.cfg.huber(), ridge, fit.beta_hat, ds.n, draws);
  const CalibratedDraws cal = calibrate_draws(draws, est);

  const std::string out = o.out.empty() ? "calibrated.csv" : o.out;
  write_draws_csv(out, cal.draws, "beta_calib_");

  const Matrix identity_gap = cal.omega_hat * est.h0_inv_hat.dense() *
                                  cal.omega_hat.transpose() -
                              est.v_target_hat.dense();
  const Matrix eye_gap = cal.omega_hat - Matrix::Identity(ds.p, ds.p);
  std::cout << "draws = " << cal.draws.rows() << "\n"
            << "center = " << join_g17(cal.center) << "\n";
  for (int i = 0; i < ds.p; ++i)
    std::cout << "omega_hat_row_" << (i + 1) << " = "
              << join_g17(Vector(cal.omega_hat.row(i).transpose())) << "\n";
  for (int i = 0; i < ds.p; ++i)
    std::cout << "v_target_row_" << (i + 1) << " = "
              << join_g17(Vector(est.v_target_hat.dense().row(i).transpose())) << "\n";
  for (int i = 0; i < ds.p; ++i)
    std::cout << "h0_inv_row_" << (i + 1) << " = "
              << join_g17(Vector(est.h0_inv_hat.dense().row(i).transpose())) << "\n";
  std::cout << "identity_residual_fro = " << g17(identity_gap.norm()) << "\n"
            << "omega_minus_identity_fro = " << g17(eye_gap.norm()) << "\n"
            << "clamped = " << (est.clamped ? "true" : "false") << "\n"
            << "out = " << out << "\n";
  return 0;
}

void print_effective_config(const SimConfig& cfg, int threads) {
  std::cout << "g = " << cfg.g << "\n"
            << "n_i = " << cfg.n_i << "\n"
            << "p = " << cfg.p << "\n"
            << "beta_true = " << join_g17(cfg.beta_true) << "\n"
            << "tau2 = " << g17(cfg.tau2) << "\n"
            << "sigma2 = " << g17(cfg.sigma2) << "\n"
            << "contam_prob = " << g17(cfg.contam_prob) << "\n"
            << "contam_sd = " << g17(cfg.contam_sd) << "\n"
            << "c = " << g17(cfg.c) << "\n"
            << "mu = " << join_g17(cfg.mu) << "\n"
            << "lambda = " << g17(cfg.lambda) << "\n";
  std::cout << "q =";
  for (int i = 0; i < cfg.q.dim(); ++i)
    for (int j = 0; j < cfg.q.dim(); ++j)
      std::cout << (i + j ? "," : " ") << g17(cfg.q(i, j));
  std::cout << "\n"
            << "eta_grid = " << join_g17(cfg.eta_grid) << "\n"
            << "reps = " << cfg.reps << "\n"
            << "iterations = " << cfg.iterations << "\n"
            << "burn_in = " << cfg.burn_in << "\n"
            << "level = " << g17(cfg.level) << "\n"
            << "master_seed = " << cfg.master_seed << "\n"
            << "oracle_g = " << cfg.oracle_g << "\n"
            << "oracle_reps = " << cfg.oracle_reps << "\n"
            << "threads = " << threads << "\n";
}

int cmd_experiment(Options& o) {
  resolve_model(o, o.cfg.p);
  const int threads = resolve_threads(o);
  o.cfg.validate();
  if (o.dry_run) {
    print_effective_config(o.cfg, threads);
    return 0;
  }

  PseudoTrue pt;
  if (!o.pseudo_true_override.empty()) {
    pt.value = materialize_vector(o.pseudo_true_override, o.cfg.p, 0.0,
                                  "pseudo-true");
  } else {
    pt = pseudo_true(o.cfg, o.cfg.oracle_g, o.cfg.oracle_reps,
                     o.cfg.master_seed);
    std::cout << "pseudo_true = " << join_g17(pt.value)
              << " (se " << g17(pt.se) << ")\n";
  }

  const SweepResult result = sweep(o.cfg, pt, threads);
  write_file(o.metrics_out, metrics_csv(result.metrics));
  write_file(o.audit_out, audit_csv(result.cells, pt));
  if (!o.pt_out.empty()) {
    nlohmann::json j;
    j["value"] = std::vector<double>(pt.value.begin(), pt.value.end());
    j["oracle_g"] = pt.oracle_g;
    j["oracle_reps"] = pt.oracle_reps;
    j["se"] = pt.se;
    write_file(o.pt_out, j.dump(2) + "\n");
  }
  std::cout << "metrics_out = " << o.metrics_out << "\n"
            << "audit_out = " << o.audit_out << "\n"
            << "rows = " << result.metrics.size() << "\n";
  return 0;
}

int cmd_pseudo_true(Options& o) {
  resolve_model(o, o.cfg.p);
  o.cfg.validate();
  const PseudoTrue pt = pseudo_true(o.cfg, o.cfg.oracle_g, o.cfg.oracle_reps,
                                    o.cfg.master_seed);
  nlohmann::json j;
  j["value"] = std::vector<double>(pt.value.begin(), pt.value.end());
  j["oracle_g"] = pt.oracle_g;
  j["oracle_reps"] = pt.oracle_reps;
  j["se"] = pt.se;
  const std::string text = j.dump(2) + "\n";
  std::cout << text;
  if (!o.out.empty()) write_file(o.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"location-scale calibration of tempered posteriors for the "
               "Huber random-intercept model"};
  app.require_subcommand(1);

  Options o;
  std::string data_path, draws_path;

  CLI::App* fit = app.add_subcommand(
      "fit", "penalized Huber fit with sandwich Wald intervals");
  fit->add_option("data", data_path, "dataset CSV (group_id,y,x_1..x_p)")
      ->required();
  add_model_options(fit, o);

  CLI::App* sample = app.add_subcommand(
      "sample", "draw from the tempered posterior via the augmented Gibbs chain");
  sample->add_option("data", data_path, "dataset CSV")->required();
  add_model_options(sample, o);
  sample->add_option("--eta", o.eta, "learning rate")
      ->required()
      ->check(CLI::PositiveNumber);
  sample->add_option("--iterations", o.cfg.iterations, "total sweeps")
      ->check(CLI::PositiveNumber);
  sample->add_option("--burn-in", o.cfg.burn_in, "discarded sweeps")
      ->check(CLI::NonNegativeNumber);
  sample->add_option("--seed", o.seed, "chain seed");
  sample->add_option("--out", o.out, "output draw CSV (default draws.csv)");

  CLI::App* calibrate = app.add_subcommand(
      "calibrate", "affine-calibrate posterior draws against the sandwich");
  calibrate->add_option("data", data_path, "dataset CSV")->required();
  calibrate->add_option("draws", draws_path, "draw CSV from `sample`")
      ->required();
  add_model_options(calibrate, o);
  calibrate->add_option("--out", o.out,
                        "output calibrated CSV (default calibrated.csv)");

  CLI::App* experiment = app.add_subcommand(
      "experiment", "coverage/width/bias sweep across the learning-rate grid");
  add_model_options(experiment, o);
  add_generator_options(experiment, o);
  experiment->add_option("--eta-grid", o.eta_grid,
                         "explicit learning-rate grid (increasing)");
  experiment->add_option("--eta-points", o.eta_points,
                         "log-spaced grid size (with --eta-min/--eta-max)");
  experiment->add_option("--eta-min", o.eta_min, "grid lower endpoint");
  experiment->add_option("--eta-max", o.eta_max, "grid upper endpoint");
  experiment->add_option("--reps", o.cfg.reps, "replications per grid point");
  experiment->add_option("--iterations", o.cfg.iterations, "chain sweeps");
  experiment->add_option("--burn-in", o.cfg.burn_in, "discarded sweeps");
  experiment->add_option("--threads", o.threads,
                         "worker threads (default: GBCALIB_THREADS or cores)");
  experiment->add_option("--metrics-out", o.metrics_out, "metrics CSV path");
  experiment->add_option("--audit-out", o.audit_out,
                         "per-replication audit CSV path");
  experiment->add_option("--pt-out", o.pt_out, "pseudo-true JSON path");
  experiment->add_option("--pseudo-true", o.pseudo_true_override,
                         "skip the oracle and use this target value");
  experiment->add_flag("--dry-run", o.dry_run,
                       "print the effective config and exit");

  CLI::App* pt = app.add_subcommand(
      "pseudo-true", "estimate the penalized population target by simulation");
  add_model_options(pt, o);
  add_generator_options(pt, o);
  pt->add_option("--out", o.out, "also write the JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  // Fill in defaults from --config for every option the command line
  // left untouched.
  if (!o.config_path.empty()) {
    std::ifstream file(o.config_path);
    if (!file) {
      std::cerr << "error: cannot read config file: " << o.config_path << "\n";
      return 2;
    }
    try {
      app.get_subcommands().front()->parse_from_stream(file);
    } catch (const CLI::Error& e) {
      std::cerr << "error: " << o.config_path << ": " << e.what() << "\n";
      return 2;
    }
  }

  try {
    if (app.got_subcommand(fit)) return cmd_fit(data_path, o);
    if (app.got_subcommand(sample)) return cmd_sample(data_path, o);
    if (app.got_subcommand(calibrate))
      return cmd_calibrate(data_path, draws_path, o);
    if (app.got_subcommand(experiment)) return cmd_experiment(o);
    if (app.got_subcommand(pt)) return cmd_pseudo_true(o);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BadLevel& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TooFewReps& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const TooFewGroups& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const EmptyDraws& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotPsd& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const NoConvergence& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
