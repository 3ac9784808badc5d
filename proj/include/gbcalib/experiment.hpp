#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gbcalib/calibration.hpp"

namespace gbcalib {

std::vector<double> log_spaced(double lo, double hi, int count);

// Full description of one simulation study. Defaults reproduce the
// contaminated random-intercept design: y = xβ + b_i + ε with
// b_i ~ N(0, τ²), ε ~ N(0, σ²), and with probability contam_prob an
// extra N(0, contam_sd²) shock per observation.
struct SimConfig {
  int g = 100;
  int n_i = 5;
  int p = 1;
  Vector beta_true = Vector::Constant(1, 2.0);
  double tau2 = 2.0;
  double sigma2 = 1.0;
  double contam_prob = 0.1;
  double contam_sd = 10.0;
  double c = 1.0;
  Vector mu = Vector::Zero(1);
  double lambda = 0.5;
  SymMatrix q = SymMatrix::identity(1);
  std::vector<double> eta_grid = log_spaced(0.01, 100.0, 20);
  int reps = 200;
  int iterations = 1000;
  int burn_in = 500;
  double level = 0.95;
  std::uint64_t master_seed = 20260813ull;
  int oracle_g = 5000;
  int oracle_reps = 1000;

  void validate() const;  // throws InvalidConfig
  HuberSpec huber() const { return HuberSpec{c}; }
  WorkingCov working_cov() const { return WorkingCov{tau2, sigma2}; }
  RidgeSpec ridge() const;
};

struct MetricsRow {
  std::string method;  // calibrated | frequentist | uncalibrated
  double eta;
  double coverage;
  double mean_width;
  double bias;
  double bias_sd;
  int reps;
};

struct PseudoTrue {
  Vector value;
  int oracle_g = 0;
  int oracle_reps = 0;
  double se = 0.0;  // MC standard error of the mean, coordinate 0
};

struct MethodResult {
  double point;
  double lo;
  double hi;
};

struct CellResult {
  int eta_index = 0;
  int rep = 0;
  double eta = 0.0;
  bool ok = false;
  MethodResult frequentist{0, 0, 0};
  MethodResult uncalibrated{0, 0, 0};
  MethodResult calibrated{0, 0, 0};
};

// Seed substreams (see derive_seed): datasets depend on the
// replication only, never on η, so the frequentist column is
// bit-identical across the grid.
inline constexpr std::uint64_t kStreamDataset = 1;
inline constexpr std::uint64_t kStreamChainBase = 2;
inline constexpr std::uint64_t kStreamOracle = 1000;

GroupedDataset generate_dataset(const SimConfig& cfg, std::uint64_t seed,
                                long* contaminated_count = nullptr);

// β^λ: average of penalized fits on `oracle_reps` large datasets of
// `oracle_g` groups, holding the per-observation penalty weight λ
// fixed. Fails (NoConvergence) if more than 1% of fits do not
// converge.
PseudoTrue pseudo_true(const SimConfig& cfg, int oracle_g, int oracle_reps,
                       std::uint64_t seed);

// One (η, replication) cell: the three methods share the dataset, and
// the two Bayes methods share the chain. Metrics are for coordinate 0.
CellResult run_cell(const SimConfig& cfg, double eta, int eta_index,
                    int rep_index);

std::vector<MetricsRow> aggregate(const std::vector<CellResult>& cells,
                                  const PseudoTrue& target,
                                  const SimConfig& cfg);

struct SweepResult {
  std::vector<MetricsRow> metrics;
  std::vector<CellResult> cells;  // ordered by (η index, rep)
};

// Work-pool over all cells; deterministic given cfg.master_seed
// regardless of thread count (threads <= 0 means hardware default).
SweepResult sweep(const SimConfig& cfg, const PseudoTrue& target,
                  int threads = 0);

// CSV emission. Rows sorted by method (alphabetical) then η; floats
// carry 17 significant digits so re-runs are byte-identical.
std::string metrics_csv(const std::vector<MetricsRow>& rows);
std::string audit_csv(const std::vector<CellResult>& cells,
                      const PseudoTrue& target);
void write_file(const std::string& path, const std::string& content);

}  // namespace gbcalib
