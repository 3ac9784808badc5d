#include "gbcalib/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "gbcalib/dataset_io.hpp"

namespace gbcalib {

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1) throw InvalidConfig("grid needs at least one point");
  if (!(lo > 0.0) || !(hi > 0.0))
    throw InvalidConfig("log-spaced grid endpoints must be positive");
  if (count == 1) return {lo};
  if (!(hi > lo)) throw InvalidConfig("grid endpoints must be increasing");
  std::vector<double> out(count);
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) out[i] = std::exp(std::log(lo) + step * i);
  return out;
}

void SimConfig::validate() const {
  if (g < 1 || n_i < 1 || p < 1) throw InvalidConfig("g, n_i, p must be >= 1");
  if (beta_true.size() != p || mu.size() != p || q.dim() != p)
    throw InvalidConfig("beta_true, mu, q must have dimension p");
  if (!(tau2 > 0.0) || !(sigma2 > 0.0))
    throw InvalidConfig("variance components must be > 0");
  if (contam_prob < 0.0 || contam_prob > 1.0)
    throw InvalidConfig("contamination probability must be in [0, 1]");
  if (!(contam_sd >= 0.0)) throw InvalidConfig("contam_sd must be >= 0");
  if (!(c > 0.0)) throw InvalidConfig("Huber constant must be > 0");
  if (lambda < 0.0) throw InvalidConfig("lambda must be >= 0");
  if (eta_grid.empty()) throw InvalidConfig("eta grid is empty");
  for (size_t i = 0; i < eta_grid.size(); ++i) {
    if (!(eta_grid[i] > 0.0)) throw InvalidConfig("eta must be > 0");
    if (i > 0 && !(eta_grid[i] > eta_grid[i - 1]))
      throw InvalidConfig("eta grid must be strictly increasing");
  }
  if (reps < 2) throw TooFewReps("need at least 2 replications");
  if (iterations < 1 || burn_in < 0 || burn_in >= iterations)
    throw InvalidConfig("need 0 <= burn_in < iterations");
  if (!(level > 0.0 && level < 1.0)) throw BadLevel("level must be in (0, 1)");
  if (oracle_g < 1 || oracle_reps < 2)
    throw InvalidConfig("oracle needs oracle_g >= 1, oracle_reps >= 2");
}

RidgeSpec SimConfig::ridge() const { return make_ridge(mu, q, lambda, lambda); }

GroupedDataset generate_dataset(const SimConfig& cfg, std::uint64_t seed,
                                long* contaminated_count) {
  Rng rng(seed);
  const double tau = std::sqrt(cfg.tau2);
  const double sigma = std::sqrt(cfg.sigma2);
  long contaminated = 0;
  std::vector<Group> groups;
  groups.reserve(cfg.g);
  for (int i = 0; i < cfg.g; ++i) {
    const double b = tau * rng.normal();
    Group grp;
    grp.x.resize(cfg.n_i, cfg.p);
    grp.y.resize(cfg.n_i);
    for (int j = 0; j < cfg.n_i; ++j) {
      for (int k = 0; k < cfg.p; ++k) grp.x(j, k) = rng.normal();
      double eps = sigma * rng.normal();
      if (rng.uniform() < cfg.contam_prob) {
        eps += cfg.contam_sd * rng.normal();
        ++contaminated;
      }
      grp.y[j] = grp.x.row(j).dot(cfg.beta_true) + b + eps;
    }
    groups.push_back(std::move(grp));
  }
  if (contaminated_count) *contaminated_count = contaminated;
  return make_dataset(std::move(groups));
}

PseudoTrue pseudo_true(const SimConfig& cfg, int oracle_g, int oracle_reps,
                       std::uint64_t seed) {
  if (oracle_g < 1 || oracle_reps < 2)
    throw InvalidConfig("oracle needs oracle_g >= 1, oracle_reps >= 2");
  SimConfig big = cfg;
  big.g = oracle_g;

  std::vector<Vector> estimates;
  estimates.reserve(oracle_reps);
  int skipped = 0;
  for (int r = 0; r < oracle_reps; ++r) {
    const GroupedDataset ds =
        generate_dataset(big, derive_seed(seed, kStreamOracle, r));
    const WhitenedDataset wd = whiten(ds, cfg.working_cov());
    const FitResult fit = fit_penalized(wd, cfg.huber(), cfg.ridge(), ds.n);
    if (!fit.converged) {
      ++skipped;
      continue;
    }
    estimates.push_back(fit.beta_hat);
  }
  if (skipped * 100 > oracle_reps)
    throw NoConvergence("more than 1% of oracle replications failed");
  const auto kept = static_cast<double>(estimates.size());

  Vector mean = Vector::Zero(cfg.p);
  for (const Vector& e : estimates) mean += e;
  mean /= kept;
  double ss = 0.0;
  for (const Vector& e : estimates) {
    const double d = e[0] - mean[0];
    ss += d * d;
  }
  const double se = std::sqrt(ss / (kept - 1.0) / kept);
  return PseudoTrue{mean, oracle_g, oracle_reps, se};
}

CellResult run_cell(const SimConfig& cfg, double eta, int eta_index,
                    int rep_index) {
  CellResult cell;
  cell.eta_index = eta_index;
  cell.rep = rep_index;
  cell.eta = eta;

  const GroupedDataset ds = generate_dataset(
      cfg, derive_seed(cfg.master_seed, kStreamDataset, rep_index));
  const WhitenedDataset wd = whiten(ds, cfg.working_cov());
  const HuberSpec h = cfg.huber();
  const RidgeSpec ridge = cfg.ridge();

  const FitResult fit = fit_penalized(wd, h, ridge, ds.n);
  if (!fit.converged) return cell;  // ok stays false; counted upstream

  const SamplerConfig chain_cfg{
      eta, cfg.iterations, cfg.burn_in,
      derive_seed(cfg.master_seed, kStreamChainBase + eta_index, rep_index),
      std::nullopt};
  const DrawMatrix draws = run_chain(wd, h, ridge, chain_cfg, ds.n);

  // the MAP center is the penalized minimizer, shared with the
  // frequentist method; sandwich pieces are evaluated there once
  const SandwichEstimates est =
      sandwich_at(wd, h, ridge, fit.beta_hat, ds.n, draws);

  const WaldInterval wald =
      wald_interval(fit.beta_hat, est.v_target_hat, ds.n, 0, cfg.level);
  cell.frequentist = MethodResult{wald.center, wald.lo(), wald.hi()};

  const Vector post_mean = posterior_mean_center(draws);
  const auto [ulo, uhi] = credible_interval(draws.draws, 0, cfg.level);
  cell.uncalibrated = MethodResult{post_mean[0], ulo, uhi};

  const CalibratedDraws cal = calibrate_draws(draws, est);
  const auto [clo, chi] = credible_interval(cal.draws, 0, cfg.level);
  cell.calibrated = MethodResult{cal.draws.col(0).mean(), clo, chi};

  cell.ok = true;
  return cell;
}

namespace {

struct Accumulator {
  long covered = 0;
  double width_sum = 0.0;
  std::vector<double> errors;  // point − target
};

MetricsRow finish(const std::string& method, double eta,
                  const Accumulator& acc) {
  const int reps = static_cast<int>(acc.errors.size());
  if (reps < 2) throw TooFewReps("fewer than 2 successful replications");
  double mean = 0.0;
  for (double e : acc.errors) mean += e;
  mean /= reps;
  double ss = 0.0;
  for (double e : acc.errors) ss += (e - mean) * (e - mean);
  return MetricsRow{method,
                    eta,
                    static_cast<double>(acc.covered) / reps,
                    acc.width_sum / reps,
                    mean,
                    std::sqrt(ss / (reps - 1)),
                    reps};
}

}  // namespace

std::vector<MetricsRow> aggregate(const std::vector<CellResult>& cells,
                                  const PseudoTrue& target,
                                  const SimConfig& cfg) {
  const double t = target.value[0];
  const auto grid_size = cfg.eta_grid.size();
  std::vector<Accumulator> freq(grid_size), uncal(grid_size), cal(grid_size);
  const auto absorb = [t](Accumulator& acc, const MethodResult& m) {
    acc.covered += (m.lo <= t && t <= m.hi) ? 1 : 0;
    acc.width_sum += m.hi - m.lo;
    acc.errors.push_back(m.point - t);
  };
  for (const CellResult& cell : cells) {
    if (!cell.ok) continue;
    if (cell.eta_index < 0 || cell.eta_index >= static_cast<int>(grid_size))
      throw DimensionMismatch("cell eta index out of range");
    absorb(freq[cell.eta_index], cell.frequentist);
    absorb(uncal[cell.eta_index], cell.uncalibrated);
    absorb(cal[cell.eta_index], cell.calibrated);
  }

  std::vector<MetricsRow> rows;
  rows.reserve(3 * grid_size);
  for (size_t i = 0; i < grid_size; ++i)
    rows.push_back(finish("calibrated", cfg.eta_grid[i], cal[i]));
  for (size_t i = 0; i < grid_size; ++i)
    rows.push_back(finish("frequentist", cfg.eta_grid[i], freq[i]));
  for (size_t i = 0; i < grid_size; ++i)
    rows.push_back(finish("uncalibrated", cfg.eta_grid[i], uncal[i]));
  return rows;
}

SweepResult sweep(const SimConfig& cfg, const PseudoTrue& target,
                  int threads) {
  cfg.validate();
  const int grid_size = static_cast<int>(cfg.eta_grid.size());
  const long total = static_cast<long>(grid_size) * cfg.reps;
  std::vector<CellResult> cells(total);

  long worker_count =
      threads > 0 ? threads
                  : static_cast<long>(std::thread::hardware_concurrency());
  worker_count = std::clamp<long>(worker_count, 1, total);
  const int workers = static_cast<int>(worker_count);

  std::atomic<long> next{0};
  const auto work = [&] {
    for (;;) {
      const long idx = next.fetch_add(1);
      if (idx >= total) return;
      const int eta_index = static_cast<int>(idx / cfg.reps);
      const int rep = static_cast<int>(idx % cfg.reps);
      cells[idx] = run_cell(cfg, cfg.eta_grid[eta_index], eta_index, rep);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& th : pool) th.join();

  return SweepResult{aggregate(cells, target, cfg), std::move(cells)};
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::vector<MetricsRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(),
            [](const MetricsRow& a, const MetricsRow& b) {
              return a.method != b.method ? a.method < b.method
                                          : a.eta < b.eta;
            });
  std::string out = "method,eta,coverage,mean_width,bias,bias_sd,reps\n";
  for (const MetricsRow& r : sorted) {
    out += r.method + ',' + g17(r.eta) + ',' + g17(r.coverage) + ',' +
           g17(r.mean_width) + ',' + g17(r.bias) + ',' + g17(r.bias_sd) +
           ',' + std::to_string(r.reps) + '\n';
  }
  return out;
}

std::string audit_csv(const std::vector<CellResult>& cells,
                      const PseudoTrue& target) {
  const double t = target.value[0];
  std::string out = "method,eta,rep,point,lo,hi,covered\n";
  const auto emit = [&](const char* method, const CellResult& c,
                        const MethodResult& m) {
    out += std::string(method) + ',' + g17(c.eta) + ',' +
           std::to_string(c.rep) + ',' + g17(m.point) + ',' + g17(m.lo) +
           ',' + g17(m.hi) + ',' +
           ((m.lo <= t && t <= m.hi) ? "1" : "0") + '\n';
  };
  // per-method blocks, each ordered by (η index, rep)
  std::vector<const CellResult*> ordered;
  ordered.reserve(cells.size());
  for (const CellResult& c : cells)
    if (c.ok) ordered.push_back(&c);
  std::sort(ordered.begin(), ordered.end(),
            [](const CellResult* a, const CellResult* b) {
              return a->eta_index != b->eta_index
                         ? a->eta_index < b->eta_index
                         : a->rep < b->rep;
            });
  for (const CellResult* c : ordered) emit("calibrated", *c, c->calibrated);
  for (const CellResult* c : ordered) emit("frequentist", *c, c->frequentist);
  for (const CellResult* c : ordered) emit("uncalibrated", *c, c->uncalibrated);
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << content;
}

}  // namespace gbcalib
