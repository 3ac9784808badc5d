#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "gbcalib/experiment.hpp"

using namespace gbcalib;

namespace {

// small desk config so each test stays fast
SimConfig tiny_config() {
  SimConfig cfg;
  cfg.g = 30;
  cfg.eta_grid = {0.5, 2.0};
  cfg.reps = 3;
  cfg.iterations = 120;
  cfg.burn_in = 60;
  cfg.oracle_g = 100;
  cfg.oracle_reps = 5;
  return cfg;
}

}  // namespace

TEST_CASE("log_spaced: endpoints, monotonicity, constant ratio") {
  const std::vector<double> grid = log_spaced(0.01, 100.0, 20);
  REQUIRE(grid.size() == 20);
  CHECK(grid.front() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(grid.back() == doctest::Approx(100.0).epsilon(1e-12));
  const double ratio = grid[1] / grid[0];
  for (size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] > grid[i - 1]);
    CHECK(grid[i] / grid[i - 1] == doctest::Approx(ratio).epsilon(1e-9));
  }
  CHECK_THROWS_AS(log_spaced(0.0, 1.0, 5), InvalidConfig);
  CHECK_THROWS_AS(log_spaced(2.0, 1.0, 5), InvalidConfig);
  CHECK_THROWS_AS(log_spaced(1.0, 2.0, 0), InvalidConfig);
}

TEST_CASE("SimConfig validation") {
  CHECK_NOTHROW(SimConfig{}.validate());

  SimConfig bad = tiny_config();
  bad.eta_grid = {2.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);

  bad = tiny_config();
  bad.contam_prob = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);

  bad = tiny_config();
  bad.burn_in = bad.iterations;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);

  bad = tiny_config();
  bad.beta_true = Vector::Zero(3);  // p stays 1
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);

  bad = tiny_config();
  bad.tau2 = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidConfig);
}

TEST_CASE("generate_dataset: shape and determinism") {
  const SimConfig cfg = tiny_config();
  const GroupedDataset a = generate_dataset(cfg, 777);
  const GroupedDataset b = generate_dataset(cfg, 777);
  REQUIRE(a.groups.size() == static_cast<size_t>(cfg.g));
  CHECK(a.n == static_cast<long>(cfg.g) * cfg.n_i);
  CHECK(a.p == cfg.p);
  for (size_t i = 0; i < a.groups.size(); ++i) {
    CHECK((a.groups[i].x - b.groups[i].x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.groups[i].y - b.groups[i].y).cwiseAbs().maxCoeff() == 0.0);
  }
  const GroupedDataset c = generate_dataset(cfg, 778);
  CHECK((a.groups[0].y - c.groups[0].y).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("generate_dataset: noiseless limit recovers the regression line") {
  SimConfig cfg = tiny_config();
  cfg.contam_prob = 0.0;
  cfg.tau2 = 1e-12;
  cfg.sigma2 = 1e-12;
  const GroupedDataset ds = generate_dataset(cfg, 5);
  for (const Group& g : ds.groups) {
    const Vector fitted = g.x * cfg.beta_true;
    CHECK((g.y - fitted).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("generate_dataset: contamination frequency matches its probability") {
  SimConfig cfg;
  cfg.g = 200000;  // one million observations at n_i = 5
  long contaminated = 0;
  generate_dataset(cfg, 31, &contaminated);
  const double frac =
      static_cast<double>(contaminated) / static_cast<double>(cfg.g * cfg.n_i);
  CHECK(std::abs(frac - 0.1) <= 0.001);

  cfg.g = 100;
  cfg.contam_prob = 0.0;
  generate_dataset(cfg, 32, &contaminated);
  CHECK(contaminated == 0);
}

TEST_CASE("pseudo_true: clean quadratic unpenalized limit recovers beta") {
  SimConfig cfg = tiny_config();
  cfg.contam_prob = 0.0;
  cfg.c = 1e6;
  cfg.lambda = 1e-12;
  const PseudoTrue pt = pseudo_true(cfg, 400, 8, 99);
  CHECK(pt.se > 0.0);
  CHECK(std::abs(pt.value[0] - 2.0) <= 3.0 * pt.se + 1e-3);
  CHECK(pt.oracle_g == 400);
  CHECK(pt.oracle_reps == 8);
}

TEST_CASE("pseudo_true: huge penalty pulls the target to the ridge center") {
  SimConfig cfg = tiny_config();
  cfg.lambda = 1e6;
  const PseudoTrue pt = pseudo_true(cfg, 200, 5, 7);
  CHECK(std::abs(pt.value[0]) <= 3.0 * pt.se + 1e-4);
}

TEST_CASE("pseudo_true: stable across master seeds at the default design") {
  SimConfig cfg;  // default contaminated design
  const PseudoTrue a = pseudo_true(cfg, 800, 24, 1);
  const PseudoTrue b = pseudo_true(cfg, 800, 24, 2);
  CHECK(a.value[0] > 0.0);
  CHECK(a.value[0] < 2.0);  // shrunk away from the generating value
  const double gap_se = std::hypot(a.se, b.se);
  CHECK(std::abs(a.value[0] - b.value[0]) <= 3.0 * gap_se);

  CHECK_THROWS_AS(pseudo_true(cfg, 0, 10, 1), InvalidConfig);
  CHECK_THROWS_AS(pseudo_true(cfg, 100, 1, 1), InvalidConfig);
}

TEST_CASE("run_cell: frequentist output ignores the learning rate") {
  const SimConfig cfg = tiny_config();
  const CellResult low = run_cell(cfg, cfg.eta_grid[0], 0, 1);
  const CellResult high = run_cell(cfg, cfg.eta_grid[1], 1, 1);
  REQUIRE(low.ok);
  REQUIRE(high.ok);
  CHECK(low.frequentist.point == high.frequentist.point);
  CHECK(low.frequentist.lo == high.frequentist.lo);
  CHECK(low.frequentist.hi == high.frequentist.hi);
  CHECK(low.eta == cfg.eta_grid[0]);
  CHECK(low.rep == 1);
}

TEST_CASE("run_cell: small learning rates inflate only the raw interval") {
  SimConfig cfg = tiny_config();
  cfg.g = 60;
  cfg.iterations = 400;
  cfg.burn_in = 200;
  const CellResult cell = run_cell(cfg, 0.01, 0, 0);
  REQUIRE(cell.ok);
  const double uncal_width = cell.uncalibrated.hi - cell.uncalibrated.lo;
  const double cal_width = cell.calibrated.hi - cell.calibrated.lo;
  CHECK(uncal_width > cal_width);
}

TEST_CASE("aggregate: coverage, bias, and validation") {
  SimConfig cfg = tiny_config();
  cfg.eta_grid = {1.0};
  PseudoTrue target{Vector::Constant(1, 1.0), 10, 10, 0.01};

  // hand-built cells: points symmetric around the target, all covering
  std::vector<CellResult> cells;
  for (int rep = 0; rep < 2; ++rep) {
    CellResult cell;
    cell.eta_index = 0;
    cell.rep = rep;
    cell.eta = 1.0;
    cell.ok = true;
    const double point = rep == 0 ? 0.8 : 1.2;
    const MethodResult m{point, 0.0, 2.0};
    cell.frequentist = cell.uncalibrated = cell.calibrated = m;
    cells.push_back(cell);
  }

  const std::vector<MetricsRow> rows = aggregate(cells, target, cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].method == "calibrated");
  CHECK(rows[1].method == "frequentist");
  CHECK(rows[2].method == "uncalibrated");
  for (const MetricsRow& r : rows) {
    CHECK(r.coverage == 1.0);
    CHECK(r.mean_width == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.bias == doctest::Approx(0.0).epsilon(1e-15));
    // sample sd with divisor reps−1: sd({−0.2, 0.2}) = 0.2·√2
    CHECK(r.bias_sd ==
          doctest::Approx(std::sqrt(2.0) * 0.2).epsilon(1e-12));
    CHECK(r.reps == 2);
  }

  cells.pop_back();  // one replication left → too few
  CHECK_THROWS_AS(aggregate(cells, target, cfg), TooFewReps);
}

TEST_CASE("sweep: row count, ordering, and byte-identical reruns") {
  const SimConfig cfg = tiny_config();
  const PseudoTrue target{Vector::Constant(1, 0.8), 10, 10, 0.01};

  const SweepResult a = sweep(cfg, target, 2);
  REQUIRE(a.metrics.size() == 3 * cfg.eta_grid.size());
  REQUIRE(a.cells.size() ==
          cfg.eta_grid.size() * static_cast<size_t>(cfg.reps));

  // cells ordered by (η index, rep) regardless of scheduling
  for (size_t i = 0; i < a.cells.size(); ++i) {
    CHECK(a.cells[i].eta_index ==
          static_cast<int>(i) / cfg.reps);
    CHECK(a.cells[i].rep == static_cast<int>(i) % cfg.reps);
  }

  const std::string csv_a = metrics_csv(a.metrics);
  const SweepResult b = sweep(cfg, target, 1);  // different thread count
  CHECK(metrics_csv(b.metrics) == csv_a);

  // metrics rows are sorted by method then η
  CHECK(a.metrics[0].method == "calibrated");
  CHECK(a.metrics[0].eta == cfg.eta_grid[0]);
  CHECK(a.metrics[1].eta == cfg.eta_grid[1]);
  CHECK(a.metrics[2].method == "frequentist");
  CHECK(a.metrics[4].method == "uncalibrated");
}

TEST_CASE("metrics_csv and audit_csv: headers and schema") {
  const SimConfig cfg = tiny_config();
  const PseudoTrue target{Vector::Constant(1, 0.8), 10, 10, 0.01};
  const SweepResult result = sweep(cfg, target, 2);

  const std::string metrics = metrics_csv(result.metrics);
  CHECK(metrics.rfind("method,eta,coverage,mean_width,bias,bias_sd,reps\n",
                      0) == 0);
  size_t lines = 0;
  for (char ch : metrics) lines += ch == '\n' ? 1 : 0;
  CHECK(lines == 1 + result.metrics.size());

  const std::string audit = audit_csv(result.cells, target);
  CHECK(audit.rfind("method,eta,rep,point,lo,hi,covered\n", 0) == 0);
  size_t audit_lines = 0;
  for (char ch : audit) audit_lines += ch == '\n' ? 1 : 0;
  CHECK(audit_lines == 1 + 3 * result.cells.size());
}
