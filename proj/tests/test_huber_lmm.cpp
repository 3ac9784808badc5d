#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "gbcalib/dataset_io.hpp"
#include "gbcalib/huber_lmm.hpp"
#include "gbcalib/rng.hpp"

using namespace gbcalib;

namespace {

GroupedDataset seeded_dataset(int g, int n_i, int p, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Group> groups;
  for (int i = 0; i < g; ++i) {
    Group grp;
    grp.x.resize(n_i, p);
    grp.y.resize(n_i);
    for (int j = 0; j < n_i; ++j) {
      for (int k = 0; k < p; ++k) grp.x(j, k) = rng.normal();
      grp.y[j] = rng.normal() * 2.0;
    }
    groups.push_back(std::move(grp));
  }
  return make_dataset(std::move(groups));
}

// smallest distance from any residual to a Huber kink at ±c
double kink_distance(const WhitenedDataset& wd, const Vector& beta, double c) {
  double dist = 1e300;
  for (const WhitenedGroup& g : wd.groups) {
    const Vector r = g.y - g.x * beta;
    for (Eigen::Index j = 0; j < r.size(); ++j)
      dist = std::min(dist, std::abs(std::abs(r[j]) - c));
  }
  return dist;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("make_dataset: shape validation") {
  Group good{Matrix::Ones(2, 1), Vector::Ones(2)};
  const GroupedDataset ds = make_dataset({good, good});
  CHECK(ds.n == 4);
  CHECK(ds.p == 1);

  CHECK_THROWS_AS(make_dataset({}), DimensionMismatch);
  Group short_y{Matrix::Ones(2, 1), Vector::Ones(1)};
  CHECK_THROWS_AS(make_dataset({short_y}), DimensionMismatch);
  Group wider{Matrix::Ones(2, 2), Vector::Ones(2)};
  CHECK_THROWS_AS(make_dataset({good, wider}), DimensionMismatch);
}

TEST_CASE("huber_rho and huber_psi: branch values") {
  CHECK(huber_rho(0.0, 1.0) == 0.0);
  CHECK(huber_rho(0.5, 1.0) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(huber_rho(2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(huber_rho(-2.0, 1.0) == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(huber_psi(0.0, 1.0) == 0.0);
  CHECK(huber_psi(3.0, 1.0) == 1.0);
  CHECK(huber_psi(-3.0, 1.0) == -1.0);
  CHECK(huber_psi(0.25, 1.0) == 0.25);
  CHECK(huber_psi(1.0, 1.0) == 1.0);  // boundary takes the clamped value
}

TEST_CASE("whiten: single-observation group scales by sqrt(tau2+sigma2)") {
  Group g{Matrix::Constant(1, 1, 2.0), Vector::Constant(1, 6.0)};
  const GroupedDataset ds = make_dataset({g});
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  const double root3 = std::sqrt(3.0);
  CHECK(wd.groups[0].y[0] == doctest::Approx(6.0 / root3).epsilon(1e-14));
  CHECK(wd.groups[0].x(0, 0) == doctest::Approx(2.0 / root3).epsilon(1e-14));
}

TEST_CASE("whiten: vanishing intercept variance approaches the identity") {
  const GroupedDataset ds = seeded_dataset(3, 4, 2, 11);
  const WhitenedDataset wd = whiten(ds, WorkingCov{1e-12, 1.0});
  for (size_t i = 0; i < ds.groups.size(); ++i) {
    CHECK((wd.groups[i].x - ds.groups[i].x).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((wd.groups[i].y - ds.groups[i].y).cwiseAbs().maxCoeff() <= 1e-5);
  }
}

TEST_CASE("whiten: closed form matches the dense symmetric-root oracle") {
  const int n_i = 5;
  const GroupedDataset ds = seeded_dataset(1, n_i, 2, 17);
  const WorkingCov cov{2.0, 1.0};
  const WhitenedDataset wd = whiten(ds, cov);

  // generic path: factor Σ = tau2·11ᵀ + sigma2·I with the
  // eigendecomposition and apply inv_sqrt directly
  Matrix sigma = Matrix::Constant(n_i, n_i, cov.tau2) +
                 cov.sigma2 * Matrix::Identity(n_i, n_i);
  const SpdFactor f = sym_sqrt(SymMatrix(sigma));
  const Matrix x_oracle = f.inv_sqrt.dense() * ds.groups[0].x;
  const Vector y_oracle = f.inv_sqrt.dense() * ds.groups[0].y;

  CHECK((wd.groups[0].x - x_oracle).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((wd.groups[0].y - y_oracle).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("whiten: the transformation is invertible") {
  const int n_i = 4;
  const GroupedDataset ds = seeded_dataset(2, n_i, 3, 23);
  const WorkingCov cov{2.0, 1.0};
  const WhitenedDataset wd = whiten(ds, cov);

  const double a = std::sqrt(cov.sigma2);
  const double s = std::sqrt(cov.sigma2 + n_i * cov.tau2);
  const double b = (s - a) / n_i;
  const Matrix l = a * Matrix::Identity(n_i, n_i) +
                   b * Matrix::Ones(n_i, n_i);
  for (size_t i = 0; i < ds.groups.size(); ++i) {
    const Matrix back = l * wd.groups[i].x;
    CHECK((back - ds.groups[i].x).norm() <= 1e-9 * ds.groups[i].x.norm());
  }
}

TEST_CASE("whiten: invalid variance components are rejected") {
  const GroupedDataset ds = seeded_dataset(2, 2, 1, 3);
  CHECK_THROWS_AS(whiten(ds, WorkingCov{0.0, 1.0}), InvalidConfig);
  CHECK_THROWS_AS(whiten(ds, WorkingCov{1.0, -1.0}), InvalidConfig);
}

TEST_CASE("loss: exact values on hand-built residuals") {
  // one group, identity x, so residual == y − β
  Group g{Matrix::Identity(1, 1), Vector::Constant(1, 0.5)};
  WhitenedDataset wd{{WhitenedGroup{g.x, g.y}}, 1, 1};
  const Vector beta = Vector::Zero(1);
  CHECK(loss(wd, beta, HuberSpec{1.0}) ==
        doctest::Approx(0.125).epsilon(1e-15));

  wd.groups[0].y[0] = 2.0;
  CHECK(loss(wd, beta, HuberSpec{1.0}) == doctest::Approx(1.5).epsilon(1e-15));

  wd.groups[0].y[0] = 0.0;
  CHECK(loss(wd, beta, HuberSpec{1.0}) == 0.0);

  CHECK_THROWS_AS(loss(wd, Vector::Zero(2), HuberSpec{1.0}),
                  DimensionMismatch);
}

TEST_CASE("score: zero at zero residuals, clipped under saturation") {
  WhitenedDataset wd{{WhitenedGroup{Matrix::Ones(1, 1), Vector::Zero(1)}}, 1,
                     1};
  CHECK(score(wd, Vector::Zero(1), HuberSpec{1.0})[0] == 0.0);

  wd.groups[0].y[0] = 3.0;  // residual 3 clips at c = 1
  CHECK(score(wd, Vector::Zero(1), HuberSpec{1.0})[0] ==
        doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("score: matches central finite differences away from kinks") {
  const GroupedDataset ds = seeded_dataset(10, 4, 2, 31);
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  const HuberSpec h{1.0};
  const double step = 1e-6;

  Rng rng(32);
  int tested = 0;
  while (tested < 5) {
    Vector beta(2);
    beta << rng.normal(), rng.normal();
    if (kink_distance(wd, beta, h.c) <= 1e-3) continue;
    const Vector g = score(wd, beta, h);
    for (int k = 0; k < 2; ++k) {
      Vector hi = beta, lo = beta;
      hi[k] += step;
      lo[k] -= step;
      const double fd = (loss(wd, hi, h) - loss(wd, lo, h)) /
                        (2.0 * step * static_cast<double>(wd.n));
      CHECK(std::abs(g[k] - fd) <= 1e-6);
    }
    ++tested;
  }
}

TEST_CASE("hessian: weight-set extremes") {
  // all residuals far outside [−c, c]: zero curvature
  WhitenedDataset wd{{WhitenedGroup{Matrix::Ones(2, 1),
                                    Vector::Constant(2, 100.0)}},
                     2, 1};
  CHECK(hessian(wd, Vector::Zero(1), HuberSpec{1.0})(0, 0) == 0.0);

  // all inside: n⁻¹ Σ x̃ᵀx̃ exactly
  wd.groups[0].y = Vector::Constant(2, 0.5);
  CHECK(hessian(wd, Vector::Zero(1), HuberSpec{1.0})(0, 0) ==
        doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("hessian: matches finite differences of the score") {
  const GroupedDataset ds = seeded_dataset(8, 5, 2, 41);
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  const HuberSpec h{1.0};
  const double step = 1e-6;

  Rng rng(42);
  int tested = 0;
  while (tested < 5) {
    Vector beta(2);
    beta << rng.normal(), rng.normal();
    if (kink_distance(wd, beta, h.c) <= 1e-3) continue;
    const Matrix jac = hessian(wd, beta, h).dense();
    for (int k = 0; k < 2; ++k) {
      Vector hi = beta, lo = beta;
      hi[k] += step;
      lo[k] -= step;
      const Vector fd = (score(wd, hi, h) - score(wd, lo, h)) / (2.0 * step);
      CHECK((jac.col(k) - fd).cwiseAbs().maxCoeff() <= 1e-5);
    }
    ++tested;
  }
}

TEST_CASE("hessian and k_hat: PSD on seeded inputs") {
  const GroupedDataset ds = seeded_dataset(6, 3, 3, 51);
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  Rng rng(52);
  for (int trial = 0; trial < 10; ++trial) {
    Vector beta(3);
    beta << rng.normal(), rng.normal(), rng.normal();
    const Eigen::SelfAdjointEigenSolver<Matrix> ej(
        hessian(wd, beta, HuberSpec{1.0}).dense());
    const Eigen::SelfAdjointEigenSolver<Matrix> ek(
        k_hat(wd, beta, HuberSpec{1.0}).dense());
    CHECK(ej.eigenvalues().minCoeff() >= -1e-12);
    CHECK(ek.eigenvalues().minCoeff() >= -1e-12);
  }
}

TEST_CASE("k_hat: direct two-group sum") {
  // groups engineered so Û₁ = 1, Û₂ = −1; K̂ = (1 + 1)/2 = 1
  WhitenedDataset wd{{WhitenedGroup{Matrix::Ones(1, 1),
                                    Vector::Constant(1, -3.0)},
                      WhitenedGroup{Matrix::Ones(1, 1),
                                    Vector::Constant(1, 3.0)}},
                     2, 1};
  const SymMatrix k = k_hat(wd, Vector::Zero(1), HuberSpec{1.0});
  CHECK(k(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("k_hat: zero residuals give the zero matrix") {
  WhitenedDataset wd{{WhitenedGroup{Matrix::Ones(1, 1), Vector::Zero(1)},
                      WhitenedGroup{Matrix::Ones(1, 1), Vector::Zero(1)}},
                     2, 1};
  CHECK(k_hat(wd, Vector::Zero(1), HuberSpec{1.0})(0, 0) == 0.0);
}

TEST_CASE("k_hat: matches a naive per-group loop") {
  const GroupedDataset ds = seeded_dataset(7, 4, 2, 61);
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  const HuberSpec h{1.0};
  Vector beta(2);
  beta << 0.3, -0.8;

  Matrix naive = Matrix::Zero(2, 2);
  for (const WhitenedGroup& g : wd.groups) {
    Vector u = Vector::Zero(2);
    for (Eigen::Index j = 0; j < g.y.size(); ++j) {
      const double r = g.y[j] - g.x.row(j).dot(beta);
      u -= g.x.row(j).transpose() * huber_psi(r, h.c);
    }
    naive += u * u.transpose();
  }
  naive /= static_cast<double>(wd.n);

  CHECK((k_hat(wd, beta, h).dense() - naive).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("k_hat: a single group is rejected") {
  WhitenedDataset wd{{WhitenedGroup{Matrix::Ones(2, 1), Vector::Ones(2)}}, 2,
                     1};
  CHECK_THROWS_AS(k_hat(wd, Vector::Zero(1), HuberSpec{1.0}), TooFewGroups);
}

TEST_CASE("loss: convexity along seeded segments") {
  const GroupedDataset ds = seeded_dataset(5, 4, 2, 71);
  const WhitenedDataset wd = whiten(ds, WorkingCov{2.0, 1.0});
  const HuberSpec h{1.0};
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    Vector b1(2), b2(2);
    b1 << rng.normal(), rng.normal();
    b2 << rng.normal(), rng.normal();
    for (double w : {0.25, 0.5, 0.75}) {
      const Vector mid = w * b1 + (1.0 - w) * b2;
      CHECK(loss(wd, mid, h) <=
            w * loss(wd, b1, h) + (1.0 - w) * loss(wd, b2, h) + 1e-9);
    }
  }
}

TEST_CASE("dataset CSV: write/load round trip preserves values") {
  const GroupedDataset ds = seeded_dataset(3, 2, 2, 81);
  const std::string path = temp_path("gbcalib_test_roundtrip.csv");
  write_dataset_csv(path, ds);
  const GroupedDataset back = load_dataset_csv(path);
  REQUIRE(back.groups.size() == ds.groups.size());
  CHECK(back.n == ds.n);
  CHECK(back.p == ds.p);
  for (size_t i = 0; i < ds.groups.size(); ++i) {
    CHECK((back.groups[i].x - ds.groups[i].x).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.groups[i].y - ds.groups[i].y).cwiseAbs().maxCoeff() == 0.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("dataset CSV: non-contiguous group ids regroup by id") {
  const std::string path = temp_path("gbcalib_test_scattered.csv");
  {
    std::ofstream out(path);
    out << "group_id,y,x_1\n"
        << "1,1.0,0.1\n"
        << "2,2.0,0.2\n"
        << "1,3.0,0.3\n";
  }
  const GroupedDataset ds = load_dataset_csv(path);
  REQUIRE(ds.groups.size() == 2);
  CHECK(ds.groups[0].y.size() == 2);  // id 1, first appearance order
  CHECK(ds.groups[0].y[1] == 3.0);
  CHECK(ds.groups[1].y.size() == 1);
  std::remove(path.c_str());
}

TEST_CASE("dataset CSV: malformed rows report the line number") {
  const std::string path = temp_path("gbcalib_test_malformed.csv");
  {
    std::ofstream out(path);
    out << "group_id,y,x_1\n"
        << "1,1.0,0.1\n"
        << "1,oops,0.2\n";
  }
  try {
    load_dataset_csv(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(load_dataset_csv(temp_path("gbcalib_no_such_file.csv")),
                  ParseError);
}

TEST_CASE("draws CSV: round trip") {
  Matrix draws(3, 2);
  draws << 1.0, 2.0, 3.5, -4.0, 0.25, 1e-17;
  const std::string path = temp_path("gbcalib_test_draws.csv");
  write_draws_csv(path, draws, "beta_");
  const Matrix back = load_draws_csv(path);
  CHECK((back - draws).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("g17 formatting round-trips doubles") {
  for (double v : {0.1, 1.0 / 3.0, 1.9599639845400536, 1e-300, -2.5}) {
    CHECK(std::stod(g17(v)) == v);
  }
}
