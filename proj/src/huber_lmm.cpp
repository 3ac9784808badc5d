#include "gbcalib/huber_lmm.hpp"

#include <cmath>

namespace gbcalib {

GroupedDataset make_dataset(std::vector<Group> groups) {
  if (groups.empty()) throw DimensionMismatch("dataset has no groups");
  GroupedDataset ds;
  ds.p = static_cast<int>(groups.front().x.cols());
  if (ds.p < 1) throw DimensionMismatch("covariate dimension must be >= 1");
  for (const Group& g : groups) {
    if (g.x.rows() < 1)
      throw DimensionMismatch("every group needs at least one row");
    if (g.x.cols() != ds.p)
      throw DimensionMismatch("covariate width differs between groups");
    if (g.x.rows() != g.y.size())
      throw DimensionMismatch("x rows and y length differ within a group");
    ds.n += g.x.rows();
  }
  ds.groups = std::move(groups);
  return ds;
}

WhitenedDataset whiten(const GroupedDataset& data, const WorkingCov& cov) {
  if (!(cov.tau2 > 0.0) || !(cov.sigma2 > 0.0))
    throw InvalidConfig("working variances must be strictly positive");
  WhitenedDataset wd;
  wd.n = data.n;
  wd.p = data.p;
  wd.groups.reserve(data.groups.size());
  const double a = std::sqrt(cov.sigma2);
  for (const Group& g : data.groups) {
    const double ni = static_cast<double>(g.x.rows());
    const double s = std::sqrt(cov.sigma2 + ni * cov.tau2);
    const double shift = (1.0 / s - 1.0 / a) / ni;
    // L⁻¹ z = z/a + shift·1(1ᵀz)
    WhitenedGroup wg;
    wg.x = g.x / a;
    const Eigen::RowVectorXd col_sums = g.x.colwise().sum();
    wg.x.rowwise() += shift * col_sums;
    wg.y = g.y / a;
    wg.y.array() += shift * g.y.sum();
    wd.groups.push_back(std::move(wg));
  }
  return wd;
}

namespace {
void check_beta(const WhitenedDataset& wd, const Vector& beta) {
  if (beta.size() != wd.p)
    throw DimensionMismatch("beta length does not match covariate dimension");
}
}  // namespace

double loss(const WhitenedDataset& wd, const Vector& beta,
            const HuberSpec& h) {
  check_beta(wd, beta);
  double total = 0.0;
  for (const WhitenedGroup& g : wd.groups) {
    const Vector r = g.y - g.x * beta;
    for (Eigen::Index j = 0; j < r.size(); ++j)
      total += huber_rho(r[j], h.c);
  }
  return total;
}

Vector score(const WhitenedDataset& wd, const Vector& beta,
             const HuberSpec& h) {
  check_beta(wd, beta);
  Vector acc = Vector::Zero(wd.p);
  for (const WhitenedGroup& g : wd.groups) {
    Vector r = g.y - g.x * beta;
    for (Eigen::Index j = 0; j < r.size(); ++j) r[j] = huber_psi(r[j], h.c);
    acc.noalias() += g.x.transpose() * r;
  }
  return -acc / static_cast<double>(wd.n);
}

SymMatrix hessian(const WhitenedDataset& wd, const Vector& beta,
                  const HuberSpec& h) {
  check_beta(wd, beta);
  Matrix acc = Matrix::Zero(wd.p, wd.p);
  for (const WhitenedGroup& g : wd.groups) {
    const Vector r = g.y - g.x * beta;
    for (Eigen::Index j = 0; j < r.size(); ++j) {
      if (std::abs(r[j]) <= h.c)
        acc.noalias() += g.x.row(j).transpose() * g.x.row(j);
    }
  }
  return SymMatrix(Matrix(acc / static_cast<double>(wd.n)));
}

SymMatrix k_hat(const WhitenedDataset& wd, const Vector& beta,
                const HuberSpec& h) {
  check_beta(wd, beta);
  if (wd.groups.size() < 2)
    throw TooFewGroups("score-variance estimator needs at least 2 groups");
  Matrix acc = Matrix::Zero(wd.p, wd.p);
  for (const WhitenedGroup& g : wd.groups) {
    Vector r = g.y - g.x * beta;
    for (Eigen::Index j = 0; j < r.size(); ++j) r[j] = huber_psi(r[j], h.c);
    const Vector u = -(g.x.transpose() * r);
    acc.noalias() += u * u.transpose();
  }
  return SymMatrix(Matrix(acc / static_cast<double>(wd.n)));
}

}  // namespace gbcalib
