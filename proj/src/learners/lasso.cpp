#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "internal.hpp"

namespace mps {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc, double lambda,
                                         Eigen::VectorXd warm, int max_sweeps, double tol) {
  const Eigen::Index n = xc.rows(), p = xc.cols();
  if (warm.size() != p) warm = Eigen::VectorXd::Zero(p);
  const double nd = static_cast<double>(n);
  const Eigen::VectorXd c = xc.colwise().squaredNorm().transpose() / nd;
  Eigen::VectorXd resid = yc - xc * warm;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double biggest = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (c(j) == 0.0) {
        warm(j) = 0.0;
        continue;
      }
      const double old = warm(j);
      const double z = xc.col(j).dot(resid) / nd + c(j) * old;
      const double next = soft_threshold(z, lambda) / c(j);
      if (next != old) {
        resid -= (next - old) * xc.col(j);
        warm(j) = next;
        biggest = std::max(biggest, std::abs(next - old) * std::sqrt(c(j)));
      }
    }
    if (biggest < tol) return warm;
  }
  std::ostringstream msg;
  msg << "lasso coordinate descent did not converge at lambda=" << lambda << " after " << max_sweeps << " sweeps";
  throw std::runtime_error(msg.str());
}

std::vector<double> lasso_lambda_grid(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc, int n_lambda,
                                      double ratio) {
  if (n_lambda < 1) throw std::invalid_argument("n_lambda must be >= 1");
  const double lmax = (xc.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(xc.rows());
  std::vector<double> grid(static_cast<std::size_t>(n_lambda));
  if (n_lambda == 1) {
    grid[0] = lmax;
    return grid;
  }
  const double step = std::log(ratio) / (n_lambda - 1);
  for (int k = 0; k < n_lambda; ++k) grid[k] = lmax * std::exp(step * k);
  grid.back() = lmax * ratio;
  return grid;
}

namespace {

struct Centered {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::RowVectorXd xbar;
  double ybar = 0.0;
};

Centered center(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  Centered c;
  c.xbar = x.colwise().mean();
  c.ybar = y.mean();
  c.x = x.rowwise() - c.xbar;
  c.y = y.array() - c.ybar;
  return c;
}

FittedModel sparse_model(const Eigen::VectorXd& beta, const Centered& c) {
  IndexList support;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) support.push_back(static_cast<int>(j));
  Eigen::VectorXd coef(static_cast<Eigen::Index>(support.size()));
  double intercept = c.ybar;
  for (std::size_t k = 0; k < support.size(); ++k) {
    coef(static_cast<Eigen::Index>(k)) = beta(support[k]);
    intercept -= c.xbar(support[k]) * beta(support[k]);
  }
  return linear_model(std::move(support), intercept, std::move(coef));
}

}  // namespace

LassoCvResult lasso_cv(const DataMatrix& data, int folds, int n_lambda, std::uint64_t seed) {
  const Centered full = center(data.x, data.y);
  LassoCvResult res;
  res.lambdas = lasso_lambda_grid(full.x, full.y, n_lambda);
  res.cv_mse.assign(res.lambdas.size(), 0.0);

  const auto labels = assign_folds(data.n(), folds, seed);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, te;
    for (int i = 0; i < data.n(); ++i) (labels[i] == f ? te : tr).push_back(i);
    const Centered c = center(data.x(tr, Eigen::all), data.y(tr));
    const Eigen::MatrixXd xte = data.x(te, Eigen::all);
    const Eigen::VectorXd yte = data.y(te);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
    for (std::size_t k = 0; k < res.lambdas.size(); ++k) {
      beta = lasso_coordinate_descent(c.x, c.y, res.lambdas[k], beta);
      const double intercept = c.ybar - c.xbar.dot(beta);
      res.cv_mse[k] += ((yte - xte * beta).array() - intercept).square().sum();
    }
  }
  for (double& e : res.cv_mse) e /= static_cast<double>(data.n());

  // First minimum: ties go to the larger penalty.
  const auto best = static_cast<std::size_t>(std::min_element(res.cv_mse.begin(), res.cv_mse.end()) -
                                             res.cv_mse.begin());
  res.lambda = res.lambdas[best];
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(data.p());
  for (std::size_t k = 0; k <= best; ++k) beta = lasso_coordinate_descent(full.x, full.y, res.lambdas[k], beta);
  res.model = sparse_model(beta, full);
  return res;
}

FittedModel oracle_fit(const DataMatrix& data, const Eigen::VectorXd& beta_true) {
  if (beta_true.size() != data.p()) throw std::invalid_argument("oracle_fit: beta_true must have length p");
  IndexList support;
  for (Eigen::Index j = 0; j < beta_true.size(); ++j)
    if (beta_true(j) != 0.0) support.push_back(static_cast<int>(j));
  return fit(ModelClass{}, data, support);
}

}  // namespace mps
