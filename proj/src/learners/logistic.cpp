#include <Eigen/QR>
#include <cmath>

#include "internal.hpp"

namespace mps::detail {

namespace {

constexpr double kInterceptBound = 1e3;

// log(1 + exp(eta)) without overflow.
double log1pexp(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

void clamp(LinearFit& f) {
  f.intercept = std::clamp(f.intercept, -kInterceptBound, kInterceptBound);
  f.beta = f.beta.cwiseMax(-kLogisticClamp).cwiseMin(kLogisticClamp);
}

}  // namespace

double sigmoid(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

void require_binary(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) != 0.0 && y(i) != 1.0) throw DataError("logistic regression needs a 0/1 response");
}

double logistic_deviance(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, const LinearFit& fit) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double eta = fit.intercept + (xs.cols() ? xs.row(i).dot(fit.beta) : 0.0);
    dev += log1pexp(eta) - y(i) * eta;
  }
  return 2.0 * dev;
}

LinearFit logistic_irls(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, const ModelClass& mc,
                        std::vector<double>* trace) {
  require_binary(y);
  const Eigen::Index m = xs.rows(), k = xs.cols();
  const double ybar = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);

  LinearFit cur;
  cur.intercept = std::log(ybar / (1.0 - ybar));
  cur.beta = Eigen::VectorXd::Zero(k);
  double dev = logistic_deviance(xs, y, cur);
  if (trace) trace->push_back(dev);
  if (k == 0) return cur;

  Eigen::MatrixXd design(m, k + 1);
  design.col(0).setOnes();
  design.rightCols(k) = xs;

  for (int it = 0; it < mc.logistic_max_iter; ++it) {
    Eigen::VectorXd w(m), resid(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double p = sigmoid(cur.intercept + xs.row(i).dot(cur.beta));
      w(i) = std::max(p * (1.0 - p), 1e-10);
      resid(i) = y(i) - p;
    }
    const Eigen::MatrixXd hessian = design.transpose() * w.asDiagonal() * design;
    const Eigen::VectorXd grad = design.transpose() * resid;
    const Eigen::VectorXd step = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(hessian).solve(grad);
    if (!step.allFinite()) break;

    // Halve the Newton step until the (clamped) iterate does not raise the deviance.
    double t = 1.0;
    LinearFit next;
    double next_dev = dev;
    bool accepted = false;
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      next.intercept = cur.intercept + t * step(0);
      next.beta = cur.beta + t * step.tail(k);
      clamp(next);
      next_dev = logistic_deviance(xs, y, next);
      if (next_dev <= dev) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double change = dev - next_dev;
    cur = next;
    dev = next_dev;
    if (trace) trace->push_back(dev);
    if (change < mc.logistic_tol * (std::abs(dev) + 0.1)) break;
  }
  return cur;
}

}  // namespace mps::detail
