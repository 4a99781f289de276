#pragma once

// Dense-block fitting routines shared by the learners. Inputs hold only the
// model's own columns (no intercept column); the intercept is always fitted.

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "mps/learners.hpp"

namespace mps::detail {

struct LinearFit {
  double intercept = 0.0;
  Eigen::VectorXd beta;
};

/// Rows `rows` and columns `cols` of data.x, in that order.
Eigen::MatrixXd gather(const DataMatrix& data, std::span<const int> rows, std::span<const int> cols);
Eigen::VectorXd gather(const Eigen::VectorXd& v, std::span<const int> rows);

/// Minimum-norm least squares on centered columns.
LinearFit ols_solve(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y);

/// IRLS with step halving. When `deviance_trace` is given, the deviance after
/// every accepted iterate (starting with the initial point) is appended.
LinearFit logistic_irls(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, const ModelClass& mc,
                        std::vector<double>* deviance_trace = nullptr);

/// Binomial deviance of a logistic linear predictor.
double logistic_deviance(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, const LinearFit& fit);

double sigmoid(double eta);

/// Greedy CART on squared error. Node features index columns of xs.
std::vector<TreeNode> grow_tree(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, int max_depth, int min_leaf);

/// Effective tree depth for a model with `n_covariates` columns.
int tree_depth_for(const ModelClass& mc, int n_covariates);

/// Fitted model on an already-gathered block; `covariates` names its columns.
FittedModel fit_block(const ModelClass& mc, const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                      const IndexList& covariates);

/// Predictions for a block whose columns are the model's covariates in order.
Eigen::VectorXd predict_block(const FittedModel& model, const Eigen::MatrixXd& xs);

/// Throws DataError unless every response value is 0 or 1.
void require_binary(const Eigen::VectorXd& y);

}  // namespace mps::detail
