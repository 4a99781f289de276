#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mps/common.hpp"
#include "mps/datasets.hpp"

namespace mps {

enum class ModelKind { ols, logistic, tree };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Model family plus its fitting knobs.
struct ModelClass {
  ModelKind kind = ModelKind::ols;
  /// Unset: the number of covariates in the model being fitted (at least 1).
  std::optional<int> tree_max_depth;
  int tree_min_leaf = 5;
  int logistic_max_iter = 25;
  double logistic_tol = 1e-8;

  void validate() const;
  bool operator==(const ModelClass&) const = default;
};

template <class Json>
void to_json(Json& j, const ModelClass& mc) {
  j = Json::object();
  j["kind"] = to_string(mc.kind);
  if (mc.tree_max_depth)
    j["tree_max_depth"] = *mc.tree_max_depth;
  else
    j["tree_max_depth"] = nullptr;
  j["tree_min_leaf"] = mc.tree_min_leaf;
  j["logistic_max_iter"] = mc.logistic_max_iter;
  j["logistic_tol"] = mc.logistic_tol;
}

template <class Json>
void from_json(const Json& j, ModelClass& mc) {
  mc.kind = parse_model_kind(j.at("kind").template get<std::string>());
  const auto& depth = j.at("tree_max_depth");
  mc.tree_max_depth = depth.is_null() ? std::nullopt : std::optional<int>(depth.template get<int>());
  j.at("tree_min_leaf").get_to(mc.tree_min_leaf);
  j.at("logistic_max_iter").get_to(mc.logistic_max_iter);
  j.at("logistic_tol").get_to(mc.logistic_tol);
  mc.validate();
}

/// Only squared error is implemented; for logistic and tree models it is
/// applied to the predicted probability / leaf mean.
enum class LossKind { squared_error };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

/// Largest coefficient magnitude logistic IRLS may reach (separated data).
inline constexpr double kLogisticClamp = 30.0;

struct TreeNode {
  int feature = -1;  // position in FittedModel::covariates; -1 marks a leaf
  double threshold = 0.0;  // go left when x <= threshold
  double value = 0.0;
  int left = -1;
  int right = -1;

  bool operator==(const TreeNode&) const = default;
};

struct FittedModel {
  ModelClass model_class;
  IndexList covariates;
  double intercept = 0.0;
  Eigen::VectorXd coefficients;  // ols / logistic, aligned with covariates
  std::vector<TreeNode> tree;    // tree only; node 0 is the root

  /// Predictions for rows of a full-width covariate matrix.
  Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;
  /// True for ols (and lasso) fits: prediction is intercept + x'b.
  bool is_linear() const { return model_class.kind == ModelKind::ols; }
  int leaf_count() const;
};

/// JSON: class, covariate names, parameters.
nlohmann::ordered_json model_to_json(const FittedModel& model, std::span<const std::string> names);

/// Fits `covariates` of `data` with an intercept.
///  ols:      minimum-norm least squares on centered columns.
///  logistic: IRLS with step halving; coefficients clamped to |b| <= 30.
///  tree:     greedy CART on squared error.
/// An empty covariate list gives the intercept-only model.
FittedModel fit(const ModelClass& model_class, const DataMatrix& data, const IndexList& covariates);

/// Mean squared prediction error on `data`.
double loss(const FittedModel& model, const DataMatrix& data);

struct ScoringOptions {
  /// 0: score in-sample. Otherwise this fraction of the rows (evenly
  /// interleaved) is held out and the loss is measured there.
  double holdout_fraction = 0.0;
};

/// Loss of selected + [k] for each candidate k, on the given rows.
/// Candidates constant on those rows score +infinity.
std::vector<double> score_candidates(const ModelClass& model_class, const DataMatrix& data,
                                     std::span<const int> rows, const IndexList& selected,
                                     const IndexList& candidates, const ScoringOptions& opts = {});

/// Candidate minimizing the loss of selected + [k]; ties go to the smallest
/// column index. Throws NoAdmissibleCovariate when every candidate is degenerate.
int best_next_covariate(const ModelClass& model_class, const DataMatrix& data, const IndexList& selected,
                        const IndexList& candidates, const ScoringOptions& opts = {});

/// As above, restricted to a subset of rows. `rows` should be ascending.
int best_next_covariate(const ModelClass& model_class, const DataMatrix& data, std::span<const int> rows,
                        const IndexList& selected, const IndexList& candidates,
                        const ScoringOptions& opts = {});

/// Greedy forward selection of d covariates on all rows.
IndexList forward_select(const ModelClass& model_class, const DataMatrix& data, int d,
                         const ScoringOptions& opts = {});

/// Model size in [1, max_depth] minimizing k-fold CV error of forward selection.
struct CvDepthResult {
  int depth = 1;
  std::vector<double> cv_mse;  // index k-1 holds the error of the k-covariate model
};
CvDepthResult cv_forward_depth(const ModelClass& model_class, const DataMatrix& data, int folds, int max_depth,
                               std::uint64_t seed);

/// Seeded fold labels in [0, folds), as balanced as possible.
std::vector<int> assign_folds(int n, int folds, std::uint64_t seed);

/// Soft-thresholding operator S(z, t).
double soft_threshold(double z, double t);

/// Cyclic coordinate descent for (1/2n)||y - Xb||^2 + lambda ||b||_1 on
/// centered x and y. Starts from `warm`; throws std::runtime_error after
/// max_sweeps without the largest weighted coefficient change dropping below tol.
Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc, double lambda,
                                         Eigen::VectorXd warm, int max_sweeps = 10000, double tol = 1e-7);

/// Log-spaced grid from max_j |x_j'y|/n (centered) down to ratio * that.
std::vector<double> lasso_lambda_grid(const Eigen::MatrixXd& xc, const Eigen::VectorXd& yc, int n_lambda,
                                      double ratio = 1e-3);

struct LassoCvResult {
  FittedModel model;  // linear, covariates = non-zero coefficients
  double lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> cv_mse;
};

/// K-fold cross-validated lasso over a shared lambda grid, refit on all rows.
LassoCvResult lasso_cv(const DataMatrix& data, int folds = 10, int n_lambda = 100, std::uint64_t seed = 0);

/// OLS on the support of beta_true (intercept-only when beta_true is zero).
FittedModel oracle_fit(const DataMatrix& data, const Eigen::VectorXd& beta_true);

/// OLS fitted model with explicit coefficients (intercept + slopes on covariates).
FittedModel linear_model(IndexList covariates, double intercept, Eigen::VectorXd coefficients);

}  // namespace mps
