#include <stdexcept>

#include "internal.hpp"

namespace mps {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ols:
      return "ols";
    case ModelKind::logistic:
      return "logistic";
    case ModelKind::tree:
      return "tree";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ols") return ModelKind::ols;
  if (name == "logistic") return ModelKind::logistic;
  if (name == "tree") return ModelKind::tree;
  throw std::invalid_argument("unknown model class '" + std::string(name) + "'");
}

std::string to_string(LossKind) { return "squared_error"; }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "squared_error") return LossKind::squared_error;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "'");
}

void ModelClass::validate() const {
  if (tree_max_depth && *tree_max_depth < 1) throw std::invalid_argument("tree_max_depth must be >= 1");
  if (tree_min_leaf < 1) throw std::invalid_argument("tree_min_leaf must be >= 1");
  if (logistic_max_iter < 1) throw std::invalid_argument("logistic_max_iter must be >= 1");
  if (!(logistic_tol > 0.0)) throw std::invalid_argument("logistic_tol must be positive");
}

int FittedModel::leaf_count() const {
  int leaves = 0;
  for (const auto& nd : tree) leaves += nd.feature < 0;
  return leaves;
}

namespace detail {

FittedModel fit_block(const ModelClass& mc, const Eigen::MatrixXd& xs, const Eigen::VectorXd& y,
                      const IndexList& covariates) {
  FittedModel model;
  model.model_class = mc;
  model.covariates = covariates;
  switch (mc.kind) {
    case ModelKind::ols: {
      auto f = ols_solve(xs, y);
      model.intercept = f.intercept;
      model.coefficients = std::move(f.beta);
      break;
    }
    case ModelKind::logistic: {
      auto f = logistic_irls(xs, y, mc);
      model.intercept = f.intercept;
      model.coefficients = std::move(f.beta);
      break;
    }
    case ModelKind::tree:
      model.tree = grow_tree(xs, y, tree_depth_for(mc, static_cast<int>(xs.cols())), mc.tree_min_leaf);
      model.coefficients.resize(0);
      break;
  }
  return model;
}

Eigen::VectorXd predict_block(const FittedModel& model, const Eigen::MatrixXd& xs) {
  const Eigen::Index m = xs.rows();
  Eigen::VectorXd out(m);
  switch (model.model_class.kind) {
    case ModelKind::ols:
      out.setConstant(model.intercept);
      if (xs.cols()) out += xs * model.coefficients;
      break;
    case ModelKind::logistic:
      for (Eigen::Index i = 0; i < m; ++i)
        out(i) = sigmoid(model.intercept + (xs.cols() ? xs.row(i).dot(model.coefficients) : 0.0));
      break;
    case ModelKind::tree:
      for (Eigen::Index i = 0; i < m; ++i) {
        int node = 0;
        while (model.tree[node].feature >= 0)
          node = xs(i, model.tree[node].feature) <= model.tree[node].threshold ? model.tree[node].left
                                                                                 : model.tree[node].right;
        out(i) = model.tree[node].value;
      }
      break;
  }
  return out;
}

}  // namespace detail

Eigen::VectorXd FittedModel::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd xs(x.rows(), static_cast<Eigen::Index>(covariates.size()));
  for (std::size_t c = 0; c < covariates.size(); ++c) {
    if (covariates[c] < 0 || covariates[c] >= x.cols()) throw std::out_of_range("model covariate index out of range");
    xs.col(static_cast<Eigen::Index>(c)) = x.col(covariates[c]);
  }
  return detail::predict_block(*this, xs);
}

FittedModel fit(const ModelClass& mc, const DataMatrix& data, const IndexList& covariates) {
  mc.validate();
  if (data.n() < 2) throw DataError("fit needs at least 2 rows");
  if (!data.x.allFinite() || !data.y.allFinite()) throw DataError("fit: data contains non-finite values");
  std::vector<bool> used(static_cast<std::size_t>(data.p()), false);
  for (int c : covariates) {
    if (c < 0 || c >= data.p()) throw std::out_of_range("fit: covariate index out of range");
    if (used[c]) throw std::invalid_argument("fit: duplicate covariate");
    used[c] = true;
  }
  std::vector<int> rows(static_cast<std::size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) rows[i] = i;
  return detail::fit_block(mc, detail::gather(data, rows, covariates), data.y, covariates);
}

double loss(const FittedModel& model, const DataMatrix& data) {
  const Eigen::VectorXd pred = model.predict(data.x);
  return (data.y - pred).squaredNorm() / static_cast<double>(data.n());
}

FittedModel linear_model(IndexList covariates, double intercept, Eigen::VectorXd coefficients) {
  if (static_cast<Eigen::Index>(covariates.size()) != coefficients.size())
    throw std::invalid_argument("linear_model: one coefficient per covariate");
  FittedModel m;
  m.covariates = std::move(covariates);
  m.intercept = intercept;
  m.coefficients = std::move(coefficients);
  return m;
}

nlohmann::ordered_json model_to_json(const FittedModel& model, std::span<const std::string> names) {
  nlohmann::ordered_json j;
  j["class"] = model.model_class;
  nlohmann::ordered_json cov_names = nlohmann::ordered_json::array();
  for (int c : model.covariates)
    cov_names.push_back(c >= 0 && static_cast<std::size_t>(c) < names.size() ? names[c] : std::to_string(c));
  j["covariates"] = cov_names;
  j["covariate_indices"] = model.covariates;
  if (model.model_class.kind == ModelKind::tree) {
    nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
    for (const auto& nd : model.tree)
      nodes.push_back(nlohmann::ordered_json{{"feature", nd.feature},
                                             {"threshold", nd.threshold},
                                             {"value", nd.value},
                                             {"left", nd.left},
                                             {"right", nd.right}});
    j["tree"] = nodes;
  } else {
    j["intercept"] = model.intercept;
    j["coefficients"] = std::vector<double>(model.coefficients.data(),
                                            model.coefficients.data() + model.coefficients.size());
  }
  return j;
}

}  // namespace mps
