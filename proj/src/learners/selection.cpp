#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "internal.hpp"
#include "mps/resampling.hpp"

namespace mps {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool constant_on(const DataMatrix& data, std::span<const int> rows, int col) {
  if (rows.empty()) return true;
  const double first = data.x(rows[0], col);
  for (int r : rows)
    if (data.x(r, col) != first) return false;
  return true;
}

// Orthonormal basis for the centered selected columns. Modified Gram-Schmidt
// applied twice; columns that lose almost all of their norm are dropped, which
// matches the minimum-norm fit on a rank-deficient block.
Eigen::MatrixXd centered_basis(const Eigen::MatrixXd& block) {
  Eigen::MatrixXd q(block.rows(), block.cols());
  Eigen::Index kept = 0;
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    Eigen::VectorXd v = block.col(c).array() - block.col(c).mean();
    const double start = v.norm();
    if (start == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < kept; ++k) v -= q.col(k).dot(v) * q.col(k);
    const double left = v.norm();
    if (left <= 1e-10 * start) continue;
    q.col(kept++) = v / left;
  }
  return q.leftCols(kept);
}

std::vector<double> score_ols_fast(const DataMatrix& data, std::span<const int> rows, const IndexList& selected,
                                   const IndexList& candidates) {
  const auto m = static_cast<double>(rows.size());
  const Eigen::MatrixXd q = centered_basis(detail::gather(data, rows, selected));
  Eigen::VectorXd e = detail::gather(data.y, rows);
  e.array() -= e.mean();
  for (int pass = 0; pass < 2; ++pass)
    if (q.cols()) e -= q * (q.transpose() * e);
  const double sse0 = e.squaredNorm();

  std::vector<double> out(candidates.size(), kInf);
  Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const int col = candidates[c];
    if (constant_on(data, rows, col)) continue;
    for (std::size_t r = 0; r < rows.size(); ++r) v(static_cast<Eigen::Index>(r)) = data.x(rows[r], col);
    v.array() -= v.mean();
    const double start = v.norm();
    for (int pass = 0; pass < 2; ++pass)
      if (q.cols()) v -= q * (q.transpose() * v);
    const double vv = v.squaredNorm();
    double sse = sse0;
    if (vv > 1e-20 * start * start) {
      const double ve = v.dot(e);
      sse = std::max(0.0, sse0 - ve * ve / vv);
    }
    out[c] = sse / m;
  }
  return out;
}

std::vector<double> score_generic(const ModelClass& mc, const DataMatrix& data, std::span<const int> fit_rows,
                                  std::span<const int> eval_rows, const IndexList& selected,
                                  const IndexList& candidates) {
  IndexList cols = selected;
  cols.push_back(-1);
  const Eigen::VectorXd y_fit = detail::gather(data.y, fit_rows);
  const Eigen::VectorXd y_eval = detail::gather(data.y, eval_rows);
  Eigen::MatrixXd fit_block = detail::gather(data, fit_rows, selected);
  fit_block.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(cols.size()));
  Eigen::MatrixXd eval_block = detail::gather(data, eval_rows, selected);
  eval_block.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(cols.size()));
  const Eigen::Index last = static_cast<Eigen::Index>(selected.size());

  std::vector<double> out(candidates.size(), kInf);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const int col = candidates[c];
    if (constant_on(data, fit_rows, col)) continue;
    for (std::size_t r = 0; r < fit_rows.size(); ++r) fit_block(static_cast<Eigen::Index>(r), last) = data.x(fit_rows[r], col);
    for (std::size_t r = 0; r < eval_rows.size(); ++r)
      eval_block(static_cast<Eigen::Index>(r), last) = data.x(eval_rows[r], col);
    cols.back() = col;
    const FittedModel model = detail::fit_block(mc, fit_block, y_fit, cols);
    const double mse = (y_eval - detail::predict_block(model, eval_block)).squaredNorm() /
                       static_cast<double>(eval_rows.size());
    if (std::isfinite(mse)) out[c] = mse;
  }
  return out;
}

void check_candidates(const DataMatrix& data, const IndexList& selected, const IndexList& candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to score");
  std::vector<char> mark(static_cast<std::size_t>(data.p()), 0);
  for (int s : selected) {
    if (s < 0 || s >= data.p()) throw std::out_of_range("selected covariate index out of range");
    if (mark[s]) throw std::invalid_argument("duplicate selected covariate");
    mark[s] = 1;
  }
  for (int c : candidates) {
    if (c < 0 || c >= data.p()) throw std::out_of_range("candidate covariate index out of range");
    if (mark[c]) throw std::invalid_argument("candidate repeats a selected or candidate covariate");
    mark[c] = 2;
  }
}

std::vector<int> all_rows(int n) {
  std::vector<int> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

std::vector<double> score_candidates(const ModelClass& mc, const DataMatrix& data, std::span<const int> rows,
                                     const IndexList& selected, const IndexList& candidates,
                                     const ScoringOptions& opts) {
  check_candidates(data, selected, candidates);
  if (rows.size() < 2) throw DataError("scoring needs at least 2 rows");
  if (opts.holdout_fraction < 0.0 || opts.holdout_fraction >= 1.0)
    throw std::invalid_argument("holdout_fraction must be in [0, 1)");

  if (opts.holdout_fraction > 0.0) {
    std::vector<int> fit_rows, eval_rows;
    const double f = opts.holdout_fraction;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const bool held = std::floor(static_cast<double>(i + 1) * f) > std::floor(static_cast<double>(i) * f);
      (held ? eval_rows : fit_rows).push_back(rows[i]);
    }
    if (fit_rows.size() < 2 || eval_rows.empty()) throw DataError("too few rows for the scoring holdout");
    return score_generic(mc, data, fit_rows, eval_rows, selected, candidates);
  }
  if (mc.kind == ModelKind::ols) return score_ols_fast(data, rows, selected, candidates);
  return score_generic(mc, data, rows, rows, selected, candidates);
}

int best_next_covariate(const ModelClass& mc, const DataMatrix& data, std::span<const int> rows,
                        const IndexList& selected, const IndexList& candidates, const ScoringOptions& opts) {
  const std::vector<double> scores = score_candidates(mc, data, rows, selected, candidates, opts);
  int best = -1;
  double best_score = kInf;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const double s = scores[c];
    if (!(s < kInf)) continue;
    if (best < 0 || s < best_score || (s == best_score && candidates[c] < best)) {
      best = candidates[c];
      best_score = s;
    }
  }
  if (best < 0) throw NoAdmissibleCovariate();
  return best;
}

int best_next_covariate(const ModelClass& mc, const DataMatrix& data, const IndexList& selected,
                        const IndexList& candidates, const ScoringOptions& opts) {
  const auto rows = all_rows(data.n());
  return best_next_covariate(mc, data, rows, selected, candidates, opts);
}

IndexList forward_select(const ModelClass& mc, const DataMatrix& data, int d, const ScoringOptions& opts) {
  if (d < 0 || d > data.p()) throw std::invalid_argument("forward_select: depth must be in [0, p]");
  const auto rows = all_rows(data.n());
  IndexList selected;
  std::vector<char> used(static_cast<std::size_t>(data.p()), 0);
  for (int step = 0; step < d; ++step) {
    IndexList candidates;
    for (int j = 0; j < data.p(); ++j)
      if (!used[j]) candidates.push_back(j);
    const int k = best_next_covariate(mc, data, rows, selected, candidates, opts);
    selected.push_back(k);
    used[k] = 1;
  }
  return selected;
}

std::vector<int> assign_folds(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw std::invalid_argument("folds must be in [2, n]");
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels[i] = i % folds;
  auto rng = make_stream(seed, "folds", {}, static_cast<std::uint64_t>(n));
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

CvDepthResult cv_forward_depth(const ModelClass& mc, const DataMatrix& data, int folds, int max_depth,
                               std::uint64_t seed) {
  max_depth = std::min(max_depth, data.p());
  if (max_depth < 1) throw std::invalid_argument("cv_forward_depth: max_depth must be >= 1");
  const auto labels = assign_folds(data.n(), folds, seed);
  std::vector<double> err(static_cast<std::size_t>(max_depth), 0.0);
  for (int f = 0; f < folds; ++f) {
    std::vector<int> tr, te;
    for (int i = 0; i < data.n(); ++i) (labels[i] == f ? te : tr).push_back(i);
    const DataMatrix train = data.rows(tr);
    const DataMatrix test = data.rows(te);
    const IndexList path = forward_select(mc, train, max_depth);
    for (int k = 1; k <= max_depth; ++k) {
      const IndexList prefix(path.begin(), path.begin() + k);
      const FittedModel model = fit(mc, train, prefix);
      err[k - 1] += (test.y - model.predict(test.x)).squaredNorm();
    }
  }
  CvDepthResult res;
  for (double& e : err) e /= static_cast<double>(data.n());
  res.cv_mse = err;
  res.depth = static_cast<int>(std::min_element(err.begin(), err.end()) - err.begin()) + 1;
  return res;
}

}  // namespace mps
