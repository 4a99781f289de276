#include <algorithm>
#include <numeric>

#include "internal.hpp"

namespace mps::detail {

namespace {

struct Grower {
  const Eigen::MatrixXd& xs;
  const Eigen::VectorXd& y;
  int max_depth;
  int min_leaf;
  std::vector<TreeNode> nodes;

  int grow(std::vector<int> idx, int depth) {
    const int id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double sum = 0.0, sumsq = 0.0;
    for (int i : idx) {
      sum += y(i);
      sumsq += y(i) * y(i);
    }
    const auto m = static_cast<double>(idx.size());
    nodes[id].value = sum / m;
    const double parent_sse = sumsq - sum * sum / m;
    if (depth >= max_depth || static_cast<int>(idx.size()) < 2 * min_leaf || parent_sse <= 0.0) return id;

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 1e-12 * std::max(parent_sse, 1e-300);
    std::vector<int> order(idx);
    for (Eigen::Index f = 0; f < xs.cols(); ++f) {
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return xs(a, f) < xs(b, f); });
      double left_sum = 0.0, left_sq = 0.0;
      const int total = static_cast<int>(order.size());
      for (int i = 1; i < total; ++i) {
        const int prev = order[i - 1];
        left_sum += y(prev);
        left_sq += y(prev) * y(prev);
        if (i < min_leaf || total - i < min_leaf) continue;
        if (!(xs(prev, f) < xs(order[i], f))) continue;
        const double nl = i, nr = total - i;
        const double right_sum = sum - left_sum, right_sq = sumsq - left_sq;
        const double sse = (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
        const double gain = parent_sse - sse;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (xs(prev, f) + xs(order[i], f));
        }
      }
    }
    if (best_feature < 0) return id;

    std::vector<int> left, right;
    for (int i : idx) (xs(i, best_feature) <= best_threshold ? left : right).push_back(i);
    nodes[id].feature = best_feature;
    nodes[id].threshold = best_threshold;
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

}  // namespace

int tree_depth_for(const ModelClass& mc, int n_covariates) {
  return mc.tree_max_depth ? *mc.tree_max_depth : std::max(1, n_covariates);
}

std::vector<TreeNode> grow_tree(const Eigen::MatrixXd& xs, const Eigen::VectorXd& y, int max_depth, int min_leaf) {
  Grower g{xs, y, xs.cols() == 0 ? 0 : max_depth, min_leaf, {}};
  std::vector<int> all(static_cast<std::size_t>(y.size()));
  std::iota(all.begin(), all.end(), 0);
  g.grow(std::move(all), 0);
  return std::move(g.nodes);
}

}  // namespace mps::detail
