#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "mps/engine.hpp"
#include "mps/resampling.hpp"

namespace mps {

StabilityResult run_stability_selection(const DataMatrix& data, int B, int depth, const StabilityRule& rule,
                                        const ModelClass& model_class, std::uint64_t seed, std::size_t threads) {
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  if (depth < 1 || depth > data.p()) throw std::invalid_argument("depth must be in [1, p]");
  if (rule.kind == StabilityRule::Kind::top_s && (rule.s < 1 || rule.s > data.p()))
    throw std::invalid_argument("top-s rule needs 1 <= s <= p");
  const int half = data.n() / 2;
  if (half < 2) throw DataError("stability selection needs at least 4 rows");

  std::vector<IndexList> picks(static_cast<std::size_t>(B));
  parallel_for(picks.size(), threads, [&](std::size_t b) {
    Engine rng = make_stream(seed, "stability", {}, b);
    const IndexList rows = draw_subsample(data.n(), half, rng);
    picks[b] = forward_select(model_class, data.rows(rows), depth);
  });

  StabilityResult res;
  res.rule = rule;
  res.theta_by_step = Eigen::MatrixXd::Zero(depth, data.p());
  for (const auto& path : picks)
    for (int l = 0; l < depth; ++l) res.theta_by_step.bottomRows(depth - l).col(path[l]).array() += 1.0;
  res.theta_by_step /= static_cast<double>(B);

  const Eigen::RowVectorXd final_theta = res.theta_by_step.row(depth - 1);
  if (rule.kind == StabilityRule::Kind::threshold) {
    for (int j = 0; j < data.p(); ++j)
      if (final_theta(j) > rule.pi_thr) res.selected.push_back(j);
    return res;
  }
  const Eigen::RowVectorXd area = res.theta_by_step.colwise().sum();
  IndexList order(static_cast<std::size_t>(data.p()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (final_theta(a) != final_theta(b)) return final_theta(a) > final_theta(b);
    return area(a) > area(b);
  });
  res.selected.assign(order.begin(), order.begin() + rule.s);
  return res;
}

}  // namespace mps
