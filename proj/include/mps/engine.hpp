#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mps/common.hpp"
#include "mps/datasets.hpp"
#include "mps/learners.hpp"
#include "mps/ranking.hpp"

namespace mps {

std::string to_string(ThresholdMode mode);
ThresholdMode parse_threshold_mode(std::string_view name);

struct MpsConfig {
  int d = 1;
  int r = 100;
  double p_star = 0.95;
  double gamma = 0.5;
  int nsim = 10000;
  ModelClass model_class;
  LossKind loss = LossKind::squared_error;
  std::uint64_t seed = 0;
  ThresholdMode threshold_mode = ThresholdMode::inclusive;
  /// Fraction of each subsample held out for scoring; 0 scores in-sample.
  double scoring_holdout = 0.0;
  /// Consecutive subsamples with no admissible covariate tolerated before a
  /// node gives up and the run fails.
  int max_redraws = 1000;

  /// Throws std::invalid_argument; p is the number of covariates available.
  void validate(int p) const;
  bool operator==(const MpsConfig&) const = default;
};

template <class Json>
void to_json(Json& j, const MpsConfig& c) {
  j = Json::object();
  j["d"] = c.d;
  j["r"] = c.r;
  j["p_star"] = c.p_star;
  j["gamma"] = c.gamma;
  j["nsim"] = c.nsim;
  j["model_class"] = c.model_class;
  j["loss"] = to_string(c.loss);
  j["seed"] = c.seed;
  j["threshold_mode"] = to_string(c.threshold_mode);
  j["scoring_holdout"] = c.scoring_holdout;
  j["max_redraws"] = c.max_redraws;
}

template <class Json>
void from_json(const Json& j, MpsConfig& c) {
  j.at("d").get_to(c.d);
  j.at("r").get_to(c.r);
  j.at("p_star").get_to(c.p_star);
  j.at("gamma").get_to(c.gamma);
  j.at("nsim").get_to(c.nsim);
  j.at("model_class").get_to(c.model_class);
  c.loss = parse_loss_kind(j.at("loss").template get<std::string>());
  j.at("seed").get_to(c.seed);
  c.threshold_mode = parse_threshold_mode(j.at("threshold_mode").template get<std::string>());
  j.at("scoring_holdout").get_to(c.scoring_holdout);
  j.at("max_redraws").get_to(c.max_redraws);
}

struct PathNode {
  int covariate = -1;
  int count = 0;   // subsamples that picked this covariate at the parent's decision
  int draws = 0;   // subsamples drawn at that decision
  double proportion = 0.0;
  std::vector<PathNode> children;  // descending count, ties by ascending covariate

  bool operator==(const PathNode&) const = default;
};

struct PathForest {
  std::vector<PathNode> roots;
  int depth = 0;
  MpsConfig config;
  std::vector<std::string> names;

  bool operator==(const PathForest&) const = default;
};

/// Outcome of rule R at one node of the forest.
struct NodeDecision {
  IndexList candidates;     // ascending; one multinomial cell each
  std::vector<int> counts;  // aligned with candidates
  int draws = 0;
  int redraws = 0;  // subsamples discarded for having no admissible covariate
  int D = 0;
  IndexList admitted;  // descending count, ties by ascending index
};

/// Runs rule R for the model `prefix`: subsamples are drawn from a stream keyed
/// by (config.seed, prefix) until one candidate has been chosen r times.
NodeDecision decide_node(const DataMatrix& data, const MpsConfig& config, const IndexList& prefix);

/// Builds the path forest level by level; nodes on one level run in parallel.
/// The result does not depend on `threads`.
PathForest run_mps(const DataMatrix& data, const MpsConfig& config, std::size_t threads = 1);

/// r * M / 4 capped at 500 (and at least 1).
int default_fss_B(int r, int M);

/// Forward stability selection: B subsamples per step, keep the most frequent pick.
IndexList run_fss(const DataMatrix& data, const MpsConfig& config, int B);

struct StabilityRule {
  enum class Kind { top_s, threshold };
  Kind kind = Kind::top_s;
  int s = 1;
  double pi_thr = 0.6;

  static StabilityRule top(int s) { return {Kind::top_s, s, 0.0}; }
  static StabilityRule above(double pi) { return {Kind::threshold, 0, pi}; }
};

struct StabilityResult {
  /// Row l-1 holds theta_j(l): the share of half-samples whose first l
  /// forward-selection picks include X_j.
  Eigen::MatrixXd theta_by_step;
  IndexList selected;
  StabilityRule rule;
};

/// Stability selection with forward selection on B half-samples.
/// top_s ranks by theta at the final step, then by the sum over steps
/// (earlier picks first), then by index. threshold keeps theta > pi_thr at
/// the final step, in ascending index order.
StabilityResult run_stability_selection(const DataMatrix& data, int B, int depth, const StabilityRule& rule,
                                        const ModelClass& model_class, std::uint64_t seed,
                                        std::size_t threads = 1);

struct ModelFamily {
  std::vector<IndexList> paths;  // root-to-leaf order, left to right
  std::vector<IndexList> sets;   // sorted covariate sets, first occurrence order
};

ModelFamily enumerate_models(const PathForest& forest);

int count_leaves(const PathForest& forest);

}  // namespace mps
