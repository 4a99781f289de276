#include "mps/engine.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "mps/resampling.hpp"

namespace mps {

std::string to_string(ThresholdMode mode) { return mode == ThresholdMode::strict ? "strict" : "inclusive"; }

ThresholdMode parse_threshold_mode(std::string_view name) {
  if (name == "inclusive") return ThresholdMode::inclusive;
  if (name == "strict") return ThresholdMode::strict;
  throw std::invalid_argument("unknown threshold mode '" + std::string(name) + "'");
}

void MpsConfig::validate(int p) const {
  if (d < 1 || d > p) throw std::invalid_argument("depth d must be in [1, p]");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (!(p_star > 0.0 && p_star <= 1.0)) throw std::invalid_argument("p_star must be in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (nsim < 1) throw std::invalid_argument("nsim must be >= 1");
  if (scoring_holdout < 0.0 || scoring_holdout >= 1.0) throw std::invalid_argument("scoring_holdout must be in [0, 1)");
  if (max_redraws < 1) throw std::invalid_argument("max_redraws must be >= 1");
  model_class.validate();
}

namespace {

IndexList remaining(int p, const IndexList& prefix) {
  std::vector<char> used(static_cast<std::size_t>(p), 0);
  for (int k : prefix) {
    if (k < 0 || k >= p || used[k]) throw std::invalid_argument("invalid covariate prefix");
    used[k] = 1;
  }
  IndexList out;
  for (int j = 0; j < p; ++j)
    if (!used[j]) out.push_back(j);
  if (out.empty()) throw std::invalid_argument("no candidates left after the prefix");
  return out;
}

// Draws subsamples until one yields an admissible covariate. Degenerate
// subsamples are discarded and redrawn from the same stream.
class SubsamplePicker {
 public:
  SubsamplePicker(const DataMatrix& data, const MpsConfig& config, const IndexList& prefix,
                  const IndexList& candidates, std::string_view tag)
      : data_(data),
        config_(config),
        prefix_(prefix),
        candidates_(candidates),
        m_(subsample_size(data.n(), config.gamma)),
        rng_(make_stream(config.seed, tag, prefix)),
        opts_{config.scoring_holdout} {}

  bool full_data() const { return m_ == data_.n(); }

  int pick() {
    int failures = 0;
    for (;;) {
      const IndexList rows = draw_subsample(data_.n(), m_, rng_);
      try {
        return best_next_covariate(config_.model_class, data_, rows, prefix_, candidates_, opts_);
      } catch (const NoAdmissibleCovariate&) {
        ++redraws;
        // Every draw is the full data set; retrying cannot help.
        if (full_data() || ++failures >= config_.max_redraws) throw;
      }
    }
  }

  int redraws = 0;

 private:
  const DataMatrix& data_;
  const MpsConfig& config_;
  const IndexList& prefix_;
  const IndexList& candidates_;
  int m_;
  Engine rng_;
  ScoringOptions opts_;
};

}  // namespace

NodeDecision decide_node(const DataMatrix& data, const MpsConfig& config, const IndexList& prefix) {
  NodeDecision dec;
  dec.candidates = remaining(data.p(), prefix);
  const int M = static_cast<int>(dec.candidates.size());
  std::vector<int> cell_of(static_cast<std::size_t>(data.p()), -1);
  for (int c = 0; c < M; ++c) cell_of[dec.candidates[c]] = c;

  SubsamplePicker picker(data, config, prefix, dec.candidates, "mps");
  if (picker.full_data()) {
    // Every draw sees the same rows, so one evaluation decides them all.
    dec.counts.assign(static_cast<std::size_t>(M), 0);
    dec.counts[cell_of[picker.pick()]] = config.r;
  } else {
    dec.counts = sample_until_max(M, config.r, [&] { return cell_of[picker.pick()]; });
  }
  dec.redraws = picker.redraws;
  for (int c : dec.counts) dec.draws += c;

  dec.D = find_min_D(M, config.r, config.p_star, config.nsim, config.seed);
  for (int cell : select_cells(dec.counts, config.r, dec.D, config.threshold_mode))
    if (dec.counts[cell] >= 1) dec.admitted.push_back(cell);
  std::stable_sort(dec.admitted.begin(), dec.admitted.end(),
                   [&](int a, int b) { return dec.counts[a] > dec.counts[b]; });
  for (int& cell : dec.admitted) cell = dec.candidates[cell];

  return dec;
}

PathForest run_mps(const DataMatrix& data, const MpsConfig& config, std::size_t threads) {
  config.validate(data.p());
  PathForest forest;
  forest.depth = config.d;
  forest.config = config;
  forest.names = data.names;

  struct Item {
    IndexList prefix;
    std::vector<PathNode>* slot;
  };
  std::vector<Item> frontier{{{}, &forest.roots}};
  for (int level = 0; level < config.d; ++level) {
    std::vector<NodeDecision> decisions(frontier.size());
    parallel_for(frontier.size(), threads,
                 [&](std::size_t i) { decisions[i] = decide_node(data, config, frontier[i].prefix); });

    std::vector<Item> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const NodeDecision& dec = decisions[i];
      auto& slot = *frontier[i].slot;
      slot.reserve(dec.admitted.size());
      for (int k : dec.admitted) {
        const auto pos = std::lower_bound(dec.candidates.begin(), dec.candidates.end(), k) - dec.candidates.begin();
        PathNode node;
        node.covariate = k;
        node.count = dec.counts[static_cast<std::size_t>(pos)];
        node.draws = dec.draws;
        node.proportion = static_cast<double>(node.count) / dec.draws;
        slot.push_back(std::move(node));
      }
      for (auto& child : slot) {
        IndexList prefix = frontier[i].prefix;
        prefix.push_back(child.covariate);
        next.push_back({std::move(prefix), &child.children});
      }
    }
    frontier = std::move(next);
  }
  return forest;
}

int default_fss_B(int r, int M) {
  const long long b = static_cast<long long>(r) * M / 4;
  return static_cast<int>(std::clamp<long long>(b, 1, 500));
}

IndexList run_fss(const DataMatrix& data, const MpsConfig& config, int B) {
  config.validate(data.p());
  if (B < 1) throw std::invalid_argument("B must be >= 1");
  IndexList path;
  for (int step = 0; step < config.d; ++step) {
    const IndexList candidates = remaining(data.p(), path);
    std::vector<int> counts(static_cast<std::size_t>(data.p()), 0);
    SubsamplePicker picker(data, config, path, candidates, "fss");
    if (picker.full_data()) {
      counts[picker.pick()] = B;
    } else {
      for (int b = 0; b < B; ++b) ++counts[picker.pick()];
    }
    // candidates are ascending, so the first maximum has the smallest index
    int best = candidates.front();
    for (int k : candidates)
      if (counts[k] > counts[best]) best = k;
    path.push_back(best);
  }
  return path;
}

namespace {

void collect(const PathNode& node, IndexList& prefix, std::vector<IndexList>& out) {
  prefix.push_back(node.covariate);
  if (node.children.empty()) out.push_back(prefix);
  for (const auto& c : node.children) collect(c, prefix, out);
  prefix.pop_back();
}

}  // namespace

ModelFamily enumerate_models(const PathForest& forest) {
  ModelFamily fam;
  IndexList prefix;
  for (const auto& root : forest.roots) collect(root, prefix, fam.paths);
  std::set<IndexList> seen;
  for (const auto& path : fam.paths) {
    IndexList s = path;
    std::sort(s.begin(), s.end());
    if (seen.insert(s).second) fam.sets.push_back(std::move(s));
  }
  return fam;
}

int count_leaves(const PathForest& forest) { return static_cast<int>(enumerate_models(forest).paths.size()); }

}  // namespace mps
