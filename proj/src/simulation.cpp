#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mps/reporting.hpp"
#include "mps/resampling.hpp"

namespace mps {

SimSpec SimSpec::for_setup(int setup) {
  SimSpec s;
  s.setup = setup;
  switch (setup) {
    case 1:
      s.n = 100, s.p = 10, s.s = 5, s.r = 200, s.p_star = 0.95;
      break;
    case 2:
      s.n = 500, s.p = 100, s.s = 5, s.r = 200, s.p_star = 0.75;
      break;
    case 3:
      s.n = 500, s.p = 100, s.s = 5, s.r = 50, s.p_star = 0.5;
      break;
    case 0:
      break;
    default:
      throw std::invalid_argument("setup must be 1, 2, 3 or custom");
  }
  return s;
}

void SimSpec::validate() const {
  if (setup < 0 || setup > 3) throw std::invalid_argument("setup must be 1, 2, 3 or custom");
  SyntheticSpec{n, p, s, rho, snr, beta_type, seed}.validate();
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  if (n_test < 2) throw std::invalid_argument("n_test must be >= 2");
  if (r < 1) throw std::invalid_argument("r must be >= 1");
  if (!(p_star > 0.0 && p_star <= 1.0)) throw std::invalid_argument("p_star must be in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
  if (nsim < 1) throw std::invalid_argument("nsim must be >= 1");
  if (model_depth() < 1 || model_depth() > p) throw std::invalid_argument("depth must be in [1, p]");
  if (stability_B < 1) throw std::invalid_argument("stability B must be >= 1");
  if (fss_B < 0) throw std::invalid_argument("fss B must be >= 0");
  if (lasso_folds < 2) throw std::invalid_argument("lasso folds must be >= 2");
  if (methods.empty()) throw std::invalid_argument("no methods requested");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const auto& m = methods[i];
    if (std::find(all_methods().begin(), all_methods().end(), m) == all_methods().end())
      throw std::invalid_argument("unknown method '" + m + "'");
    if (std::find(methods.begin(), methods.begin() + static_cast<std::ptrdiff_t>(i), m) != methods.begin() + static_cast<std::ptrdiff_t>(i))
      throw std::invalid_argument("duplicate method '" + m + "'");
  }
}

void to_json(nlohmann::ordered_json& j, const SimSpec& s) {
  j = nlohmann::ordered_json{{"setup", s.setup},
                             {"n", s.n},
                             {"p", s.p},
                             {"s", s.s},
                             {"r", s.r},
                             {"p_star", s.p_star},
                             {"beta_type", s.beta_type},
                             {"rho", s.rho},
                             {"snr", s.snr},
                             {"reps", s.reps},
                             {"methods", s.methods},
                             {"seed", s.seed},
                             {"n_test", s.n_test},
                             {"gamma", s.gamma},
                             {"nsim", s.nsim},
                             {"depth", s.model_depth()},
                             {"stability_B", s.stability_B},
                             {"fss_B", s.fss_B > 0 ? s.fss_B : default_fss_B(s.r, s.p)},
                             {"lasso_folds", s.lasso_folds}};
}

void from_json(const nlohmann::ordered_json& j, SimSpec& s) {
  j.at("setup").get_to(s.setup);
  j.at("n").get_to(s.n);
  j.at("p").get_to(s.p);
  j.at("s").get_to(s.s);
  j.at("r").get_to(s.r);
  j.at("p_star").get_to(s.p_star);
  j.at("beta_type").get_to(s.beta_type);
  j.at("rho").get_to(s.rho);
  j.at("snr").get_to(s.snr);
  j.at("reps").get_to(s.reps);
  j.at("methods").get_to(s.methods);
  j.at("seed").get_to(s.seed);
  j.at("n_test").get_to(s.n_test);
  j.at("gamma").get_to(s.gamma);
  j.at("nsim").get_to(s.nsim);
  j.at("depth").get_to(s.depth);
  j.at("stability_B").get_to(s.stability_B);
  j.at("fss_B").get_to(s.fss_B);
  j.at("lasso_folds").get_to(s.lasso_folds);
  s.validate();
}

std::vector<double> snr_grid() { return {0.25, 0.5, 1.0, 2.0, 4.0}; }

namespace {

bool wants(const SimSpec& spec, std::string_view m) {
  return std::find(spec.methods.begin(), spec.methods.end(), m) != spec.methods.end();
}

MpsConfig engine_config(const SimSpec& spec) {
  MpsConfig c;
  c.d = spec.model_depth();
  c.r = spec.r;
  c.p_star = spec.p_star;
  c.gamma = spec.gamma;
  c.nsim = spec.nsim;
  c.seed = derive_seed(spec.seed, "sim-resampling");
  return c;
}

std::vector<SimResultRow> run_rep(const SimSpec& spec, int rep) {
  SyntheticSpec gen{spec.n, spec.p, spec.s, spec.rho, spec.snr, spec.beta_type,
                    derive_seed(spec.seed, "sim-data", {}, static_cast<std::uint64_t>(rep))};
  const TrainTestPair data = gen_linear(gen, spec.n_test);
  const DataMatrix& train = data.train;
  const DataMatrix& test = data.test;
  const ModelClass ols;
  const MpsConfig config = engine_config(spec);
  const int d = spec.model_depth();

  std::vector<SimResultRow> rows;
  // mps first so single-model methods can be compared against it
  std::vector<std::string> order;
  if (wants(spec, "mps")) order.push_back("mps");
  for (const auto& m : all_methods())
    if (m != "mps" && wants(spec, m)) order.push_back(m);

  std::optional<double> mps_best;
  for (const auto& method : order) {
    SimResultRow row;
    row.setup = spec.setup;
    row.beta_type = spec.beta_type;
    row.rho = spec.rho;
    row.snr = spec.snr;
    row.method = method;
    row.rep = rep;
    row.n_models = row.n_paths = 1;
    const auto start = std::chrono::steady_clock::now();
    try {
      if (method == "oracle") {
        row.rte = rte(oracle_fit(train, data.beta_true), test, data.beta_true);
      } else if (method == "forward") {
        row.rte = rte(fit(ols, train, forward_select(ols, train, d)), test, data.beta_true);
      } else if (method == "stability_selection") {
        const auto ss = run_stability_selection(train, spec.stability_B, d, StabilityRule::top(d), ols,
                                                derive_seed(spec.seed, "sim-stability", {}, rep));
        row.rte = rte(fit(ols, train, ss.selected), test, data.beta_true);
      } else if (method == "lasso") {
        const auto lasso = lasso_cv(train, spec.lasso_folds, 100, derive_seed(spec.seed, "sim-lasso", {}, rep));
        row.rte = rte(lasso.model, test, data.beta_true);
      } else if (method == "fss") {
        const int B = spec.fss_B > 0 ? spec.fss_B : default_fss_B(spec.r, spec.p);
        row.rte = rte(fit(ols, train, run_fss(train, config, B)), test, data.beta_true);
      } else if (method == "mps") {
        const ModelFamily fam = enumerate_models(run_mps(train, config));
        row.n_paths = static_cast<int>(fam.paths.size());
        row.n_models = static_cast<int>(fam.sets.size());
        row.rte = min_rte_over_set(fam.sets, train, test, data.beta_true);
        mps_best = row.rte;
      }
      if (method != "mps" && mps_best) row.beats_all_mps = row.rte < *mps_best;
    } catch (const std::exception& e) {
      row.rte = std::nan("");
      row.error = e.what();
      if (row.error.empty()) row.error = "error";
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    rows.push_back(std::move(row));
  }
  // Report in the order the methods were requested.
  std::vector<SimResultRow> sorted;
  for (const auto& m : spec.methods)
    for (auto& r : rows)
      if (r.method == m) sorted.push_back(std::move(r));
  return sorted;
}

}  // namespace

SimResult run_simulation(const SimSpec& spec, std::size_t threads) {
  spec.validate();
  std::vector<std::vector<SimResultRow>> per_rep(static_cast<std::size_t>(spec.reps));
  parallel_for(per_rep.size(), threads, [&](std::size_t rep) { per_rep[rep] = run_rep(spec, static_cast<int>(rep)); });
  SimResult res;
  for (auto& rows : per_rep)
    for (auto& r : rows) {
      res.all_ok &= r.error.empty();
      res.rows.push_back(std::move(r));
    }
  return res;
}

}  // namespace mps
