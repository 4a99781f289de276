#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mps/datasets.hpp"
#include "mps/engine.hpp"
#include "mps/learners.hpp"

namespace mps {

/// ||y - yhat||^2 / ||y - X beta_true||^2 on the test set. Any fitted model
/// works; the denominator must be positive.
double rte(const FittedModel& model, const DataMatrix& test, const Eigen::VectorXd& beta_true);

/// Refits every covariate set on train (OLS unless another class is given)
/// and returns the smallest test RTE.
double min_rte_over_set(const std::vector<IndexList>& models, const DataMatrix& train, const DataMatrix& test,
                        const Eigen::VectorXd& beta_true, const ModelClass& model_class = {});

inline const std::vector<std::string>& all_methods() {
  static const std::vector<std::string> m{"oracle", "stability_selection", "lasso", "forward", "mps", "fss"};
  return m;
}

struct SimSpec {
  int setup = 1;  // 1..3, or 0 for custom
  int n = 100;
  int p = 10;
  int s = 5;
  int r = 200;
  double p_star = 0.95;
  int beta_type = 2;
  double rho = 0.0;
  double snr = 1.0;
  int reps = 1;
  std::vector<std::string> methods = all_methods();
  std::uint64_t seed = 0;
  int n_test = 10000;
  double gamma = 0.5;
  int nsim = 10000;
  int depth = 0;  // 0: s covariates per model
  int stability_B = 100;
  int fss_B = 0;  // 0: default_fss_B(r, p)
  int lasso_folds = 10;

  /// Setup defaults: 1 = (100, 10, 5, r 200, P* 0.95), 2 = (500, 100, 5, 200, 0.75),
  /// 3 = (500, 100, 5, 50, 0.5).
  static SimSpec for_setup(int setup);
  int model_depth() const { return depth > 0 ? depth : s; }
  void validate() const;
};

void to_json(nlohmann::ordered_json& j, const SimSpec& spec);
void from_json(const nlohmann::ordered_json& j, SimSpec& spec);

/// The log-equal SNR grid over [0.25, 4].
std::vector<double> snr_grid();

struct SimResultRow {
  int setup = 0;
  int beta_type = 0;
  double rho = 0.0;
  double snr = 0.0;
  std::string method;
  int rep = 0;
  double rte = 0.0;  // min over the model set for set-valued methods
  int n_models = 0;
  int n_paths = 0;
  std::optional<bool> beats_all_mps;  // single-model methods, when mps also ran
  double runtime_ms = 0.0;
  std::string error;  // empty on success
};

struct SimResult {
  std::vector<SimResultRow> rows;
  bool all_ok = true;
};

/// Replications run in parallel; each derives its data seed from
/// (spec.seed, rep). MPS and FSS use one resampling seed per spec.
SimResult run_simulation(const SimSpec& spec, std::size_t threads = 1);

struct MethodSummary {
  int setup = 0;
  int beta_type = 0;
  double rho = 0.0;
  double snr = 0.0;
  std::string method;
  int reps_ok = 0;
  int reps_failed = 0;
  double mean_rte = 0.0;
  double se_rte = 0.0;
  double mean_models = 0.0;
  double mean_paths = 0.0;
  std::optional<double> win_proportion;
};

/// Mean and standard error per (setting, method), in first-appearance order.
std::vector<MethodSummary> aggregate(const std::vector<SimResultRow>& rows);

/// Share of replications where a single-model method's RTE is strictly below
/// every MPS model's RTE. Throws std::invalid_argument without mps rows.
std::vector<std::pair<std::string, double>> proportion_win(const std::vector<SimResultRow>& rows);

/// setup,beta_type,rho,snr,method,rep,rte,n_models,n_paths,beats_all_mps,error
void write_results_csv(std::ostream& out, const std::vector<SimResultRow>& rows);
/// setup,beta_type,rho,snr,method,rep,runtime_ms (kept apart so results stay byte-stable)
void write_timings_csv(std::ostream& out, const std::vector<SimResultRow>& rows);
std::vector<SimResultRow> read_results_csv(std::istream& in);

void print_summary(std::ostream& out, const std::vector<MethodSummary>& summary);

/// Shortest decimal text that reads back as the same double.
std::string format_double(double v);

/// Git blob hash ("blob <size>\0" + content), lowercase hex.
std::string git_blob_sha1(std::string_view content);
std::string git_blob_sha1_file(const std::filesystem::path& path);

/// UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace mps
