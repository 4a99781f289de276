#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mps/common.hpp"

namespace mps {

/// n x p covariates, a response, and column labels.
struct DataMatrix {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<std::string> names;
  bool standardized = false;
  /// Columns found constant when standardization was requested (left unscaled).
  std::vector<bool> zero_variance;

  int n() const { return static_cast<int>(x.rows()); }
  int p() const { return static_cast<int>(x.cols()); }

  /// Throws DataError unless n >= 2, p >= 1, shapes agree, values are finite
  /// and names are unique.
  void validate() const;

  /// Copy of the given rows (in the given order).
  DataMatrix rows(std::span<const int> idx) const;

  /// Column index for a name; throws DataError if absent.
  int column(const std::string& name) const;
};

/// Column centering/scaling learned on one dataset and replayable on another.
/// Uses the sample standard deviation (n - 1 denominator).
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd sd;
  std::vector<bool> zero_variance;

  static Standardizer fit(const DataMatrix& data);
  DataMatrix apply(const DataMatrix& data) const;
};

/// Reads an RFC-4180 CSV with a header row. Every column except `response`
/// becomes a covariate. Throws DataError on missing file, duplicate header
/// names, ragged rows or non-numeric cells (row and column are reported).
DataMatrix read_csv(const std::filesystem::path& path, const std::string& response);

/// Appends squares and pairwise products (names "a^2", "a:b"). Squares of
/// columns taking at most two distinct values are skipped: they are an affine
/// function of the column itself.
DataMatrix expand_second_order(const DataMatrix& data);

/// The (j, k) column pairs expand_second_order would append (j == k: square).
std::vector<std::pair<int, int>> second_order_terms(const DataMatrix& data);
DataMatrix apply_second_order(const DataMatrix& data, std::span<const std::pair<int, int>> terms);

/// read_csv, then optional second-order expansion and full-data standardization.
/// When both are requested the base columns are standardized before products are
/// formed, and the expanded matrix is standardized again.
DataMatrix load_csv(const std::filesystem::path& path, const std::string& response, bool standardize,
                    bool expand_second_order);

/// Standardization and expansion fitted on `train` and replayed on `test`.
std::pair<DataMatrix, DataMatrix> prepare_train_test(const DataMatrix& train, const DataMatrix& test,
                                                     bool standardize, bool expand);

/// Seeded random split; the test part has round(test_fraction * n) rows.
std::pair<DataMatrix, DataMatrix> split_train_test(const DataMatrix& data, double test_fraction,
                                                   std::uint64_t seed);

/// Toeplitz covariance with entries rho^|i-j|. Requires 0 <= rho < 1.
Eigen::MatrixXd toeplitz_cov(int p, double rho);

/// Sparse coefficient patterns:
///  1: s ones at round(1 + k(p-1)/(s-1)) (1-based), k = 0..s-1
///  2: s ones in the first s positions
///  3: 10 down to 0.5, equally spaced, in the first s positions
Eigen::VectorXd make_beta(int p, int s, int beta_type);

struct SyntheticSpec {
  int n = 100;
  int p = 10;
  int s = 5;
  double rho = 0.0;
  double snr = 1.0;
  int beta_type = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

template <class Json>
void to_json(Json& j, const SyntheticSpec& s) {
  j = Json::object();
  j["n"] = s.n;
  j["p"] = s.p;
  j["s"] = s.s;
  j["rho"] = s.rho;
  j["snr"] = s.snr;
  j["beta_type"] = s.beta_type;
  j["seed"] = s.seed;
}

template <class Json>
void from_json(const Json& j, SyntheticSpec& s) {
  j.at("n").get_to(s.n);
  j.at("p").get_to(s.p);
  j.at("s").get_to(s.s);
  j.at("rho").get_to(s.rho);
  j.at("snr").get_to(s.snr);
  j.at("beta_type").get_to(s.beta_type);
  j.at("seed").get_to(s.seed);
  s.validate();
}

struct TrainTestPair {
  DataMatrix train;
  DataMatrix test;
  Eigen::VectorXd beta_true;
};

/// Noise variance beta' Sigma beta / snr.
double noise_variance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta, double snr);

/// Y = X beta + e with X ~ N(0, Sigma) and e ~ N(0, beta' Sigma beta / snr).
/// Train rows are drawn first, then test rows, from one stream keyed by spec.seed.
TrainTestPair gen_linear(const SyntheticSpec& spec, int n_test);

/// Covariance of the 18-covariate grouped example: three compound-symmetric
/// blocks of 3 (off-diagonal 0.9) followed by 9 independent columns.
Eigen::MatrixXd motivating_cov();

/// Coefficients (3,3,3,2,2,2,1,1,1,0 x 9).
Eigen::VectorXd motivating_beta();

/// Data from the grouped example at the requested signal-to-noise ratio.
TrainTestPair gen_motivating(int n, double snr, std::uint64_t seed, int n_test = 10000);

/// Draws from N(0, sigma) and the linear model on top of it; shared by both generators.
TrainTestPair gen_gaussian_linear(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta, double snr, int n,
                                  int n_test, std::uint64_t seed);

}  // namespace mps
