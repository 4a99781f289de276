#include "mps/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "csv.hpp"
#include "mps/resampling.hpp"

namespace mps {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

void DataMatrix::validate() const {
  if (x.rows() < 2) throw DataError("data must have at least 2 rows");
  if (x.cols() < 1) throw DataError("data must have at least 1 covariate");
  if (y.size() != x.rows()) throw DataError("response length does not match covariate rows");
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw DataError("one name per covariate required");
  if (!x.allFinite() || !y.allFinite()) throw DataError("data contains non-finite values");
  std::unordered_set<std::string> seen;
  for (const auto& nm : names)
    if (!seen.insert(nm).second) throw DataError("duplicate covariate name '" + nm + "'");
}

DataMatrix DataMatrix::rows(std::span<const int> idx) const {
  DataMatrix out;
  out.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.row(idx[i]);
    out.y(static_cast<Eigen::Index>(i)) = y(idx[i]);
  }
  out.names = names;
  out.standardized = standardized;
  out.zero_variance = zero_variance;
  return out;
}

int DataMatrix::column(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("no column named '" + name + "'");
  return static_cast<int>(it - names.begin());
}

Standardizer Standardizer::fit(const DataMatrix& data) {
  Standardizer s;
  const auto n = static_cast<double>(data.n());
  s.mean = data.x.colwise().mean();
  s.sd.resize(data.p());
  s.zero_variance.assign(static_cast<std::size_t>(data.p()), false);
  for (int j = 0; j < data.p(); ++j) {
    const double ss = (data.x.col(j).array() - s.mean(j)).square().sum();
    const double sd = std::sqrt(ss / (n - 1.0));
    const double scale = std::max(1.0, std::abs(s.mean(j)));
    if (!(sd > 1e-12 * scale)) {
      s.zero_variance[j] = true;
      s.sd(j) = 1.0;
    } else {
      s.sd(j) = sd;
    }
  }
  return s;
}

DataMatrix Standardizer::apply(const DataMatrix& data) const {
  if (data.p() != mean.size()) throw DataError("standardizer column count mismatch");
  DataMatrix out = data;
  out.x = ((data.x.rowwise() - mean).array().rowwise() / sd.array()).matrix();
  out.standardized = true;
  out.zero_variance = zero_variance;
  return out;
}

DataMatrix read_csv(const std::filesystem::path& path, const std::string& response) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<csv::Record> records;
  try {
    records = csv::parse(in);
  } catch (const std::runtime_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (records.empty()) throw DataError(path.string() + ": missing header row");

  const auto& header = records.front().fields;
  std::set<std::string> seen;
  for (const auto& h : header)
    if (!seen.insert(h).second) throw DataError(path.string() + ": duplicate column name '" + h + "'");
  const auto resp_it = std::find(header.begin(), header.end(), response);
  if (resp_it == header.end()) throw DataError(path.string() + ": response column '" + response + "' not found");
  const auto resp_col = static_cast<std::size_t>(resp_it - header.begin());

  DataMatrix data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != resp_col) data.names.push_back(header[c]);

  const auto n = static_cast<Eigen::Index>(records.size() - 1);
  data.x.resize(n, static_cast<Eigen::Index>(data.names.size()));
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i) + 1];
    if (rec.fields.size() != header.size())
      throw DataError(path.string() + ": line " + std::to_string(rec.line) + " has " +
                      std::to_string(rec.fields.size()) + " fields, expected " + std::to_string(header.size()));
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      double v = 0.0;
      if (!parse_double(rec.fields[c], v))
        throw DataError(path.string() + ": non-numeric value '" + rec.fields[c] + "' at line " +
                        std::to_string(rec.line) + ", column '" + header[c] + "'");
      if (c == resp_col)
        data.y(i) = v;
      else
        data.x(i, j++) = v;
    }
  }
  data.zero_variance.assign(data.names.size(), false);
  data.validate();
  return data;
}

std::vector<std::pair<int, int>> second_order_terms(const DataMatrix& data) {
  const int p = data.p();
  std::vector<std::pair<int, int>> terms;
  for (int j = 0; j < p; ++j) {
    std::set<double> distinct;
    for (Eigen::Index i = 0; i < data.x.rows() && distinct.size() <= 2; ++i) distinct.insert(data.x(i, j));
    if (distinct.size() > 2) terms.emplace_back(j, j);
  }
  for (int j = 0; j < p; ++j)
    for (int k = j + 1; k < p; ++k) terms.emplace_back(j, k);
  return terms;
}

DataMatrix apply_second_order(const DataMatrix& data, std::span<const std::pair<int, int>> terms) {
  const int p = data.p();
  DataMatrix out;
  out.x.resize(data.x.rows(), p + static_cast<Eigen::Index>(terms.size()));
  out.x.leftCols(p) = data.x;
  out.names = data.names;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const auto [j, k] = terms[t];
    out.x.col(p + static_cast<Eigen::Index>(t)) = data.x.col(j).cwiseProduct(data.x.col(k));
    out.names.push_back(j == k ? data.names[j] + "^2" : data.names[j] + ":" + data.names[k]);
  }
  out.y = data.y;
  out.zero_variance.assign(out.names.size(), false);
  return out;
}

DataMatrix expand_second_order(const DataMatrix& data) { return apply_second_order(data, second_order_terms(data)); }

DataMatrix load_csv(const std::filesystem::path& path, const std::string& response, bool standardize,
                    bool expand) {
  DataMatrix raw = read_csv(path, response);
  return prepare_train_test(raw, raw, standardize, expand).first;
}

std::pair<DataMatrix, DataMatrix> prepare_train_test(const DataMatrix& train, const DataMatrix& test,
                                                     bool standardize, bool expand) {
  DataMatrix a = train, b = test;
  if (expand) {
    if (standardize) {
      const auto base = Standardizer::fit(a);
      a = base.apply(a);
      b = base.apply(b);
    }
    const auto terms = second_order_terms(a);
    a = apply_second_order(a, terms);
    b = apply_second_order(b, terms);
  }
  if (standardize) {
    const auto s = Standardizer::fit(a);
    a = s.apply(a);
    b = s.apply(b);
  }
  return {std::move(a), std::move(b)};
}

std::pair<DataMatrix, DataMatrix> split_train_test(const DataMatrix& data, double test_fraction,
                                                   std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("test fraction must lie in (0, 1)");
  const int n = data.n();
  const int n_test = static_cast<int>(std::lround(test_fraction * n));
  if (n_test < 2 || n - n_test < 2) throw DataError("test split leaves fewer than 2 rows on one side");
  IndexList perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  Engine rng = make_stream(seed, "train-test-split");
  std::shuffle(perm.begin(), perm.end(), rng);
  IndexList test(perm.begin(), perm.begin() + n_test);
  IndexList train(perm.begin() + n_test, perm.end());
  std::sort(test.begin(), test.end());
  std::sort(train.begin(), train.end());
  return {data.rows(train), data.rows(test)};
}

Eigen::MatrixXd toeplitz_cov(int p, double rho) {
  if (p < 1) throw std::invalid_argument("toeplitz_cov: p must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("toeplitz_cov: rho must lie in [0, 1)");
  Eigen::MatrixXd s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

Eigen::VectorXd make_beta(int p, int s, int beta_type) {
  if (s < 1 || s > p) throw std::invalid_argument("make_beta: need 1 <= s <= p");
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  switch (beta_type) {
    case 1:
      if (s == 1) {
        beta(0) = 1.0;
      } else {
        for (int k = 0; k < s; ++k) {
          const double pos = 1.0 + k * static_cast<double>(p - 1) / (s - 1);
          beta(static_cast<Eigen::Index>(std::lround(pos)) - 1) = 1.0;
        }
      }
      break;
    case 2:
      beta.head(s).setOnes();
      break;
    case 3:
      for (int k = 0; k < s; ++k) beta(k) = s == 1 ? 10.0 : 10.0 - k * 9.5 / (s - 1);
      break;
    default:
      throw std::invalid_argument("make_beta: beta_type must be 1, 2 or 3");
  }
  return beta;
}

void SyntheticSpec::validate() const {
  if (n < 2) throw std::invalid_argument("synthetic spec: n must be >= 2");
  if (p < 1) throw std::invalid_argument("synthetic spec: p must be >= 1");
  if (s < 1 || s > p) throw std::invalid_argument("synthetic spec: need 1 <= s <= p");
  if (!(rho >= 0.0 && rho < 1.0)) throw std::invalid_argument("synthetic spec: rho must lie in [0, 1)");
  if (!(snr > 0.0)) throw std::invalid_argument("synthetic spec: snr must be positive");
  if (beta_type < 1 || beta_type > 3) throw std::invalid_argument("synthetic spec: beta_type must be 1, 2 or 3");
}

double noise_variance(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta, double snr) {
  return beta.dot(sigma * beta) / snr;
}

TrainTestPair gen_gaussian_linear(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& beta, double snr, int n,
                                  int n_test, std::uint64_t seed) {
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::logic_error("covariance is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  const int p = static_cast<int>(sigma.rows());
  const double noise_sd = std::sqrt(noise_variance(sigma, beta, snr));

  Engine rng = make_stream(seed, "gaussian-linear");
  std::normal_distribution<double> normal;
  std::vector<std::string> names;
  for (int j = 0; j < p; ++j) names.push_back("X" + std::to_string(j + 1));

  auto draw = [&](int rows) {
    DataMatrix d;
    Eigen::MatrixXd z(rows, p);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < p; ++j) z(i, j) = normal(rng);
    d.x = z * lower.transpose();
    d.y = d.x * beta;
    for (int i = 0; i < rows; ++i) d.y(i) += noise_sd * normal(rng);
    d.names = names;
    d.zero_variance.assign(static_cast<std::size_t>(p), false);
    return d;
  };

  TrainTestPair out;
  out.train = draw(n);
  if (n_test > 0) out.test = draw(n_test);
  out.beta_true = beta;
  return out;
}

TrainTestPair gen_linear(const SyntheticSpec& spec, int n_test) {
  spec.validate();
  return gen_gaussian_linear(toeplitz_cov(spec.p, spec.rho), make_beta(spec.p, spec.s, spec.beta_type), spec.snr,
                             spec.n, n_test, spec.seed);
}

Eigen::MatrixXd motivating_cov() {
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(18, 18);
  for (int g = 0; g < 3; ++g)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) s(3 * g + i, 3 * g + j) = 0.9;
  return s;
}

Eigen::VectorXd motivating_beta() {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(18);
  b.segment(0, 3).setConstant(3.0);
  b.segment(3, 3).setConstant(2.0);
  b.segment(6, 3).setConstant(1.0);
  return b;
}

TrainTestPair gen_motivating(int n, double snr, std::uint64_t seed, int n_test) {
  if (n < 2) throw std::invalid_argument("gen_motivating: n must be >= 2");
  if (!(snr > 0.0)) throw std::invalid_argument("gen_motivating: snr must be positive");
  return gen_gaussian_linear(motivating_cov(), motivating_beta(), snr, n, n_test, seed);
}

}  // namespace mps
