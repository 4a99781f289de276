#include "mps/reporting.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "csv.hpp"

namespace mps {

double rte(const FittedModel& model, const DataMatrix& test, const Eigen::VectorXd& beta_true) {
  if (beta_true.size() != test.p()) throw std::invalid_argument("rte: beta_true must have length p");
  const double denom = (test.y - test.x * beta_true).squaredNorm();
  if (!(denom > 0.0)) throw std::domain_error("rte: noiseless test set (zero denominator)");
  return (test.y - model.predict(test.x)).squaredNorm() / denom;
}

double min_rte_over_set(const std::vector<IndexList>& models, const DataMatrix& train, const DataMatrix& test,
                        const Eigen::VectorXd& beta_true, const ModelClass& model_class) {
  if (models.empty()) throw std::invalid_argument("min_rte_over_set: empty model list");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& m : models) best = std::min(best, rte(fit(model_class, train, m), test, beta_true));
  return best;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& out, const std::vector<SimResultRow>& rows) {
  out << "setup,beta_type,rho,snr,method,rep,rte,n_models,n_paths,beats_all_mps,error\n";
  for (const auto& r : rows) {
    out << r.setup << ',' << r.beta_type << ',' << format_double(r.rho) << ',' << format_double(r.snr) << ','
        << csv::escape(r.method) << ',' << r.rep << ',' << format_double(r.rte) << ',' << r.n_models << ','
        << r.n_paths << ',' << (r.beats_all_mps ? (*r.beats_all_mps ? "1" : "0") : "") << ','
        << csv::escape(r.error) << '\n';
  }
}

void write_timings_csv(std::ostream& out, const std::vector<SimResultRow>& rows) {
  out << "setup,beta_type,rho,snr,method,rep,runtime_ms\n";
  for (const auto& r : rows)
    out << r.setup << ',' << r.beta_type << ',' << format_double(r.rho) << ',' << format_double(r.snr) << ','
        << csv::escape(r.method) << ',' << r.rep << ',' << std::fixed << std::setprecision(3) << r.runtime_ms
        << std::defaultfloat << '\n';
}

std::vector<SimResultRow> read_results_csv(std::istream& in) {
  const auto records = csv::parse(in);
  if (records.empty()) throw DataError("results file is empty");
  const auto& header = records.front().fields;
  if (header.size() != 11 || header[0] != "setup" || header[10] != "error")
    throw DataError("unexpected results header");
  std::vector<SimResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i].fields;
    if (f.size() != 11) throw DataError("line " + std::to_string(records[i].line) + ": expected 11 fields");
    SimResultRow r;
    try {
      r.setup = std::stoi(f[0]);
      r.beta_type = std::stoi(f[1]);
      r.rho = std::stod(f[2]);
      r.snr = std::stod(f[3]);
      r.method = f[4];
      r.rep = std::stoi(f[5]);
      r.rte = f[6] == "nan" ? std::nan("") : std::stod(f[6]);
      r.n_models = std::stoi(f[7]);
      r.n_paths = std::stoi(f[8]);
    } catch (const std::exception&) {
      throw DataError("line " + std::to_string(records[i].line) + ": malformed number");
    }
    if (!f[9].empty()) r.beats_all_mps = f[9] == "1";
    r.error = f[10];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<MethodSummary> aggregate(const std::vector<SimResultRow>& rows) {
  using Key = std::tuple<int, int, double, double, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const SimResultRow*>> groups;
  for (const auto& r : rows) {
    Key k{r.setup, r.beta_type, r.rho, r.snr, r.method};
    auto [it, fresh] = groups.try_emplace(k);
    if (fresh) order.push_back(k);
    it->second.push_back(&r);
  }
  std::vector<MethodSummary> out;
  for (const auto& k : order) {
    MethodSummary s;
    std::tie(s.setup, s.beta_type, s.rho, s.snr, s.method) = k;
    std::vector<double> rtes;
    double models = 0, paths = 0;
    int wins = 0, contests = 0;
    for (const auto* r : groups[k]) {
      if (!r->error.empty()) {
        ++s.reps_failed;
        continue;
      }
      rtes.push_back(r->rte);
      models += r->n_models;
      paths += r->n_paths;
      if (r->beats_all_mps) {
        ++contests;
        wins += *r->beats_all_mps;
      }
    }
    s.reps_ok = static_cast<int>(rtes.size());
    if (s.reps_ok > 0) {
      double sum = 0;
      for (double v : rtes) sum += v;
      s.mean_rte = sum / s.reps_ok;
      if (s.reps_ok > 1) {
        double ss = 0;
        for (double v : rtes) ss += (v - s.mean_rte) * (v - s.mean_rte);
        s.se_rte = std::sqrt(ss / (s.reps_ok - 1)) / std::sqrt(static_cast<double>(s.reps_ok));
      }
      s.mean_models = models / s.reps_ok;
      s.mean_paths = paths / s.reps_ok;
    }
    if (contests > 0) s.win_proportion = static_cast<double>(wins) / contests;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::pair<std::string, double>> proportion_win(const std::vector<SimResultRow>& rows) {
  bool any_mps = false;
  for (const auto& r : rows) any_mps |= r.method == "mps" && r.error.empty();
  if (!any_mps) throw std::invalid_argument("proportion_win: no successful mps rows");
  std::vector<std::string> order;
  std::map<std::string, std::pair<int, int>> tally;
  for (const auto& r : rows) {
    if (!r.beats_all_mps) continue;
    auto [it, fresh] = tally.try_emplace(r.method, 0, 0);
    if (fresh) order.push_back(r.method);
    it->second.first += *r.beats_all_mps;
    ++it->second.second;
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& m : order)
    out.emplace_back(m, static_cast<double>(tally[m].first) / tally[m].second);
  return out;
}

void print_summary(std::ostream& out, const std::vector<MethodSummary>& summary) {
  out << std::left << std::setw(6) << "setup" << std::setw(6) << "beta" << std::setw(7) << "rho" << std::setw(7)
      << "snr" << std::setw(21) << "method" << std::setw(20) << "rte (mean +- se)" << std::setw(9) << "models"
      << std::setw(9) << "paths" << std::setw(8) << "win" << "failed\n";
  for (const auto& s : summary) {
    std::ostringstream rte_txt;
    rte_txt << std::fixed << std::setprecision(3) << s.mean_rte << " +- " << s.se_rte;
    std::ostringstream win_txt;
    if (s.win_proportion) win_txt << std::fixed << std::setprecision(2) << *s.win_proportion;
    else win_txt << "-";
    out << std::left << std::setw(6) << s.setup << std::setw(6) << s.beta_type << std::setw(7) << format_double(s.rho)
        << std::setw(7) << format_double(s.snr) << std::setw(21) << s.method << std::setw(20) << rte_txt.str()
        << std::setw(9) << std::fixed << std::setprecision(1) << s.mean_models << std::setw(9) << s.mean_paths
        << std::setw(8) << win_txt.str() << s.reps_failed << std::defaultfloat << '\n';
  }
}

std::string git_blob_sha1(std::string_view content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob.append(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr))
    throw std::runtime_error("sha1 digest failed");
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

std::string git_blob_sha1_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return git_blob_sha1(buf.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace mps
