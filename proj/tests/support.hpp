#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "mps/datasets.hpp"

namespace testing {

// Gaussian design with y = X b + noise_sd * e.
inline mps::DataMatrix random_data(int n, int p, std::uint64_t seed, const Eigen::VectorXd& b = {},
                                   double noise_sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  mps::DataMatrix d;
  d.x.resize(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) d.x(i, j) = z(rng);
  d.y = Eigen::VectorXd::Zero(n);
  if (b.size() == p) d.y = d.x * b;
  for (int i = 0; i < n; ++i) d.y(i) += noise_sd * z(rng);
  for (int j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j + 1));
  return d;
}

// 0/1 response from a logistic model on a random design.
inline mps::DataMatrix random_binary(int n, int p, std::uint64_t seed) {
  auto d = random_data(n, p, seed);
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<double> u;
  for (int i = 0; i < n; ++i) {
    const double eta = 1.2 * d.x(i, 0) - 0.8 * d.x(i, 1 % p);
    d.y(i) = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return d;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("mps_tests_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace testing
