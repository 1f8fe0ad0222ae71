#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dppmix {

// Per-chain random source. Not thread safe; each chain owns one.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }
  double inv_gamma(double shape, double rate) { return 1.0 / gamma(shape, rate); }
  double beta(double a, double b) {
    const double x = gamma(a, 1.0);
    const double y = gamma(b, 1.0);
    return x / (x + y);
  }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer on [0, n).
  int index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

  std::vector<double> dirichlet(std::span<const double> alpha);

  // Draw from N(mean, cov) given the lower Cholesky factor of cov.
  Eigen::VectorXd mvnormal_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower);

  // Index drawn with probability proportional to exp(log_weights).
  int categorical_log(std::span<const double> log_weights);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace dppmix
