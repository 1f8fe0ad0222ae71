#include "dppmix/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dppmix/errors.hpp"
#include "dppmix/random.hpp"

namespace dppmix {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

double log_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

double log_inv_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

double log_beta_pdf(double x, double a, double b) {
  if (x <= 0.0 || x >= 1.0) return kNegInf;
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
         (b - 1.0) * std::log1p(-x);
}

double log_dirichlet_sym_pdf(std::span<const double> w, double delta) {
  const auto k = static_cast<double>(w.size());
  double out = std::lgamma(k * delta) - k * std::lgamma(delta);
  for (double wi : w) {
    if (wi <= 0.0) return kNegInf;
    out += (delta - 1.0) * std::log(wi);
  }
  return out;
}

double log_mvnormal_pdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                        const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw NumericalError("covariance is not positive definite");
  const Eigen::VectorXd z = llt.matrixL().solve(x - mean);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * (static_cast<double>(x.size()) * kLogTwoPi + log_det + z.squaredNorm());
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

std::vector<double> Rng::dirichlet(std::span<const double> alpha) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma(alpha[i], 1.0);
    total += out[i];
  }
  if (total <= 0.0) {
    // All gamma draws underflowed (tiny concentrations); fall back to a vertex.
    std::fill(out.begin(), out.end(), 0.0);
    out[static_cast<std::size_t>(index(static_cast<int>(out.size())))] = 1.0;
    return out;
  }
  for (double& v : out) v /= total;
  return out;
}

Eigen::VectorXd Rng::mvnormal_chol(const Eigen::VectorXd& mean, const Eigen::MatrixXd& chol_lower) {
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal();
  return mean + chol_lower * z;
}

int Rng::categorical_log(std::span<const double> log_weights) {
  const auto it = std::max_element(log_weights.begin(), log_weights.end());
  const double m = *it;
  // Every weight is zero: fall back to the (first) maximiser.
  if (!std::isfinite(m)) return static_cast<int>(it - log_weights.begin());
  double total = 0.0;
  for (double v : log_weights) total += std::exp(v - m);
  double u = uniform() * total;
  for (std::size_t k = 0; k < log_weights.size(); ++k) {
    u -= std::exp(log_weights[k] - m);
    if (u < 0.0) return static_cast<int>(k);
  }
  // Rounding left a sliver of mass; return the last index that carries weight.
  for (std::size_t k = log_weights.size(); k-- > 0;) {
    if (std::isfinite(log_weights[k])) return static_cast<int>(k);
  }
  return static_cast<int>(it - log_weights.begin());
}

}  // namespace dppmix
