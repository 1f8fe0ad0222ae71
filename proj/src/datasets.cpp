#include "dppmix/datasets.hpp"

#include <cmath>

namespace dppmix {

const std::vector<double>& galaxy_velocities() {
  static const std::vector<double> v{
      9172,  9350,  9483,  9558,  9775,  10227, 10406, 16084, 16170, 18419, 18552, 18600, 18927, 19052,
      19070, 19330, 19343, 19349, 19440, 19473, 19529, 19541, 19547, 19663, 19846, 19856, 19863, 19914,
      19918, 19973, 19989, 20166, 20175, 20179, 20196, 20215, 20221, 20415, 20629, 20795, 20821, 20846,
      20875, 20986, 21137, 21492, 21701, 21814, 21921, 21960, 22185, 22209, 22242, 22249, 22314, 22374,
      22495, 22746, 22747, 22888, 22914, 23206, 23241, 23263, 23484, 23538, 23542, 23666, 23706, 23711,
      24129, 24285, 24289, 24366, 24717, 24990, 25633, 26960, 26995, 32065, 32789, 34279};
  return v;
}

std::vector<double> galaxy_data() {
  std::vector<double> out;
  for (double v : galaxy_velocities()) out.push_back(v / 1000.0);
  return out;
}

LabeledSample simulate_eight_components(int n, Rng& rng) {
  LabeledSample s;
  const double sd = std::sqrt(0.05);
  for (int i = 0; i < n; ++i) {
    const int k = rng.index(8);
    s.labels.push_back(k);
    s.y.push_back(rng.normal(-10.0 + 20.0 * k / 7.0, sd));
  }
  return s;
}

CovMixtureState three_cov_truth() {
  CovMixtureState t;
  t.mu = {0.0, 6.0, -6.0};
  t.sigma2 = {0.25, 0.25, 0.25};
  t.gamma = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(-0.5, 0.5)};
  t.beta = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(4.0, 0.0), Eigen::Vector2d(-4.0, 0.0)};
  t.rho = 1.0;
  t.nu = 2.0;
  return t;
}

LabeledCovSample simulate_three_cov_components(int n, Rng& rng) {
  const CovMixtureState truth = three_cov_truth();
  LabeledCovSample s;
  s.data.y.resize(n);
  s.data.x.resize(n, 2);
  std::vector<double> logw(3);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d x(rng.normal(), rng.normal());
    const Eigen::VectorXd lw = gating_log_weights(truth.beta, x);
    for (int k = 0; k < 3; ++k) logw[static_cast<std::size_t>(k)] = lw(k);
    const int k = rng.categorical_log(logw);
    const auto ks = static_cast<std::size_t>(k);
    s.data.x.row(i) = x.transpose();
    s.data.y(i) = rng.normal(truth.mu[ks] + x.dot(truth.gamma[ks]), std::sqrt(truth.sigma2[ks]));
    s.labels.push_back(k);
  }
  return s;
}

}  // namespace dppmix
