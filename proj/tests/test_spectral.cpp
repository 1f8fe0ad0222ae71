#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "dppmix/errors.hpp"
#include "dppmix/random.hpp"
#include "dppmix/spectral.hpp"

using namespace dppmix;

namespace {

const double kPi = std::numbers::pi;

// PES spectral density in d = 1 written out directly.
double pes_phi(double x, double rho, double nu, double s) {
  const double scale = std::pow(s * std::sqrt(kPi) * std::tgamma(1.0 / nu + 1.0) / (rho * std::tgamma(1.5)), nu);
  return s * std::exp(-scale * std::pow(std::abs(x), nu));
}

double kernel_direct(double t, double rho, double nu, double s, int n_trunc) {
  double acc = 0.0;
  for (int k = -n_trunc; k <= n_trunc; ++k) {
    const double p = pes_phi(k, rho, nu, s);
    acc += p / (1.0 - p) * std::cos(2.0 * kPi * k * t);
  }
  return acc;
}

long double cofactor_det(const std::vector<std::vector<long double>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return 1.0;
  if (n == 1) return m[0][0];
  long double det = 0.0L;
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<std::vector<long double>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<long double> row;
      for (std::size_t c = 0; c < n; ++c) {
        if (c != col) row.push_back(m[r][c]);
      }
      minor.push_back(row);
    }
    det += (col % 2 == 0 ? 1.0L : -1.0L) * m[0][col] * cofactor_det(minor);
  }
  return det;
}

// Extended precision so the oracle survives nearly coincident points.
std::vector<std::vector<long double>> direct_matrix(const std::vector<double>& pts, double rho, double nu, double s,
                                                    int n) {
  using LD = long double;
  const LD pi = std::numbers::pi_v<LD>;
  const LD scale = std::pow(s * std::sqrt(pi) * std::tgamma(1.0L / nu + 1.0L) / (rho * std::tgamma(1.5L)), LD(nu));
  std::vector<std::vector<LD>> m(pts.size(), std::vector<LD>(pts.size(), 0.0L));
  for (int k = -n; k <= n; ++k) {
    const LD p = s * std::exp(-scale * std::pow(std::abs(LD(k)), LD(nu)));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) {
        m[i][j] += p / (1.0L - p) * std::cos(2.0L * pi * k * (LD(pts[i]) - LD(pts[j])));
      }
    }
  }
  return m;
}

long double d_app_long(double rho, double nu, double s, int n) {
  long double acc = 0.0L;
  for (int k = -n; k <= n; ++k) acc -= std::log1p(-static_cast<long double>(pes_phi(k, rho, nu, s)));
  return acc;
}

DppWindow unit_window(double rho, double nu = 2.0, double s = 0.5, int n = 50) {
  return DppWindow(SpectralModel::power_exponential(rho, nu, s), unit_rectangle(1), n);
}

}  // namespace

TEST_CASE("PES density matches the closed form and its ceiling") {
  for (double nu : {0.5, 1.0, 2.0, 3.0}) {
    for (double rho : {0.5, 2.0, 7.5}) {
      const auto m = SpectralModel::power_exponential(rho, nu, 0.5);
      for (double x : {0.0, 0.3, 1.0, 2.5, 6.0}) {
        const double expected = pes_phi(x, rho, nu, 0.5);
        CHECK(m.radial(x) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(m.radial(x) <= 0.5);
      }
    }
  }
}

TEST_CASE("threshold M puts phi(2) exactly at epsilon") {
  for (double nu : {0.5, 1.0, 2.0, 4.0}) {
    // bisection on rho for pes_phi(2) = eps
    double lo = 1e-6, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (pes_phi(2.0, mid, nu, 0.5) > 0.05 ? hi : lo) = mid;
    }
    CHECK(m_threshold(0.5, 0.05, nu) == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
  }
  CHECK(m_threshold(0.5, 0.05, 2.0) == doctest::Approx(1.168).epsilon(1e-3));
  CHECK_THROWS_AS(m_threshold(0.5, 0.5, 2.0), DomainError);
  CHECK_THROWS_AS(m_threshold(0.5, 0.7, 2.0), DomainError);
}

TEST_CASE("Whittle-Matern and Cauchy reach one at rho_max") {
  const auto wm = SpectralModel::whittle_matern(1.0, 0.1, 2.0);
  const double wm_max = std::tgamma(2.0) / (std::tgamma(2.5) * 2.0 * 0.1 * std::sqrt(kPi));
  CHECK(wm.rho_max() == doctest::Approx(wm_max).epsilon(1e-12));
  CHECK(SpectralModel::whittle_matern(wm.rho_max(), 0.1, 2.0).radial(0.0) == doctest::Approx(1.0).epsilon(1e-12));
  const auto gc = SpectralModel::generalized_cauchy(1.0, 0.1, 1.5);
  CHECK(SpectralModel::generalized_cauchy(gc.rho_max(), 0.1, 1.5).radial(0.0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(SpectralModel::whittle_matern(2.0 * wm_max, 0.1, 2.0).validate(), DomainError);
  CHECK_NOTHROW(SpectralModel::whittle_matern(0.5 * wm_max, 0.1, 2.0).validate());
}

TEST_CASE("spectral validation rejects invalid parameters") {
  CHECK_THROWS_AS(SpectralModel::power_exponential(-1.0, 2.0).validate(), DomainError);
  CHECK_THROWS_AS(SpectralModel::power_exponential(1.0, 0.0).validate(), DomainError);
  CHECK_THROWS_AS(SpectralModel::power_exponential(1.0, 2.0, 1.0).validate(), DomainError);
  CHECK_THROWS_AS(DppWindow(SpectralModel::power_exponential(1.0, 2.0), unit_rectangle(1), 0), DomainError);
  CHECK_THROWS_AS(DppWindow(SpectralModel::power_exponential(1.0, 2.0), Rectangle{{1.0, 1.0}}, 5), DomainError);
}

TEST_CASE("D_app matches a long double sum") {
  for (double rho : {1.5, 2.0, 6.0}) {
    const auto w = unit_window(rho);
    CHECK(w.d_app() == doctest::Approx(static_cast<double>(d_app_long(rho, 2.0, 0.5, 50))).epsilon(1e-13));
  }
}

TEST_CASE("kernel agrees with the direct cosine sum") {
  const auto w = unit_window(3.0);
  for (double t : {0.0, 0.01, 0.13, 0.25, 0.5, 0.77, -0.4}) {
    CHECK(w.c_app(t) == doctest::Approx(kernel_direct(t, 3.0, 2.0, 0.5, 50)).epsilon(1e-12));
  }
  CHECK(w.c_app_zero() == doctest::Approx(w.c_app(0.0)).epsilon(1e-14));
}

TEST_CASE("log density matches cofactor determinants for n <= 5") {
  Rng rng(11);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + rep % 5;
    const double rho = 1.2 + 6.0 * rng.uniform();
    const auto w = unit_window(rho);
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (double& p : pts) p = rng.uniform() - 0.5;
    const long double det = cofactor_det(direct_matrix(pts, rho, 2.0, 0.5, 50));
    if (!(det > 0.0L)) continue;
    const double expected = static_cast<double>(1.0L - d_app_long(rho, 2.0, 0.5, 50) + std::log(det));
    const double got = w.log_density_unit(pts);
    worst = std::max(worst, std::abs(got - expected) / std::max(1.0, std::abs(expected)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("Schur factor equals the determinant ratio for K <= 6") {
  Rng rng(12);
  double worst = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + rep % 6;
    const double rho = 1.5 + 3.0 * rng.uniform();
    const auto w = unit_window(rho);
    std::vector<double> pts(static_cast<std::size_t>(n));
    // well separated points keep the determinants away from round-off
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = -0.45 + 0.9 * (i + 0.5 * rng.uniform()) / n;
    const auto full = direct_matrix(pts, rho, 2.0, 0.5, 50);
    const int k = rng.index(n);
    std::vector<double> rest;
    for (int i = 0; i < n; ++i) {
      if (i != k) rest.push_back(pts[static_cast<std::size_t>(i)]);
    }
    const double ratio = static_cast<double>(cofactor_det(full) / cofactor_det(direct_matrix(rest, rho, 2.0, 0.5, 50)));
    worst = std::max(worst, std::abs(schur_factor(w, pts, k) - ratio) / std::abs(ratio));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("kernel matrices are positive semidefinite") {
  Rng rng(13);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + rep % 10;
    const auto w = unit_window(1.2 + 8.0 * rng.uniform(), rep % 2 ? 2.0 : 1.0);
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (double& p : pts) p = rng.uniform() - 0.5;
    const Eigen::MatrixXd c = w.kernel_matrix(pts);
    CHECK((c - c.transpose()).norm() == 0.0);
    const double smallest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(c).eigenvalues().minCoeff();
    CHECK(smallest >= -1e-8 * c.norm());
  }
}

TEST_CASE("two-point density is nondecreasing in separation") {
  const DppWindow w(SpectralModel::power_exponential(2.0, 2.0, 0.5), Rectangle{{-5.0, 5.0}}, 50);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 200; ++i) {
    const double sep = 5.0 * i / 200.0;
    const std::vector<double> pts{-sep / 2.0, sep / 2.0};
    const double v = w.log_density_rect(pts);
    CHECK(v >= prev - 1e-12);
    prev = v;
  }
}

TEST_CASE("count law is the Bernoulli sum of phi") {
  const DppWindow w(SpectralModel::power_exponential(2.0, 2.0, 0.5), unit_rectangle(1), 3);
  std::vector<double> phi;
  for (int k = -3; k <= 3; ++k) phi.push_back(pes_phi(k, 2.0, 2.0, 0.5));
  std::vector<double> pmf(8, 0.0);
  for (int mask = 0; mask < 128; ++mask) {
    double p = 1.0;
    int count = 0;
    for (int i = 0; i < 7; ++i) {
      const bool in = (mask >> i) & 1;
      p *= in ? phi[static_cast<std::size_t>(i)] : 1.0 - phi[static_cast<std::size_t>(i)];
      count += in;
    }
    pmf[static_cast<std::size_t>(count)] += p;
  }
  const auto got = w.count_pmf(7);
  for (int k = 0; k <= 7; ++k) CHECK(got[static_cast<std::size_t>(k)] == doctest::Approx(pmf[static_cast<std::size_t>(k)]).epsilon(1e-13));
  double mean = 0.0;
  for (double p : phi) mean += p;
  CHECK(w.count_moments().mean == doctest::Approx(mean).epsilon(1e-13));
  const auto cond = w.conditional_count_moments();
  double m1 = 0.0;
  for (int k = 1; k <= 7; ++k) m1 += k * pmf[static_cast<std::size_t>(k)];
  CHECK(cond.mean == doctest::Approx(m1 / (1.0 - pmf[0])).epsilon(1e-12));
}

TEST_CASE("expected count is close to rho") {
  for (double rho : {3.0, 5.0, 10.0}) {
    CHECK(unit_window(rho).count_moments().mean == doctest::Approx(rho).epsilon(0.01));
  }
}

TEST_CASE("count sampler never returns zero and matches the conditional mean") {
  const DppWindow w(SpectralModel::power_exponential(2.0, 2.0, 0.5), Rectangle{{-5.0, 5.0}}, 50);
  Rng rng(14);
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const int k = w.sample_count(rng);
    REQUIRE(k >= 1);
    sum += k;
    sum_sq += static_cast<double>(k) * k;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
  CHECK(std::abs(mean - w.conditional_count_moments().mean) < 4.0 * se);
}
