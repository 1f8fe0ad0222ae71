// Runs the nine acceptance criteria and prints one PASS/FAIL line for each.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dppmix/analysis.hpp"
#include "dppmix/cli.hpp"
#include "dppmix/config.hpp"
#include "dppmix/datasets.hpp"
#include "dppmix/io.hpp"
#include "dppmix/sampler_cov.hpp"
#include "dppmix/sampler_nocov.hpp"

using namespace dppmix;
namespace fs = std::filesystem;

namespace {

const fs::path kData = DPPMIX_DATA_DIR;
const double kPi = std::numbers::pi;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, pattern, a);
  return buf;
}

// ---- independent oracles ---------------------------------------------------

double pes_phi(double x, double rho, double nu, double s) {
  const double scale = std::pow(s * std::sqrt(kPi) * std::tgamma(1.0 / nu + 1.0) / (rho * std::tgamma(1.5)), nu);
  return s * std::exp(-scale * std::pow(std::abs(x), nu));
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

// Kernel matrix in extended precision so the oracle survives nearly coincident points.
std::vector<std::vector<long double>> direct_matrix(const std::vector<double>& pts, double rho) {
  using LD = long double;
  const LD pi = std::numbers::pi_v<LD>;
  const LD scale = std::pow(0.5L * std::sqrt(pi) * std::tgamma(1.5L) / (static_cast<LD>(rho) * std::tgamma(1.5L)), 2.0L);
  std::vector<std::vector<LD>> m(pts.size(), std::vector<LD>(pts.size(), 0.0L));
  for (int k = -50; k <= 50; ++k) {
    const LD p = 0.5L * std::exp(-scale * k * k);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = 0; j < pts.size(); ++j) {
        m[i][j] += p / (1.0L - p) * std::cos(2.0L * pi * k * (static_cast<LD>(pts[i]) - static_cast<LD>(pts[j])));
      }
    }
  }
  return m;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  v /= static_cast<double>(xs.size() - 1);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

// ---- shared runs -----------------------------------------------------------

struct GalaxyRun {
  Trace trace;
  std::vector<double> y;
};

GalaxyRun run_galaxy(const std::string& config_name) {
  RunConfig config = load_config(kData / "configs" / config_name);
  config.schedule.n_keep = 20000;
  const Dataset data = load_run_data(config);
  return {fit_chain(config, data, 0), data.y};
}

// ---- criteria --------------------------------------------------------------

Verdict prior_only() {
  Hyperparams h;
  h.fixed_rho = 2.0;
  h.nu = NuPrior::fixed(2.0);
  h.s = 0.5;
  WindowPolicy policy;
  policy.rect = {Interval{-5.0, 5.0}};
  policy.truncation = 50;
  const Trace trace = run_chain({}, h, McmcSchedule{1000, 5, 50000, 101, 50}, policy);

  // oracle: Bernoulli sums over phi(k), k = -50..50, conditioned on K >= 1
  std::vector<double> phi;
  const DppWindow w(h.spectral_model(2.0, 2.0), policy.rect, 50);
  double cache_gap = 0.0;
  for (int k = -50; k <= 50; ++k) {
    phi.push_back(pes_phi(k, 2.0, 2.0, 0.5));
    cache_gap = std::max(cache_gap, std::abs(phi.back() - w.phi_values()[static_cast<std::size_t>(k + 50)]));
  }
  Rng rng(202);
  std::vector<double> oracle(64, 0.0);
  long accepted = 0;
  while (accepted < 1000000) {
    int k = 0;
    for (double p : phi) k += rng.uniform() < p;
    if (k == 0) continue;
    oracle[static_cast<std::size_t>(k)] += 1.0;
    ++accepted;
  }
  const KSummary ks = k_summary(trace);
  double tv = 0.0;
  for (std::size_t k = 1; k < oracle.size(); ++k) {
    const double emp = k < ks.pmf.size() ? ks.pmf[k] : 0.0;
    tv += std::abs(emp - oracle[k] / static_cast<double>(accepted));
  }
  tv *= 0.5;
  return {tv <= 0.05 && cache_gap < 1e-14,
          "TV = " + fmt("%.4f", tv) + " (<= 0.05), samples = " + std::to_string(trace.size())};
}

Verdict galaxy(const GalaxyRun& run) {
  const KSummary ks = k_summary(run.trace);
  const double lp = lpml(run.trace, run.y, Ordinate::Allocated).lpml;
  const double sq = mse(run.trace, run.y, Prediction::Allocated);
  const bool ok = ks.mean >= 5.6 && ks.mean <= 6.6 && ks.variance >= 0.6 && ks.variance <= 1.8 &&
                  std::abs(lp + 164.47) <= 10.0 && std::abs(sq - 73.89) <= 10.0;
  return {ok, "E(K) = " + fmt("%.3f", ks.mean) + " [5.6, 6.6], Var(K) = " + fmt("%.3f", ks.variance) +
                  " [0.6, 1.8], LPML = " + fmt("%.2f", lp) + " (-164.47 +/- 10), MSE = " + fmt("%.2f", sq) +
                  " (73.89 +/- 10); mixture-ordinate LPML = " + fmt("%.2f", lpml(run.trace, run.y).lpml) +
                  ", marginal MSE = " + fmt("%.1f", mse(run.trace, run.y))};
}

Verdict eight_components() {
  Rng data_rng(8);
  const LabeledSample sample = simulate_eight_components(100, data_rng);
  Hyperparams h;
  const Trace trace =
      run_chain(sample.y, h, McmcSchedule{5000, 10, 10000, 88, 50}, WindowPolicy::from_data(sample.y));
  const KSummary ks = k_summary(trace);
  const PartitionEstimate part = binder_partition(trace);
  const double ari = adjusted_rand_index(part.labels, sample.labels);
  const bool ok = ks.mean >= 7.7 && ks.mean <= 8.3 && ks.mode == 8 && ari >= 0.95;
  return {ok, "E(K) = " + fmt("%.3f", ks.mean) + " [7.7, 8.3], mode = " + std::to_string(ks.mode) +
                  " (8), Binder ARI = " + fmt("%.3f", ari) + " (>= 0.95), P(K = 8) = " +
                  fmt("%.3f", ks.pmf.size() > 8 ? ks.pmf[8] : 0.0)};
}

Verdict determinants() {
  Rng rng(404);
  double worst_det = 0.0;
  int compared = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + rep % 5;
    const double rho = 1.2 + 6.0 * rng.uniform();
    const DppWindow w(SpectralModel::power_exponential(rho, 2.0, 0.5), unit_rectangle(1), 50);
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (double& p : pts) p = rng.uniform() - 0.5;
    const long double det = cofactor_det(direct_matrix(pts, rho));
    if (!(det > 0.0)) continue;
    long double d_app = 0.0L;
    for (int k = -50; k <= 50; ++k) d_app -= std::log1p(-static_cast<long double>(pes_phi(k, rho, 2.0, 0.5)));
    const double expected = static_cast<double>(1.0L - d_app + std::log(det));
    worst_det = std::max(worst_det, std::abs(w.log_density_unit(pts) - expected) / std::max(1.0, std::abs(expected)));
    ++compared;
  }
  double worst_schur = 0.0;
  for (int rep = 0; rep < 600; ++rep) {
    const int n = 1 + rep % 6;
    const double rho = 1.5 + 3.0 * rng.uniform();
    const DppWindow w(SpectralModel::power_exponential(rho, 2.0, 0.5), unit_rectangle(1), 50);
    std::vector<double> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pts[static_cast<std::size_t>(i)] = -0.45 + 0.9 * (i + 0.5 * rng.uniform()) / n;
    const int k = rng.index(n);
    std::vector<double> rest;
    for (int i = 0; i < n; ++i) {
      if (i != k) rest.push_back(pts[static_cast<std::size_t>(i)]);
    }
    const double ratio = static_cast<double>(cofactor_det(direct_matrix(pts, rho)) / cofactor_det(direct_matrix(rest, rho)));
    worst_schur = std::max(worst_schur, std::abs(schur_factor(w, pts, k) - ratio) / std::abs(ratio));
  }
  return {worst_det <= 1e-8 && worst_schur <= 1e-10 && compared >= 900,
          "max rel. error log density = " + fmt("%.2e", worst_det) + " (<= 1e-8, " + std::to_string(compared) +
              " configs), Schur = " + fmt("%.2e", worst_schur) + " (<= 1e-10)"};
}

Verdict conjugate_updates() {
  const int draws = 100000;
  int checks = 0, passed = 0;
  auto within = [&](double estimate, double se, double truth) {
    ++checks;
    if (std::abs(estimate - truth) <= 3.0 * se) ++passed;
  };

  // weights: Dirichlet(delta + n_k)
  Hyperparams h;
  h.delta = 1.0;
  MixtureState st;
  st.mu = {-2.0, 0.5, 3.0};
  st.sigma2 = {0.3, 0.6, 0.2};
  st.w = {0.3, 0.3, 0.4};
  st.labels = {0, 0, 0, 0, 1, 1, 2, 2, 2, 2, 2, 2};
  const std::vector<double> y{-2.2, -1.9, -1.5, -2.4, 0.1, 0.9, 2.8, 3.3, 3.1, 2.6, 3.4, 2.9};
  {
    Rng rng(501);
    std::vector<std::vector<double>> w(3);
    for (int i = 0; i < draws; ++i) {
      update_weights(st, h, rng);
      for (std::size_t j = 0; j < 3; ++j) w[j].push_back(st.w[j]);
    }
    const double alpha[3] = {5.0, 3.0, 7.0};
    for (std::size_t j = 0; j < 3; ++j) {
      const auto [m, se] = mean_se(w[j]);
      within(m, se, alpha[j] / 15.0);
    }
  }
  // variances: inverse gamma(a0 + n_k / 2, b0 + SS_k / 2)
  {
    Rng rng(502);
    std::vector<std::vector<double>> v(3);
    for (int i = 0; i < draws; ++i) {
      update_variances(st, y, h, rng);
      for (std::size_t j = 0; j < 3; ++j) v[j].push_back(st.sigma2[j]);
    }
    for (std::size_t j = 0; j < 3; ++j) {
      double n = 0.0, ss = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        if (st.labels[i] != static_cast<int>(j)) continue;
        n += 1.0;
        ss += (y[i] - st.mu[j]) * (y[i] - st.mu[j]);
      }
      const auto [m, se] = mean_se(v[j]);
      within(m, se, (h.b0 + ss / 2) / (h.a0 + n / 2 - 1));
    }
  }
  // (gamma, sigma2): normal / inverse-gamma regression on y - mu
  {
    Rng data_rng(503);
    CovData d;
    d.y.resize(30);
    d.x.resize(30, 2);
    CovMixtureState cs;
    cs.mu = {-1.0, 2.0};
    cs.sigma2 = {0.5, 0.5};
    cs.gamma = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
    cs.beta = {Eigen::Vector2d::Zero(), Eigen::Vector2d(0.5, 0.5)};
    for (int i = 0; i < 30; ++i) {
      d.x(i, 0) = data_rng.normal();
      d.x(i, 1) = data_rng.normal();
      cs.labels.push_back(i < 12 ? 0 : 1);
      d.y(i) = cs.mu[static_cast<std::size_t>(cs.labels.back())] + 0.8 * d.x(i, 0) - 0.4 * d.x(i, 1) +
               0.5 * data_rng.normal();
    }
    auto cov = CovHyperparams::defaults(2, h);
    cov.finalize(d.x);
    Rng rng(504);
    std::vector<std::vector<double>> g(6);
    for (int i = 0; i < draws; ++i) {
      update_gamma_sigma(cs, d, cov, h, rng);
      for (std::size_t j = 0; j < 2; ++j) {
        g[3 * j].push_back(cs.gamma[j](0));
        g[3 * j + 1].push_back(cs.gamma[j](1));
        g[3 * j + 2].push_back(cs.sigma2[j]);
      }
    }
    for (int j = 0; j < 2; ++j) {
      Eigen::Matrix2d prec = Eigen::Matrix2d::Identity();
      Eigen::Vector2d xr = Eigen::Vector2d::Zero();
      double rr = 0.0, n = 0.0;
      for (int i = 0; i < 30; ++i) {
        if (cs.labels[static_cast<std::size_t>(i)] != j) continue;
        const Eigen::Vector2d xi = d.x.row(i).transpose();
        const double r = d.y(i) - cs.mu[static_cast<std::size_t>(j)];
        prec += xi * xi.transpose();
        xr += xi * r;
        rr += r * r;
        n += 1.0;
      }
      const Eigen::Vector2d mean = prec.inverse() * xr;
      const double rate = h.b0 + 0.5 * (rr - mean.dot(prec * mean));
      const double shape = h.a0 + 0.5 * n;
      const auto u = static_cast<std::size_t>(3 * j);
      auto [m0, s0] = mean_se(g[u]);
      auto [m1, s1] = mean_se(g[u + 1]);
      auto [m2, s2] = mean_se(g[u + 2]);
      within(m0, s0, mean(0));
      within(m1, s1, mean(1));
      within(m2, s2, rate / (shape - 1));
    }
  }
  return {passed == checks, std::to_string(passed) + "/" + std::to_string(checks) +
                                " posterior moments within 3 MC standard errors over 1e5 draws"};
}

Verdict repulsion() {
  const DppWindow w(SpectralModel::power_exponential(2.0, 2.0, 0.5), Rectangle{{-5.0, 5.0}}, 50);
  double prev = -std::numeric_limits<double>::infinity();
  int violations = 0;
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double sep = 5.0 * i / 199.0;
    const std::vector<double> pts{-sep / 2.0, sep / 2.0};
    const double v = w.log_density_rect(pts);
    if (i > 0 && v < prev) ++violations;
    if (i == 1) first = v;
    last = v;
    prev = v;
  }
  return {violations == 0, std::to_string(violations) + " decreases on 200 separations in [0, |R|/2]; log density " +
                               fmt("%.3f", first) + " -> " + fmt("%.3f", last)};
}

Verdict covariate_recovery() {
  Rng data_rng(77);
  const LabeledCovSample sample = simulate_three_cov_components(300, data_rng);
  Hyperparams h;
  auto cov = CovHyperparams::defaults(2, h);
  cov.finalize(sample.data.x);
  std::vector<double> ys(sample.data.y.data(), sample.data.y.data() + sample.data.n());
  CovSampler sampler(sample.data, h, cov, WindowPolicy::from_data(ys), McmcSchedule{2000, 5, 2000, 707, 50});
  const Trace trace = sampler.run();
  const KSummary ks = k_summary(trace);
  const double ari = adjusted_rand_index(binder_partition(trace).labels, sample.labels);
  bool beta_zero = true;
  double worst_simplex = 0.0;
  for (const auto& st : trace.cov_states) {
    beta_zero = beta_zero && st.beta[0].isZero(0.0);
    for (int i = 0; i < sample.data.n(); ++i) {
      const double s = gating_weights(st.beta, sample.data.x.row(i).transpose()).sum();
      worst_simplex = std::max(worst_simplex, std::abs(s - 1.0));
    }
  }
  const bool ok = ks.mode == 3 && ari >= 0.9 && beta_zero && worst_simplex <= 1e-12;
  return {ok, "modal K = " + std::to_string(ks.mode) + " (3), Binder ARI = " + fmt("%.3f", ari) +
                  " (>= 0.9), beta_1 = 0 in all " + std::to_string(trace.size()) + " samples: " +
                  (beta_zero ? "yes" : "no") + ", max |sum gating - 1| = " + fmt("%.1e", worst_simplex)};
}

Verdict reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("dppmix_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "run.ini") << "[data]\nfile = " << (kData / "galaxy.csv").string()
                                 << "\nresponse = velocity\nscale = 0.001\n[prior]\nnu = 2\n"
                                    "[mcmc]\nburnin = 500\nthin = 5\nkeep = 1000\nseed = 2024\n";
  std::ostringstream sink;
  bool ok = true;
  for (const char* name : {"a", "b"}) {
    ok = ok && run_cli({"fit", "--config", (dir / "run.ini").string(), "--out", (dir / name).string()}, sink, sink) == 0;
  }
  int identical = 0, total = 0;
  for (const char* f : {"trace.csv", "labels.csv", "summary.txt", "partition.csv", "predictive.csv", "k_pmf.csv"}) {
    ++total;
    if (ok && read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f)) ++identical;
  }
  fs::remove_all(dir);
  return {ok && identical == total, std::to_string(identical) + "/" + std::to_string(total) +
                                        " output files byte-identical across two runs"};
}

Verdict spectral_robustness(const GalaxyRun& pes) {
  const GalaxyRun wm = run_galaxy("galaxy_wm.ini");
  const double a = k_summary(pes.trace).mean;
  const double b = k_summary(wm.trace).mean;
  return {std::abs(a - b) <= 0.5, "E(K) Whittle-Matern = " + fmt("%.3f", b) + ", PES = " + fmt("%.3f", a) +
                                      ", |diff| = " + fmt("%.3f", std::abs(a - b)) + " (<= 0.5)"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const std::string& name, const std::function<Verdict()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("criterion %d %-28s %s  %s [%.1fs]\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                secs);
    std::fflush(stdout);
  };

  report(1, "prior-only count law", prior_only);
  GalaxyRun pes;
  report(2, "galaxy posterior", [&] {
    pes = run_galaxy("galaxy.ini");
    return galaxy(pes);
  });
  report(3, "eight-component simulation", eight_components);
  report(4, "determinant oracle", determinants);
  report(5, "conjugate updates", conjugate_updates);
  report(6, "repulsion", repulsion);
  report(7, "covariate recovery", covariate_recovery);
  report(8, "reproducibility", reproducibility);
  report(9, "spectral robustness", [&] {
    if (pes.trace.size() == 0) pes = run_galaxy("galaxy.ini");
    return spectral_robustness(pes);
  });
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
