#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "dppmix/analysis.hpp"
#include "dppmix/datasets.hpp"
#include "dppmix/densities.hpp"
#include "dppmix/sampler_cov.hpp"

using namespace dppmix;

namespace {

CovData small_data(int n, std::uint64_t seed) {
  Rng rng(seed);
  CovData d;
  d.y.resize(n);
  d.x.resize(n, 2);
  for (int i = 0; i < n; ++i) {
    d.x(i, 0) = rng.normal();
    d.x(i, 1) = rng.normal();
    d.y(i) = (i % 2 ? 3.0 : -3.0) + 0.5 * d.x(i, 0) + 0.3 * rng.normal();
  }
  return d;
}

CovMixtureState two_components(int n) {
  CovMixtureState st;
  st.mu = {-3.0, 3.0};
  st.sigma2 = {0.2, 0.3};
  st.gamma = {Eigen::Vector2d(0.5, 0.0), Eigen::Vector2d(0.4, 0.1)};
  st.beta = {Eigen::Vector2d::Zero(), Eigen::Vector2d(0.3, -0.2)};
  for (int i = 0; i < n; ++i) st.labels.push_back(i % 2);
  st.rho = 3.0;
  st.nu = 2.0;
  return st;
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

CovHyperparams hyper_for(const CovData& d, const Hyperparams& base) {
  auto h = CovHyperparams::defaults(d.p(), base);
  h.finalize(d.x);
  return h;
}

}  // namespace

TEST_CASE("gating weights form a simplex") {
  Rng rng(1);
  for (int rep = 0; rep < 2000; ++rep) {
    const int k = 1 + rng.index(6);
    std::vector<Eigen::VectorXd> beta{Eigen::VectorXd::Zero(3)};
    for (int j = 1; j < k; ++j) beta.push_back(Eigen::Vector3d(rng.normal(0, 20), rng.normal(0, 20), rng.normal()));
    const Eigen::Vector3d x(rng.normal(0, 10), rng.normal(), rng.normal());
    const Eigen::VectorXd g = gating_weights(beta, x);
    CHECK(std::abs(g.sum() - 1.0) <= 1e-12);
    CHECK(g.minCoeff() >= 0.0);
    // softmax against the reference score
    const double direct = 1.0 / (1.0 + [&] {
      double s = 0.0;
      for (int j = 1; j < k; ++j) s += std::exp(beta[static_cast<std::size_t>(j)].dot(x));
      return s;
    }());
    if (std::isfinite(direct) && direct > 1e-300) CHECK(g(0) == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("zero gating and regression coefficients reproduce the plain mixture") {
  Rng rng(2);
  CovMixtureState cs;
  MixtureState ms;
  for (int j = 0; j < 4; ++j) {
    const double mu = rng.normal(0, 3), s2 = 0.1 + rng.uniform();
    cs.mu.push_back(mu);
    cs.sigma2.push_back(s2);
    cs.gamma.push_back(Eigen::Vector2d::Zero());
    cs.beta.push_back(Eigen::Vector2d::Zero());
    ms.mu.push_back(mu);
    ms.sigma2.push_back(s2);
    ms.w.push_back(0.25);
  }
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Vector2d x(rng.normal(0, 5), rng.normal(0, 5));
    const double y = rng.normal(0, 4);
    CHECK(mixture_density(cs, y, x) == doctest::Approx(mixture_density(ms, y)).epsilon(1e-13));
  }
  Trace tc, tm;
  tc.kind = ModelKind::Covariates;
  tc.record(1, cs, 1.0);
  tc.record(2, cs, 1.0);
  tm.record(1, ms, 1.0);
  tm.record(2, ms, 1.0);
  const std::vector<double> grid{-3.0, -1.0, 0.0, 2.5};
  const auto a = predictive_density(tc, grid, Eigen::Vector2d(7.0, -2.0));
  const auto b = predictive_density(tm, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(a.mean[i] == doctest::Approx(b.mean[i]).epsilon(1e-13));
}

TEST_CASE("normal inverse-gamma posterior solves the normal equations") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = rng.index(8), p = 1 + rng.index(3);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
      r(i) = rng.normal(1.0, 2.0);
    }
    Eigen::VectorXd m(p);
    for (int j = 0; j < p; ++j) m(j) = rng.normal();
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(p, p);
    const Eigen::MatrixXd lambda = a * a.transpose() + Eigen::MatrixXd::Identity(p, p);
    const NigPosterior post = nig_posterior(x, r, m, lambda, 3.0, 2.0);
    const Eigen::MatrixXd prec = lambda.inverse();
    const Eigen::VectorXd grad = x.transpose() * (r - x * post.mean) - prec * (post.mean - m);
    CHECK(grad.norm() < 1e-9);
    const double quad = (r - x * post.mean).squaredNorm() + (post.mean - m).dot(prec * (post.mean - m));
    CHECK(post.rate == doctest::Approx(2.0 + 0.5 * quad).epsilon(1e-10));
    CHECK(post.shape == doctest::Approx(3.0 + 0.5 * n));
    CHECK(post.cov.isApprox((prec + x.transpose() * x).inverse(), 1e-10));
  }
}

TEST_CASE("gamma and sigma2 full conditional matches closed-form moments") {
  const CovData d = small_data(40, 4);
  Hyperparams base;
  const auto cov = hyper_for(d, base);
  auto st = two_components(d.n());
  Rng rng(5);
  std::vector<double> s2_draws, g0_draws, g1_draws;
  for (int it = 0; it < 100000; ++it) {
    update_gamma_sigma(st, d, cov, base, rng);
    s2_draws.push_back(st.sigma2[1]);
    g0_draws.push_back(st.gamma[1](0));
    g1_draws.push_back(st.gamma[1](1));
  }
  // closed form for component 1 (odd items)
  std::vector<int> items;
  for (int i = 1; i < d.n(); i += 2) items.push_back(i);
  Eigen::MatrixXd x(items.size(), 2);
  Eigen::VectorXd r(items.size());
  for (std::size_t a = 0; a < items.size(); ++a) {
    x.row(static_cast<Eigen::Index>(a)) = d.x.row(items[a]);
    r(static_cast<Eigen::Index>(a)) = d.y(items[a]) - st.mu[1];
  }
  const Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(2, 2) + x.transpose() * x;
  const Eigen::VectorXd mean = prec.ldlt().solve(x.transpose() * r);
  const double shape = base.a0 + 0.5 * static_cast<double>(items.size());
  const double rate = base.b0 + 0.5 * (r.squaredNorm() - mean.dot(prec * mean));
  auto [ms2, se_s2] = mean_se(s2_draws);
  auto [mg0, se_g0] = mean_se(g0_draws);
  auto [mg1, se_g1] = mean_se(g1_draws);
  CHECK(std::abs(ms2 - rate / (shape - 1)) < 3 * se_s2);
  CHECK(std::abs(mg0 - mean(0)) < 3 * se_g0);
  CHECK(std::abs(mg1 - mean(1)) < 3 * se_g1);
}

TEST_CASE("gating proposal without items returns the prior") {
  Eigen::MatrixXd x(0, 2);
  const Eigen::Vector2d beta0(0.3, -0.1);
  Eigen::Matrix2d sigma0;
  sigma0 << 2.0, 0.3, 0.3, 1.0;
  const auto bp = beta_proposal(x, {}, Eigen::VectorXd(0), beta0, sigma0);
  CHECK((bp.mode - beta0).norm() < 1e-12);
  CHECK(bp.cov.isApprox(sigma0, 1e-12));
}

TEST_CASE("gating proposal mode is a stationary point") {
  const CovData d = small_data(30, 6);
  std::vector<char> in_new(30, 0);
  for (int i = 0; i < 30; ++i) in_new[static_cast<std::size_t>(i)] = d.x(i, 0) > 0.2;
  const Eigen::VectorXd rest = Eigen::VectorXd::Constant(30, 0.4);
  const Eigen::Matrix2d sigma0 = 5.0 * Eigen::Matrix2d::Identity();
  const auto bp = beta_proposal(d.x, in_new, rest, Eigen::Vector2d::Zero(), sigma0);
  auto objective = [&](const Eigen::Vector2d& b) {
    double out = -0.5 * b.dot(sigma0.inverse() * b);
    for (int i = 0; i < 30; ++i) {
      const double s = d.x.row(i).dot(b);
      out += (in_new[static_cast<std::size_t>(i)] ? s : 0.0) - std::log(std::exp(s) + std::exp(rest(i)));
    }
    return out;
  };
  for (int j = 0; j < 2; ++j) {
    Eigen::Vector2d e = Eigen::Vector2d::Zero();
    e(j) = 1e-5;
    CHECK(std::abs((objective(bp.mode + e) - objective(bp.mode - e)) / 2e-5) < 1e-5);
  }
}

TEST_CASE("bipartition probabilities sum to one and match draws") {
  const CovData d = small_data(12, 7);
  auto st = two_components(12);  // component 0 holds the six even items
  std::vector<int> items;
  for (int i = 0; i < 12; i += 2) items.push_back(i);
  std::map<std::vector<int>, double> prob;
  double total = 0.0;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<int> moved;
    for (int b = 0; b < 6; ++b) {
      if ((mask >> b) & 1) moved.push_back(items[static_cast<std::size_t>(b)]);
    }
    const double p = std::exp(log_bipartition_probability(st, d, 0, moved));
    prob[moved] = p;
    total += p;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  Rng rng(8);
  std::map<std::vector<int>, double> freq;
  const int draws = 200000;
  for (int it = 0; it < draws; ++it) {
    auto moved = draw_bipartition(st, d, 0, rng);
    std::sort(moved.begin(), moved.end());
    freq[moved] += 1.0 / draws;
  }
  for (const auto& [moved, p] : prob) {
    CHECK(std::abs(freq[moved] - p) < 4.0 * std::sqrt(p * (1 - p) / draws) + 1e-9);
  }
}

TEST_CASE("covariate combine ratio is the reciprocal of the matching split") {
  const CovData d = small_data(20, 9);
  Hyperparams base;
  const auto cov = hyper_for(d, base);
  const DppWindow w(base.spectral_model(3.0, 2.0), Rectangle{{-8.0, 8.0}}, 50);
  Rng rng(10);
  for (int rep = 0; rep < 100; ++rep) {
    const auto st = two_components(d.n());
    SplitProposal sp;
    sp.j = rng.index(2);
    sp.position = 1 + rng.index(2);
    sp.moved = draw_bipartition(st, d, sp.j, rng);
    sp.mu = rng.normal(0.0, 3.0);
    sp.gamma = Eigen::Vector2d(rng.normal(), rng.normal());
    sp.sigma2 = 0.1 + rng.uniform();
    sp.beta = Eigen::Vector2d(rng.normal(), rng.normal());
    CovMixtureState next;
    const double split = log_split_ratio_cov(st, d, w, cov, base, sp, &next);
    if (!std::isfinite(split)) continue;
    const int target = sp.j >= sp.position ? sp.j + 1 : sp.j;
    CovMixtureState back;
    const double combine = log_combine_ratio_cov(next, d, w, cov, base, sp.position, target, &back);
    CHECK(combine == doctest::Approx(-split).epsilon(1e-9));
    CHECK(back == st);
  }
}

TEST_CASE("flat-likelihood chain reproduces the count law") {
  const CovData d = small_data(3, 11);
  Hyperparams base;
  base.fixed_rho = 2.0;
  const auto cov = hyper_for(d, base);
  WindowPolicy policy;
  policy.rect = {Interval{-5.0, 5.0}};
  McmcSchedule schedule{1000, 2, 20000, 12, 50};
  CovSampler sampler(d, base, cov, policy, schedule, Likelihood::Flat);
  const Trace trace = sampler.run();
  const DppWindow w(base.spectral_model(2.0, 2.0), policy.rect, 50);
  const auto pmf = w.count_pmf(40);
  const auto ks = k_summary(trace);
  double tv = 0.0;
  for (std::size_t k = 1; k < pmf.size(); ++k) {
    const double emp = k < ks.pmf.size() ? ks.pmf[k] : 0.0;
    tv += std::abs(emp - pmf[k] / (1.0 - pmf[0]));
  }
  CHECK(0.5 * tv < 0.04);
}

TEST_CASE("covariate chain keeps the reference gating vector at zero") {
  Rng rng(13);
  const auto sample = simulate_three_cov_components(120, rng);
  Hyperparams base;
  const auto cov = hyper_for(sample.data, base);
  std::vector<double> ys(sample.data.y.data(), sample.data.y.data() + sample.data.n());
  const auto policy = WindowPolicy::from_data(ys);
  McmcSchedule schedule{100, 1, 200, 14, 50};
  CovSampler sampler(sample.data, base, cov, policy, schedule);
  for (int it = 0; it < 300; ++it) {
    sampler.sweep(it < 100);
    const auto& st = sampler.state();
    REQUIRE(validate_state(st, base, sampler.window(), 120).empty());
    REQUIRE(st.beta[0].isZero(0.0));
    for (int i = 0; i < 120; i += 17) {
      REQUIRE(std::abs(gating_weights(st.beta, sample.data.x.row(i).transpose()).sum() - 1.0) <= 1e-12);
    }
  }
}
