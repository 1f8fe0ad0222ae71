#include "dppmix/sampler_cov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dppmix/densities.hpp"
#include "dppmix/errors.hpp"

namespace dppmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t at(int i) { return static_cast<std::size_t>(i); }

double split_probability(int k) { return k == 1 ? 1.0 : 0.5; }
constexpr double kCombineProbability = 0.5;
// Share of split proposals that assign items by independent fair coins; the
// rest cut the sorted response or one covariate at a uniform position.
constexpr double kCoinSplitWeight = 0.25;

Eigen::VectorXd row(const CovData& data, int i) { return data.x.row(i).transpose(); }

double log_sigmoid(double t) { return t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t)); }

// log sum_k exp(beta_k' x_i) over every component except `skip` (-1 keeps all).
Eigen::VectorXd log_rest(const std::vector<Eigen::VectorXd>& beta, const Eigen::MatrixXd& x, int skip) {
  const int n = static_cast<int>(x.rows());
  Eigen::VectorXd out(n);
  std::vector<double> scores;
  for (int i = 0; i < n; ++i) {
    scores.clear();
    for (std::size_t k = 0; k < beta.size(); ++k) {
      if (static_cast<int>(k) == skip) continue;
      scores.push_back(x.row(i).dot(beta[k]));
    }
    out(i) = scores.empty() ? kNegInf : log_sum_exp(scores);
  }
  return out;
}

// Aux design [1, x_i] and responses for a subset of items.
void aux_design(const CovData& data, const std::vector<int>& items, Eigen::MatrixXd& z, Eigen::VectorXd& r) {
  const int m = static_cast<int>(items.size());
  z.resize(m, data.p() + 1);
  r.resize(m);
  for (int a = 0; a < m; ++a) {
    z(a, 0) = 1.0;
    z.row(a).tail(data.p()) = data.x.row(items[at(a)]);
    r(a) = data.y(items[at(a)]);
  }
}

NigPosterior aux_posterior(const CovData& data, const CovHyperparams& cov, const std::vector<int>& items) {
  Eigen::MatrixXd z;
  Eigen::VectorXd r;
  aux_design(data, items, z, r);
  return nig_posterior(z, r, Eigen::VectorXd::Zero(data.p() + 1), cov.aux_gamma0, cov.aux_xi0, cov.aux_nu0);
}

// Items of component j sorted by score d (0 = response, c >= 1 = covariate c - 1),
// ties broken by index.
std::vector<int> sorted_items(const CovMixtureState& state, const CovData& data, int j, int d) {
  std::vector<int> items;
  for (std::size_t i = 0; i < state.labels.size(); ++i) {
    if (state.labels[i] == j) items.push_back(static_cast<int>(i));
  }
  auto score = [&](int i) { return d == 0 ? data.y(i) : data.x(i, d - 1); };
  std::stable_sort(items.begin(), items.end(), [&](int a, int b) { return score(a) < score(b); });
  return items;
}

std::vector<std::vector<int>> members(const CovMixtureState& state) {
  std::vector<std::vector<int>> out(at(state.k()));
  for (std::size_t i = 0; i < state.labels.size(); ++i) out[at(state.labels[i])].push_back(static_cast<int>(i));
  return out;
}

}  // namespace

void CovData::validate() const {
  if (x.rows() != y.size()) throw DataError("covariate rows must match the number of responses");
  if (x.cols() < 1) throw DataError("at least one covariate is required");
  if (!y.allFinite() || !x.allFinite()) throw DataError("responses and covariates must be finite");
}

Eigen::VectorXd gating_log_weights(const std::vector<Eigen::VectorXd>& beta, const Eigen::VectorXd& x) {
  Eigen::VectorXd scores(static_cast<Eigen::Index>(beta.size()));
  for (std::size_t k = 0; k < beta.size(); ++k) scores(static_cast<Eigen::Index>(k)) = beta[k].dot(x);
  const double top = scores.maxCoeff();
  const double norm = top + std::log((scores.array() - top).exp().sum());
  return scores.array() - norm;
}

Eigen::VectorXd gating_weights(const std::vector<Eigen::VectorXd>& beta, const Eigen::VectorXd& x) {
  Eigen::VectorXd w = gating_log_weights(beta, x).array().exp();
  return w / w.sum();
}

NigPosterior nig_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                           const Eigen::VectorXd& prior_mean, const Eigen::MatrixXd& prior_cov, double shape,
                           double rate) {
  const Eigen::MatrixXd prior_prec = prior_cov.inverse();
  const Eigen::MatrixXd prec = prior_prec + design.transpose() * design;
  NigPosterior post;
  post.cov = prec.inverse();
  post.cov = 0.5 * (post.cov + post.cov.transpose());
  const Eigen::VectorXd b = prior_prec * prior_mean + design.transpose() * response;
  post.mean = post.cov * b;
  post.shape = shape + 0.5 * static_cast<double>(response.size());
  const double quad = response.squaredNorm() + prior_mean.dot(prior_prec * prior_mean) - post.mean.dot(prec * post.mean);
  post.rate = rate + 0.5 * std::max(quad, 0.0);
  return post;
}

double log_nig_density(const NigPosterior& post, const Eigen::VectorXd& coef, double sigma2) {
  if (!(sigma2 > 0.0)) return kNegInf;
  return log_inv_gamma_pdf(sigma2, post.shape, post.rate) + log_mvnormal_pdf(coef, post.mean, sigma2 * post.cov);
}

void draw_nig(const NigPosterior& post, Rng& rng, Eigen::VectorXd& coef, double& sigma2) {
  sigma2 = rng.inv_gamma(post.shape, post.rate);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma2 * post.cov);
  if (llt.info() != Eigen::Success) throw NumericalError("regression posterior covariance is not positive definite");
  coef = rng.mvnormal_chol(post.mean, llt.matrixL());
}

double log_cov_target(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                      const CovHyperparams& cov, const Hyperparams& hyper, Likelihood lik) {
  const int k = state.k();
  const Interval& box = window.rectangle()[0];
  for (int j = 0; j < k; ++j) {
    if (!box.contains(state.mu[at(j)]) || !(state.sigma2[at(j)] > 0.0)) return kNegInf;
  }
  double out = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const int s = state.labels[at(i)];
    const Eigen::VectorXd xi = row(data, i);
    out += gating_log_weights(state.beta, xi)(s);
    if (lik == Likelihood::Data) {
      out += log_normal_pdf(data.y(i), state.mu[at(s)] + xi.dot(state.gamma[at(s)]), state.sigma2[at(s)]);
    }
  }
  for (int j = 0; j < k; ++j) {
    const double s2 = state.sigma2[at(j)];
    out += log_inv_gamma_pdf(s2, hyper.a0, hyper.b0);
    out += log_mvnormal_pdf(state.gamma[at(j)], cov.gamma0, s2 * cov.lambda0);
    if (j > 0) out += log_mvnormal_pdf(state.beta[at(j)], cov.beta0, cov.sigma0);
  }
  out += window.log_det_kernel(window.to_unit(state.mu)) - static_cast<double>(k) * window.log_volume() -
         std::lgamma(static_cast<double>(k) + 1.0);
  return std::isnan(out) ? kNegInf : out;
}

void update_labels_cov(CovMixtureState& state, const CovData& data, Rng& rng, Likelihood lik) {
  const int k = state.k();
  std::vector<double> logp(at(k));
  state.labels.resize(at(data.n()));
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd xi = row(data, i);
    const Eigen::VectorXd lw = gating_log_weights(state.beta, xi);
    for (int j = 0; j < k; ++j) {
      logp[at(j)] = lw(j);
      if (lik == Likelihood::Data) {
        logp[at(j)] += log_normal_pdf(data.y(i), state.mu[at(j)] + xi.dot(state.gamma[at(j)]), state.sigma2[at(j)]);
      }
    }
    state.labels[at(i)] = rng.categorical_log(logp);
  }
}

void update_gamma_sigma(CovMixtureState& state, const CovData& data, const CovHyperparams& cov,
                        const Hyperparams& hyper, Rng& rng, Likelihood lik) {
  const auto groups = members(state);
  for (int j = 0; j < state.k(); ++j) {
    const auto& items = lik == Likelihood::Data ? groups[at(j)] : std::vector<int>{};
    const int m = static_cast<int>(items.size());
    Eigen::MatrixXd x(m, data.p());
    Eigen::VectorXd r(m);
    for (int a = 0; a < m; ++a) {
      x.row(a) = data.x.row(items[at(a)]);
      r(a) = data.y(items[at(a)]) - state.mu[at(j)];
    }
    const NigPosterior post = nig_posterior(x, r, cov.gamma0, cov.lambda0, hyper.a0, hyper.b0);
    draw_nig(post, rng, state.gamma[at(j)], state.sigma2[at(j)]);
  }
}

int update_beta(CovMixtureState& state, const CovData& data, const CovHyperparams& cov, Rng& rng) {
  const double step = std::sqrt(cov.zeta);
  auto log_target = [&](const std::vector<Eigen::VectorXd>& beta, int j) {
    double out = log_mvnormal_pdf(beta[at(j)], cov.beta0, cov.sigma0);
    for (int i = 0; i < data.n(); ++i) out += gating_log_weights(beta, row(data, i))(state.labels[at(i)]);
    return out;
  };
  int accepted = 0;
  for (int j = 1; j < state.k(); ++j) {
    std::vector<Eigen::VectorXd> proposal = state.beta;
    for (int c = 0; c < data.p(); ++c) proposal[at(j)](c) += step * rng.normal();
    const double log_ratio = log_target(proposal, j) - log_target(state.beta, j);
    if (std::log(rng.uniform()) < log_ratio) {
      state.beta = std::move(proposal);
      ++accepted;
    }
  }
  return accepted;
}

int update_means_cov(CovMixtureState& state, const CovData& data, const DppWindow& window, AdaptiveScale& scale,
                     bool adapt, Rng& rng, Likelihood lik) {
  const auto groups = members(state);
  int accepted = 0;
  for (int j = 0; j < state.k(); ++j) {
    std::vector<double> resid;
    if (lik == Likelihood::Data) {
      for (int i : groups[at(j)]) resid.push_back(data.y(i) - data.x.row(i).dot(state.gamma[at(j)]));
    }
    const double s2 = state.sigma2[at(j)];
    auto log_lik = [&](double m) {
      double acc = 0.0;
      for (double r : resid) acc += (r - m) * (r - m);
      return -0.5 * acc / s2;
    };
    const bool ok = update_location(state.mu, j, window, scale.scale(), log_lik, rng);
    scale.record(ok, adapt);
    if (ok) ++accepted;
  }
  return accepted;
}

BetaProposal beta_proposal(const Eigen::MatrixXd& x, const std::vector<char>& in_new,
                           const Eigen::VectorXd& log_rest, const Eigen::VectorXd& beta0,
                           const Eigen::MatrixXd& sigma0) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  const Eigen::MatrixXd prior_prec = sigma0.inverse();
  auto objective = [&](const Eigen::VectorXd& b) {
    double out = -0.5 * (b - beta0).dot(prior_prec * (b - beta0));
    for (int i = 0; i < n; ++i) {
      const double t = x.row(i).dot(b) - log_rest(i);
      out += in_new[at(i)] ? log_sigmoid(t) : log_sigmoid(-t);
    }
    return out;
  };
  auto derivatives = [&](const Eigen::VectorXd& b, Eigen::VectorXd& grad, Eigen::MatrixXd& neg_hess) {
    grad = -prior_prec * (b - beta0);
    neg_hess = prior_prec;
    for (int i = 0; i < n; ++i) {
      const double t = x.row(i).dot(b) - log_rest(i);
      const double pi = std::exp(log_sigmoid(t));
      const Eigen::VectorXd xi = x.row(i).transpose();
      grad += ((in_new[at(i)] ? 1.0 : 0.0) - pi) * xi;
      neg_hess += pi * (1.0 - pi) * xi * xi.transpose();
    }
  };

  Eigen::VectorXd b = beta0;
  Eigen::VectorXd grad(p);
  Eigen::MatrixXd neg_hess(p, p);
  double value = objective(b);
  for (int iter = 0; iter < 100; ++iter) {
    derivatives(b, grad, neg_hess);
    const Eigen::VectorXd step = neg_hess.llt().solve(grad);
    double t = 1.0;
    Eigen::VectorXd next = b + step;
    double next_value = objective(next);
    while (!(next_value >= value) && t > 1e-10) {
      t *= 0.5;
      next = b + t * step;
      next_value = objective(next);
    }
    if (!(next_value >= value)) break;
    const double moved = (next - b).norm();
    b = next;
    value = next_value;
    if (moved < 1e-10 * (1.0 + b.norm())) break;
  }
  derivatives(b, grad, neg_hess);
  BetaProposal out;
  out.mode = b;
  Eigen::LLT<Eigen::MatrixXd> llt(neg_hess);
  if (llt.info() == Eigen::Success && b.allFinite()) {
    out.cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
    out.cov = 0.5 * (out.cov + out.cov.transpose());
  } else {
    out.cov = sigma0;
  }
  return out;
}

double log_bipartition_probability(const CovMixtureState& state, const CovData& data, int j,
                                   const std::vector<int>& moved) {
  const int scores = data.p() + 1;
  std::vector<int> sorted_moved = moved;
  std::sort(sorted_moved.begin(), sorted_moved.end());
  const auto m = sorted_moved.size();
  double threshold = 0.0;
  std::size_t n_j = 0;
  for (int d = 0; d < scores; ++d) {
    const std::vector<int> items = sorted_items(state, data, j, d);
    n_j = items.size();
    if (m > n_j) return kNegInf;
    std::vector<int> low(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<int> high(items.end() - static_cast<std::ptrdiff_t>(m), items.end());
    std::sort(low.begin(), low.end());
    std::sort(high.begin(), high.end());
    const int matches = (low == sorted_moved ? 1 : 0) + (high == sorted_moved ? 1 : 0);
    threshold += static_cast<double>(matches) / (2.0 * static_cast<double>(n_j + 1));
  }
  threshold /= static_cast<double>(scores);
  const double coin = std::log(kCoinSplitWeight) - static_cast<double>(n_j) * std::log(2.0);
  if (threshold <= 0.0) return coin;
  const double terms[2] = {coin, std::log1p(-kCoinSplitWeight) + std::log(threshold)};
  return log_sum_exp(terms);
}

std::vector<int> draw_bipartition(const CovMixtureState& state, const CovData& data, int j, Rng& rng) {
  std::vector<int> moved;
  if (rng.uniform() < kCoinSplitWeight) {
    for (std::size_t i = 0; i < state.labels.size(); ++i) {
      if (state.labels[i] == j && rng.bernoulli(0.5)) moved.push_back(static_cast<int>(i));
    }
    return moved;
  }
  const std::vector<int> items = sorted_items(state, data, j, rng.index(data.p() + 1));
  const bool high = rng.bernoulli(0.5);
  const int m = rng.index(static_cast<int>(items.size()) + 1);
  if (high) {
    moved.assign(items.end() - m, items.end());
  } else {
    moved.assign(items.begin(), items.begin() + m);
  }
  return moved;
}

CovMixtureState apply_split(const CovMixtureState& state, const SplitProposal& split) {
  CovMixtureState next = state;
  const auto pos = static_cast<std::ptrdiff_t>(split.position);
  next.mu.insert(next.mu.begin() + pos, split.mu);
  next.sigma2.insert(next.sigma2.begin() + pos, split.sigma2);
  next.gamma.insert(next.gamma.begin() + pos, split.gamma);
  next.beta.insert(next.beta.begin() + pos, split.beta);
  for (int& l : next.labels) {
    if (l >= split.position) ++l;
  }
  for (int i : split.moved) next.labels[at(i)] = split.position;
  return next;
}

double log_split_proposal_density(const CovMixtureState& state, const CovData& data, const CovHyperparams& cov,
                                  const SplitProposal& split) {
  const NigPosterior post = aux_posterior(data, cov, split.moved);
  Eigen::VectorXd coef(data.p() + 1);
  coef(0) = split.mu;
  coef.tail(data.p()) = split.gamma;
  std::vector<char> in_new(at(data.n()), 0);
  for (int i : split.moved) in_new[at(i)] = 1;
  const BetaProposal bp = beta_proposal(data.x, in_new, log_rest(state.beta, data.x, -1), cov.beta0, cov.sigma0);
  return log_nig_density(post, coef, split.sigma2) + log_mvnormal_pdf(split.beta, bp.mode, bp.cov);
}

double log_split_ratio_cov(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                           const CovHyperparams& cov, const Hyperparams& hyper, const SplitProposal& split,
                           CovMixtureState* proposed, Likelihood lik) {
  const int k = state.k();
  CovMixtureState next = apply_split(state, split);
  double log_ratio = kNegInf;
  if (window.rectangle()[0].contains(split.mu)) {
    log_ratio = log_cov_target(next, data, window, cov, hyper, lik) -
                log_cov_target(state, data, window, cov, hyper, lik) + std::log(kCombineProbability) -
                std::log(split_probability(k)) - log_bipartition_probability(state, data, split.j, split.moved) -
                log_split_proposal_density(state, data, cov, split);
  }
  if (proposed) *proposed = std::move(next);
  return std::isnan(log_ratio) ? kNegInf : log_ratio;
}

double log_combine_ratio_cov(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                             const CovHyperparams& cov, const Hyperparams& hyper, int j1, int j2,
                             CovMixtureState* proposed, Likelihood lik) {
  const int k = state.k();
  if (j1 < 1 || j1 >= k || j2 < 0 || j2 >= k || j1 == j2) {
    throw DomainError("combine needs a non-reference component and a distinct target");
  }
  CovMixtureState merged = state;
  SplitProposal reverse;
  reverse.position = j1;
  reverse.j = j2 > j1 ? j2 - 1 : j2;
  reverse.mu = state.mu[at(j1)];
  reverse.gamma = state.gamma[at(j1)];
  reverse.sigma2 = state.sigma2[at(j1)];
  reverse.beta = state.beta[at(j1)];
  const auto pos = static_cast<std::ptrdiff_t>(j1);
  merged.mu.erase(merged.mu.begin() + pos);
  merged.sigma2.erase(merged.sigma2.begin() + pos);
  merged.gamma.erase(merged.gamma.begin() + pos);
  merged.beta.erase(merged.beta.begin() + pos);
  for (std::size_t i = 0; i < merged.labels.size(); ++i) {
    int& l = merged.labels[i];
    if (l == j1) {
      reverse.moved.push_back(static_cast<int>(i));
      l = reverse.j;
    } else if (l > j1) {
      --l;
    }
  }
  const double forward = log_split_ratio_cov(merged, data, window, cov, hyper, reverse, nullptr, lik);
  if (proposed) *proposed = std::move(merged);
  return -forward;
}

CovRjOutcome rj_step_cov(CovMixtureState& state, const CovData& data, const DppWindow& window,
                         const CovHyperparams& cov, const Hyperparams& hyper, Rng& rng, Likelihood lik) {
  const int k = state.k();
  CovRjOutcome out;
  CovMixtureState proposal;
  double log_ratio = kNegInf;
  if (rng.uniform() < split_probability(k)) {
    out.split = true;
    SplitProposal split;
    split.j = rng.index(k);
    split.position = 1 + rng.index(k);
    split.moved = draw_bipartition(state, data, split.j, rng);
    const NigPosterior post = aux_posterior(data, cov, split.moved);
    Eigen::VectorXd coef;
    draw_nig(post, rng, coef, split.sigma2);
    split.mu = coef(0);
    split.gamma = coef.tail(data.p());
    std::vector<char> in_new(at(data.n()), 0);
    for (int i : split.moved) in_new[at(i)] = 1;
    const BetaProposal bp = beta_proposal(data.x, in_new, log_rest(state.beta, data.x, -1), cov.beta0, cov.sigma0);
    const Eigen::LLT<Eigen::MatrixXd> llt(bp.cov);
    split.beta = rng.mvnormal_chol(bp.mode, llt.matrixL());
    log_ratio = log_split_ratio_cov(state, data, window, cov, hyper, split, &proposal, lik);
  } else {
    out.split = false;
    const int j1 = 1 + rng.index(k - 1);
    int j2 = rng.index(k - 1);
    if (j2 >= j1) ++j2;
    log_ratio = log_combine_ratio_cov(state, data, window, cov, hyper, j1, j2, &proposal, lik);
  }
  if (std::log(rng.uniform()) < log_ratio) {
    state = std::move(proposal);
    out.accepted = true;
  }
  return out;
}

CovSampler::CovSampler(CovData data, Hyperparams hyper, CovHyperparams cov, WindowPolicy policy,
                       McmcSchedule schedule, Likelihood lik)
    : data_(std::move(data)),
      hyper_(std::move(hyper)),
      cov_(std::move(cov)),
      policy_(std::move(policy)),
      schedule_(schedule),
      lik_(lik),
      rng_(schedule.seed),
      window_(make_window(hyper_, policy_,
                          hyper_.fixed_rho ? *hyper_.fixed_rho : rho_offset(hyper_, hyper_.nu.support[0]) + 1.0,
                          hyper_.nu.support[0])),
      rho_scale_(0.5, 0.234, schedule.adapt_window),
      mu_scale_(0.05 * policy_.rect[0].width(), 0.234, schedule.adapt_window) {
  hyper_.validate();
  schedule_.validate();
  data_.validate();
  if (!hyper_.nu.is_fixed()) throw ConfigError("the covariate model uses a fixed nu");
  if (policy_.rect.size() != 1) throw ConfigError("the mixture model needs a one-dimensional window");
  cov_.validate(data_.p());

  const SpectralModel& m = window_.model();
  state_.rho = m.rho;
  state_.nu = m.nu;
  const double mean = data_.n() > 0 ? data_.y.mean() : policy_.rect[0].center();
  state_.mu = {policy_.rect[0].contains(mean) ? mean : policy_.rect[0].center()};
  double var = hyper_.b0 / std::max(hyper_.a0 - 1.0, 1.0);
  if (data_.n() > 1 && lik_ == Likelihood::Data) {
    const double v = (data_.y.array() - mean).square().mean();
    if (v > 0.0) var = v;
  }
  state_.sigma2 = {var};
  state_.gamma = {Eigen::VectorXd::Zero(data_.p())};
  state_.beta = {Eigen::VectorXd::Zero(data_.p())};
  state_.labels.assign(at(data_.n()), 0);

  trace_.kind = ModelKind::Covariates;
  trace_.n_items = data_.n();
  trace_.window = policy_.rect;
  trace_.truncation = policy_.truncation;
}

void CovSampler::set_state(CovMixtureState state) {
  window_ = make_window(hyper_, policy_, state.rho, state.nu);
  state_ = std::move(state);
}

void CovSampler::sweep(bool adapt) {
  update_labels_cov(state_, data_, rng_, lik_);
  update_gamma_sigma(state_, data_, cov_, hyper_, rng_, lik_);
  const int k = state_.k();
  const int beta_ok = update_beta(state_, data_, cov_, rng_);
  auto& beta_stats = trace_.moves["beta"];
  beta_stats.attempted += k - 1;
  beta_stats.accepted += beta_ok;
  const int moved = update_means_cov(state_, data_, window_, mu_scale_, adapt, rng_, lik_);
  auto& mean_stats = trace_.moves["mean"];
  mean_stats.attempted += k;
  mean_stats.accepted += moved;
  if (!hyper_.fixed_rho) {
    trace_.moves["rho"].add(update_rho(state_.mu, state_.rho, state_.nu, window_, hyper_, policy_, rho_scale_, adapt, rng_));
  }
  const CovRjOutcome rj = rj_step_cov(state_, data_, window_, cov_, hyper_, rng_, lik_);
  trace_.moves[rj.split ? "split" : "combine"].add(rj.accepted);
}

Trace CovSampler::run() {
  for (long it = 0; it < schedule_.n_burnin; ++it) sweep(true);
  const long total = schedule_.n_keep * schedule_.n_thin;
  for (long it = 1; it <= total; ++it) {
    sweep(false);
    if (it % schedule_.n_thin == 0) trace_.record(schedule_.n_burnin + it, state_, rho_scale_.scale());
  }
  return trace_;
}

}  // namespace dppmix
