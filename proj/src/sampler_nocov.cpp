#include "dppmix/sampler_nocov.hpp"

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

std::vector<std::vector<int>> members(const MixtureState& state) {
  std::vector<std::vector<int>> out(at(state.k()));
  for (std::size_t i = 0; i < state.labels.size(); ++i) out[at(state.labels[i])].push_back(static_cast<int>(i));
  return out;
}

double log_prior_components(const MixtureState& state, const Hyperparams& hyper) {
  double out = log_dirichlet_sym_pdf(state.w, hyper.delta);
  for (double s2 : state.sigma2) out += log_inv_gamma_pdf(s2, hyper.a0, hyper.b0);
  return out;
}

}  // namespace

std::pair<Component, Component> split_component(const Component& parent, const SplitVariables& u) {
  Component c1;
  Component c2;
  c1.w = u.a * parent.w;
  c2.w = (1.0 - u.a) * parent.w;
  const double sd = std::sqrt(parent.sigma2);
  c1.mu = parent.mu - std::sqrt(c2.w / c1.w) * u.r * sd;
  c2.mu = parent.mu + std::sqrt(c1.w / c2.w) * u.r * sd;
  const double spread = (1.0 - u.r * u.r) * parent.sigma2;
  c1.sigma2 = u.b * spread * parent.w / c1.w;
  c2.sigma2 = (1.0 - u.b) * spread * parent.w / c2.w;
  return {c1, c2};
}

MergeResult combine_components(const Component& first, const Component& second) {
  const Component& lo = first.mu <= second.mu ? first : second;
  const Component& hi = first.mu <= second.mu ? second : first;
  MergeResult out;
  Component& m = out.merged;
  m.w = lo.w + hi.w;
  m.mu = (lo.w * lo.mu + hi.w * hi.mu) / m.w;
  const double second_moment = (lo.w * (lo.mu * lo.mu + lo.sigma2) + hi.w * (hi.mu * hi.mu + hi.sigma2)) / m.w;
  m.sigma2 = second_moment - m.mu * m.mu;
  out.u.a = lo.w / m.w;
  out.u.r = (hi.mu - lo.mu) * std::sqrt(lo.w * hi.w) / (m.w * std::sqrt(m.sigma2));
  out.u.b = lo.w * lo.sigma2 / (lo.w * lo.sigma2 + hi.w * hi.sigma2);
  return out;
}

double split_log_jacobian(const Component& parent, double w_first, double w_second, double r) {
  return 4.0 * std::log(parent.w) - 1.5 * std::log(w_first * w_second) + 1.5 * std::log(parent.sigma2) +
         std::log1p(-r * r);
}

double mixture_log_likelihood(const MixtureState& state, std::span<const double> y) {
  const int k = state.k();
  std::vector<double> terms(at(k));
  double total = 0.0;
  for (double yi : y) {
    for (int j = 0; j < k; ++j) {
      terms[at(j)] = std::log(state.w[at(j)]) + log_normal_pdf(yi, state.mu[at(j)], state.sigma2[at(j)]);
    }
    total += log_sum_exp(terms);
  }
  return total;
}

void update_labels(MixtureState& state, std::span<const double> y, Rng& rng) {
  const int k = state.k();
  std::vector<double> log_w(at(k));
  std::vector<double> log_sd(at(k));
  for (int j = 0; j < k; ++j) {
    log_w[at(j)] = std::log(state.w[at(j)]);
    log_sd[at(j)] = 0.5 * std::log(state.sigma2[at(j)]);
  }
  std::vector<double> logp(at(k));
  state.labels.resize(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    for (int j = 0; j < k; ++j) {
      const double z = y[i] - state.mu[at(j)];
      logp[at(j)] = log_w[at(j)] - log_sd[at(j)] - 0.5 * z * z / state.sigma2[at(j)];
    }
    state.labels[i] = rng.categorical_log(logp);
  }
}

void update_weights(MixtureState& state, const Hyperparams& hyper, Rng& rng) {
  std::vector<double> alpha(at(state.k()), hyper.delta);
  for (int l : state.labels) alpha[at(l)] += 1.0;
  state.w = rng.dirichlet(alpha);
}

void update_variances(MixtureState& state, std::span<const double> y, const Hyperparams& hyper, Rng& rng) {
  const int k = state.k();
  std::vector<double> count(at(k), 0.0);
  std::vector<double> ss(at(k), 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const int l = state.labels[i];
    const double z = y[i] - state.mu[at(l)];
    count[at(l)] += 1.0;
    ss[at(l)] += z * z;
  }
  for (int j = 0; j < k; ++j) {
    state.sigma2[at(j)] = rng.inv_gamma(hyper.a0 + 0.5 * count[at(j)], hyper.b0 + 0.5 * ss[at(j)]);
  }
}

int update_means(MixtureState& state, std::span<const double> y, const DppWindow& window, AdaptiveScale& scale,
                 bool adapt, Rng& rng) {
  const auto groups = members(state);
  int accepted = 0;
  for (int j = 0; j < state.k(); ++j) {
    const auto& items = groups[at(j)];
    const double s2 = state.sigma2[at(j)];
    auto log_lik = [&](double m) {
      double acc = 0.0;
      for (int i : items) {
        const double z = y[at(i)] - m;
        acc += z * z;
      }
      return -0.5 * acc / s2;
    };
    const bool ok = update_location(state.mu, j, window, scale.scale(), log_lik, rng);
    scale.record(ok, adapt);
    if (ok) ++accepted;
  }
  return accepted;
}

double log_split_ratio(const MixtureState& state, std::span<const double> y, const DppWindow& window,
                       const Hyperparams& hyper, int j, const SplitVariables& u, MixtureState* proposed) {
  const int k = state.k();
  const Component parent{state.w[at(j)], state.mu[at(j)], state.sigma2[at(j)]};
  const auto [c1, c2] = split_component(parent, u);
  const Interval& box = window.rectangle()[0];
  if (!box.contains(c1.mu) || !box.contains(c2.mu)) return kNegInf;
  if (!(c1.w > 0.0 && c2.w > 0.0 && c1.sigma2 > 0.0 && c2.sigma2 > 0.0)) return kNegInf;

  MixtureState next = state;
  next.w[at(j)] = c1.w;
  next.mu[at(j)] = c1.mu;
  next.sigma2[at(j)] = c1.sigma2;
  next.w.push_back(c2.w);
  next.mu.push_back(c2.mu);
  next.sigma2.push_back(c2.sigma2);

  double log_ratio = mixture_log_likelihood(next, y) - mixture_log_likelihood(state, y);
  log_ratio += log_prior_components(next, hyper) - log_prior_components(state, hyper);
  log_ratio += window.log_det_kernel(window.to_unit(next.mu)) - window.log_det_kernel(window.to_unit(state.mu));
  if (hyper.rj_acceptance == RjAcceptance::Exact) {
    log_ratio += std::log(2.0 * kCombineProbability) - std::log(static_cast<double>(k + 1)) -
                 std::log(split_probability(k)) - window.log_volume();
  } else {
    log_ratio += std::log(kCombineProbability) - std::log(split_probability(k)) -
                 2.0 * std::log(static_cast<double>(k + 1));
  }
  log_ratio -= log_beta_pdf(u.a, 1.0, 1.0) + log_beta_pdf(u.b, 1.0, 1.0) + log_beta_pdf(u.r, 2.0, 2.0);
  log_ratio += split_log_jacobian(parent, c1.w, c2.w, u.r);

  if (proposed) *proposed = std::move(next);
  return std::isnan(log_ratio) ? kNegInf : log_ratio;
}

double log_combine_ratio(const MixtureState& state, std::span<const double> y, const DppWindow& window,
                         const Hyperparams& hyper, int a, int b, MixtureState* proposed) {
  if (a == b || state.k() < 2) throw DomainError("combine needs two distinct components");
  const int keep = std::min(a, b);
  const int drop = std::max(a, b);
  const MergeResult m = combine_components({state.w[at(a)], state.mu[at(a)], state.sigma2[at(a)]},
                                           {state.w[at(b)], state.mu[at(b)], state.sigma2[at(b)]});
  MixtureState merged = state;
  merged.w[at(keep)] = m.merged.w;
  merged.mu[at(keep)] = m.merged.mu;
  merged.sigma2[at(keep)] = m.merged.sigma2;
  merged.w.erase(merged.w.begin() + drop);
  merged.mu.erase(merged.mu.begin() + drop);
  merged.sigma2.erase(merged.sigma2.begin() + drop);
  for (int& l : merged.labels) {
    if (l == drop) l = keep;
    else if (l > drop) --l;
  }
  const double forward = log_split_ratio(merged, y, window, hyper, keep, m.u);
  if (proposed) *proposed = std::move(merged);
  return -forward;
}

RjOutcome rj_step(MixtureState& state, std::span<const double> y, const DppWindow& window, const Hyperparams& hyper,
                  Rng& rng) {
  const int k = state.k();
  RjOutcome out;
  MixtureState proposal;
  double log_ratio = kNegInf;
  if (rng.uniform() < split_probability(k)) {
    out.move = RjMove::Split;
    const int j = rng.index(k);
    SplitVariables u;
    u.a = rng.beta(1.0, 1.0);
    u.b = rng.beta(1.0, 1.0);
    u.r = rng.beta(2.0, 2.0);
    log_ratio = log_split_ratio(state, y, window, hyper, j, u, &proposal);
  } else {
    out.move = RjMove::Combine;
    const int a = rng.index(k);
    int b = rng.index(k - 1);
    if (b >= a) ++b;
    log_ratio = log_combine_ratio(state, y, window, hyper, a, b, &proposal);
  }
  if (std::log(rng.uniform()) < log_ratio) {
    state = std::move(proposal);
    update_labels(state, y, rng);
    out.accepted = true;
  }
  return out;
}

NocovSampler::NocovSampler(std::vector<double> y, Hyperparams hyper, WindowPolicy policy, McmcSchedule schedule)
    : y_(std::move(y)),
      hyper_(std::move(hyper)),
      policy_(std::move(policy)),
      schedule_(schedule),
      rng_(schedule.seed),
      window_(make_window(hyper_, policy_, hyper_.fixed_rho ? *hyper_.fixed_rho : rho_offset(hyper_, hyper_.nu.support[0]) + 1.0,
                          hyper_.nu.support[0])),
      rho_scale_(0.5, 0.234, schedule.adapt_window),
      mu_scale_(0.05 * policy_.rect[0].width(), 0.234, schedule.adapt_window) {
  hyper_.validate();
  schedule_.validate();
  if (policy_.rect.size() != 1) throw ConfigError("the mixture model needs a one-dimensional window");
  for (double v : y_) {
    if (!std::isfinite(v)) throw DataError("observations must be finite");
  }

  const SpectralModel& m = window_.model();
  state_.rho = m.rho;
  state_.nu = m.nu;
  state_.mu = {policy_.rect[0].center()};
  state_.sigma2 = {hyper_.b0 / std::max(hyper_.a0 - 1.0, 1.0)};
  if (!y_.empty()) {
    double mean = 0.0;
    for (double v : y_) mean += v;
    mean /= static_cast<double>(y_.size());
    double var = 0.0;
    for (double v : y_) var += (v - mean) * (v - mean);
    var /= static_cast<double>(y_.size());
    if (policy_.rect[0].contains(mean)) state_.mu[0] = mean;
    if (var > 0.0) state_.sigma2[0] = var;
  }
  state_.w = {1.0};
  state_.labels.assign(y_.size(), 0);

  trace_.kind = ModelKind::NoCovariates;
  trace_.n_items = static_cast<int>(y_.size());
  trace_.window = policy_.rect;
  trace_.truncation = policy_.truncation;
}

void NocovSampler::set_state(MixtureState state) {
  window_ = make_window(hyper_, policy_, state.rho, state.nu);
  state_ = std::move(state);
}

void NocovSampler::sweep(bool adapt) {
  update_labels(state_, y_, rng_);
  update_weights(state_, hyper_, rng_);
  update_variances(state_, y_, hyper_, rng_);
  const int k_before = state_.k();
  const int moved = update_means(state_, y_, window_, mu_scale_, adapt, rng_);
  auto& mean_stats = trace_.moves["mean"];
  mean_stats.attempted += k_before;
  mean_stats.accepted += moved;
  if (!hyper_.fixed_rho) {
    trace_.moves["rho"].add(update_rho(state_.mu, state_.rho, state_.nu, window_, hyper_, policy_, rho_scale_, adapt, rng_));
  }
  if (!hyper_.nu.is_fixed()) {
    trace_.moves["nu"].add(update_nu(state_.mu, state_.rho, state_.nu, window_, hyper_, policy_, rng_));
  }
  const RjOutcome rj = rj_step(state_, y_, window_, hyper_, rng_);
  trace_.moves[rj.move == RjMove::Split ? "split" : "combine"].add(rj.accepted);
}

Trace NocovSampler::run() {
  for (long it = 0; it < schedule_.n_burnin; ++it) sweep(true);
  const long total = schedule_.n_keep * schedule_.n_thin;
  for (long it = 1; it <= total; ++it) {
    sweep(false);
    if (it % schedule_.n_thin == 0) trace_.record(schedule_.n_burnin + it, state_, rho_scale_.scale());
  }
  return trace_;
}

Trace run_chain(std::span<const double> y, const Hyperparams& hyper, const McmcSchedule& schedule,
                const WindowPolicy& policy) {
  NocovSampler sampler(std::vector<double>(y.begin(), y.end()), hyper, policy, schedule);
  return sampler.run();
}

}  // namespace dppmix
