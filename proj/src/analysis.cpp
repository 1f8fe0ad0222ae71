#include "dppmix/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "dppmix/densities.hpp"
#include "dppmix/errors.hpp"

namespace dppmix {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t at(int i) { return static_cast<std::size_t>(i); }

void require_samples(const Trace& trace, std::size_t minimum) {
  if (trace.size() < minimum) throw DataError("trace has too few kept samples");
}

double log_mixture_density(const MixtureState& state, double y) {
  std::vector<double> terms(at(state.k()));
  for (int k = 0; k < state.k(); ++k) {
    terms[at(k)] = std::log(state.w[at(k)]) + log_normal_pdf(y, state.mu[at(k)], state.sigma2[at(k)]);
  }
  return log_sum_exp(terms);
}

double log_mixture_density(const CovMixtureState& state, double y, const Eigen::VectorXd& x) {
  const Eigen::VectorXd lw = gating_log_weights(state.beta, x);
  std::vector<double> terms(at(state.k()));
  for (int k = 0; k < state.k(); ++k) {
    terms[at(k)] = lw(k) + log_normal_pdf(y, state.mu[at(k)] + x.dot(state.gamma[at(k)]), state.sigma2[at(k)]);
  }
  return log_sum_exp(terms);
}

// Harmonic-mean CPO from a per-sample log-ordinate callback.
template <class LogOrdinate>
LpmlResult lpml_impl(const Trace& trace, int n, LogOrdinate&& log_ordinate) {
  require_samples(trace, 2);
  const std::size_t m = trace.size();
  LpmlResult out;
  out.log_cpo.resize(at(n));
  std::vector<double> neg(m);
  for (int i = 0; i < n; ++i) {
    std::size_t used = 0;
    bool flagged = false;
    for (std::size_t s = 0; s < m; ++s) {
      const double lo = log_ordinate(s, i);
      if (lo == kNegInf) {
        flagged = true;
        continue;
      }
      neg[used++] = -lo;
    }
    if (flagged) out.flagged.push_back(i);
    if (used == 0) {
      out.log_cpo[at(i)] = kNegInf;
    } else {
      out.log_cpo[at(i)] =
          std::log(static_cast<double>(used)) - log_sum_exp(std::span<const double>(neg.data(), used));
    }
    out.lpml += out.log_cpo[at(i)];
  }
  return out;
}

template <class Density>
PredictiveBand band_impl(const Trace& trace, std::span<const double> grid, Density&& density) {
  require_samples(trace, 1);
  if (grid.empty()) throw ConfigError("predictive grid is empty");
  PredictiveBand out;
  out.grid.assign(grid.begin(), grid.end());
  const std::size_t m = trace.size();
  std::vector<double> values(m);
  for (double t : grid) {
    double sum = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      values[s] = density(s, t);
      sum += values[s];
    }
    out.mean.push_back(sum / static_cast<double>(m));
    out.lower.push_back(quantile(values, 0.05));
    out.upper.push_back(quantile(values, 0.95));
  }
  return out;
}

}  // namespace

std::vector<int> canonical_labels(std::span<const int> labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()) + 1);
    out.push_back(it->second);
  }
  return out;
}

double binder_loss(const Trace& trace, std::span<const int> labels) {
  const int n = trace.n_items;
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = trace.co_clustering_prob(i, j);
      loss += labels[at(i)] == labels[at(j)] ? 1.0 - p : p;
    }
  }
  return loss;
}

PartitionEstimate binder_partition(const Trace& trace) {
  require_samples(trace, 1);
  PartitionEstimate best;
  best.loss = std::numeric_limits<double>::infinity();
  std::map<std::vector<int>, bool> seen;
  for (std::size_t s = 0; s < trace.size(); ++s) {
    std::vector<int> labels = canonical_labels(trace.labels_at(s));
    if (!seen.emplace(labels, true).second) continue;
    const double loss = binder_loss(trace, labels);
    if (loss < best.loss) {
      best.loss = loss;
      best.sample = s;
      best.n_groups = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
      best.labels = std::move(labels);
    }
  }
  return best;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DomainError("partitions must label the same items");
  const auto ca = canonical_labels(a);
  const auto cb = canonical_labels(b);
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows;
  std::map<int, double> cols;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    table[{ca[i], cb[i]}] += 1.0;
    rows[ca[i]] += 1.0;
    cols[cb[i]] += 1.0;
  }
  auto pairs = [](double x) { return 0.5 * x * (x - 1.0); };
  double index = 0.0;
  for (const auto& [key, c] : table) index += pairs(c);
  double sum_rows = 0.0;
  for (const auto& [key, c] : rows) sum_rows += pairs(c);
  double sum_cols = 0.0;
  for (const auto& [key, c] : cols) sum_cols += pairs(c);
  const double total = pairs(static_cast<double>(ca.size()));
  const double expected = total > 0.0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

LpmlResult lpml(const Trace& trace, std::span<const double> y, Ordinate ordinate) {
  return lpml_impl(trace, static_cast<int>(y.size()), [&](std::size_t s, int i) {
    const MixtureState& st = trace.states[s];
    if (ordinate == Ordinate::Mixture) return log_mixture_density(st, y[at(i)]);
    const int k = st.labels[at(i)];
    return log_normal_pdf(y[at(i)], st.mu[at(k)], st.sigma2[at(k)]);
  });
}

LpmlResult lpml(const Trace& trace, const CovData& data, Ordinate ordinate) {
  return lpml_impl(trace, data.n(), [&](std::size_t s, int i) {
    const CovMixtureState& st = trace.cov_states[s];
    const Eigen::VectorXd x = data.x.row(i).transpose();
    if (ordinate == Ordinate::Mixture) return log_mixture_density(st, data.y(i), x);
    const int k = st.labels[at(i)];
    return log_normal_pdf(data.y(i), st.mu[at(k)] + x.dot(st.gamma[at(k)]), st.sigma2[at(k)]);
  });
}

double mse(const Trace& trace, std::span<const double> y, Prediction prediction) {
  require_samples(trace, 1);
  const double m = static_cast<double>(trace.size());
  double out = 0.0;
  std::vector<double> lw;
  for (double v : y) {
    double fit = 0.0;
    for (const auto& st : trace.states) {
      const int k = st.k();
      lw.resize(at(k));
      for (int j = 0; j < k; ++j) {
        lw[at(j)] = std::log(st.w[at(j)]);
        if (prediction == Prediction::Allocated) lw[at(j)] += log_normal_pdf(v, st.mu[at(j)], st.sigma2[at(j)]);
      }
      const double norm = log_sum_exp(lw);
      for (int j = 0; j < k; ++j) fit += std::exp(lw[at(j)] - norm) * st.mu[at(j)];
    }
    fit /= m;
    out += (v - fit) * (v - fit);
  }
  return out;
}

double mse(const Trace& trace, const CovData& data, Prediction prediction) {
  require_samples(trace, 1);
  const double m = static_cast<double>(trace.size());
  double out = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd x = data.x.row(i).transpose();
    double fit = 0.0;
    for (const auto& st : trace.cov_states) {
      Eigen::VectorXd lw = gating_log_weights(st.beta, x);
      for (int j = 0; j < st.k(); ++j) {
        if (prediction == Prediction::Allocated) {
          lw(j) += log_normal_pdf(data.y(i), st.mu[at(j)] + x.dot(st.gamma[at(j)]), st.sigma2[at(j)]);
        }
      }
      const double top = lw.maxCoeff();
      const Eigen::VectorXd r = (lw.array() - top).exp();
      const double total = r.sum();
      for (int j = 0; j < st.k(); ++j) fit += r(j) / total * (st.mu[at(j)] + x.dot(st.gamma[at(j)]));
    }
    fit /= m;
    out += (data.y(i) - fit) * (data.y(i) - fit);
  }
  return out;
}

double mixture_density(const MixtureState& state, double y) { return std::exp(log_mixture_density(state, y)); }

double mixture_density(const CovMixtureState& state, double y, const Eigen::VectorXd& x) {
  return std::exp(log_mixture_density(state, y, x));
}

PredictiveBand predictive_density(const Trace& trace, std::span<const double> grid) {
  if (trace.kind != ModelKind::NoCovariates) throw DomainError("covariate traces need a covariate vector");
  return band_impl(trace, grid, [&](std::size_t s, double t) { return mixture_density(trace.states[s], t); });
}

PredictiveBand predictive_density(const Trace& trace, std::span<const double> grid, const Eigen::VectorXd& x) {
  if (trace.kind != ModelKind::Covariates) throw DomainError("covariate vector given for a trace without covariates");
  return band_impl(trace, grid,
                   [&](std::size_t s, double t) { return mixture_density(trace.cov_states[s], t, x); });
}

KSummary k_summary(std::span<const int> ks) {
  if (ks.empty()) throw DataError("no kept samples");
  KSummary out;
  const int top = *std::max_element(ks.begin(), ks.end());
  out.pmf.assign(at(top + 1), 0.0);
  const double m = static_cast<double>(ks.size());
  for (int k : ks) out.pmf[at(k)] += 1.0 / m;
  double sum = 0.0;
  for (int k : ks) sum += k;
  out.mean = sum / m;
  double ss = 0.0;
  for (int k : ks) ss += (k - out.mean) * (k - out.mean);
  out.variance = ss / m;
  out.mode = static_cast<int>(std::max_element(out.pmf.begin(), out.pmf.end()) - out.pmf.begin());
  return out;
}

KSummary k_summary(const Trace& trace) {
  std::vector<int> ks(trace.size());
  for (std::size_t s = 0; s < trace.size(); ++s) ks[s] = trace.k_at(s);
  return k_summary(ks);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DomainError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

}  // namespace dppmix
