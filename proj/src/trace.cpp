#include "dppmix/trace.hpp"

#include "dppmix/errors.hpp"

namespace dppmix {

int Trace::k_at(std::size_t i) const {
  return kind == ModelKind::NoCovariates ? states[i].k() : cov_states[i].k();
}

const std::vector<int>& Trace::labels_at(std::size_t i) const {
  return kind == ModelKind::NoCovariates ? states[i].labels : cov_states[i].labels;
}

double Trace::rho_at(std::size_t i) const {
  return kind == ModelKind::NoCovariates ? states[i].rho : cov_states[i].rho;
}

double Trace::nu_at(std::size_t i) const { return kind == ModelKind::NoCovariates ? states[i].nu : cov_states[i].nu; }

void Trace::accumulate(const std::vector<int>& labels) {
  const auto n = static_cast<std::size_t>(n_items);
  if (co_clustering.size() != n * n) co_clustering.assign(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    long* row = co_clustering.data() + i * n;
    const int li = labels[i];
    row[i] += 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (labels[j] == li) {
        row[j] += 1;
        co_clustering[j * n + i] += 1;
      }
    }
  }
}

void Trace::record(long iteration, const MixtureState& state, double rho_scale) {
  iterations.push_back(iteration);
  states.push_back(state);
  rho_scales.push_back(rho_scale);
  accumulate(state.labels);
}

void Trace::record(long iteration, const CovMixtureState& state, double rho_scale) {
  iterations.push_back(iteration);
  cov_states.push_back(state);
  rho_scales.push_back(rho_scale);
  accumulate(state.labels);
}

void Trace::merge(const Trace& other) {
  if (other.kind != kind || other.n_items != n_items) throw DataError("cannot merge traces of different shape");
  iterations.insert(iterations.end(), other.iterations.begin(), other.iterations.end());
  states.insert(states.end(), other.states.begin(), other.states.end());
  cov_states.insert(cov_states.end(), other.cov_states.begin(), other.cov_states.end());
  rho_scales.insert(rho_scales.end(), other.rho_scales.begin(), other.rho_scales.end());
  if (co_clustering.empty()) {
    co_clustering = other.co_clustering;
  } else {
    for (std::size_t i = 0; i < co_clustering.size() && i < other.co_clustering.size(); ++i) {
      co_clustering[i] += other.co_clustering[i];
    }
  }
  for (const auto& [name, stats] : other.moves) {
    moves[name].accepted += stats.accepted;
    moves[name].attempted += stats.attempted;
  }
}

double Trace::co_clustering_prob(int i, int j) const {
  const auto m = size();
  if (m == 0) return 0.0;
  return static_cast<double>(co_clustering[static_cast<std::size_t>(i) * static_cast<std::size_t>(n_items) +
                                           static_cast<std::size_t>(j)]) /
         static_cast<double>(m);
}

}  // namespace dppmix
