#pragma once

#include <map>
#include <string>
#include <vector>

#include "dppmix/model.hpp"

namespace dppmix {

enum class ModelKind { NoCovariates, Covariates };

struct MoveStats {
  long accepted = 0;
  long attempted = 0;
  double rate() const { return attempted > 0 ? static_cast<double>(accepted) / static_cast<double>(attempted) : 0.0; }
  void add(bool ok) {
    ++attempted;
    if (ok) ++accepted;
  }
};

// Kept chain history plus running co-clustering counts.
struct Trace {
  ModelKind kind = ModelKind::NoCovariates;
  int n_items = 0;
  std::vector<long> iterations;
  std::vector<MixtureState> states;         // NoCovariates
  std::vector<CovMixtureState> cov_states;  // Covariates
  std::vector<double> rho_scales;           // rho proposal scale at each kept sample
  std::vector<long> co_clustering;          // n x n, row-major
  std::map<std::string, MoveStats> moves;
  Rectangle window;
  int truncation = 0;

  std::size_t size() const { return kind == ModelKind::NoCovariates ? states.size() : cov_states.size(); }
  int k_at(std::size_t i) const;
  const std::vector<int>& labels_at(std::size_t i) const;
  double rho_at(std::size_t i) const;
  double nu_at(std::size_t i) const;

  void record(long iteration, const MixtureState& state, double rho_scale);
  void record(long iteration, const CovMixtureState& state, double rho_scale);
  // Appends another chain's samples (same model and data).
  void merge(const Trace& other);

  double co_clustering_prob(int i, int j) const;

 private:
  void accumulate(const std::vector<int>& labels);
};

}  // namespace dppmix
