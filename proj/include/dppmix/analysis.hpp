#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dppmix/sampler_cov.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

// Relabels so that groups are numbered 1, 2, ... in order of first appearance.
std::vector<int> canonical_labels(std::span<const int> labels);

struct PartitionEstimate {
  std::vector<int> labels;  // contiguous from 1
  int n_groups = 0;
  double loss = 0.0;        // expected Binder loss
  std::size_t sample = 0;   // index of the kept sample that attains it
};

// Expected Binder loss (equal costs) of a partition against co-clustering
// probabilities taken from the trace.
double binder_loss(const Trace& trace, std::span<const int> labels);

// Visited partition with the smallest expected Binder loss; ties go to the
// earliest kept sample.
PartitionEstimate binder_partition(const Trace& trace);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct LpmlResult {
  double lpml = 0.0;
  std::vector<double> log_cpo;
  std::vector<int> flagged;  // items with a zero ordinate in some kept sample
};

// Mixture: ordinate is the full mixture density at the kept state.
// Allocated: ordinate is the density of the component the item is allocated to.
enum class Ordinate { Mixture, Allocated };

LpmlResult lpml(const Trace& trace, std::span<const double> y, Ordinate ordinate = Ordinate::Mixture);
LpmlResult lpml(const Trace& trace, const CovData& data, Ordinate ordinate = Ordinate::Mixture);

// Marginal: y_hat_i averages sum_k w_k mean_k over kept states.
// Allocated: y_hat_i averages sum_k P(s_i = k | y_i, state) mean_k, the
// expected mean of the component item i belongs to.
enum class Prediction { Marginal, Allocated };

// Sum of squared errors against the posterior predictive mean.
double mse(const Trace& trace, std::span<const double> y, Prediction prediction = Prediction::Marginal);
double mse(const Trace& trace, const CovData& data, Prediction prediction = Prediction::Marginal);
inline double root_mse(double sum_of_squares) { return std::sqrt(sum_of_squares); }

struct PredictiveBand {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> lower;  // 5% pointwise quantile
  std::vector<double> upper;  // 95% pointwise quantile
};

PredictiveBand predictive_density(const Trace& trace, std::span<const double> grid);
// Covariate model: conditional density of y at covariate vector x.
PredictiveBand predictive_density(const Trace& trace, std::span<const double> grid, const Eigen::VectorXd& x);

struct KSummary {
  std::vector<double> pmf;  // pmf[k] = P(K = k), k = 0..max
  double mean = 0.0;
  double variance = 0.0;
  int mode = 0;
};

KSummary k_summary(const Trace& trace);
KSummary k_summary(std::span<const int> ks);

// Type-7 empirical quantile of unsorted values.
double quantile(std::vector<double> values, double q);

// Mixture density at y for one kept state.
double mixture_density(const MixtureState& state, double y);
double mixture_density(const CovMixtureState& state, double y, const Eigen::VectorXd& x);

}  // namespace dppmix
