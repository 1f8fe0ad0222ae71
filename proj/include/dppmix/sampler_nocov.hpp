#pragma once

#include <span>
#include <utility>
#include <vector>

#include "dppmix/mcmc.hpp"
#include "dppmix/model.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

// (weight, location, variance) of one mixture component.
struct Component {
  double w = 1.0;
  double mu = 0.0;
  double sigma2 = 1.0;
};

// Auxiliary split variables: a, b ~ Beta(1,1), r ~ Beta(2,2).
struct SplitVariables {
  double a = 0.5;
  double b = 0.5;
  double r = 0.5;
};

// Moment-matching split. The first child always has the smaller location.
std::pair<Component, Component> split_component(const Component& parent, const SplitVariables& u);

struct MergeResult {
  Component merged;
  SplitVariables u;  // split variables that map `merged` back onto the pair
};

// Moment-matching merge of two components (order irrelevant).
MergeResult combine_components(const Component& first, const Component& second);

// log |det J| of the split map (w, mu, sigma2, a, b, r) -> children.
double split_log_jacobian(const Component& parent, double w_first, double w_second, double r);

// sum_i log sum_k w_k N(y_i; mu_k, sigma2_k).
double mixture_log_likelihood(const MixtureState& state, std::span<const double> y);

void update_labels(MixtureState& state, std::span<const double> y, Rng& rng);
void update_weights(MixtureState& state, const Hyperparams& hyper, Rng& rng);
void update_variances(MixtureState& state, std::span<const double> y, const Hyperparams& hyper, Rng& rng);
// Returns the number of accepted location moves.
int update_means(MixtureState& state, std::span<const double> y, const DppWindow& window, AdaptiveScale& scale,
                 bool adapt, Rng& rng);

// Log acceptance ratio of splitting component j with variables u. When
// `proposed` is non-null it receives the proposed state (children at j and K).
// -inf when a child location leaves R.
double log_split_ratio(const MixtureState& state, std::span<const double> y, const DppWindow& window,
                       const Hyperparams& hyper, int j, const SplitVariables& u, MixtureState* proposed = nullptr);

// Log acceptance ratio of merging components a and b (the reciprocal of the
// matching split ratio). The merged component takes index min(a, b).
double log_combine_ratio(const MixtureState& state, std::span<const double> y, const DppWindow& window,
                         const Hyperparams& hyper, int a, int b, MixtureState* proposed = nullptr);

enum class RjMove { Split, Combine };

struct RjOutcome {
  RjMove move = RjMove::Split;
  bool accepted = false;
};

// One split/combine proposal. Accepted moves are followed by a full label refresh.
RjOutcome rj_step(MixtureState& state, std::span<const double> y, const DppWindow& window, const Hyperparams& hyper,
                  Rng& rng);

// Gibbs sampler with reversible-jump moves for the mixture without covariates.
// An empty dataset runs the chain under the prior.
class NocovSampler {
 public:
  NocovSampler(std::vector<double> y, Hyperparams hyper, WindowPolicy policy, McmcSchedule schedule);

  // labels -> weights -> variances -> means -> (rho, nu) -> split/combine
  void sweep(bool adapt);
  Trace run();

  const MixtureState& state() const { return state_; }
  // Replaces the state and rebuilds the window for its (rho, nu).
  void set_state(MixtureState state);
  const DppWindow& window() const { return window_; }
  const Trace& trace() const { return trace_; }
  double rho_scale() const { return rho_scale_.scale(); }
  double mu_scale() const { return mu_scale_.scale(); }
  Rng& rng() { return rng_; }

 private:
  std::vector<double> y_;
  Hyperparams hyper_;
  WindowPolicy policy_;
  McmcSchedule schedule_;
  Rng rng_;
  MixtureState state_;
  DppWindow window_;
  AdaptiveScale rho_scale_;
  AdaptiveScale mu_scale_;
  Trace trace_;
};

Trace run_chain(std::span<const double> y, const Hyperparams& hyper, const McmcSchedule& schedule,
                const WindowPolicy& policy);

}  // namespace dppmix
