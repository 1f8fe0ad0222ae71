#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dppmix/mcmc.hpp"
#include "dppmix/model.hpp"
#include "dppmix/trace.hpp"

namespace dppmix {

// Responses y (n) and covariates x (n x p) shared by the gating and the
// regression parts of the model.
struct CovData {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(x.cols()); }
  void validate() const;
};

// Flat drops the Gaussian response term so the chain targets the prior
// while still using the covariates in the gating.
enum class Likelihood { Data, Flat };

Eigen::VectorXd gating_log_weights(const std::vector<Eigen::VectorXd>& beta, const Eigen::VectorXd& x);
Eigen::VectorXd gating_weights(const std::vector<Eigen::VectorXd>& beta, const Eigen::VectorXd& x);

// Normal / inverse-gamma regression posterior: coef | sigma2 ~ N(mean, sigma2 * cov),
// sigma2 ~ inv-gamma(shape, rate).
struct NigPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double shape = 1.0;
  double rate = 1.0;
};

NigPosterior nig_posterior(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                           const Eigen::VectorXd& prior_mean, const Eigen::MatrixXd& prior_cov, double shape,
                           double rate);
double log_nig_density(const NigPosterior& post, const Eigen::VectorXd& coef, double sigma2);
void draw_nig(const NigPosterior& post, Rng& rng, Eigen::VectorXd& coef, double& sigma2);

// Log joint density of (y, labels, component parameters, locations) at fixed
// rho, up to terms that do not depend on K or the component parameters.
double log_cov_target(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                      const CovHyperparams& cov, const Hyperparams& hyper, Likelihood lik = Likelihood::Data);

void update_labels_cov(CovMixtureState& state, const CovData& data, Rng& rng, Likelihood lik = Likelihood::Data);
void update_gamma_sigma(CovMixtureState& state, const CovData& data, const CovHyperparams& cov,
                        const Hyperparams& hyper, Rng& rng, Likelihood lik = Likelihood::Data);
// Random-walk MH on each non-reference gating vector; returns accepted count.
int update_beta(CovMixtureState& state, const CovData& data, const CovHyperparams& cov, Rng& rng);
int update_means_cov(CovMixtureState& state, const CovData& data, const DppWindow& window, AdaptiveScale& scale,
                     bool adapt, Rng& rng, Likelihood lik = Likelihood::Data);

// Gaussian approximation to the gating conditional of a new component:
// maximizes sum_i [z_i b'x_i - log(exp(b'x_i) + exp(log_rest_i))] + log N(b; beta0, sigma0)
// with z_i = in_new[i], and returns the mode and inverse negative Hessian.
struct BetaProposal {
  Eigen::VectorXd mode;
  Eigen::MatrixXd cov;
};

BetaProposal beta_proposal(const Eigen::MatrixXd& x, const std::vector<char>& in_new,
                           const Eigen::VectorXd& log_rest, const Eigen::VectorXd& beta0,
                           const Eigen::MatrixXd& sigma0);

// Parameters of a component created by a split together with the items it takes.
struct SplitProposal {
  int j = 0;        // component being split (index before insertion)
  int position = 1; // index of the new component after insertion, in [1, K]
  std::vector<int> moved;
  double mu = 0.0;
  Eigen::VectorXd gamma;
  double sigma2 = 1.0;
  Eigen::VectorXd beta;
};

// Probability of proposing `moved` as the items leaving component j: a mixture
// of independent fair coins and a uniform cut of the items sorted by the
// response or by one covariate (either side may leave).
double log_bipartition_probability(const CovMixtureState& state, const CovData& data, int j,
                                   const std::vector<int>& moved);
std::vector<int> draw_bipartition(const CovMixtureState& state, const CovData& data, int j, Rng& rng);

// Applies a split without evaluating it.
CovMixtureState apply_split(const CovMixtureState& state, const SplitProposal& split);

// Log proposal density of the new component's (mu, gamma, sigma2, beta) given
// the pre-split state and the moved items.
double log_split_proposal_density(const CovMixtureState& state, const CovData& data, const CovHyperparams& cov,
                                  const SplitProposal& split);

double log_split_ratio_cov(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                           const CovHyperparams& cov, const Hyperparams& hyper, const SplitProposal& split,
                           CovMixtureState* proposed = nullptr, Likelihood lik = Likelihood::Data);

// Deletes component j1 (never the reference) and hands its items to j2.
double log_combine_ratio_cov(const CovMixtureState& state, const CovData& data, const DppWindow& window,
                             const CovHyperparams& cov, const Hyperparams& hyper, int j1, int j2,
                             CovMixtureState* proposed = nullptr, Likelihood lik = Likelihood::Data);

struct CovRjOutcome {
  bool split = true;
  bool accepted = false;
};

CovRjOutcome rj_step_cov(CovMixtureState& state, const CovData& data, const DppWindow& window,
                         const CovHyperparams& cov, const Hyperparams& hyper, Rng& rng,
                         Likelihood lik = Likelihood::Data);

class CovSampler {
 public:
  CovSampler(CovData data, Hyperparams hyper, CovHyperparams cov, WindowPolicy policy, McmcSchedule schedule,
             Likelihood lik = Likelihood::Data);

  // labels -> (gamma, sigma2) -> beta -> means -> rho -> split/combine
  void sweep(bool adapt);
  Trace run();

  const CovMixtureState& state() const { return state_; }
  void set_state(CovMixtureState state);
  const DppWindow& window() const { return window_; }
  const CovHyperparams& cov_hyper() const { return cov_; }
  const Trace& trace() const { return trace_; }
  Rng& rng() { return rng_; }

 private:
  CovData data_;
  Hyperparams hyper_;
  CovHyperparams cov_;
  WindowPolicy policy_;
  McmcSchedule schedule_;
  Likelihood lik_;
  Rng rng_;
  CovMixtureState state_;
  DppWindow window_;
  AdaptiveScale rho_scale_;
  AdaptiveScale mu_scale_;
  Trace trace_;
};

}  // namespace dppmix
