#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dppmix/random.hpp"
#include "dppmix/spectral.hpp"

namespace dppmix {

// Prior on nu: a single value (fixed) or a uniform distribution on a finite support.
struct NuPrior {
  std::vector<double> support{2.0};

  static NuPrior fixed(double nu) { return NuPrior{{nu}}; }
  static NuPrior discrete(std::vector<double> values) { return NuPrior{std::move(values)}; }
  bool is_fixed() const { return support.size() == 1; }
};

// Split/combine acceptance for the model without covariates. Exact includes
// the 1/|R| location Jacobian and the 2/(K+1) pair-selection factor; Published
// uses the supplement's q formula as printed (no 1/|R|, factor 1/(K+1)^2),
// which targets a different posterior and is kept only for comparison.
enum class RjAcceptance { Exact, Published };

// Hyperparameters shared by both mixture models.
//
// rho | nu = M(s, eps, nu) + rho0 with rho0 ~ gamma(a_rho, b_rho) unless
// fixed_rho is set. Non-PES spectral families require a fixed rho.
struct Hyperparams {
  double delta = 1.0;  // Dirichlet concentration
  double a0 = 3.0;     // inverse-gamma shape for sigma^2
  double b0 = 3.0;     // inverse-gamma rate
  double a_rho = 1.0;
  double b_rho = 1.0;
  double epsilon = 0.05;
  double s = 0.5;
  NuPrior nu;
  std::optional<double> fixed_rho;
  SpectralFamily family = SpectralFamily::PowerExponential;
  double alpha = 0.1;  // scale for Whittle-Matern / Cauchy
  RjAcceptance rj_acceptance = RjAcceptance::Exact;

  // Throws ConfigError listing the first invariant violation.
  void validate() const;
  SpectralModel spectral_model(double rho, double nu) const;
};

// Lower bound of the rho support for a given nu.
double rho_offset(const Hyperparams& hyper, double nu);

// Gamma(a_rho, b_rho) log density of rho - offset; -inf at or below the offset.
double log_prior_rho(double rho, double nu, const Hyperparams& hyper);

struct MixtureState {
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<double> w;
  std::vector<int> labels;  // 0-based component index per item
  double rho = 1.0;
  double nu = 2.0;

  int k() const { return static_cast<int>(mu.size()); }
  bool operator==(const MixtureState&) const = default;
};

struct CovHyperparams {
  double g_scale = 100.0;  // Sigma0 = g_scale (X^T X)^{-1}
  Eigen::VectorXd beta0;
  Eigen::VectorXd gamma0;
  Eigen::MatrixXd lambda0;
  Eigen::MatrixXd sigma0;  // filled by finalize()
  // Auxiliary normal / inverse-gamma model for split proposals.
  Eigen::MatrixXd aux_gamma0;  // (p+1) x (p+1)
  double aux_xi0 = 3.0;
  double aux_nu0 = 3.0;
  double zeta = 0.1;  // random-walk variance for beta

  // Defaults for dimension p: beta0 = gamma0 = 0, Lambda0 = I, Gamma0 = 10 I,
  // (xi0, nu0) = (a0, b0).
  static CovHyperparams defaults(int p, const Hyperparams& base);
  // Compute Sigma0 from the design matrix; throws DataError if X^T X is singular.
  void finalize(const Eigen::MatrixXd& design);
  void validate(int p) const;
};

struct CovMixtureState {
  std::vector<double> mu;
  std::vector<double> sigma2;
  std::vector<Eigen::VectorXd> gamma;
  std::vector<Eigen::VectorXd> beta;  // beta[0] is identically zero
  std::vector<int> labels;
  double rho = 1.0;
  double nu = 2.0;

  int k() const { return static_cast<int>(mu.size()); }
};

bool operator==(const CovMixtureState& a, const CovMixtureState& b);

struct Violation {
  std::string code;
  std::string message;
};

// Checks every state invariant; an empty result means the state is valid.
std::vector<Violation> validate_state(const MixtureState& state, const Hyperparams& hyper,
                                      const DppWindow& window, int n_items);
std::vector<Violation> validate_state(const CovMixtureState& state, const Hyperparams& hyper,
                                      const DppWindow& window, int n_items);

// Draws (rho, nu), K, weights and variances from the prior; labels from w.
// Locations are uniform on the window (a valid starting configuration, not an
// exact DPP draw).
MixtureState sample_prior_state(const Hyperparams& hyper, const Rectangle& rect, int truncation,
                                int n_items, Rng& rng);

// Exact text form (shortest round-trip decimal) of a state.
std::string serialize(const MixtureState& state);
std::string serialize(const CovMixtureState& state);
MixtureState deserialize_mixture_state(std::string_view text);
CovMixtureState deserialize_cov_state(std::string_view text);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

}  // namespace dppmix
